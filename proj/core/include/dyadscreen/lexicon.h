#ifndef DYADSCREEN_LEXICON_H_
#define DYADSCREEN_LEXICON_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyadscreen/corpus.h"
#include "dyadscreen/prefix_trie.h"

namespace dyadscreen {

struct Category {
  int id = 0;
  std::string name;
};

// Category names that enable the tone composite (positive minus negative).
inline constexpr std::string_view kTonePositive = "tone_pos";
inline constexpr std::string_view kToneNegative = "tone_neg";
inline constexpr std::string_view kToneFeature = "tone";

// Word-category dictionary with exact and prefix-wildcard patterns.
// Immutable once built.
class Lexicon {
 public:
  class Builder;

  const std::vector<Category>& categories() const { return categories_; }
  std::size_t size() const { return categories_.size(); }

  // Index into categories() for a declared id or name.
  std::optional<std::size_t> index_of_id(int id) const;
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool has_tone() const { return tone_pos_ && tone_neg_; }

  // Sorted, deduplicated category indices that `token` falls into.
  std::vector<std::size_t> match(std::string_view token) const;

  std::size_t exact_count() const { return exact_.size(); }
  std::size_t prefix_count() const { return prefixes_.size(); }

  // Serializes in the dictionary format accepted by parse_lexicon.
  void write(std::ostream& out) const;

 private:
  std::vector<Category> categories_;
  std::map<std::string, std::vector<int>, std::less<>> exact_;
  // Patterns kept for serialization; the trie answers queries.
  std::map<std::string, std::vector<int>, std::less<>> prefixes_;
  PrefixTrie trie_;
  std::map<int, std::size_t> id_index_;
  std::optional<std::size_t> tone_pos_;
  std::optional<std::size_t> tone_neg_;
};

class Lexicon::Builder {
 public:
  // Throws on duplicate ids or names.
  Builder& add_category(int id, std::string name);
  // `pattern` ending in '*' is a prefix entry. Throws on undeclared ids or a
  // duplicate pattern.
  Builder& add_entry(std::string_view pattern, std::vector<int> ids);
  Lexicon build() &&;

 private:
  Lexicon lexicon_;
};

Lexicon parse_lexicon(std::istream& in);
Lexicon parse_lexicon(const std::filesystem::path& path);

struct FeatureVector {
  std::string encounter_id;
  // Percentages aligned with Lexicon::categories().
  std::vector<double> values;
  std::size_t word_count = 0;
  double tone = 0.0;
};

FeatureVector extract_features(const Document& document,
                               const Lexicon& lexicon);

// Percentage of `value` for category `name`, or nullopt if the lexicon does
// not declare it.
std::optional<double> feature_value(const FeatureVector& features,
                                    const Lexicon& lexicon,
                                    std::string_view name);

// Column names produced by lexicon_feature_row: every category in
// declaration order, then "tone" if the lexicon configures it.
std::vector<std::string> lexicon_feature_names(const Lexicon& lexicon);
std::vector<double> lexicon_feature_row(const FeatureVector& features,
                                        const Lexicon& lexicon);

// The small open lexicon used by the synthetic generator and tests.
Lexicon demo_lexicon();
std::string demo_lexicon_text();

}  // namespace dyadscreen

#endif  // DYADSCREEN_LEXICON_H_
