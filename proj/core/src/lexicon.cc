#include "dyadscreen/lexicon.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "dyadscreen/error.h"

namespace dyadscreen {
namespace {

[[noreturn]] void fail(const std::string& message) {
  throw Error("lexicon", message);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits "left<TAB>right"; falls back to the last run of spaces so
// hand-edited files with space separators still load.
bool split_fields(std::string_view line, std::string_view& left,
                  std::string_view& right) {
  auto pos = line.find('\t');
  if (pos == std::string_view::npos) pos = line.find_last_of(' ');
  if (pos == std::string_view::npos) return false;
  left = trim(line.substr(0, pos));
  right = trim(line.substr(pos + 1));
  return !left.empty() && !right.empty();
}

bool parse_int(std::string_view text, int& value) {
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::optional<std::size_t> Lexicon::index_of_id(int id) const {
  const auto it = id_index_.find(id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Lexicon::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> Lexicon::match(std::string_view token) const {
  std::vector<std::size_t> hits;
  const auto exact = exact_.find(token);
  if (exact != exact_.end()) {
    for (int id : exact->second) hits.push_back(id_index_.at(id));
  }
  trie_.for_each_match(token,
                       [&](int id) { hits.push_back(id_index_.at(id)); });
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

void Lexicon::write(std::ostream& out) const {
  out << "%\n";
  for (const auto& c : categories_) out << c.id << '\t' << c.name << '\n';
  out << "%\n";
  auto emit = [&](const std::string& pattern, const std::vector<int>& ids,
                  bool prefix) {
    out << pattern << (prefix ? "*" : "") << '\t';
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) out << ',';
      out << ids[i];
    }
    out << '\n';
  };
  for (const auto& [pattern, ids] : exact_) emit(pattern, ids, false);
  for (const auto& [pattern, ids] : prefixes_) emit(pattern, ids, true);
}

Lexicon::Builder& Lexicon::Builder::add_category(int id, std::string name) {
  auto& lex = lexicon_;
  if (name.empty()) fail("empty category name for id " + std::to_string(id));
  if (lex.id_index_.count(id) != 0) {
    fail("duplicate category id " + std::to_string(id));
  }
  if (lex.index_of(name)) fail("duplicate category name '" + name + "'");
  const std::size_t index = lex.categories_.size();
  lex.id_index_.emplace(id, index);
  if (name == kTonePositive) lex.tone_pos_ = index;
  if (name == kToneNegative) lex.tone_neg_ = index;
  lex.categories_.push_back({id, std::move(name)});
  return *this;
}

Lexicon::Builder& Lexicon::Builder::add_entry(std::string_view pattern,
                                              std::vector<int> ids) {
  auto& lex = lexicon_;
  if (pattern.empty()) fail("empty pattern");
  if (ids.empty()) fail("pattern '" + std::string(pattern) + "' has no ids");
  for (int id : ids) {
    if (lex.id_index_.count(id) == 0) {
      fail("undeclared category " + std::to_string(id));
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    fail("pattern '" + std::string(pattern) + "' repeats a category id");
  }
  const bool prefix = pattern.back() == '*';
  const std::string key(prefix ? pattern.substr(0, pattern.size() - 1)
                               : pattern);
  if (key.empty()) fail("bare '*' is not a valid pattern");
  auto& table = prefix ? lex.prefixes_ : lex.exact_;
  if (table.count(key) != 0) {
    fail("duplicate pattern '" + std::string(pattern) + "'");
  }
  if (prefix) lex.trie_.insert(key, ids);
  table.emplace(key, std::move(ids));
  return *this;
}

Lexicon Lexicon::Builder::build() && { return std::move(lexicon_); }

Lexicon parse_lexicon(std::istream& in) {
  Lexicon::Builder builder;
  enum class Section { kPreamble, kHeader, kEntries } section =
      Section::kPreamble;
  std::string raw;
  std::size_t line = 0;
  auto where = [&] { return " at line " + std::to_string(line); };
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (text == "%") {
      if (section == Section::kEntries) fail("unexpected '%'" + where());
      section = section == Section::kPreamble ? Section::kHeader
                                              : Section::kEntries;
      continue;
    }
    std::string_view left;
    std::string_view right;
    switch (section) {
      case Section::kPreamble:
        fail("expected '%' header marker" + where());
      case Section::kHeader: {
        int id = 0;
        if (!split_fields(text, left, right) || !parse_int(left, id)) {
          fail("malformed category line" + where());
        }
        try {
          builder.add_category(id, std::string(right));
        } catch (const Error& e) {
          fail(e.message() + where());
        }
        break;
      }
      case Section::kEntries: {
        if (!split_fields(text, left, right)) {
          fail("malformed entry line" + where());
        }
        std::vector<int> ids;
        std::string_view rest = right;
        while (!rest.empty()) {
          const auto comma = rest.find(',');
          const auto field = trim(rest.substr(0, comma));
          int id = 0;
          if (!parse_int(field, id)) {
            fail("malformed category id '" + std::string(field) + "'" +
                 where());
          }
          ids.push_back(id);
          rest = comma == std::string_view::npos ? std::string_view{}
                                                 : rest.substr(comma + 1);
        }
        try {
          builder.add_entry(left, std::move(ids));
        } catch (const Error& e) {
          fail(e.message() + where());
        }
        break;
      }
    }
  }
  if (section != Section::kEntries) fail("missing '%' header section");
  return std::move(builder).build();
}

Lexicon parse_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  return parse_lexicon(in);
}

FeatureVector extract_features(const Document& document,
                               const Lexicon& lexicon) {
  FeatureVector features;
  features.encounter_id = document.encounter_id;
  features.word_count = document.tokens.size();
  std::vector<std::size_t> hits(lexicon.size(), 0);
  for (const auto& token : document.tokens) {
    for (std::size_t index : lexicon.match(token)) ++hits[index];
  }
  features.values.assign(lexicon.size(), 0.0);
  if (features.word_count > 0) {
    const auto total = static_cast<double>(features.word_count);
    for (std::size_t i = 0; i < hits.size(); ++i) {
      features.values[i] = 100.0 * static_cast<double>(hits[i]) / total;
    }
  }
  if (lexicon.has_tone()) {
    features.tone = features.values[*lexicon.index_of(kTonePositive)] -
                    features.values[*lexicon.index_of(kToneNegative)];
  }
  return features;
}

std::optional<double> feature_value(const FeatureVector& features,
                                    const Lexicon& lexicon,
                                    std::string_view name) {
  if (name == kToneFeature && lexicon.has_tone()) return features.tone;
  const auto index = lexicon.index_of(name);
  if (!index) return std::nullopt;
  return features.values[*index];
}

std::vector<std::string> lexicon_feature_names(const Lexicon& lexicon) {
  std::vector<std::string> names;
  for (const auto& c : lexicon.categories()) names.push_back(c.name);
  if (lexicon.has_tone()) names.emplace_back(kToneFeature);
  return names;
}

std::vector<double> lexicon_feature_row(const FeatureVector& features,
                                        const Lexicon& lexicon) {
  std::vector<double> row = features.values;
  if (lexicon.has_tone()) row.push_back(features.tone);
  return row;
}

std::string demo_lexicon_text() {
  return R"(# Demonstration dictionary: a small open category set for tests and
# synthetic experiments. Not a substitute for a validated instrument.
%
1	i
2	we
3	you
4	tone_pos
5	tone_neg
6	sadness
7	cogproc
8	time
9	number
%
i	1
me	1
my	1
mine	1
myself	1
i'm	1
i've	1
i'd	1
i'll	1
we	2
us	2
our	2
ours	2
ourselves	2
we're	2
you	3
your	3
yours	3
yourself	3
you're	3
good	4
great	4
happy	4
nice	4
glad	4
fine	4
better	4
hope	4
hopeful	4
love*	4
enjoy*	4
bad	5
awful	5
terrible	5
afraid	5
upset	5
angry	5
hate*	5
worr*	5
hurt*	5
pain*	5
sad*	6
cry	6
crying	6
cried	6
lonely	6
hopeless	6
grief	6
miserable	6
tired*	6
depress*	6
because	7
maybe	7
think*	7
know*	7
reason*	7
understand*	7
realiz*	7
wonder*	7
now	8
today	8
yesterday	8
tomorrow	8
week*	8
month*	8
year*	8
morning*	8
night*	8
one	9
two	9
three	9
four	9
five	9
six	9
seven	9
ten	9
hundred*	9
)";
}

Lexicon demo_lexicon() {
  std::istringstream in(demo_lexicon_text());
  return parse_lexicon(in);
}

}  // namespace dyadscreen
