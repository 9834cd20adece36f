#ifndef DYADSCREEN_CORPUS_H_
#define DYADSCREEN_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dyadscreen {

enum class Role { kPatient, kDoctor, kOther };

// Which speakers contribute tokens to a document. Doctor and Other are
// aggregated into the provider side.
enum class SpeakerConfig { kPatientOnly, kProviderOnly, kCombined };

enum class Label { kNegative = 0, kPositive = 1 };

inline constexpr int kPhq9Min = 0;
inline constexpr int kPhq9Max = 27;
inline constexpr int kPhq9Cutoff = 10;

// Token budget for truncation; nullopt means the full transcript.
using TokenBudget = std::optional<std::size_t>;

struct Utterance {
  Role speaker = Role::kPatient;
  std::string text;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Encounter {
  std::string id;
  std::vector<Utterance> utterances;
  int phq9 = 0;

  friend bool operator==(const Encounter&, const Encounter&) = default;
};

// Tokens contributed by one utterance that survived the speaker filter and
// the token budget.
struct Segment {
  Role speaker = Role::kPatient;
  std::vector<std::string> tokens;
};

struct Document {
  std::string encounter_id;
  SpeakerConfig config = SpeakerConfig::kCombined;
  TokenBudget token_budget;
  std::vector<std::string> tokens;
  std::vector<Segment> segments;

  bool empty() const { return tokens.empty(); }
};

struct CorpusSummary {
  std::size_t encounters = 0;
  std::size_t positives = 0;
  double prevalence = 0.0;
};

// Parses transcript JSONL, one encounter per line. Blank lines are skipped
// but still counted for line numbers in error messages.
std::vector<Encounter> parse_corpus(std::istream& in);
std::vector<Encounter> parse_corpus(const std::filesystem::path& path);

std::string serialize_encounter(const Encounter& encounter);
void write_corpus(std::ostream& out, std::span<const Encounter> corpus);
void write_corpus(const std::filesystem::path& path,
                  std::span<const Encounter> corpus);

Label label_of(int phq9);
inline Label label_of(const Encounter& encounter) {
  return label_of(encounter.phq9);
}
std::vector<int> labels_of(std::span<const Encounter> corpus);

// Filters utterances by speaker config, tokenizes in temporal order and keeps
// the first `budget` tokens.
Document build_document(const Encounter& encounter, SpeakerConfig config,
                        TokenBudget budget = std::nullopt);

std::vector<Document> build_documents(std::span<const Encounter> corpus,
                                      SpeakerConfig config,
                                      TokenBudget budget = std::nullopt);

CorpusSummary summarize(std::span<const Encounter> corpus);

bool is_provider(Role role);
bool includes(SpeakerConfig config, Role role);

std::string_view role_name(Role role);
Role parse_role(std::string_view name);
std::string_view config_name(SpeakerConfig config);
SpeakerConfig parse_config(std::string_view name);
std::string budget_name(TokenBudget budget);
TokenBudget parse_budget(std::string_view text);

inline constexpr SpeakerConfig kAllConfigs[] = {SpeakerConfig::kPatientOnly,
                                                SpeakerConfig::kProviderOnly,
                                                SpeakerConfig::kCombined};

}  // namespace dyadscreen

#endif  // DYADSCREEN_CORPUS_H_
