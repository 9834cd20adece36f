#ifndef DYADSCREEN_ZEROSHOT_H_
#define DYADSCREEN_ZEROSHOT_H_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dyadscreen/corpus.h"

namespace dyadscreen {

inline constexpr std::string_view kPromptVersion = "risk-prompt-v1";
inline constexpr std::string_view kApiKeyEnv = "DYADSCREEN_API_KEY";

struct Prompt {
  std::string system;
  std::string user;

  // Both messages as one block, for logging and hashing.
  std::string text() const { return system + "\n\n" + user; }
};

// Fixed zero-shot template: role and output contract in the system
// message, the speaker-tagged transcript in the user message. Contains no
// labeled examples.
Prompt build_prompt(const Document& document);

enum class ScoreStatus { kOk, kClamped, kFailed };

std::string_view status_name(ScoreStatus status);
ScoreStatus parse_status(std::string_view name);

struct ParsedScore {
  std::optional<double> score;
  ScoreStatus status = ScoreStatus::kFailed;
  // The literal as written, kept when clamping changed it.
  std::optional<double> raw;
};

// First decimal literal in the reply, clamped to [0, 1].
ParsedScore parse_score(std::string_view response);

struct ScoreRecord {
  std::string encounter_id;
  std::optional<double> score;
  ScoreStatus status = ScoreStatus::kFailed;
  std::optional<double> raw;
  std::string error;
};

// Thrown by completion functions for network or protocol failures; these
// are retried.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Returns the assistant message content for a prompt.
using CompletionFn = std::function<std::string(const Prompt&)>;

struct ScoringOptions {
  // Extra attempts after the first, per document.
  int retries = 3;
  int parallelism = 4;
};

struct ScoreRun {
  std::vector<ScoreRecord> records;
  std::size_t ok = 0;
  std::size_t clamped = 0;
  std::size_t failed = 0;
};

// One record per document in input order. A document that still fails after
// all retries is recorded as failed. Throws if every document failed on
// transport errors.
ScoreRun score_documents(std::span<const Document> documents,
                         const CompletionFn& complete,
                         const ScoringOptions& options = {});

struct EndpointConfig {
  // Full URL of the chat-completion route, e.g.
  // http://127.0.0.1:8000/v1/chat/completions
  std::string url;
  std::string model;
  // Sent as a bearer token when non-empty.
  std::string api_key;
  double temperature = 0.0;
  double timeout_seconds = 120.0;
};

// Reads the bearer token from DYADSCREEN_API_KEY, if set.
std::string api_key_from_env();

// HTTP chat-completion client (plain http only).
CompletionFn http_completion(const EndpointConfig& endpoint);

// Request body for one prompt.
std::string completion_request_body(const EndpointConfig& endpoint,
                                    const Prompt& prompt);
// choices[0].message.content of a response body; throws TransportError.
std::string completion_content(std::string_view response_body);

inline ScoreRun score_corpus(std::span<const Document> documents,
                             const EndpointConfig& endpoint,
                             const ScoringOptions& options = {}) {
  return score_documents(documents, http_completion(endpoint), options);
}

// Score CSV: encounter_id,score,status (score empty when failed).
void write_scores(std::ostream& out, std::span<const ScoreRecord> records);
void write_scores(const std::filesystem::path& path,
                  std::span<const ScoreRecord> records);
std::vector<ScoreRecord> read_scores(std::istream& in);
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);

}  // namespace dyadscreen

#endif  // DYADSCREEN_ZEROSHOT_H_
