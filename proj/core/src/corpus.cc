#include "dyadscreen/corpus.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "dyadscreen/error.h"
#include "dyadscreen/tokenize.h"
#include "json.hpp"

namespace dyadscreen {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw Error("corpus", message);
}

std::string at_line(std::size_t line) {
  return " at line " + std::to_string(line);
}

Encounter parse_record(const std::string& text, std::size_t line) {
  json record;
  try {
    record = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("malformed record" + at_line(line) + ": " + e.what());
  }
  if (!record.is_object()) fail("malformed record" + at_line(line));

  Encounter encounter;
  const auto id = record.find("id");
  if (id == record.end() || !id->is_string() ||
      id->get_ref<const std::string&>().empty()) {
    fail("missing or empty 'id'" + at_line(line));
  }
  encounter.id = id->get<std::string>();

  const auto phq9 = record.find("phq9");
  if (phq9 == record.end() || !phq9->is_number_integer()) {
    fail("missing or non-integer 'phq9'" + at_line(line));
  }
  const auto score = phq9->get<long long>();
  if (score < kPhq9Min || score > kPhq9Max) {
    fail("phq9 " + std::to_string(score) + " outside [0, 27]" +
         at_line(line));
  }
  encounter.phq9 = static_cast<int>(score);

  const auto utterances = record.find("utterances");
  if (utterances == record.end() || !utterances->is_array()) {
    fail("missing 'utterances' array" + at_line(line));
  }
  encounter.utterances.reserve(utterances->size());
  for (const auto& u : *utterances) {
    if (!u.is_object()) fail("malformed utterance" + at_line(line));
    const auto speaker = u.find("speaker");
    const auto words = u.find("text");
    if (speaker == u.end() || !speaker->is_string()) {
      fail("utterance without 'speaker'" + at_line(line));
    }
    if (words == u.end() || !words->is_string()) {
      fail("utterance without 'text'" + at_line(line));
    }
    const auto& name = speaker->get_ref<const std::string&>();
    Utterance utterance;
    try {
      utterance.speaker = parse_role(name);
    } catch (const Error&) {
      fail("unknown speaker '" + name + "'" + at_line(line));
    }
    utterance.text = words->get<std::string>();
    encounter.utterances.push_back(std::move(utterance));
  }
  return encounter;
}

}  // namespace

std::vector<Encounter> parse_corpus(std::istream& in) {
  std::vector<Encounter> corpus;
  std::unordered_set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    Encounter encounter = parse_record(text, line);
    if (!seen.insert(encounter.id).second) {
      fail("duplicate encounter id '" + encounter.id + "'" + at_line(line));
    }
    corpus.push_back(std::move(encounter));
  }
  return corpus;
}

std::vector<Encounter> parse_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  return parse_corpus(in);
}

std::string serialize_encounter(const Encounter& encounter) {
  json utterances = json::array();
  for (const auto& u : encounter.utterances) {
    json item;
    item["speaker"] = std::string(role_name(u.speaker));
    item["text"] = u.text;
    utterances.push_back(std::move(item));
  }
  // Field order follows the published record layout, not json's key sort.
  return "{\"id\":" + json(encounter.id).dump() +
         ",\"phq9\":" + std::to_string(encounter.phq9) +
         ",\"utterances\":" + utterances.dump() + "}";
}

void write_corpus(std::ostream& out, std::span<const Encounter> corpus) {
  for (const auto& encounter : corpus) {
    out << serialize_encounter(encounter) << '\n';
  }
}

void write_corpus(const std::filesystem::path& path,
                  std::span<const Encounter> corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path.string());
  write_corpus(out, corpus);
}

Label label_of(int phq9) {
  return phq9 >= kPhq9Cutoff ? Label::kPositive : Label::kNegative;
}

std::vector<int> labels_of(std::span<const Encounter> corpus) {
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const auto& e : corpus) labels.push_back(static_cast<int>(label_of(e)));
  return labels;
}

bool is_provider(Role role) { return role != Role::kPatient; }

bool includes(SpeakerConfig config, Role role) {
  switch (config) {
    case SpeakerConfig::kPatientOnly:
      return role == Role::kPatient;
    case SpeakerConfig::kProviderOnly:
      return is_provider(role);
    case SpeakerConfig::kCombined:
      return true;
  }
  return false;
}

Document build_document(const Encounter& encounter, SpeakerConfig config,
                        TokenBudget budget) {
  if (budget && *budget == 0) fail("token budget must be >= 1");
  Document doc;
  doc.encounter_id = encounter.id;
  doc.config = config;
  doc.token_budget = budget;
  for (const auto& u : encounter.utterances) {
    if (!includes(config, u.speaker)) continue;
    if (budget && doc.tokens.size() >= *budget) break;
    Segment segment{u.speaker, tokenize(u.text)};
    if (budget) {
      const std::size_t room = *budget - doc.tokens.size();
      if (segment.tokens.size() > room) segment.tokens.resize(room);
    }
    if (segment.tokens.empty()) continue;
    doc.tokens.insert(doc.tokens.end(), segment.tokens.begin(),
                      segment.tokens.end());
    doc.segments.push_back(std::move(segment));
  }
  return doc;
}

std::vector<Document> build_documents(std::span<const Encounter> corpus,
                                      SpeakerConfig config,
                                      TokenBudget budget) {
  std::vector<Document> docs;
  docs.reserve(corpus.size());
  for (const auto& e : corpus) docs.push_back(build_document(e, config, budget));
  return docs;
}

CorpusSummary summarize(std::span<const Encounter> corpus) {
  CorpusSummary summary;
  summary.encounters = corpus.size();
  for (const auto& e : corpus) {
    if (label_of(e) == Label::kPositive) ++summary.positives;
  }
  if (summary.encounters > 0) {
    summary.prevalence = static_cast<double>(summary.positives) /
                         static_cast<double>(summary.encounters);
  }
  return summary;
}

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kPatient:
      return "patient";
    case Role::kDoctor:
      return "doctor";
    case Role::kOther:
      return "other";
  }
  return "other";
}

Role parse_role(std::string_view name) {
  if (name == "patient") return Role::kPatient;
  if (name == "doctor") return Role::kDoctor;
  if (name == "other") return Role::kOther;
  fail("unknown speaker '" + std::string(name) + "'");
}

std::string_view config_name(SpeakerConfig config) {
  switch (config) {
    case SpeakerConfig::kPatientOnly:
      return "patient";
    case SpeakerConfig::kProviderOnly:
      return "provider";
    case SpeakerConfig::kCombined:
      return "combined";
  }
  return "combined";
}

SpeakerConfig parse_config(std::string_view name) {
  if (name == "patient") return SpeakerConfig::kPatientOnly;
  if (name == "provider") return SpeakerConfig::kProviderOnly;
  if (name == "combined") return SpeakerConfig::kCombined;
  fail("unknown speaker config '" + std::string(name) +
       "' (expected patient, provider or combined)");
}

std::string budget_name(TokenBudget budget) {
  return budget ? std::to_string(*budget) : std::string("full");
}

TokenBudget parse_budget(std::string_view text) {
  if (text == "full") return std::nullopt;
  std::size_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
    fail("invalid token budget '" + std::string(text) +
         "' (expected a positive integer or 'full')");
  }
  return value;
}

}  // namespace dyadscreen
