#include "dyadscreen/zeroshot.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <thread>

#include "dyadscreen/error.h"
#include "dyadscreen/text_format.h"
#include "httplib.h"
#include "json.hpp"

namespace dyadscreen {
namespace {

[[noreturn]] void fail(const std::string& message) {
  throw Error("zeroshot", message);
}

constexpr std::string_view kSystemPrompt =
    "You are an experienced psychiatrist. You will read the transcript of a "
    "primary care visit between a patient and their provider. No training "
    "examples or labels are provided. Estimate the "
    "probability that the patient is at high risk for depression. Output "
    "only a decimal between 0.0 (low risk) and 1.0 (high risk) and nothing "
    "else.";

std::string_view speaker_tag(Role role) {
  return role == Role::kPatient ? "PATIENT" : "PROVIDER";
}

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  static const std::regex kUrl(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    fail("endpoint URL must look like http://host[:port]/path, got '" + url +
         "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

}  // namespace

Prompt build_prompt(const Document& document) {
  Prompt prompt;
  prompt.system = std::string(kSystemPrompt);
  prompt.user = "Transcript:\n";
  for (const auto& segment : document.segments) {
    prompt.user += speaker_tag(segment.speaker);
    prompt.user += ':';
    for (const auto& token : segment.tokens) {
      prompt.user += ' ';
      prompt.user += token;
    }
    prompt.user += '\n';
  }
  prompt.user += "End of transcript.\nRisk score:";
  return prompt;
}

std::string_view status_name(ScoreStatus status) {
  switch (status) {
    case ScoreStatus::kOk:
      return "ok";
    case ScoreStatus::kClamped:
      return "clamped";
    case ScoreStatus::kFailed:
      return "failed";
  }
  return "failed";
}

ScoreStatus parse_status(std::string_view name) {
  if (name == "ok") return ScoreStatus::kOk;
  if (name == "clamped") return ScoreStatus::kClamped;
  if (name == "failed") return ScoreStatus::kFailed;
  fail("unknown score status '" + std::string(name) + "'");
}

ParsedScore parse_score(std::string_view response) {
  static const std::regex kDecimal(R"([-+]?(?:\d+(?:\.\d*)?|\.\d+))");
  std::match_results<std::string_view::const_iterator> m;
  ParsedScore parsed;
  if (!std::regex_search(response.begin(), response.end(), m, kDecimal)) {
    return parsed;
  }
  double value = 0.0;
  if (!parse_double(m.str(), value) || !std::isfinite(value)) return parsed;
  const double clamped = std::clamp(value, 0.0, 1.0);
  parsed.score = clamped;
  if (clamped != value) {
    parsed.status = ScoreStatus::kClamped;
    parsed.raw = value;
  } else {
    parsed.status = ScoreStatus::kOk;
  }
  return parsed;
}

ScoreRun score_documents(std::span<const Document> documents,
                         const CompletionFn& complete,
                         const ScoringOptions& options) {
  if (options.retries < 0) fail("retries must be >= 0");
  ScoreRun run;
  run.records.resize(documents.size());
  std::vector<char> transport_only(documents.size(), 0);

  auto score_one = [&](std::size_t i) {
    ScoreRecord& record = run.records[i];
    record.encounter_id = documents[i].encounter_id;
    const Prompt prompt = build_prompt(documents[i]);
    bool transport_failure = true;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
      std::string reply;
      try {
        reply = complete(prompt);
      } catch (const TransportError& e) {
        record.error = e.what();
        continue;
      }
      transport_failure = false;
      const ParsedScore parsed = parse_score(reply);
      if (parsed.status == ScoreStatus::kFailed) {
        record.error = "no decimal in reply";
        continue;
      }
      record.score = parsed.score;
      record.status = parsed.status;
      record.raw = parsed.raw;
      record.error.clear();
      return;
    }
    record.status = ScoreStatus::kFailed;
    transport_only[i] = transport_failure ? 1 : 0;
  };

  const std::size_t workers = std::min<std::size_t>(
      std::max(1, options.parallelism), std::max<std::size_t>(1, documents.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < documents.size(); ++i) score_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < documents.size(); i = next++) {
          score_one(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const auto& r : run.records) {
    switch (r.status) {
      case ScoreStatus::kOk:
        ++run.ok;
        break;
      case ScoreStatus::kClamped:
        ++run.clamped;
        break;
      case ScoreStatus::kFailed:
        ++run.failed;
        break;
    }
  }
  if (!documents.empty() &&
      std::all_of(transport_only.begin(), transport_only.end(),
                  [](char c) { return c != 0; })) {
    fail("endpoint unreachable for every document: " +
         run.records.front().error);
  }
  return run;
}

std::string api_key_from_env() {
  const char* value = std::getenv(std::string(kApiKeyEnv).c_str());
  return value ? std::string(value) : std::string();
}

std::string completion_request_body(const EndpointConfig& endpoint,
                                    const Prompt& prompt) {
  nlohmann::ordered_json body;
  body["model"] = endpoint.model;
  body["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", prompt.system}},
       {{"role", "user"}, {"content", prompt.user}}});
  body["temperature"] = endpoint.temperature;
  body["n"] = 1;
  return body.dump();
}

std::string completion_content(std::string_view response_body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(response_body);
  } catch (const nlohmann::json::parse_error&) {
    throw TransportError("response is not JSON");
  }
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError("response lacks choices[0].message.content");
  }
}

CompletionFn http_completion(const EndpointConfig& endpoint) {
  const ParsedUrl url = split_url(endpoint.url);
  return [endpoint, url](const Prompt& prompt) -> std::string {
    httplib::Client client(url.origin);
    const auto timeout = std::chrono::duration<double>(endpoint.timeout_seconds);
    client.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers;
    if (!endpoint.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + endpoint.api_key);
    }
    const auto response =
        client.Post(url.path, headers, completion_request_body(endpoint, prompt),
                    "application/json");
    if (!response) {
      throw TransportError("request to " + endpoint.url + " failed: " +
                           httplib::to_string(response.error()));
    }
    if (response->status != 200) {
      throw TransportError("HTTP " + std::to_string(response->status) +
                           " from " + endpoint.url);
    }
    return completion_content(response->body);
  };
}

void write_scores(std::ostream& out, std::span<const ScoreRecord> records) {
  out << "encounter_id,score,status\n";
  for (const auto& r : records) {
    out << csv_escape(r.encounter_id) << ','
        << (r.score ? format_double(*r.score) : std::string()) << ','
        << status_name(r.status) << '\n';
  }
}

void write_scores(const std::filesystem::path& path,
                  std::span<const ScoreRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path.string());
  write_scores(out, records);
}

std::vector<ScoreRecord> read_scores(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      csv_split(line) != std::vector<std::string>{"encounter_id", "score",
                                                  "status"}) {
    fail("score file header must be encounter_id,score,status");
  }
  std::vector<ScoreRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv_split(line);
    const std::string where = " at line " + std::to_string(line_no);
    if (fields.size() != 3) fail("expected 3 fields" + where);
    ScoreRecord r;
    r.encounter_id = fields[0];
    r.status = parse_status(fields[2]);
    if (r.status == ScoreStatus::kFailed) {
      if (!fields[1].empty()) fail("failed record carries a score" + where);
    } else {
      double v = 0.0;
      if (!parse_double(fields[1], v) || !(v >= 0.0 && v <= 1.0)) {
        fail("score must be a number in [0, 1]" + where);
      }
      r.score = v;
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  return read_scores(in);
}

}  // namespace dyadscreen
