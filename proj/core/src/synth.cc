#include "dyadscreen/synth.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "dyadscreen/error.h"
#include "dyadscreen/random.h"
#include "json.hpp"

namespace dyadscreen {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) {
  throw Error("synth", message);
}

const std::map<std::string, std::vector<std::string>>& builtin_words() {
  static const std::map<std::string, std::vector<std::string>> kWords = {
      {"i", {"i", "me", "my", "myself", "i'm"}},
      {"we", {"we", "us", "our", "we're"}},
      {"you", {"you", "your", "yourself", "you're"}},
      {"tone_pos",
       {"good", "great", "happy", "nice", "glad", "better", "loved",
        "enjoying"}},
      {"tone_neg",
       {"bad", "awful", "terrible", "upset", "worried", "hurting", "painful"}},
      {"sadness",
       {"sad", "sadness", "crying", "lonely", "tired", "hopeless",
        "depressed"}},
      {"cogproc",
       {"because", "maybe", "think", "know", "reason", "understand",
        "wondering"}},
      {"time",
       {"now", "today", "yesterday", "week", "months", "year", "morning",
        "night"}},
      {"number", {"one", "two", "three", "four", "five", "ten", "hundred"}},
  };
  return kWords;
}

struct LogNormal {
  double mu = 0.0;
  double sigma = 0.0;
};

LogNormal lognormal_params(const LengthModel& m) {
  const double s2 = std::log1p((m.sd * m.sd) / (m.mean * m.mean));
  return {std::log(m.mean) - 0.5 * s2, std::sqrt(s2)};
}

std::size_t draw_length(Rng& rng, const LogNormal& ln) {
  const double x = std::exp(ln.mu + ln.sigma * rng.normal());
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(x)));
}

const std::vector<std::string>& words_for(const SynthCategory& c) {
  return c.words.empty() ? builtin_category_words(c.name) : c.words;
}

// Draws `n` tokens from per-category rates (remainder: filler) and counts
// category hits.
std::vector<std::string> draw_tokens(Rng& rng, const SynthSpec& spec,
                                     const std::vector<double>& rates,
                                     std::size_t n,
                                     std::vector<std::size_t>& counts) {
  std::vector<std::string> tokens;
  tokens.reserve(n);
  counts.assign(rates.size(), 0);
  const auto& filler = filler_words();
  for (std::size_t t = 0; t < n; ++t) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t chosen = rates.size();
    for (std::size_t c = 0; c < rates.size(); ++c) {
      cumulative += rates[c];
      if (u < cumulative) {
        chosen = c;
        break;
      }
    }
    if (chosen < rates.size()) {
      const auto& words = words_for(spec.categories[chosen]);
      tokens.push_back(words[static_cast<std::size_t>(rng.index(words.size()))]);
      ++counts[chosen];
    } else {
      tokens.push_back(filler[static_cast<std::size_t>(rng.index(filler.size()))]);
    }
  }
  return tokens;
}

std::string utterance_text(const std::vector<std::string>& tokens,
                           std::size_t begin, std::size_t end) {
  std::string text;
  for (std::size_t i = begin; i < end; ++i) {
    if (!text.empty()) text += ' ';
    text += tokens[i];
  }
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] -= 32;
  text += '.';
  return text;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

const std::vector<std::string>& builtin_category_words(const std::string& name) {
  const auto& words = builtin_words();
  const auto it = words.find(name);
  if (it == words.end()) {
    fail("no built-in words for category '" + name +
         "'; supply 'words' in the spec");
  }
  return it->second;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> kFiller = {
      "the",  "a",     "and",      "to",    "of",       "it",     "that",
      "is",   "was",   "so",       "just",  "like",     "have",   "do",
      "get",  "go",    "what",     "well",  "okay",     "yeah",   "um",
      "right", "with", "for",      "on",    "in",       "this",   "there",
      "they", "be",    "can",      "about", "medicine", "blood",  "pressure",
      "check", "take", "back",     "little", "bit",     "really", "lot",
      "been", "some",  "at",       "doctor"};
  return kFiller;
}

SynthSpec default_synth_spec() {
  SynthSpec spec;
  spec.categories = {
      {"i", 0.006, 0.006, 2.0, {}},
      {"we", 0.005, 0.007, 1.0, {}},
      {"you", 0.012, 0.018, 1.0, {}},
      {"tone_pos", 0.020, 0.020, 0.7, {}},
      {"tone_neg", 0.006, 0.005, 1.0, {}},
      {"sadness", 0.002, 0.002, 2.0, {}},
      {"cogproc", 0.030, 0.030, 1.0, {}},
      {"time", 0.020, 0.022, 1.0, {}},
      {"number", 0.010, 0.012, 1.0, {}},
  };
  spec.mirroring = 0.5;
  return spec;
}

void validate(const SynthSpec& spec) {
  if (spec.n_encounters < 1) fail("n_encounters must be >= 1");
  if (!(spec.prevalence > 0.0 && spec.prevalence < 1.0)) {
    fail("prevalence must lie in (0, 1)");
  }
  if (!(spec.mirroring >= 0.0 && spec.mirroring <= 1.0)) {
    fail("mirroring must lie in [0, 1]");
  }
  if (!(spec.other_fraction >= 0.0 && spec.other_fraction <= 1.0)) {
    fail("other_fraction must lie in [0, 1]");
  }
  for (const LengthModel* m : {&spec.patient_tokens, &spec.provider_tokens}) {
    if (!(m->mean > 0.0) || !(m->sd >= 0.0)) {
      fail("token length model needs mean > 0 and sd >= 0");
    }
  }
  if (spec.utterance_min < 1 || spec.utterance_min > spec.utterance_max) {
    fail("utterance length bounds must satisfy 1 <= min <= max");
  }
  double patient_neg = 0.0;
  double patient_pos = 0.0;
  double provider = 0.0;
  for (const auto& c : spec.categories) {
    if (!(c.patient_rate >= 0.0) || !(c.provider_rate >= 0.0) ||
        !(c.multiplier >= 0.0)) {
      fail("category '" + c.name + "' has a negative rate or multiplier");
    }
    if (words_for(c).empty()) fail("category '" + c.name + "' has no words");
    patient_neg += c.patient_rate;
    patient_pos += c.patient_rate * c.multiplier;
    provider += c.provider_rate;
  }
  if (patient_neg > 1.0 || patient_pos > 1.0) {
    fail("patient rates sum above 1 after multipliers");
  }
  if (provider > 1.0) fail("provider rates sum above 1");
}

double expected_patient_share(const SynthSpec& spec) {
  // share = sigmoid(log n_p - log n_d), and log n_p - log n_d is normal.
  const LogNormal p = lognormal_params(spec.patient_tokens);
  const LogNormal d = lognormal_params(spec.provider_tokens);
  const double mu = p.mu - d.mu;
  const double s = std::hypot(p.sigma, d.sigma);
  if (s == 0.0) return sigmoid(mu);
  // Composite Simpson over z in [-10, 10].
  constexpr int kIntervals = 4000;
  constexpr double kLo = -10.0;
  constexpr double kHi = 10.0;
  const double h = (kHi - kLo) / kIntervals;
  double sum = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double z = kLo + h * i;
    const double f = sigmoid(mu + s * z) * std::exp(-0.5 * z * z);
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * f;
  }
  return sum * h / 3.0 / std::sqrt(2.0 * M_PI);
}

std::vector<ExpectedRates> expected_rates(const SynthSpec& spec) {
  validate(spec);
  const double share = expected_patient_share(spec);
  std::vector<ExpectedRates> out;
  for (const auto& c : spec.categories) {
    ExpectedRates e;
    e.category = c.name;
    const double patient_pos = c.patient_rate * c.multiplier;
    e.patient_neg = 100.0 * c.patient_rate;
    e.patient_pos = 100.0 * patient_pos;
    e.provider_neg = 100.0 * c.provider_rate;
    e.provider_pos = 100.0 * ((1.0 - spec.mirroring) * c.provider_rate +
                              spec.mirroring * patient_pos);
    e.combined_neg = share * e.patient_neg + (1.0 - share) * e.provider_neg;
    e.combined_pos = share * e.patient_pos + (1.0 - share) * e.provider_pos;
    out.push_back(std::move(e));
  }
  return out;
}

SynthCorpus generate_corpus(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const std::size_t n = spec.n_encounters;
  const auto n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * spec.prevalence));
  std::vector<char> positive(n, 0);
  std::fill(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  rng.shuffle(std::span<char>(positive));

  const LogNormal patient_len = lognormal_params(spec.patient_tokens);
  const LogNormal provider_len = lognormal_params(spec.provider_tokens);
  const std::size_t width = std::to_string(n).size() < 4 ? 4 : std::to_string(n).size();
  const std::size_t span = spec.utterance_max - spec.utterance_min + 1;

  SynthCorpus out;
  out.truth.expected = expected_rates(spec);
  out.corpus.reserve(n);
  for (std::size_t e = 0; e < n; ++e) {
    const bool pos = positive[e] != 0;
    Encounter enc;
    std::string number = std::to_string(e + 1);
    enc.id = "enc-" + std::string(width - number.size(), '0') + number;
    enc.phq9 = pos ? 10 + static_cast<int>(rng.index(18))
                   : static_cast<int>(rng.index(10));

    const std::size_t np = draw_length(rng, patient_len);
    const std::size_t nd = draw_length(rng, provider_len);
    std::vector<double> patient_rates;
    for (const auto& c : spec.categories) {
      patient_rates.push_back(c.patient_rate * (pos ? c.multiplier : 1.0));
    }
    std::vector<std::size_t> patient_counts;
    const auto patient_tokens =
        draw_tokens(rng, spec, patient_rates, np, patient_counts);

    std::vector<double> provider_rates;
    for (std::size_t c = 0; c < spec.categories.size(); ++c) {
      const double base = spec.categories[c].provider_rate;
      const double realized = static_cast<double>(patient_counts[c]) /
                              static_cast<double>(np);
      provider_rates.push_back(
          pos ? (1.0 - spec.mirroring) * base + spec.mirroring * realized
              : base);
    }
    std::vector<std::size_t> provider_counts;
    const auto provider_tokens =
        draw_tokens(rng, spec, provider_rates, nd, provider_counts);

    // Alternate provider and patient turns until both streams run out.
    std::size_t ip = 0;
    std::size_t id = 0;
    bool provider_turn = true;
    while (ip < np || id < nd) {
      const std::size_t len =
          spec.utterance_min + static_cast<std::size_t>(rng.index(span));
      if (provider_turn && id < nd) {
        const std::size_t end = std::min(nd, id + len);
        const Role role =
            rng.uniform() < spec.other_fraction ? Role::kOther : Role::kDoctor;
        enc.utterances.push_back({role, utterance_text(provider_tokens, id, end)});
        id = end;
      } else if (!provider_turn && ip < np) {
        const std::size_t end = std::min(np, ip + len);
        enc.utterances.push_back(
            {Role::kPatient, utterance_text(patient_tokens, ip, end)});
        ip = end;
      }
      provider_turn = !provider_turn;
    }

    EncounterTruth truth;
    truth.id = enc.id;
    truth.label = pos ? Label::kPositive : Label::kNegative;
    truth.patient_tokens = np;
    truth.provider_tokens = nd;
    for (std::size_t c = 0; c < spec.categories.size(); ++c) {
      truth.patient_rates.push_back(static_cast<double>(patient_counts[c]) /
                                    static_cast<double>(np));
      truth.provider_rates.push_back(static_cast<double>(provider_counts[c]) /
                                     static_cast<double>(nd));
    }
    out.truth.encounters.push_back(std::move(truth));
    out.corpus.push_back(std::move(enc));
  }
  return out;
}

SynthSpec read_synth_spec(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed spec file: ") + e.what());
  }
  if (!doc.is_object()) fail("spec file must hold a JSON object");
  SynthSpec spec = default_synth_spec();
  try {
    spec.n_encounters = doc.value("n_encounters", spec.n_encounters);
    spec.prevalence = doc.value("prevalence", spec.prevalence);
    spec.mirroring = doc.value("mirroring", spec.mirroring);
    spec.seed = doc.value("seed", spec.seed);
    spec.utterance_min = doc.value("utterance_min", spec.utterance_min);
    spec.utterance_max = doc.value("utterance_max", spec.utterance_max);
    spec.other_fraction = doc.value("other_fraction", spec.other_fraction);
    auto read_length = [&](const char* key, LengthModel& m) {
      if (!doc.contains(key)) return;
      m.mean = doc[key].value("mean", m.mean);
      m.sd = doc[key].value("sd", m.sd);
    };
    read_length("patient_tokens", spec.patient_tokens);
    read_length("provider_tokens", spec.provider_tokens);
    if (doc.contains("categories")) {
      spec.categories.clear();
      for (const auto& c : doc.at("categories")) {
        SynthCategory cat;
        cat.name = c.at("name").get<std::string>();
        cat.patient_rate = c.value("patient_rate", 0.0);
        cat.provider_rate = c.value("provider_rate", 0.0);
        cat.multiplier = c.value("multiplier", 1.0);
        cat.words = c.value("words", std::vector<std::string>{});
        spec.categories.push_back(std::move(cat));
      }
    }
    // Multiplier overrides by name on top of the defaults.
    if (doc.contains("multipliers")) {
      for (const auto& [name, value] : doc.at("multipliers").items()) {
        bool found = false;
        for (auto& c : spec.categories) {
          if (c.name == name) {
            c.multiplier = value.get<double>();
            found = true;
          }
        }
        if (!found) fail("multiplier for unknown category '" + name + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(std::string("invalid spec field: ") + e.what());
  }
  validate(spec);
  return spec;
}

SynthSpec read_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  return read_synth_spec(in);
}

void write_synth_spec(std::ostream& out, const SynthSpec& spec) {
  ordered_json doc;
  doc["n_encounters"] = spec.n_encounters;
  doc["prevalence"] = spec.prevalence;
  doc["mirroring"] = spec.mirroring;
  doc["seed"] = spec.seed;
  doc["patient_tokens"] = {{"mean", spec.patient_tokens.mean},
                           {"sd", spec.patient_tokens.sd}};
  doc["provider_tokens"] = {{"mean", spec.provider_tokens.mean},
                            {"sd", spec.provider_tokens.sd}};
  doc["utterance_min"] = spec.utterance_min;
  doc["utterance_max"] = spec.utterance_max;
  doc["other_fraction"] = spec.other_fraction;
  doc["categories"] = ordered_json::array();
  for (const auto& c : spec.categories) {
    ordered_json cat;
    cat["name"] = c.name;
    cat["patient_rate"] = c.patient_rate;
    cat["provider_rate"] = c.provider_rate;
    cat["multiplier"] = c.multiplier;
    if (!c.words.empty()) cat["words"] = c.words;
    doc["categories"].push_back(std::move(cat));
  }
  out << doc.dump(2) << '\n';
}

void write_ground_truth(std::ostream& out, const SynthSpec& spec,
                        const GroundTruth& truth) {
  ordered_json doc;
  doc["seed"] = spec.seed;
  std::vector<std::string> names;
  for (const auto& c : spec.categories) names.push_back(c.name);
  doc["categories"] = names;
  doc["expected"] = ordered_json::array();
  for (const auto& e : truth.expected) {
    doc["expected"].push_back({{"category", e.category},
                               {"patient_neg", e.patient_neg},
                               {"patient_pos", e.patient_pos},
                               {"provider_neg", e.provider_neg},
                               {"provider_pos", e.provider_pos},
                               {"combined_neg", e.combined_neg},
                               {"combined_pos", e.combined_pos}});
  }
  doc["encounters"] = ordered_json::array();
  for (const auto& e : truth.encounters) {
    doc["encounters"].push_back(
        {{"id", e.id},
         {"label", e.label == Label::kPositive ? 1 : 0},
         {"patient_tokens", e.patient_tokens},
         {"provider_tokens", e.provider_tokens},
         {"patient_rates", e.patient_rates},
         {"provider_rates", e.provider_rates}});
  }
  out << doc.dump(2) << '\n';
}

}  // namespace dyadscreen
