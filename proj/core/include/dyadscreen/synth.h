#ifndef DYADSCREEN_SYNTH_H_
#define DYADSCREEN_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dyadscreen/corpus.h"

namespace dyadscreen {

// Emission model for one word category. Rates are per-token probabilities;
// the multiplier scales the patient rate in positive encounters.
struct SynthCategory {
  std::string name;
  double patient_rate = 0.0;
  double provider_rate = 0.0;
  double multiplier = 1.0;
  // Words emitted for this category; empty selects the built-in list for
  // the demonstration lexicon category of the same name.
  std::vector<std::string> words;
};

struct LengthModel {
  double mean = 0.0;
  double sd = 0.0;
};

struct SynthSpec {
  std::size_t n_encounters = 1108;
  double prevalence = 0.2283;
  std::vector<SynthCategory> categories;
  // Fraction by which provider rates move toward the patient's realized
  // rates in positive encounters.
  double mirroring = 0.0;
  // Total tokens per role per encounter, lognormal.
  LengthModel patient_tokens{1034.0, 647.0};
  LengthModel provider_tokens{1254.0, 776.0};
  std::size_t utterance_min = 4;
  std::size_t utterance_max = 30;
  // Share of provider utterances attributed to "other" rather than "doctor".
  double other_fraction = 0.05;
  std::uint64_t seed = 0;
};

// Demonstration-lexicon categories with first-person, sadness and positive
// tone effects in the positive group.
SynthSpec default_synth_spec();

// Throws on negative rates, per-role rate sums above 1 after multipliers,
// mirroring outside [0, 1] or prevalence outside (0, 1).
void validate(const SynthSpec& spec);

SynthSpec read_synth_spec(std::istream& in);
SynthSpec read_synth_spec(const std::filesystem::path& path);
void write_synth_spec(std::ostream& out, const SynthSpec& spec);

// Expected category percentages (as extract_features reports them) per
// group and speaker config.
struct ExpectedRates {
  std::string category;
  double patient_neg = 0.0;
  double patient_pos = 0.0;
  double provider_neg = 0.0;
  double provider_pos = 0.0;
  // Token-share weighted; the share expectation is integrated numerically
  // over the continuous length model (integer rounding ignored).
  double combined_neg = 0.0;
  double combined_pos = 0.0;
};

std::vector<ExpectedRates> expected_rates(const SynthSpec& spec);

// Expected patient share of tokens in a combined document.
double expected_patient_share(const SynthSpec& spec);

struct EncounterTruth {
  std::string id;
  Label label = Label::kNegative;
  std::size_t patient_tokens = 0;
  std::size_t provider_tokens = 0;
  // Realized per-category rates, aligned with spec.categories.
  std::vector<double> patient_rates;
  std::vector<double> provider_rates;
};

struct GroundTruth {
  std::vector<EncounterTruth> encounters;
  std::vector<ExpectedRates> expected;
};

struct SynthCorpus {
  std::vector<Encounter> corpus;
  GroundTruth truth;
};

// Fully determined by spec.seed.
SynthCorpus generate_corpus(const SynthSpec& spec);

void write_ground_truth(std::ostream& out, const SynthSpec& spec,
                        const GroundTruth& truth);

// Built-in word lists.
const std::vector<std::string>& builtin_category_words(const std::string& name);
const std::vector<std::string>& filler_words();

}  // namespace dyadscreen

#endif  // DYADSCREEN_SYNTH_H_
