#ifndef DYADSCREEN_STATS_H_
#define DYADSCREEN_STATS_H_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyadscreen/corpus.h"
#include "dyadscreen/lexicon.h"
#include "dyadscreen/model.h"

namespace dyadscreen {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Unequal-variance two-sample t-test of mean(a) - mean(b), two-sided.
// When both groups have zero variance: equal means give t = 0, p = 1;
// different means give t = +/-inf, p = 0 (df falls back to n_a + n_b - 2).
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> adjust_p(std::span<const double> p_values);

inline constexpr double kSignificanceLevel = 0.05;

// t is computed as non-depressed minus depressed, so negative t means the
// feature is higher in the depression group.
struct GroupDiffRow {
  SpeakerConfig config = SpeakerConfig::kCombined;
  std::string feature;
  double mean_neg = 0.0;
  double mean_pos = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool significant = false;
};

// Per config: one test per lexicon feature (tone included), BH within the
// config, rows ordered by |t| descending.
std::vector<GroupDiffRow> group_difference_table(
    std::span<const Encounter> corpus, const Lexicon& lexicon,
    std::span<const SpeakerConfig> configs);

void write_stats_csv(std::ostream& out, std::span<const GroupDiffRow> rows);
void write_stats_csv(const std::filesystem::path& path,
                     std::span<const GroupDiffRow> rows);

enum class Direction { kTowardDepression, kAwayFromDepression, kNeutral };
std::string_view direction_name(Direction d);

struct CoefficientSummary {
  std::string feature;
  double mean = 0.0;
  double sd = 0.0;
  Direction direction = Direction::kNeutral;
};

// Mean and sample SD of each standardized coefficient across fold models;
// the top_k features by |mean|.
std::vector<CoefficientSummary> coefficient_summary(
    std::span<const TrainedModel> fold_models, std::size_t top_k);

void write_coefficients_csv(std::ostream& out,
                            std::span<const CoefficientSummary> rows);

}  // namespace dyadscreen

#endif  // DYADSCREEN_STATS_H_
