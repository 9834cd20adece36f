#ifndef DYADSCREEN_EVAL_H_
#define DYADSCREEN_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dyadscreen/corpus.h"
#include "dyadscreen/embedpool.h"
#include "dyadscreen/features.h"
#include "dyadscreen/lexicon.h"
#include "dyadscreen/model.h"
#include "dyadscreen/zeroshot.h"

namespace dyadscreen {

// Fold index per row. Within each class, rows are shuffled with `seed` and
// dealt round-robin; dealing continues across classes so fold sizes differ
// by at most one.
struct FoldAssignment {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> fold;

  std::vector<std::size_t> train_rows(int f) const;
  std::vector<std::size_t> test_rows(int f) const;
};

FoldAssignment stratified_folds(std::span<const int> labels, int k,
                                std::uint64_t seed);

// Mann-Whitney AUROC, ties credited one half.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Step-wise average precision. Items with equal scores enter the ranking
// together as one precision-recall point.
double auprc(std::span<const double> scores, std::span<const int> labels);

struct ThresholdChoice {
  double threshold = 0.0;
  double f1 = 0.0;
};

// Maximizes F1 of "score >= t" over the observed scores; ties go to the
// smaller threshold.
ThresholdChoice f1_max_threshold(std::span<const double> scores,
                                 std::span<const int> labels);

struct ThresholdedMetrics {
  double balanced_accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

ThresholdedMetrics thresholded_metrics(std::span<const double> scores,
                                       std::span<const int> labels,
                                       double threshold);

struct MetricSet {
  double auprc = 0.0;
  double auroc = 0.0;
  double balanced_accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;
};

// All five metrics with the threshold picked on these same scores.
MetricSet evaluate_scores(std::span<const double> scores,
                          std::span<const int> labels);

// Reported metric names in column order.
inline constexpr std::string_view kMetricNames[] = {
    "auprc", "auroc", "balanced_accuracy", "precision", "recall"};
double metric_value(const MetricSet& m, std::string_view name);
void set_metric_value(MetricSet& m, std::string_view name, double value);

struct MetricSummary {
  MetricSet mean;
  MetricSet sd;  // sample SD over folds
};

MetricSummary summarize_folds(std::span<const MetricSet> folds);

struct CvResult {
  std::vector<MetricSet> folds;
  std::vector<TrainedModel> models;
  MetricSummary summary;
};

// Per fold: standardize and fit on the training rows, score the test rows,
// pick the F1-max threshold on those test scores.
CvResult run_cv(const FeatureMatrix& data, const FoldAssignment& folds,
                const LogRegConfig& config = {});
CvResult run_cv(const FeatureMatrix& data, int k, std::uint64_t seed,
                const LogRegConfig& config = {});

enum class ModelKind { kLexiconLr, kEmbeddingLr, kZeroShot };

std::string_view model_name(ModelKind kind);
ModelKind parse_model(std::string_view name);

using CellInput = std::pair<SpeakerConfig, TokenBudget>;

struct AblationGrid {
  std::vector<ModelKind> models;
  std::vector<SpeakerConfig> configs;
  std::vector<TokenBudget> budgets;
  int k = 5;
  std::uint64_t seed = 0;
  LogRegConfig logreg;
  std::size_t chunk_size = kDefaultChunkSize;
};

// The full grid: every model x {patient, provider, combined} x
// {128, 256, 512, full}.
AblationGrid default_grid(std::vector<ModelKind> models);

struct AblationInputs {
  std::span<const Encounter> corpus;
  const Lexicon* lexicon = nullptr;
  // Chunk vectors per (config, budget), for embedding-lr cells.
  std::map<CellInput, ChunkVectors> embeddings;
  // Zero-shot scores per (config, budget).
  std::map<CellInput, std::vector<ScoreRecord>> scores;
};

struct EvalRow {
  ModelKind model = ModelKind::kLexiconLr;
  SpeakerConfig config = SpeakerConfig::kCombined;
  TokenBudget budget;
  // k entries for cross-validated rows; one full-dataset entry for zero-shot.
  std::vector<MetricSet> folds;
  MetricSet mean;
  std::optional<MetricSet> sd;
  std::size_t excluded = 0;
  std::size_t empty_documents = 0;
  // Fold models, kept for coefficient summaries.
  std::vector<TrainedModel> models;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  // Resolved settings, printed as the report footer.
  std::vector<std::pair<std::string, std::string>> footer;
};

// Zero-shot row: failed records are excluded and counted, metrics are
// computed once on the remaining full dataset.
EvalRow evaluate_zero_shot(std::span<const Encounter> corpus,
                           std::span<const ScoreRecord> scores);

// Cross-validated row for a prepared feature matrix.
EvalRow evaluate_cv_row(const FeatureMatrix& data, const FoldAssignment& folds,
                        const LogRegConfig& config);

// One row per (model, config, budget), in grid order. A single fold
// assignment from the corpus labels is shared by every cell.
EvalReport run_ablation(const AblationInputs& inputs, const AblationGrid& grid);

}  // namespace dyadscreen

#endif  // DYADSCREEN_EVAL_H_
