#include "dyadscreen/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "dyadscreen/error.h"
#include "dyadscreen/random.h"
#include "dyadscreen/text_format.h"
#include "dyadscreen/version.h"

namespace dyadscreen {
namespace {

[[noreturn]] void fail(const std::string& message) {
  throw Error("eval", message);
}

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

ClassCounts check_scored(std::span<const double> scores,
                         std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    fail("scores and labels differ in length");
  }
  ClassCounts counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::isnan(scores[i])) fail("NaN score");
    if (labels[i] == 1) {
      ++counts.positives;
    } else if (labels[i] == 0) {
      ++counts.negatives;
    } else {
      fail("labels must be 0 or 1");
    }
  }
  return counts;
}

void require_both(const ClassCounts& c, std::string_view what) {
  if (c.positives == 0 || c.negatives == 0) {
    fail(std::string(what) + " needs both classes");
  }
}

// Groups of tied scores in descending order: (positives, negatives, score).
struct ScoreGroup {
  double score;
  std::size_t positives;
  std::size_t negatives;
};

std::vector<ScoreGroup> descending_groups(std::span<const double> scores,
                                          std::span<const int> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<ScoreGroup> groups;
  for (std::size_t i : order) {
    if (groups.empty() || groups.back().score != scores[i]) {
      groups.push_back({scores[i], 0, 0});
    }
    if (labels[i] == 1) {
      ++groups.back().positives;
    } else {
      ++groups.back().negatives;
    }
  }
  return groups;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<std::size_t> FoldAssignment::train_rows(int f) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldAssignment::test_rows(int f) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) rows.push_back(i);
  }
  return rows;
}

FoldAssignment stratified_folds(std::span<const int> labels, int k,
                                std::uint64_t seed) {
  if (k < 2) fail("k must be >= 2");
  if (labels.size() < static_cast<std::size_t>(k)) {
    fail("need at least k=" + std::to_string(k) + " rows, got " +
         std::to_string(labels.size()));
  }
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      positives.push_back(i);
    } else if (labels[i] == 0) {
      negatives.push_back(i);
    } else {
      fail("labels must be 0 or 1");
    }
  }
  if (positives.empty() || negatives.empty()) {
    fail("stratified folds need both classes");
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(positives));
  rng.shuffle(std::span<std::size_t>(negatives));

  FoldAssignment a;
  a.k = k;
  a.seed = seed;
  a.fold.assign(labels.size(), 0);
  std::size_t dealt = 0;
  for (const auto* cls : {&positives, &negatives}) {
    for (std::size_t row : *cls) {
      a.fold[row] = static_cast<int>(dealt % static_cast<std::size_t>(k));
      ++dealt;
    }
  }
  for (int f = 0; f < k; ++f) {
    bool pos = false;
    bool neg = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (a.fold[i] == f) continue;
      (labels[i] == 1 ? pos : neg) = true;
    }
    if (!pos || !neg) {
      fail("training split for fold " + std::to_string(f) +
           " holds a single class; use a smaller k");
    }
  }
  return a;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_scored(scores, labels);
  require_both(c, "AUROC");
  // Walk ascending groups: each positive beats every negative strictly below
  // it and ties with the negatives in its own group.
  auto groups = descending_groups(scores, labels);
  std::reverse(groups.begin(), groups.end());
  double wins = 0.0;
  std::size_t negatives_below = 0;
  for (const auto& g : groups) {
    wins += static_cast<double>(g.positives) *
            (static_cast<double>(negatives_below) +
             0.5 * static_cast<double>(g.negatives));
    negatives_below += g.negatives;
  }
  return wins / (static_cast<double>(c.positives) *
                 static_cast<double>(c.negatives));
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_scored(scores, labels);
  if (c.positives == 0) fail("AUPRC needs at least one positive");
  const auto total_pos = static_cast<double>(c.positives);
  double ap = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const auto& g : descending_groups(scores, labels)) {
    tp += g.positives;
    fp += g.negatives;
    if (g.positives == 0) continue;
    const double precision =
        static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += static_cast<double>(g.positives) / total_pos * precision;
  }
  return ap;
}

ThresholdChoice f1_max_threshold(std::span<const double> scores,
                                 std::span<const int> labels) {
  const ClassCounts c = check_scored(scores, labels);
  if (c.positives == 0) fail("F1 threshold search needs a positive");
  // F1 = 2TP / (2TP + FP + FN); compared as exact integer ratios.
  std::size_t best_num = 0;
  std::size_t best_den = 1;
  double best_threshold = 0.0;
  bool have = false;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const auto& g : descending_groups(scores, labels)) {
    tp += g.positives;
    fp += g.negatives;
    const std::size_t num = 2 * tp;
    const std::size_t den = 2 * tp + fp + (c.positives - tp);
    // Ties move to the later (smaller) threshold.
    if (!have || num * best_den >= best_num * den) {
      best_num = num;
      best_den = den;
      best_threshold = g.score;
      have = true;
    }
  }
  return {best_threshold,
          static_cast<double>(best_num) / static_cast<double>(best_den)};
}

ThresholdedMetrics thresholded_metrics(std::span<const double> scores,
                                       std::span<const int> labels,
                                       double threshold) {
  const ClassCounts c = check_scored(scores, labels);
  require_both(c, "thresholded metrics");
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= threshold) (labels[i] == 1 ? tp : fp) += 1;
  }
  const std::size_t tn = c.negatives - fp;
  ThresholdedMetrics m;
  m.recall = static_cast<double>(tp) / static_cast<double>(c.positives);
  const double specificity =
      static_cast<double>(tn) / static_cast<double>(c.negatives);
  m.balanced_accuracy = 0.5 * (m.recall + specificity);
  m.precision =
      tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  return m;
}

MetricSet evaluate_scores(std::span<const double> scores,
                          std::span<const int> labels) {
  MetricSet m;
  m.auprc = auprc(scores, labels);
  m.auroc = auroc(scores, labels);
  m.threshold = f1_max_threshold(scores, labels).threshold;
  const auto t = thresholded_metrics(scores, labels, m.threshold);
  m.balanced_accuracy = t.balanced_accuracy;
  m.precision = t.precision;
  m.recall = t.recall;
  return m;
}

double metric_value(const MetricSet& m, std::string_view name) {
  if (name == "auprc") return m.auprc;
  if (name == "auroc") return m.auroc;
  if (name == "balanced_accuracy") return m.balanced_accuracy;
  if (name == "precision") return m.precision;
  if (name == "recall") return m.recall;
  if (name == "threshold") return m.threshold;
  fail("unknown metric '" + std::string(name) + "'");
}

void set_metric_value(MetricSet& m, std::string_view name, double value) {
  if (name == "auprc") {
    m.auprc = value;
  } else if (name == "auroc") {
    m.auroc = value;
  } else if (name == "balanced_accuracy") {
    m.balanced_accuracy = value;
  } else if (name == "precision") {
    m.precision = value;
  } else if (name == "recall") {
    m.recall = value;
  } else if (name == "threshold") {
    m.threshold = value;
  } else {
    fail("unknown metric '" + std::string(name) + "'");
  }
}

MetricSummary summarize_folds(std::span<const MetricSet> folds) {
  if (folds.empty()) fail("no folds to summarize");
  MetricSummary s;
  for (std::string_view name :
       {"auprc", "auroc", "balanced_accuracy", "precision", "recall",
        "threshold"}) {
    std::vector<double> values;
    for (const auto& f : folds) values.push_back(metric_value(f, name));
    set_metric_value(s.mean, name, mean_of(values));
    set_metric_value(s.sd, name, sample_sd(values));
  }
  return s;
}

CvResult run_cv(const FeatureMatrix& data, const FoldAssignment& folds,
                const LogRegConfig& config) {
  validate(data);
  if (folds.fold.size() != data.rows()) {
    fail("fold assignment covers " + std::to_string(folds.fold.size()) +
         " rows, data has " + std::to_string(data.rows()));
  }
  CvResult result;
  for (int f = 0; f < folds.k; ++f) {
    try {
      const auto train_idx = folds.train_rows(f);
      const auto test_idx = folds.test_rows(f);
      const FeatureMatrix train = select_rows(data, train_idx);
      const FeatureMatrix test = select_rows(data, test_idx);
      TrainedModel model = fit_model(train, config);
      const Eigen::VectorXd p = predict_proba(model, test.values);
      const std::vector<double> scores(p.data(), p.data() + p.size());
      result.folds.push_back(evaluate_scores(scores, test.labels));
      result.models.push_back(std::move(model));
    } catch (const Error& e) {
      throw Error(e.module(), "fold " + std::to_string(f) + ": " + e.message());
    }
  }
  result.summary = summarize_folds(result.folds);
  return result;
}

CvResult run_cv(const FeatureMatrix& data, int k, std::uint64_t seed,
                const LogRegConfig& config) {
  return run_cv(data, stratified_folds(data.labels, k, seed), config);
}

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLexiconLr:
      return "lexicon-lr";
    case ModelKind::kEmbeddingLr:
      return "embedding-lr";
    case ModelKind::kZeroShot:
      return "zeroshot";
  }
  return "lexicon-lr";
}

ModelKind parse_model(std::string_view name) {
  if (name == "lexicon-lr") return ModelKind::kLexiconLr;
  if (name == "embedding-lr") return ModelKind::kEmbeddingLr;
  if (name == "zeroshot") return ModelKind::kZeroShot;
  fail("unknown model '" + std::string(name) +
       "' (expected lexicon-lr, embedding-lr or zeroshot)");
}

AblationGrid default_grid(std::vector<ModelKind> models) {
  AblationGrid grid;
  grid.models = std::move(models);
  grid.configs.assign(std::begin(kAllConfigs), std::end(kAllConfigs));
  grid.budgets = {128, 256, 512, std::nullopt};
  return grid;
}

EvalRow evaluate_zero_shot(std::span<const Encounter> corpus,
                           std::span<const ScoreRecord> scores) {
  std::unordered_map<std::string, const ScoreRecord*> by_id;
  for (const auto& r : scores) {
    if (!by_id.emplace(r.encounter_id, &r).second) {
      fail("duplicate score for encounter '" + r.encounter_id + "'");
    }
  }
  EvalRow row;
  row.model = ModelKind::kZeroShot;
  std::vector<double> values;
  std::vector<int> labels;
  for (const auto& e : corpus) {
    const auto it = by_id.find(e.id);
    if (it == by_id.end()) fail("no score for encounter '" + e.id + "'");
    const ScoreRecord& r = *it->second;
    if (r.status == ScoreStatus::kFailed || !r.score) {
      ++row.excluded;
      continue;
    }
    values.push_back(*r.score);
    labels.push_back(static_cast<int>(label_of(e)));
  }
  row.folds.push_back(evaluate_scores(values, labels));
  row.mean = row.folds.front();
  return row;
}

EvalRow evaluate_cv_row(const FeatureMatrix& data, const FoldAssignment& folds,
                        const LogRegConfig& config) {
  CvResult cv = run_cv(data, folds, config);
  EvalRow row;
  row.folds = std::move(cv.folds);
  row.mean = cv.summary.mean;
  row.sd = cv.summary.sd;
  row.empty_documents = data.empty_documents;
  row.models = std::move(cv.models);
  return row;
}

EvalReport run_ablation(const AblationInputs& inputs, const AblationGrid& grid) {
  const std::vector<int> labels = labels_of(inputs.corpus);
  const FoldAssignment folds = stratified_folds(labels, grid.k, grid.seed);
  EvalReport report;
  for (ModelKind model : grid.models) {
    for (SpeakerConfig config : grid.configs) {
      for (const TokenBudget& budget : grid.budgets) {
        const std::string cell = std::string(model_name(model)) + "/" +
                                 std::string(config_name(config)) + "/" +
                                 budget_name(budget);
        EvalRow row;
        try {
          switch (model) {
            case ModelKind::kLexiconLr: {
              if (inputs.lexicon == nullptr) fail("no lexicon supplied");
              row = evaluate_cv_row(lexicon_features(inputs.corpus,
                                                     *inputs.lexicon, config,
                                                     budget),
                                    folds, grid.logreg);
              break;
            }
            case ModelKind::kEmbeddingLr: {
              const auto it = inputs.embeddings.find({config, budget});
              if (it == inputs.embeddings.end()) fail("missing embeddings");
              const auto docs = build_documents(inputs.corpus, config, budget);
              row = evaluate_cv_row(pooled_features(docs, labels, it->second),
                                    folds, grid.logreg);
              break;
            }
            case ModelKind::kZeroShot: {
              const auto it = inputs.scores.find({config, budget});
              if (it == inputs.scores.end()) fail("missing zero-shot scores");
              row = evaluate_zero_shot(inputs.corpus, it->second);
              break;
            }
          }
        } catch (const Error& e) {
          throw Error(e.module(), "cell " + cell + ": " + e.message());
        }
        row.model = model;
        row.config = config;
        row.budget = budget;
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.footer = {
      {"version", std::string(kVersion)},
      {"seed", std::to_string(grid.seed)},
      {"k", std::to_string(grid.k)},
      {"C", format_double(grid.logreg.C)},
      {"tol", format_double(grid.logreg.tol)},
      {"max_iter", std::to_string(grid.logreg.max_iter)},
      {"chunk_size", std::to_string(grid.chunk_size)},
      {"encounters", std::to_string(inputs.corpus.size())},
      {"threshold", "F1-max on each fold's own test scores (optimistic)"},
  };
  return report;
}

}  // namespace dyadscreen
