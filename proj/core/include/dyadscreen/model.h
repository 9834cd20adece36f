#ifndef DYADSCREEN_MODEL_H_
#define DYADSCREEN_MODEL_H_

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dyadscreen/features.h"

namespace dyadscreen {

struct ClassWeights {
  double positive = 1.0;
  double negative = 1.0;
};

// Balanced weights N / (2 n_c); the weighted class totals both equal N / 2.
ClassWeights compute_class_weights(std::span<const int> labels);

// Per-column z-scoring with sample standard deviation. Columns whose spread
// is zero (to rounding) keep std 0 and are only centered.
struct Standardizer {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;

  static Standardizer identity(Eigen::Index cols);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

Standardizer fit_standardizer(const Eigen::MatrixXd& x);

struct LogRegConfig {
  double C = 1.0;
  double tol = 1e-6;
  int max_iter = 1000;
};

struct TrainedModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  ClassWeights class_weights;
  double C = 1.0;
  Standardizer standardizer;
  std::vector<std::string> feature_names;
  bool converged = false;
  int iterations = 0;
  // Objective value after each accepted Newton step, starting at the origin.
  std::vector<double> loss_trace;
};

// Weighted L2 logistic objective with unpenalized intercept:
//   sum_i w_i log(1 + exp(-s_i (x_i.beta + b))) + |beta|^2 / (2C),
// with s_i = +1 for label 1 and -1 for label 0.
struct LogRegProblem {
  const Eigen::MatrixXd& x;
  std::span<const int> labels;
  std::span<const double> weights;
  double C;

  double loss(const Eigen::VectorXd& beta, double intercept) const;
  // Gradient over (beta..., intercept).
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta, double intercept) const;
};

// Newton's method with Armijo backtracking on already-standardized features.
// Rows are visited in a canonical order, so any permutation of the input
// rows yields a bit-identical model. The returned model carries an identity
// standardizer.
TrainedModel train_logreg(const Eigen::MatrixXd& x, std::span<const int> labels,
                          ClassWeights weights, const LogRegConfig& config = {});

// Same solver with an explicit weight per row.
TrainedModel train_logreg_weighted(const Eigen::MatrixXd& x,
                                   std::span<const int> labels,
                                   std::span<const double> sample_weights,
                                   const LogRegConfig& config = {});

// Standardize, compute balanced weights and train.
TrainedModel fit_model(const FeatureMatrix& data,
                       const LogRegConfig& config = {});

// sigma(standardize(x).beta + b) per row.
Eigen::VectorXd predict_proba(const TrainedModel& model,
                              const Eigen::MatrixXd& x);

void save_model(std::ostream& out, const TrainedModel& model);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(std::istream& in);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace dyadscreen

#endif  // DYADSCREEN_MODEL_H_
