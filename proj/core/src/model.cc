#include "dyadscreen/model.h"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "dyadscreen/error.h"
#include "json.hpp"

namespace dyadscreen {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

[[noreturn]] void fail(const std::string& message) {
  throw Error("model", message);
}

// log(1 + exp(-m)) without overflow.
double log1p_exp_neg(double m) {
  return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sign_of(int label) { return label == 1 ? 1.0 : -1.0; }

void check_inputs(const MatrixXd& x, std::span<const int> labels,
                  std::span<const double> weights) {
  if (static_cast<std::size_t>(x.rows()) != labels.size() ||
      labels.size() != weights.size()) {
    fail("rows, labels and weights differ in count");
  }
  if (!x.allFinite()) fail("non-finite feature value");
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y == 1) pos = true;
    else if (y == 0) neg = true;
    else fail("labels must be 0 or 1");
  }
  if (!pos || !neg) fail("training data must contain both classes");
  for (double w : weights) {
    if (!(w > 0) || !std::isfinite(w)) fail("sample weights must be positive");
  }
}

// Row order used by the solver: by label, weight, then feature values.
std::vector<std::size_t> canonical_order(const MatrixXd& x,
                                         std::span<const int> labels,
                                         std::span<const double> weights) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    if (weights[a] != weights[b]) return weights[a] < weights[b];
    for (Index j = 0; j < x.cols(); ++j) {
      const double va = x(static_cast<Index>(a), j);
      const double vb = x(static_cast<Index>(b), j);
      if (va != vb) return va < vb;
    }
    return false;
  });
  return order;
}

}  // namespace

ClassWeights compute_class_weights(std::span<const int> labels) {
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) fail("labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    fail("class weights need both classes (got " + std::to_string(pos) +
         " positive, " + std::to_string(neg) + " negative)");
  }
  const auto n = static_cast<double>(labels.size());
  return {n / (2.0 * static_cast<double>(pos)),
          n / (2.0 * static_cast<double>(neg))};
}

Standardizer Standardizer::identity(Index cols) {
  return {VectorXd::Zero(cols), VectorXd::Ones(cols)};
}

MatrixXd Standardizer::apply(const MatrixXd& x) const {
  if (x.cols() != means.size()) {
    fail("standardizer expects " + std::to_string(means.size()) +
         " features, got " + std::to_string(x.cols()));
  }
  MatrixXd out = x.rowwise() - means.transpose();
  for (Index j = 0; j < out.cols(); ++j) {
    if (stds(j) > 0) out.col(j) /= stds(j);
  }
  return out;
}

Standardizer fit_standardizer(const MatrixXd& x) {
  if (x.rows() < 2) fail("standardizer needs at least 2 rows");
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  s.means = x.colwise().sum().transpose() / n;
  s.stds.resize(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - s.means(j)).square().sum();
    double sd = std::sqrt(ss / (n - 1.0));
    // Spread at rounding level of the mean is treated as constant.
    if (sd <= 1e-12 * std::max(1.0, std::abs(s.means(j)))) sd = 0.0;
    s.stds(j) = sd;
  }
  return s;
}

double LogRegProblem::loss(const VectorXd& beta, double intercept) const {
  const VectorXd z = (x * beta).array() + intercept;
  double total = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    total += weights[row] * log1p_exp_neg(sign_of(labels[row]) * z(i));
  }
  return total + beta.squaredNorm() / (2.0 * C);
}

VectorXd LogRegProblem::gradient(const VectorXd& beta, double intercept) const {
  const VectorXd z = (x * beta).array() + intercept;
  VectorXd dz(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    const double s = sign_of(labels[row]);
    dz(i) = -weights[row] * s * sigmoid(-s * z(i));
  }
  VectorXd g(beta.size() + 1);
  g.head(beta.size()) = x.transpose() * dz + beta / C;
  g(beta.size()) = dz.sum();
  return g;
}

TrainedModel train_logreg_weighted(const MatrixXd& x_in,
                                   std::span<const int> labels_in,
                                   std::span<const double> weights_in,
                                   const LogRegConfig& config) {
  check_inputs(x_in, labels_in, weights_in);
  if (!(config.C > 0) || !std::isfinite(config.C)) fail("C must be > 0");
  if (config.max_iter < 1) fail("max_iter must be >= 1");

  const auto order = canonical_order(x_in, labels_in, weights_in);
  const Index n = x_in.rows();
  const Index d = x_in.cols();
  MatrixXd x(n, d);
  std::vector<int> labels(order.size());
  std::vector<double> weights(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    x.row(static_cast<Index>(i)) = x_in.row(static_cast<Index>(order[i]));
    labels[i] = labels_in[order[i]];
    weights[i] = weights_in[order[i]];
  }
  const LogRegProblem problem{x, labels, weights, config.C};

  TrainedModel model;
  model.C = config.C;
  model.standardizer = Standardizer::identity(d);
  VectorXd beta = VectorXd::Zero(d);
  double intercept = 0.0;
  double loss = problem.loss(beta, intercept);
  model.loss_trace.push_back(loss);

  bool polishing = false;
  for (int iter = 0; iter < config.max_iter; ++iter) {
    const VectorXd g = problem.gradient(beta, intercept);
    const double g_norm = g.lpNorm<Eigen::Infinity>();
    if (g_norm < config.tol) {
      model.converged = true;
      // One more Newton step takes the quadratic tail to rounding level.
      if (polishing || g_norm == 0.0) break;
      polishing = true;
    }
    // Hessian over (beta, intercept).
    const VectorXd z = (x * beta).array() + intercept;
    VectorXd curvature(n);
    for (Index i = 0; i < n; ++i) {
      const double p = sigmoid(z(i));
      curvature(i) = weights[static_cast<std::size_t>(i)] * p * (1.0 - p);
    }
    MatrixXd hessian(d + 1, d + 1);
    const MatrixXd weighted = x.array().colwise() * curvature.array();
    hessian.topLeftCorner(d, d) = x.transpose() * weighted;
    hessian.topLeftCorner(d, d).diagonal().array() += 1.0 / config.C;
    const VectorXd cross = weighted.colwise().sum().transpose();
    hessian.topRightCorner(d, 1) = cross;
    hessian.bottomLeftCorner(1, d) = cross.transpose();
    hessian(d, d) = curvature.sum();

    Eigen::LDLT<MatrixXd> ldlt(hessian);
    VectorXd step = -ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || g.dot(step) >= 0) {
      // Indefinite to rounding (e.g. saturated intercept): fall back to a
      // lightly damped system.
      MatrixXd damped = hessian;
      damped.diagonal().array() += 1e-8 * (1.0 + hessian.diagonal().maxCoeff());
      step = -damped.ldlt().solve(g);
      if (!step.allFinite() || g.dot(step) >= 0) step = -g;
    }

    const double slope = g.dot(step);
    double t = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      const VectorXd next_beta = beta + t * step.head(d);
      const double next_intercept = intercept + t * step(d);
      const double next_loss = problem.loss(next_beta, next_intercept);
      if (next_loss <= loss + 1e-4 * t * slope) {
        beta = next_beta;
        intercept = next_intercept;
        loss = next_loss;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++model.iterations;
    model.loss_trace.push_back(loss);
    if (polishing) break;
  }
  if (!model.converged) {
    model.converged =
        problem.gradient(beta, intercept).lpNorm<Eigen::Infinity>() <
        config.tol;
  }
  model.coefficients = std::move(beta);
  model.intercept = intercept;
  return model;
}

TrainedModel train_logreg(const MatrixXd& x, std::span<const int> labels,
                          ClassWeights weights, const LogRegConfig& config) {
  std::vector<double> sample_weights(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sample_weights[i] = labels[i] == 1 ? weights.positive : weights.negative;
  }
  TrainedModel model = train_logreg_weighted(x, labels, sample_weights, config);
  model.class_weights = weights;
  return model;
}

TrainedModel fit_model(const FeatureMatrix& data, const LogRegConfig& config) {
  validate(data);
  const Standardizer standardizer = fit_standardizer(data.values);
  TrainedModel model =
      train_logreg(standardizer.apply(data.values), data.labels,
                   compute_class_weights(data.labels), config);
  model.standardizer = standardizer;
  model.feature_names = data.feature_names;
  return model;
}

VectorXd predict_proba(const TrainedModel& model, const MatrixXd& x) {
  if (x.cols() != model.coefficients.size()) {
    fail("model expects " + std::to_string(model.coefficients.size()) +
         " features, got " + std::to_string(x.cols()));
  }
  const VectorXd z =
      (model.standardizer.apply(x) * model.coefficients).array() +
      model.intercept;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

namespace {

nlohmann::json to_json(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

VectorXd vector_field(const nlohmann::json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end() || !it->is_array()) {
    fail(std::string("model file missing array '") + name + "'");
  }
  const auto values = it->get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(),
                                    static_cast<Index>(values.size()));
}

}  // namespace

void save_model(std::ostream& out, const TrainedModel& model) {
  nlohmann::ordered_json doc;
  doc["coefficients"] = to_json(model.coefficients);
  doc["intercept"] = model.intercept;
  doc["means"] = to_json(model.standardizer.means);
  doc["stds"] = to_json(model.standardizer.stds);
  doc["C"] = model.C;
  doc["feature_names"] = model.feature_names;
  doc["class_weights"] = {{"positive", model.class_weights.positive},
                          {"negative", model.class_weights.negative}};
  out << doc.dump(2) << '\n';
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path.string());
  save_model(out, model);
}

TrainedModel load_model(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(std::string("malformed model file: ") + e.what());
  }
  TrainedModel model;
  model.coefficients = vector_field(doc, "coefficients");
  model.standardizer.means = vector_field(doc, "means");
  model.standardizer.stds = vector_field(doc, "stds");
  if (!doc.contains("intercept") || !doc["intercept"].is_number() ||
      !doc.contains("C") || !doc["C"].is_number()) {
    fail("model file missing 'intercept' or 'C'");
  }
  model.intercept = doc["intercept"].get<double>();
  model.C = doc["C"].get<double>();
  if (doc.contains("feature_names")) {
    model.feature_names = doc["feature_names"].get<std::vector<std::string>>();
  }
  if (doc.contains("class_weights")) {
    model.class_weights.positive = doc["class_weights"].value("positive", 1.0);
    model.class_weights.negative = doc["class_weights"].value("negative", 1.0);
  }
  const auto d = model.coefficients.size();
  if (model.standardizer.means.size() != d ||
      model.standardizer.stds.size() != d ||
      (!model.feature_names.empty() &&
       model.feature_names.size() != static_cast<std::size_t>(d))) {
    fail("model file arrays disagree in length");
  }
  if (!model.coefficients.allFinite() || !std::isfinite(model.intercept) ||
      !(model.C > 0)) {
    fail("model file holds non-finite coefficients or C <= 0");
  }
  model.converged = true;
  return model;
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  return load_model(in);
}

}  // namespace dyadscreen
