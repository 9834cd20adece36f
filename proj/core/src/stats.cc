#include "dyadscreen/stats.h"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "dyadscreen/error.h"
#include "dyadscreen/features.h"
#include "dyadscreen/text_format.h"

namespace dyadscreen {
namespace {

[[noreturn]] void fail(const std::string& message) {
  throw Error("stats", message);
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // sample
  double n = 0.0;
};

Moments moments(std::span<const double> v) {
  Moments m;
  m.n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / m.n;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.variance = ss / (m.n - 1.0);
  return m;
}

}  // namespace

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    fail("t-test needs at least 2 values per group (got " +
         std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  }
  for (auto group : {a, b}) {
    for (double x : group) {
      if (!std::isfinite(x)) fail("t-test input is not finite");
    }
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double va = ma.variance / ma.n;
  const double vb = mb.variance / mb.n;
  const double se2 = va + vb;
  WelchResult r;
  if (se2 == 0.0) {
    r.df = ma.n + mb.n - 2.0;
    if (ma.mean == mb.mean) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = ma.mean > mb.mean ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = (ma.mean - mb.mean) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
  const boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(
                                dist, std::abs(r.t))));
  return r;
}

std::vector<double> adjust_p(std::span<const double> p_values) {
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail("p-value " + format_double(p) + " outside [0, 1]");
    }
  }
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x,
                                                   std::size_t y) {
    return p_values[x] < p_values[y];
  });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    const std::size_t i = order[rank - 1];
    // p * m / m can round one ulp below p.
    const double q = std::max(p_values[i], p_values[i] * static_cast<double>(m) /
                                               static_cast<double>(rank));
    running = std::min(running, q);
    adjusted[i] = std::min(1.0, running);
  }
  return adjusted;
}

std::vector<GroupDiffRow> group_difference_table(
    std::span<const Encounter> corpus, const Lexicon& lexicon,
    std::span<const SpeakerConfig> configs) {
  std::vector<GroupDiffRow> out;
  for (SpeakerConfig config : configs) {
    const FeatureMatrix m = lexicon_features(corpus, lexicon, config);
    std::vector<GroupDiffRow> rows;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::vector<double> neg;
      std::vector<double> pos;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        const double v =
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        (m.labels[i] == 1 ? pos : neg).push_back(v);
      }
      GroupDiffRow row;
      row.config = config;
      row.feature = m.feature_names[j];
      WelchResult w;
      try {
        w = welch_t(neg, pos);
      } catch (const Error& e) {
        fail("feature '" + row.feature + "': " + e.message());
      }
      row.mean_neg = std::accumulate(neg.begin(), neg.end(), 0.0) /
                     static_cast<double>(neg.size());
      row.mean_pos = std::accumulate(pos.begin(), pos.end(), 0.0) /
                     static_cast<double>(pos.size());
      row.t = w.t;
      row.df = w.df;
      row.p_raw = w.p;
      rows.push_back(std::move(row));
    }
    std::vector<double> raw;
    for (const auto& r : rows) raw.push_back(r.p_raw);
    const auto adjusted = adjust_p(raw);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].p_adjusted = adjusted[i];
      rows[i].significant = adjusted[i] < kSignificanceLevel;
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const GroupDiffRow& x, const GroupDiffRow& y) {
                       return std::abs(x.t) > std::abs(y.t);
                     });
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

void write_stats_csv(std::ostream& out, std::span<const GroupDiffRow> rows) {
  out << "speaker_config,feature,mean_non_depressed,mean_depressed,t,df,"
         "p_raw,p_adjusted,significant\n";
  for (const auto& r : rows) {
    out << csv_join({std::string(config_name(r.config)), r.feature,
                     format_double(r.mean_neg), format_double(r.mean_pos),
                     format_double(r.t), format_double(r.df),
                     format_double(r.p_raw), format_double(r.p_adjusted),
                     r.significant ? "true" : "false"})
        << '\n';
  }
}

void write_stats_csv(const std::filesystem::path& path,
                     std::span<const GroupDiffRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path.string());
  write_stats_csv(out, rows);
}

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::kTowardDepression:
      return "toward";
    case Direction::kAwayFromDepression:
      return "away";
    case Direction::kNeutral:
      return "neutral";
  }
  return "neutral";
}

std::vector<CoefficientSummary> coefficient_summary(
    std::span<const TrainedModel> fold_models, std::size_t top_k) {
  if (fold_models.empty()) fail("no fold models");
  if (top_k < 1) fail("top_k must be >= 1");
  const auto& names = fold_models.front().feature_names;
  const auto d = fold_models.front().coefficients.size();
  if (names.size() != static_cast<std::size_t>(d)) {
    fail("fold model lacks feature names");
  }
  for (const auto& model : fold_models) {
    if (model.feature_names != names || model.coefficients.size() != d) {
      fail("fold models disagree on their feature sets");
    }
  }
  std::vector<CoefficientSummary> rows;
  const auto k = static_cast<double>(fold_models.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    CoefficientSummary row;
    row.feature = names[static_cast<std::size_t>(j)];
    for (const auto& model : fold_models) row.mean += model.coefficients(j);
    row.mean /= k;
    if (fold_models.size() > 1) {
      double ss = 0.0;
      for (const auto& model : fold_models) {
        const double dev = model.coefficients(j) - row.mean;
        ss += dev * dev;
      }
      row.sd = std::sqrt(ss / (k - 1.0));
    }
    row.direction = row.mean > 0   ? Direction::kTowardDepression
                    : row.mean < 0 ? Direction::kAwayFromDepression
                                   : Direction::kNeutral;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CoefficientSummary& x, const CoefficientSummary& y) {
                     return std::abs(x.mean) > std::abs(y.mean);
                   });
  if (rows.size() > top_k) rows.resize(top_k);
  return rows;
}

void write_coefficients_csv(std::ostream& out,
                            std::span<const CoefficientSummary> rows) {
  out << "feature,mean,sd,direction\n";
  for (const auto& r : rows) {
    out << csv_join({r.feature, format_double(r.mean), format_double(r.sd),
                     std::string(direction_name(r.direction))})
        << '\n';
  }
}

}  // namespace dyadscreen
