#include "dyadscreen/stats.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dyadscreen/error.h"
#include "dyadscreen/lexicon.h"
#include "dyadscreen/model.h"
#include "dyadscreen/random.h"
#include "dyadscreen/synth.h"

namespace dyadscreen {
namespace {

using ::testing::HasSubstr;

// Hand Welch formula, independent of the library's arithmetic.
double hand_t(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto var = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };
  return (mean(a) - mean(b)) /
         std::sqrt(var(a) / static_cast<double>(a.size()) + var(b) / static_cast<double>(b.size()));
}

TEST(WelchT, Examples) {
  const std::vector<double> a = {1, 2, 3};
  const auto same = welch_t(a, a);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_DOUBLE_EQ(same.p, 1.0);

  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {2, 3, 4, 5};
  const auto r = welch_t(x, y);
  EXPECT_NEAR(r.t, -1.0954, 1e-4);
  EXPECT_NEAR(r.t, hand_t(x, y), 1e-12);
  EXPECT_NEAR(r.df, 6.0, 1e-12);
  // Two-sided p for t = -sqrt(1.2) on 6 df.
  EXPECT_NEAR(r.p, 0.3153, 1e-3);

  const auto swapped = welch_t(y, x);
  EXPECT_EQ(swapped.t, -r.t);
  EXPECT_EQ(swapped.p, r.p);
}

TEST(WelchT, DegenerateVariances) {
  const std::vector<double> c = {2, 2, 2};
  const auto equal = welch_t(c, c);
  EXPECT_EQ(equal.t, 0.0);
  EXPECT_EQ(equal.p, 1.0);

  const std::vector<double> d = {3, 3};
  const auto differ = welch_t(c, d);
  EXPECT_TRUE(std::isinf(differ.t));
  EXPECT_LT(differ.t, 0.0);
  EXPECT_EQ(differ.p, 0.0);

  EXPECT_THROW(welch_t(std::vector<double>{1}, c), Error);
}

TEST(WelchT, AntisymmetryProperty) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(2 + rng.index(10)), b(2 + rng.index(10));
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal() + 0.3;
    const auto ab = welch_t(a, b);
    const auto ba = welch_t(b, a);
    EXPECT_EQ(ab.t, -ba.t);
    EXPECT_EQ(ab.p, ba.p);
    EXPECT_NEAR(ab.t, hand_t(a, b), 1e-10);
    EXPECT_GE(ab.p, 0.0);
    EXPECT_LE(ab.p, 1.0);
  }
}

TEST(AdjustP, Examples) {
  const auto q = adjust_p(std::vector<double>{0.01, 0.02, 0.03, 0.04});
  for (double v : q) EXPECT_EQ(v, 0.04);
  EXPECT_EQ(adjust_p(std::vector<double>{0.3}), (std::vector<double>{0.3}));
  EXPECT_EQ(adjust_p(std::vector<double>{1.0, 1.0}), (std::vector<double>{1.0, 1.0}));
  EXPECT_THROW(adjust_p(std::vector<double>{0.5, 1.5}), Error);
  EXPECT_THROW(adjust_p(std::vector<double>{-0.1}), Error);
}

TEST(AdjustP, KeepsInputOrder) {
  const auto q = adjust_p(std::vector<double>{0.04, 0.01, 0.5});
  EXPECT_DOUBLE_EQ(q[1], 0.03);
  EXPECT_DOUBLE_EQ(q[0], 0.06);
  EXPECT_DOUBLE_EQ(q[2], 0.5);
}

TEST(AdjustP, MonotoneBoundedAndDominatesRaw) {
  Rng rng(18);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> p(1 + rng.index(15));
    for (auto& v : p) v = rng.uniform();
    const auto q = adjust_p(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(q[i], p[i]);
      EXPECT_LE(q[i], 1.0);
    }
    auto raised = p;
    const auto idx = rng.index(p.size());
    raised[idx] = std::min(1.0, raised[idx] + rng.uniform() * 0.3);
    const auto q2 = adjust_p(raised);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_GE(q2[i], q[i]);
    if (p.size() == 1) {
      EXPECT_EQ(q[0], p[0]);
    }
  }
}

SynthCorpus sadness_corpus(std::size_t n, double multiplier, std::uint64_t seed) {
  auto spec = default_synth_spec();
  spec.n_encounters = n;
  spec.seed = seed;
  for (auto& c : spec.categories) c.multiplier = c.name == "sadness" ? multiplier : 1.0;
  spec.mirroring = 0.0;
  return generate_corpus(spec);
}

TEST(GroupDifference, SadnessFlaggedWithNegativeT) {
  const auto synth = sadness_corpus(500, 2.0, 1);
  const auto lexicon = demo_lexicon();
  const SpeakerConfig configs[] = {SpeakerConfig::kPatientOnly};
  const auto rows = group_difference_table(synth.corpus, lexicon, configs);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.front().feature, "sadness");
  EXPECT_TRUE(rows.front().significant);
  EXPECT_LT(rows.front().t, 0.0);
  EXPECT_GT(rows.front().mean_pos, rows.front().mean_neg);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(std::abs(rows[i - 1].t), std::abs(rows[i].t));
  }
  for (const auto& r : rows) {
    EXPECT_EQ(r.significant, r.p_adjusted < kSignificanceLevel);
    if (std::isfinite(r.t) && r.t != 0.0) {
      EXPECT_EQ(r.t < 0, r.mean_neg < r.mean_pos);
    }
  }
}

TEST(GroupDifference, ConstantFeatureUnflagged) {
  std::vector<Encounter> corpus;
  for (int i = 0; i < 10; ++i) {
    Encounter e;
    e.id = "e" + std::to_string(i);
    e.phq9 = i < 4 ? 15 : 3;
    e.utterances = {{Role::kPatient, i % 2 ? "we talk" : "we walk"}};
    corpus.push_back(e);
  }
  Lexicon::Builder b;
  b.add_category(1, "we").add_category(2, "never");
  b.add_entry("we", {1}).add_entry("zzz", {2});
  const auto lex = std::move(b).build();
  const SpeakerConfig configs[] = {SpeakerConfig::kCombined};
  const auto rows = group_difference_table(corpus, lex, configs);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.p_raw, 1.0);
    EXPECT_FALSE(r.significant);
  }
}

TEST(GroupDifference, CsvHeader) {
  const auto synth = sadness_corpus(60, 2.0, 2);
  const SpeakerConfig configs[] = {SpeakerConfig::kCombined};
  const auto rows = group_difference_table(synth.corpus, demo_lexicon(), configs);
  std::ostringstream out;
  write_stats_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "speaker_config,feature,mean_non_depressed,mean_depressed,t,df,"
            "p_raw,p_adjusted,significant");
}

TrainedModel model_with(std::vector<double> coefficients) {
  TrainedModel m;
  m.coefficients = Eigen::Map<Eigen::VectorXd>(coefficients.data(),
                                               static_cast<Eigen::Index>(coefficients.size()));
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    m.feature_names.push_back("f" + std::to_string(i));
  }
  return m;
}

TEST(CoefficientSummary, Examples) {
  std::vector<TrainedModel> same(5, model_with({0.5, -1.0}));
  for (const auto& row : coefficient_summary(same, 10)) EXPECT_EQ(row.sd, 0.0);

  std::vector<TrainedModel> models;
  for (double c : {1.0, 1.0, 1.0, 1.0, 3.0}) models.push_back(model_with({c, -0.1, 0.0}));
  const auto rows = coefficient_summary(models, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].feature, "f0");
  EXPECT_NEAR(rows[0].mean, 1.4, 1e-12);
  EXPECT_NEAR(rows[0].sd, 0.8944, 1e-4);
  EXPECT_EQ(rows[0].direction, Direction::kTowardDepression);
  EXPECT_EQ(rows[1].direction, Direction::kAwayFromDepression);

  auto mismatched = models;
  mismatched[2].feature_names[0] = "other";
  EXPECT_THROW(coefficient_summary(mismatched, 2), Error);
  EXPECT_THROW(coefficient_summary(models, 0), Error);
}

}  // namespace
}  // namespace dyadscreen
