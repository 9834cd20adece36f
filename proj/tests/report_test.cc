#include "dyadscreen/report.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <sstream>

#include "dyadscreen/features.h"
#include "dyadscreen/lexicon.h"
#include "dyadscreen/synth.h"
#include "dyadscreen/text_format.h"

namespace dyadscreen {
namespace {

using ::testing::HasSubstr;
using ::testing::StartsWith;

EvalReport sample_report() {
  EvalReport report;
  EvalRow cv;
  cv.model = ModelKind::kLexiconLr;
  cv.config = SpeakerConfig::kPatientOnly;
  cv.budget = 128;
  cv.folds.resize(2);
  cv.folds[0].auprc = 0.5;
  cv.folds[1].auprc = 0.7;
  cv.mean.auprc = 0.6;
  cv.sd = MetricSet{};
  cv.sd->auprc = 0.1414;
  cv.empty_documents = 3;
  report.rows.push_back(cv);

  EvalRow zs;
  zs.model = ModelKind::kZeroShot;
  zs.config = SpeakerConfig::kCombined;
  zs.folds.resize(1);
  zs.folds[0].auroc = 0.8;
  zs.mean = zs.folds[0];
  zs.excluded = 2;
  report.rows.push_back(zs);
  report.footer = {{"seed", "7"}};
  return report;
}

TEST(SummaryCsv, LongFormatWithFooter) {
  std::ostringstream out;
  write_summary_csv(out, sample_report());
  const std::string s = out.str();
  EXPECT_THAT(s, StartsWith("model,speaker_config,tokens,metric,mean,sd\n"
                            "lexicon-lr,patient,128,auprc,0.6,0.1414\n"));
  EXPECT_THAT(s, HasSubstr("zeroshot,combined,full,auroc,0.8,\n"));
  EXPECT_THAT(s, HasSubstr("# seed=7\n"));
  EXPECT_THAT(s, HasSubstr("# excluded[zeroshot/combined/full]=2\n"));
  EXPECT_THAT(s, HasSubstr("# empty_documents[lexicon-lr/patient/128]=3\n"));
}

TEST(SummaryCsv, ReadBackMatchesTable) {
  const auto report = sample_report();
  std::stringstream buffer;
  write_summary_csv(buffer, report);
  const auto table = read_summary_csv(buffer);
  const auto expected = summary_table(report);
  ASSERT_EQ(table.rows.size(), expected.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    EXPECT_EQ(table.rows[i].model, expected.rows[i].model);
    EXPECT_EQ(table.rows[i].tokens, expected.rows[i].tokens);
    EXPECT_EQ(table.rows[i].metrics, expected.rows[i].metrics);
  }
  EXPECT_EQ(table.footer, expected.footer);

  std::ostringstream md_a, md_b;
  write_markdown(md_a, table);
  write_markdown(md_b, expected);
  EXPECT_EQ(md_a.str(), md_b.str());
}

TEST(FoldsCsv, ZeroShotRowsUseAll) {
  std::ostringstream out;
  write_folds_csv(out, sample_report());
  EXPECT_THAT(out.str(), HasSubstr("lexicon-lr,patient,128,1,auprc,0.7\n"));
  EXPECT_THAT(out.str(), HasSubstr("zeroshot,combined,full,all,auroc,0.8\n"));
}

TEST(CurveCsv, OnePointPerCell) {
  std::ostringstream out;
  write_curve_csv(out, sample_report());
  EXPECT_EQ(out.str(),
            "model,tokens,speaker_config,auprc_mean,auprc_sd\n"
            "lexicon-lr,128,patient,0.6,0.1414\n"
            "zeroshot,full,combined,0,\n");
}

TEST(Markdown, MeanPlusMinusSd) {
  std::ostringstream out;
  write_markdown(out, summary_table(sample_report()));
  EXPECT_THAT(out.str(), HasSubstr("| lexicon-lr | patient | 128 | 0.600 ± 0.141 |"));
  EXPECT_THAT(out.str(), HasSubstr("| zeroshot | combined | full | 0.000 | 0.800 |"));
}

TEST(TextFormat, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -0.0, 2.0}) {
    double back = 0.0;
    ASSERT_TRUE(parse_double(format_double(v), back));
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_fixed(-0.0001, 3), "0.000");
  EXPECT_EQ(format_fixed(2.0 / 3.0, 3), "0.667");
  double ignored;
  EXPECT_FALSE(parse_double("1.5x", ignored));
}

TEST(TextFormat, CsvEscaping) {
  const std::vector<std::string> fields = {"plain", "a,b", "say \"hi\"", ""};
  EXPECT_EQ(csv_join(fields), "plain,\"a,b\",\"say \"\"hi\"\"\",");
  EXPECT_EQ(csv_split(csv_join(fields)), fields);
}

TEST(FeatureCsv, RoundTrip) {
  auto spec = default_synth_spec();
  spec.n_encounters = 25;
  spec.patient_tokens = {100.0, 30.0};
  spec.provider_tokens = {100.0, 30.0};
  const auto synth = generate_corpus(spec);
  const auto m = lexicon_features(synth.corpus, demo_lexicon(), SpeakerConfig::kCombined, 64);
  std::stringstream buffer;
  write_feature_csv(buffer, m);
  EXPECT_THAT(buffer.str(), StartsWith("encounter_id,label,i,we,"));
  const auto back = read_feature_csv(buffer);
  EXPECT_EQ(back.ids, m.ids);
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.feature_names, m.feature_names);
  EXPECT_EQ(back.values, m.values);
}

}  // namespace
}  // namespace dyadscreen
