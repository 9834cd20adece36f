#include "cli.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "dyadscreen/corpus.h"
#include "dyadscreen/embedpool.h"
#include "dyadscreen/model.h"
#include "support/oracles.h"
#include "support/stub_server.h"

namespace dyadscreen::cli {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using ::testing::Not;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dyadscreen_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    lexicon_ = fs::path(DYADSCREEN_TEST_DATA_DIR) / "demo_lexicon.dic";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string make_corpus(std::size_t n, std::uint64_t seed, const std::string& name = "c.jsonl") {
    const auto r = invoke({"synth", "--spec", (fs::path(DYADSCREEN_TEST_DATA_DIR) / "synth_default.json").string(),
                           "--n", std::to_string(n), "--seed", std::to_string(seed),
                           "--out", path(name), "--truth", path(name + ".truth.json")});
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  fs::path dir_;
  fs::path lexicon_;
};

TEST_F(CliTest, HelpForEverySubcommandListsItsFlags) {
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> cases = {
      {{"featurize"}, {"--corpus", "--lexicon", "--config", "--budget", "--out"}},
      {{"chunks", "export"}, {"--corpus", "--config", "--budget", "--chunk-size", "--out"}},
      {{"pool"}, {"--corpus", "--vectors", "--config", "--budget", "--chunk-size", "--dim", "--out"}},
      {{"eval"}, {"--features", "--out-prefix", "--k", "--seed", "--model", "--config", "--budget",
                  "--model-out", "--coef-out", "--top-k", "--C", "--tol", "--max-iter"}},
      {{"ablate"}, {"--corpus", "--lexicon", "--models", "--configs", "--budgets", "--embeddings-dir",
                    "--scores-dir", "--chunk-size", "--k", "--seed", "--out-prefix"}},
      {{"stats"}, {"--corpus", "--lexicon", "--configs", "--out", "--coef-out", "--top-k", "--k", "--seed"}},
      {{"zeroshot"}, {"--corpus", "--endpoint", "--model", "--config", "--budget", "--retries",
                      "--parallelism", "--timeout", "--out", "DYADSCREEN_API_KEY"}},
      {{"zeroshot-eval"}, {"--corpus", "--scores", "--config", "--budget", "--out-prefix"}},
      {{"synth"}, {"--spec", "--out", "--truth", "--seed", "--n"}},
      {{"report"}, {"--summary", "--out"}},
  };
  for (const auto& [command, flags] : cases) {
    auto args = command;
    args.push_back("--help");
    const auto r = invoke(args);
    EXPECT_EQ(r.code, 0) << command.back();
    for (const auto& flag : flags) {
      EXPECT_THAT(r.out, HasSubstr(flag)) << command.back();
    }
  }
  const auto top = invoke({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"featurize", "chunks", "pool", "eval", "ablate", "stats", "zeroshot",
                          "zeroshot-eval", "synth", "report"}) {
    EXPECT_THAT(top.out, HasSubstr(sub));
  }
}

TEST_F(CliTest, UsageErrorsExitTwoWithHelp) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  const auto missing = invoke({"featurize", "--out", path("x.csv")});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_THAT(missing.err, HasSubstr("--corpus"));
  EXPECT_THAT(missing.err, HasSubstr("Usage"));
  EXPECT_EQ(invoke({"featurize", "--corpus", path("nope.jsonl"), "--lexicon", lexicon_.string(),
                    "--out", path("x.csv")})
                .code,
            kExitUsage);
  const auto corpus = make_corpus(20, 1);
  EXPECT_EQ(invoke({"ablate", "--corpus", corpus, "--lexicon", lexicon_.string(), "--k", "1",
                    "--out-prefix", path("r")})
                .code,
            kExitUsage);
}

TEST_F(CliTest, DataErrorsExitOneWithModuleMessage) {
  {
    std::ofstream out(path("bad.jsonl"));
    out << R"({"id":"a","phq9":3,"utterances":[{"speaker":"nurse","text":"hi"}]})" << '\n';
  }
  const auto r = invoke({"featurize", "--corpus", path("bad.jsonl"), "--lexicon",
                         lexicon_.string(), "--out", path("f.csv")});
  EXPECT_EQ(r.code, kExitDataError);
  EXPECT_THAT(r.err, HasSubstr("corpus: unknown speaker 'nurse' at line 1"));

  const auto corpus = make_corpus(20, 1);
  const auto bad_config = invoke({"featurize", "--corpus", corpus, "--lexicon", lexicon_.string(),
                                  "--config", "nurse", "--out", path("f.csv")});
  EXPECT_EQ(bad_config.code, kExitDataError);
}

TEST_F(CliTest, SynthThenAblateGivesFullCurveDeterministically) {
  const auto corpus = make_corpus(150, 3);
  const std::string before = slurp(corpus);
  const auto again = make_corpus(150, 3, "c2.jsonl");
  EXPECT_EQ(slurp(again), before);

  for (const char* prefix : {"a", "b"}) {
    const auto r = invoke({"ablate", "--corpus", corpus, "--lexicon", lexicon_.string(),
                           "--models", "lexicon-lr", "--configs", "patient,provider,combined",
                           "--budgets", "128,256,512,full", "--seed", "11", "--out-prefix",
                           path(prefix)});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_THAT(r.out, HasSubstr("12 cells"));
  }
  const auto curve = slurp(path("a_curve.csv"));
  EXPECT_EQ(line_count(curve), 13u);
  for (const char* suffix : {"_summary.csv", "_folds.csv", "_curve.csv", ".md"}) {
    EXPECT_EQ(slurp(path(std::string("a") + suffix)), slurp(path(std::string("b") + suffix)))
        << suffix;
  }
  EXPECT_THAT(slurp(path("a_summary.csv")), HasSubstr("# seed=11"));
  EXPECT_EQ(slurp(corpus), before);

  const auto md = invoke({"report", "--summary", path("a_summary.csv")});
  EXPECT_EQ(md.code, 0);
  EXPECT_EQ(md.out, slurp(path("a.md")));
}

TEST_F(CliTest, FeaturizeEvalIsByteDeterministicAndSavesModel) {
  const auto corpus = make_corpus(120, 4);
  ASSERT_EQ(invoke({"featurize", "--corpus", corpus, "--lexicon", lexicon_.string(), "--config",
                    "patient", "--budget", "512", "--out", path("f.csv")})
                .code,
            0);
  for (const char* prefix : {"e1", "e2"}) {
    const auto r = invoke({"eval", "--features", path("f.csv"), "--seed", "5", "--config", "patient",
                           "--budget", "512", "--out-prefix", path(prefix), "--coef-out",
                           path(std::string(prefix) + "_coef.csv"), "--model-out",
                           path(std::string(prefix) + "_model.json")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(path("e1_summary.csv")), slurp(path("e2_summary.csv")));
  EXPECT_EQ(slurp(path("e1_folds.csv")), slurp(path("e2_folds.csv")));
  EXPECT_EQ(slurp(path("e1_coef.csv")), slurp(path("e2_coef.csv")));
  EXPECT_EQ(slurp(path("e1_model.json")), slurp(path("e2_model.json")));
  EXPECT_THAT(slurp(path("e1_coef.csv")), HasSubstr("feature,mean,sd,direction"));
  const auto model = load_model(fs::path(path("e1_model.json")));
  EXPECT_EQ(model.feature_names.size(), 10u);
}

TEST_F(CliTest, ChunkExportPoolEvalWithPseudoEmbeddings) {
  const auto corpus = make_corpus(80, 5);
  ASSERT_EQ(invoke({"chunks", "export", "--corpus", corpus, "--config", "combined", "--budget",
                    "256", "--out", path("chunks.jsonl")})
                .code,
            0);
  std::istringstream chunk_text(slurp(path("chunks.jsonl")));
  const auto manifest = read_manifest(chunk_text);
  ASSERT_FALSE(manifest.entries.empty());
  ChunkVectors vectors;
  for (const auto& e : manifest.entries) {
    vectors[e.encounter_id].push_back(testing::pseudo_embedding(e.text, 8));
  }
  {
    std::ofstream out(path("combined_256.jsonl"), std::ios::binary);
    write_vectors(out, manifest, vectors);
  }
  const auto pooled = invoke({"pool", "--corpus", corpus, "--vectors", path("combined_256.jsonl"),
                              "--config", "combined", "--budget", "256", "--out", path("emb.csv")});
  ASSERT_EQ(pooled.code, 0) << pooled.err;
  const auto r = invoke({"eval", "--features", path("emb.csv"), "--model", "embedding-lr",
                         "--budget", "256", "--out-prefix", path("emb")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_THAT(slurp(path("emb_summary.csv")), HasSubstr("embedding-lr,combined,256,auprc,"));

  const auto ab = invoke({"ablate", "--corpus", corpus, "--models", "embedding-lr", "--configs",
                          "combined", "--budgets", "256", "--embeddings-dir", dir_.string(),
                          "--out-prefix", path("abl")});
  ASSERT_EQ(ab.code, 0) << ab.err;
  const auto missing = invoke({"ablate", "--corpus", corpus, "--models", "embedding-lr",
                               "--configs", "patient", "--budgets", "256", "--embeddings-dir",
                               dir_.string(), "--out-prefix", path("abl2")});
  EXPECT_EQ(missing.code, kExitDataError);
  EXPECT_THAT(missing.err, HasSubstr("embedding-lr/patient/256"));
}

TEST_F(CliTest, ZeroShotOnlineAndOfflineReportsMatch) {
  const auto corpus = make_corpus(40, 6);
  testing::StubServer server([](const std::string& user) -> testing::StubReply {
    if (user.find("sad") != std::string::npos) return {200, "0.8"};
    return {200, "Risk is 0.2"};
  });
  const auto r = invoke({"zeroshot", "--corpus", corpus, "--endpoint", server.url(), "--model",
                         "stub", "--out", path("combined_full.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(slurp(path("combined_full.csv"))), 41u);

  const auto online_eval = invoke({"zeroshot-eval", "--corpus", corpus, "--scores",
                                   path("combined_full.csv"), "--out-prefix", path("z1")});
  ASSERT_EQ(online_eval.code, 0) << online_eval.err;
  // Offline: the same score file copied elsewhere, no endpoint involved.
  fs::create_directories(dir_ / "offline");
  fs::copy_file(path("combined_full.csv"), dir_ / "offline" / "combined_full.csv");
  const auto offline_eval =
      invoke({"zeroshot-eval", "--corpus", corpus, "--scores",
              (dir_ / "offline" / "combined_full.csv").string(), "--out-prefix", path("z2")});
  ASSERT_EQ(offline_eval.code, 0);
  EXPECT_EQ(slurp(path("z1_summary.csv")), slurp(path("z2_summary.csv")));
  EXPECT_EQ(slurp(path("z1.md")), slurp(path("z2.md")));

  const auto ab = invoke({"ablate", "--corpus", corpus, "--models", "zeroshot", "--configs",
                          "combined", "--budgets", "full", "--scores-dir",
                          (dir_ / "offline").string(), "--out-prefix", path("z3")});
  ASSERT_EQ(ab.code, 0) << ab.err;
  EXPECT_THAT(slurp(path("z3_folds.csv")), HasSubstr("zeroshot,combined,full,all,auprc,"));
}

TEST_F(CliTest, StatsWritesTableAndCoefficients) {
  const auto corpus = make_corpus(300, 7);
  const auto r = invoke({"stats", "--corpus", corpus, "--lexicon", lexicon_.string(), "--out",
                         path("s.csv"), "--coef-out", path("coef.csv"), "--top-k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(slurp(path("s.csv"))), 1u + 3u * 10u);
  EXPECT_EQ(line_count(slurp(path("coef.csv"))), 4u);
  const auto again = invoke({"stats", "--corpus", corpus, "--lexicon", lexicon_.string(), "--out",
                             path("s2.csv")});
  EXPECT_EQ(slurp(path("s.csv")), slurp(path("s2.csv")));
}

}  // namespace
}  // namespace dyadscreen::cli
