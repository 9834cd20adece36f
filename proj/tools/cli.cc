#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "dyadscreen/corpus.h"
#include "dyadscreen/embedpool.h"
#include "dyadscreen/error.h"
#include "dyadscreen/eval.h"
#include "dyadscreen/features.h"
#include "dyadscreen/lexicon.h"
#include "dyadscreen/model.h"
#include "dyadscreen/report.h"
#include "dyadscreen/stats.h"
#include "dyadscreen/synth.h"
#include "dyadscreen/text_format.h"
#include "dyadscreen/version.h"
#include "dyadscreen/zeroshot.h"

namespace dyadscreen::cli {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& message) {
  throw Error("cli", message);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<SpeakerConfig> parse_configs(const std::string& text) {
  std::vector<SpeakerConfig> configs;
  for (const auto& name : split_list(text)) configs.push_back(parse_config(name));
  if (configs.empty()) fail("no speaker configs given");
  return configs;
}

std::vector<TokenBudget> parse_budgets(const std::string& text) {
  std::vector<TokenBudget> budgets;
  for (const auto& name : split_list(text)) budgets.push_back(parse_budget(name));
  if (budgets.empty()) fail("no token budgets given");
  return budgets;
}

std::string cell_file(SpeakerConfig config, const TokenBudget& budget,
                      const char* extension) {
  return std::string(config_name(config)) + "_" + budget_name(budget) +
         extension;
}

// Shared logistic-regression flags.
struct LogRegFlags {
  double C = 1.0;
  double tol = 1e-6;
  int max_iter = 1000;

  void add(CLI::App* app) {
    app->add_option("--C", C, "Inverse L2 regularization strength")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--tol", tol, "Gradient max-norm convergence tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--max-iter", max_iter, "Newton iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
  LogRegConfig config() const { return {C, tol, max_iter}; }
};

struct Context {
  std::ostream& out;
  std::ostream& err;
};

void warn_empty(Context& ctx, std::size_t empty, const std::string& what) {
  if (empty > 0) {
    ctx.err << "warning: " << empty << " empty document(s) in " << what
            << "; kept as all-zero rows\n";
  }
}

void add_featurize(CLI::App& app, Context& ctx,
                   std::function<void()>& action) {
  auto* cmd = app.add_subcommand(
      "featurize", "Lexicon category percentages per encounter (feature CSV)");
  struct Opts {
    std::string corpus, lexicon, config = "combined", budget = "full", out;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--corpus", o->corpus, "Transcript JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--lexicon", o->lexicon, "Category dictionary")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", o->config, "patient, provider or combined")
      ->capture_default_str();
  cmd->add_option("--budget", o->budget, "Token budget or 'full'")
      ->capture_default_str();
  cmd->add_option("--out", o->out, "Output feature CSV")->required();
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      const auto corpus = parse_corpus(fs::path(o->corpus));
      const auto lexicon = parse_lexicon(fs::path(o->lexicon));
      const auto m = lexicon_features(corpus, lexicon, parse_config(o->config),
                                      parse_budget(o->budget));
      warn_empty(ctx, m.empty_documents, o->config);
      write_feature_csv(fs::path(o->out), m);
      ctx.out << "wrote " << m.rows() << " rows x " << m.cols()
              << " features to " << o->out << '\n';
    };
  });
}

void add_chunks(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* group = app.add_subcommand("chunks", "Chunk export for an external embedder");
  group->require_subcommand(1);
  auto* cmd = group->add_subcommand(
      "export", "Write fixed-size token chunks as JSONL");
  struct Opts {
    std::string corpus, config = "combined", budget = "full", out;
    std::size_t chunk_size = kDefaultChunkSize;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--corpus", o->corpus, "Transcript JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", o->config, "patient, provider or combined")
      ->capture_default_str();
  cmd->add_option("--budget", o->budget, "Token budget or 'full'")
      ->capture_default_str();
  cmd->add_option("--chunk-size", o->chunk_size, "Tokens per chunk")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--out", o->out, "Output chunk JSONL")->required();
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      const auto corpus = parse_corpus(fs::path(o->corpus));
      const auto docs = build_documents(corpus, parse_config(o->config),
                                        parse_budget(o->budget));
      const auto manifest = build_manifest(docs, o->chunk_size);
      auto out = open_out(o->out);
      write_manifest(out, manifest);
      ctx.out << "wrote " << manifest.entries.size() << " chunks to " << o->out
              << '\n';
    };
  });
}

void add_pool(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand(
      "pool", "Mean-pool chunk embeddings into a document feature CSV");
  struct Opts {
    std::string corpus, vectors, config = "combined", budget = "full", out;
    std::size_t chunk_size = kDefaultChunkSize;
    std::size_t dim = 0;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--corpus", o->corpus, "Transcript JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--vectors", o->vectors, "Embedding sidecar JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", o->config, "patient, provider or combined")
      ->capture_default_str();
  cmd->add_option("--budget", o->budget, "Token budget or 'full'")
      ->capture_default_str();
  cmd->add_option("--chunk-size", o->chunk_size,
                  "Tokens per chunk used at export")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--dim", o->dim,
                  "Embedding dimension for zero-filled rows (0 = infer)")
      ->capture_default_str();
  cmd->add_option("--out", o->out, "Output feature CSV")->required();
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      const auto corpus = parse_corpus(fs::path(o->corpus));
      const auto docs = build_documents(corpus, parse_config(o->config),
                                        parse_budget(o->budget));
      const auto manifest = build_manifest(docs, o->chunk_size);
      const auto vectors = ingest_vectors(fs::path(o->vectors), manifest);
      const auto m = pooled_features(docs, labels_of(corpus), vectors, o->dim);
      warn_empty(ctx, m.empty_documents, o->config);
      write_feature_csv(fs::path(o->out), m);
      ctx.out << "wrote " << m.rows() << " pooled vectors of dim " << m.cols()
              << " to " << o->out << '\n';
    };
  });
}

void add_eval(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand(
      "eval", "Stratified k-fold logistic regression on a feature CSV");
  struct Opts {
    std::string features, out_prefix, model_out, coef_out;
    std::string model = "lexicon-lr", config = "combined", budget = "full";
    int k = 5;
    std::uint64_t seed = 0;
    std::size_t top_k = 10;
    LogRegFlags lr;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--features", o->features, "Feature CSV (featurize or pool)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out-prefix", o->out_prefix,
                  "Writes <prefix>_summary.csv, _folds.csv, _curve.csv, .md")
      ->required();
  cmd->add_option("--k", o->k, "Number of folds")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  cmd->add_option("--seed", o->seed, "Fold shuffling seed")->capture_default_str();
  cmd->add_option("--model", o->model, "Row label: lexicon-lr or embedding-lr")
      ->capture_default_str();
  cmd->add_option("--config", o->config, "Row label: speaker config")
      ->capture_default_str();
  cmd->add_option("--budget", o->budget, "Row label: token budget")
      ->capture_default_str();
  cmd->add_option("--model-out", o->model_out,
                  "Also fit on all rows and save the model JSON here");
  cmd->add_option("--coef-out", o->coef_out,
                  "Write the top-k cross-fold coefficient summary CSV");
  cmd->add_option("--top-k", o->top_k, "Features in the coefficient summary")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  o->lr.add(cmd);
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      const auto data = read_feature_csv(fs::path(o->features));
      const auto folds = stratified_folds(data.labels, o->k, o->seed);
      EvalRow row = evaluate_cv_row(data, folds, o->lr.config());
      row.model = parse_model(o->model);
      if (row.model == ModelKind::kZeroShot) {
        fail("eval trains a classifier; use zeroshot-eval for scores");
      }
      row.config = parse_config(o->config);
      row.budget = parse_budget(o->budget);
      EvalReport report;
      report.footer = {{"version", std::string(kVersion)},
                       {"seed", std::to_string(o->seed)},
                       {"k", std::to_string(o->k)},
                       {"C", format_double(o->lr.C)},
                       {"tol", format_double(o->lr.tol)},
                       {"max_iter", std::to_string(o->lr.max_iter)},
                       {"features", fs::path(o->features).filename().string()},
                       {"threshold",
                        "F1-max on each fold's own test scores (optimistic)"}};
      const auto models = row.models;
      report.rows.push_back(std::move(row));
      write_report_files(o->out_prefix, report);
      if (!o->coef_out.empty()) {
        auto out = open_out(o->coef_out);
        write_coefficients_csv(out, coefficient_summary(models, o->top_k));
      }
      if (!o->model_out.empty()) {
        save_model(fs::path(o->model_out), fit_model(data, o->lr.config()));
      }
      const auto& r = report.rows.front();
      ctx.out << "auprc " << format_fixed(r.mean.auprc, 3) << " ± "
              << format_fixed(r.sd->auprc, 3) << ", auroc "
              << format_fixed(r.mean.auroc, 3) << " ± "
              << format_fixed(r.sd->auroc, 3) << '\n';
    };
  });
}

void add_ablate(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand(
      "ablate", "Model x speaker-config x token-budget evaluation grid");
  struct Opts {
    std::string corpus, lexicon, embeddings_dir, scores_dir, out_prefix;
    std::string models = "lexicon-lr", configs = "patient,provider,combined",
                budgets = "128,256,512,full";
    int k = 5;
    std::uint64_t seed = 0;
    std::size_t chunk_size = kDefaultChunkSize;
    LogRegFlags lr;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--corpus", o->corpus, "Transcript JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--lexicon", o->lexicon, "Category dictionary (lexicon-lr)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--models", o->models,
                  "Comma list of lexicon-lr, embedding-lr, zeroshot")
      ->capture_default_str();
  cmd->add_option("--configs", o->configs, "Comma list of speaker configs")
      ->capture_default_str();
  cmd->add_option("--budgets", o->budgets, "Comma list of budgets or 'full'")
      ->capture_default_str();
  cmd->add_option("--embeddings-dir", o->embeddings_dir,
                  "Directory of <config>_<budget>.jsonl embedding sidecars")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--scores-dir", o->scores_dir,
                  "Directory of <config>_<budget>.csv zero-shot score files")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--chunk-size", o->chunk_size,
                  "Tokens per chunk used at export")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--k", o->k, "Number of folds")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  cmd->add_option("--seed", o->seed, "Fold shuffling seed")->capture_default_str();
  cmd->add_option("--out-prefix", o->out_prefix,
                  "Writes <prefix>_summary.csv, _folds.csv, _curve.csv, .md")
      ->required();
  o->lr.add(cmd);
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      AblationGrid grid;
      for (const auto& name : split_list(o->models)) {
        grid.models.push_back(parse_model(name));
      }
      if (grid.models.empty()) fail("no models given");
      grid.configs = parse_configs(o->configs);
      grid.budgets = parse_budgets(o->budgets);
      grid.k = o->k;
      grid.seed = o->seed;
      grid.logreg = o->lr.config();
      grid.chunk_size = o->chunk_size;

      const auto corpus = parse_corpus(fs::path(o->corpus));
      std::optional<Lexicon> lexicon;
      AblationInputs inputs;
      inputs.corpus = corpus;
      const auto uses = [&](ModelKind kind) {
        return std::find(grid.models.begin(), grid.models.end(), kind) !=
               grid.models.end();
      };
      if (uses(ModelKind::kLexiconLr)) {
        if (o->lexicon.empty()) fail("lexicon-lr needs --lexicon");
        lexicon = parse_lexicon(fs::path(o->lexicon));
        inputs.lexicon = &*lexicon;
      }
      for (SpeakerConfig config : grid.configs) {
        for (const auto& budget : grid.budgets) {
          if (uses(ModelKind::kEmbeddingLr)) {
            if (o->embeddings_dir.empty()) fail("embedding-lr needs --embeddings-dir");
            const fs::path file =
                fs::path(o->embeddings_dir) / cell_file(config, budget, ".jsonl");
            if (fs::exists(file)) {
              const auto docs = build_documents(corpus, config, budget);
              inputs.embeddings[{config, budget}] =
                  ingest_vectors(file, build_manifest(docs, grid.chunk_size));
            }
          }
          if (uses(ModelKind::kZeroShot)) {
            if (o->scores_dir.empty()) fail("zeroshot needs --scores-dir");
            const fs::path file =
                fs::path(o->scores_dir) / cell_file(config, budget, ".csv");
            if (fs::exists(file)) inputs.scores[{config, budget}] = read_scores(file);
          }
        }
      }
      const EvalReport report = run_ablation(inputs, grid);
      write_report_files(o->out_prefix, report);
      ctx.out << "evaluated " << report.rows.size() << " cells; wrote "
              << o->out_prefix << "_summary.csv\n";
    };
  });
}

void add_stats(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand(
      "stats", "Per-feature group t-tests with BH adjustment");
  struct Opts {
    std::string corpus, lexicon, out, coef_out;
    std::string configs = "combined,patient,provider";
    std::size_t top_k = 10;
    int k = 5;
    std::uint64_t seed = 0;
    LogRegFlags lr;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--corpus", o->corpus, "Transcript JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--lexicon", o->lexicon, "Category dictionary")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--configs", o->configs, "Comma list of speaker configs")
      ->capture_default_str();
  cmd->add_option("--out", o->out, "Output stats CSV")->required();
  cmd->add_option("--coef-out", o->coef_out,
                  "Also write top-k cross-fold LR coefficients (combined, full)");
  cmd->add_option("--top-k", o->top_k, "Features in the coefficient summary")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--k", o->k, "Folds for the coefficient summary")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  cmd->add_option("--seed", o->seed, "Fold seed for the coefficient summary")
      ->capture_default_str();
  o->lr.add(cmd);
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      const auto corpus = parse_corpus(fs::path(o->corpus));
      const auto lexicon = parse_lexicon(fs::path(o->lexicon));
      const auto configs = parse_configs(o->configs);
      const auto rows = group_difference_table(corpus, lexicon, configs);
      write_stats_csv(fs::path(o->out), rows);
      for (SpeakerConfig config : configs) {
        const auto n = std::count_if(rows.begin(), rows.end(), [&](const auto& r) {
          return r.config == config && r.significant;
        });
        ctx.out << config_name(config) << ": " << n
                << " significant feature(s) at adjusted p < 0.05\n";
      }
      if (!o->coef_out.empty()) {
        const auto data =
            lexicon_features(corpus, lexicon, SpeakerConfig::kCombined);
        const auto cv = run_cv(data, o->k, o->seed, o->lr.config());
        auto out = open_out(o->coef_out);
        write_coefficients_csv(out, coefficient_summary(cv.models, o->top_k));
      }
    };
  });
}

void add_zeroshot(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand(
      "zeroshot", "Score documents with a chat-completion endpoint");
  struct Opts {
    std::string corpus, endpoint, model, out;
    std::string config = "combined", budget = "full";
    int retries = 3;
    int parallelism = 4;
    double timeout = 120.0;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--corpus", o->corpus, "Transcript JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--endpoint", o->endpoint,
                  "Chat-completion URL, e.g. http://127.0.0.1:8000/v1/chat/completions")
      ->required();
  cmd->add_option("--model", o->model, "Model name sent in the request")
      ->required();
  cmd->add_option("--config", o->config, "patient, provider or combined")
      ->capture_default_str();
  cmd->add_option("--budget", o->budget, "Token budget or 'full'")
      ->capture_default_str();
  cmd->add_option("--retries", o->retries, "Extra attempts per document")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--parallelism", o->parallelism, "Concurrent requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--timeout", o->timeout, "Per-request timeout in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--out", o->out, "Output score CSV")->required();
  cmd->footer("The bearer token is read from $DYADSCREEN_API_KEY when set.");
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      const auto corpus = parse_corpus(fs::path(o->corpus));
      const auto docs = build_documents(corpus, parse_config(o->config),
                                        parse_budget(o->budget));
      EndpointConfig endpoint;
      endpoint.url = o->endpoint;
      endpoint.model = o->model;
      endpoint.api_key = api_key_from_env();
      endpoint.timeout_seconds = o->timeout;
      const auto run = score_corpus(docs, endpoint, {o->retries, o->parallelism});
      for (const auto& r : run.records) {
        if (r.status == ScoreStatus::kClamped && r.raw) {
          ctx.err << "warning: " << r.encounter_id << " score "
                  << format_double(*r.raw) << " clamped to [0, 1]\n";
        }
      }
      write_scores(fs::path(o->out), run.records);
      ctx.out << "scored " << run.ok + run.clamped << " of "
              << run.records.size() << " documents (" << run.clamped
              << " clamped, " << run.failed << " failed)\n";
    };
  });
}

void add_zeroshot_eval(CLI::App& app, Context& ctx,
                       std::function<void()>& action) {
  auto* cmd = app.add_subcommand(
      "zeroshot-eval", "Full-dataset metrics for a zero-shot score file");
  struct Opts {
    std::string corpus, scores, out_prefix;
    std::string config = "combined", budget = "full";
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--corpus", o->corpus, "Transcript JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--scores", o->scores, "Score CSV (encounter_id,score,status)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", o->config, "Row label: speaker config")
      ->capture_default_str();
  cmd->add_option("--budget", o->budget, "Row label: token budget")
      ->capture_default_str();
  cmd->add_option("--out-prefix", o->out_prefix,
                  "Writes <prefix>_summary.csv, _folds.csv, _curve.csv, .md")
      ->required();
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      const auto corpus = parse_corpus(fs::path(o->corpus));
      const auto scores = read_scores(fs::path(o->scores));
      EvalRow row = evaluate_zero_shot(corpus, scores);
      row.config = parse_config(o->config);
      row.budget = parse_budget(o->budget);
      EvalReport report;
      report.footer = {{"version", std::string(kVersion)},
                       {"scores", fs::path(o->scores).filename().string()},
                       {"threshold", "F1-max on the full dataset"}};
      const std::size_t excluded = row.excluded;
      report.rows.push_back(std::move(row));
      write_report_files(o->out_prefix, report);
      const auto& m = report.rows.front().mean;
      ctx.out << "auprc " << format_fixed(m.auprc, 3) << ", auroc "
              << format_fixed(m.auroc, 3) << "; " << excluded << " excluded\n";
    };
  });
}

void add_synth(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("synth", "Generate a synthetic dyadic corpus");
  struct Opts {
    std::string spec, out, truth;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--spec", o->spec,
                  "Generator spec JSON (omitted fields take defaults)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Output transcript JSONL")->required();
  cmd->add_option("--truth", o->truth, "Ground-truth sidecar JSON");
  cmd->add_option("--seed", o->seed, "Override the spec seed");
  cmd->add_option("--n", o->n, "Override the number of encounters");
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      SynthSpec spec = o->spec.empty() ? default_synth_spec()
                                       : read_synth_spec(fs::path(o->spec));
      if (o->seed) spec.seed = *o->seed;
      if (o->n) spec.n_encounters = *o->n;
      const SynthCorpus result = generate_corpus(spec);
      write_corpus(fs::path(o->out), result.corpus);
      if (!o->truth.empty()) {
        auto out = open_out(o->truth);
        write_ground_truth(out, spec, result.truth);
      }
      const auto summary = summarize(result.corpus);
      ctx.out << "wrote " << summary.encounters << " encounters (prevalence "
              << format_fixed(summary.prevalence, 4) << ") to " << o->out
              << '\n';
    };
  });
}

void add_report(CLI::App& app, Context& ctx, std::function<void()>& action) {
  auto* cmd = app.add_subcommand(
      "report", "Render one or more summary CSVs as a Markdown table");
  struct Opts {
    std::vector<std::string> summaries;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--summary", o->summaries, "Summary CSV (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o->out, "Output Markdown (stdout if omitted)");
  cmd->callback([&ctx, &action, o] {
    action = [&ctx, o] {
      SummaryTable merged;
      for (const auto& path : o->summaries) {
        auto table = read_summary_csv(fs::path(path));
        merged.rows.insert(merged.rows.end(), table.rows.begin(),
                           table.rows.end());
        for (auto& entry : table.footer) {
          if (std::find(merged.footer.begin(), merged.footer.end(), entry) ==
              merged.footer.end()) {
            merged.footer.push_back(std::move(entry));
          }
        }
      }
      if (o->out.empty()) {
        write_markdown(ctx.out, merged);
      } else {
        auto out = open_out(o->out);
        write_markdown(out, merged);
      }
    };
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app("Depression-screening experiments over diarized visit transcripts",
               "dyadscreen");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough(false);

  Context ctx{out, err};
  std::function<void()> action;
  add_featurize(app, ctx, action);
  add_chunks(app, ctx, action);
  add_pool(app, ctx, action);
  add_eval(app, ctx, action);
  add_ablate(app, ctx, action);
  add_stats(app, ctx, action);
  add_zeroshot(app, ctx, action);
  add_zeroshot_eval(app, ctx, action);
  add_synth(app, ctx, action);
  add_report(app, ctx, action);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    const CLI::App* failing = &app;
    while (!failing->get_subcommands().empty()) {
      failing = failing->get_subcommands().front();
    }
    err << failing->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (action) action();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace dyadscreen::cli
