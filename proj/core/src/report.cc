#include "dyadscreen/report.h"

#include <fstream>
#include <istream>
#include <ostream>

#include "dyadscreen/error.h"
#include "dyadscreen/text_format.h"

namespace dyadscreen {
namespace {

[[noreturn]] void fail(const std::string& message) {
  throw Error("report", message);
}

std::string cell_name(const EvalRow& row) {
  return std::string(model_name(row.model)) + "/" +
         std::string(config_name(row.config)) + "/" + budget_name(row.budget);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path.string());
  return out;
}

const char* display_name(const std::string& metric) {
  if (metric == "auprc") return "AUPRC";
  if (metric == "auroc") return "AUROC";
  if (metric == "balanced_accuracy") return "BA";
  if (metric == "precision") return "Precision";
  if (metric == "recall") return "Recall";
  return metric.c_str();
}

}  // namespace

Footer report_footer(const EvalReport& report) {
  Footer footer = report.footer;
  for (const auto& row : report.rows) {
    if (row.excluded > 0) {
      footer.emplace_back("excluded[" + cell_name(row) + "]",
                          std::to_string(row.excluded));
    }
    if (row.empty_documents > 0) {
      footer.emplace_back("empty_documents[" + cell_name(row) + "]",
                          std::to_string(row.empty_documents));
    }
  }
  return footer;
}

SummaryTable summary_table(const EvalReport& report) {
  SummaryTable table;
  for (const auto& row : report.rows) {
    SummaryRow s;
    s.model = model_name(row.model);
    s.config = config_name(row.config);
    s.tokens = budget_name(row.budget);
    for (std::string_view metric : kMetricNames) {
      std::optional<double> sd;
      if (row.sd) sd = metric_value(*row.sd, metric);
      s.metrics[std::string(metric)] = {metric_value(row.mean, metric), sd};
    }
    table.rows.push_back(std::move(s));
  }
  table.footer = report_footer(report);
  return table;
}

void write_summary_csv(std::ostream& out, const EvalReport& report) {
  out << "model,speaker_config,tokens,metric,mean,sd\n";
  for (const auto& row : report.rows) {
    for (std::string_view metric : kMetricNames) {
      out << csv_join({std::string(model_name(row.model)),
                       std::string(config_name(row.config)),
                       budget_name(row.budget), std::string(metric),
                       format_double(metric_value(row.mean, metric)),
                       row.sd ? format_double(metric_value(*row.sd, metric))
                              : std::string()})
          << '\n';
    }
  }
  for (const auto& [key, value] : report_footer(report)) {
    out << "# " << key << '=' << value << '\n';
  }
}

void write_folds_csv(std::ostream& out, const EvalReport& report) {
  out << "model,speaker_config,tokens,fold,metric,value\n";
  for (const auto& row : report.rows) {
    for (std::size_t f = 0; f < row.folds.size(); ++f) {
      for (std::string_view metric :
           {"auprc", "auroc", "balanced_accuracy", "precision", "recall",
            "threshold"}) {
        out << csv_join({std::string(model_name(row.model)),
                         std::string(config_name(row.config)),
                         budget_name(row.budget),
                         row.sd ? std::to_string(f) : std::string("all"),
                         std::string(metric),
                         format_double(metric_value(row.folds[f], metric))})
            << '\n';
      }
    }
  }
}

void write_curve_csv(std::ostream& out, const EvalReport& report) {
  out << "model,tokens,speaker_config,auprc_mean,auprc_sd\n";
  for (const auto& row : report.rows) {
    out << csv_join({std::string(model_name(row.model)),
                     budget_name(row.budget),
                     std::string(config_name(row.config)),
                     format_double(row.mean.auprc),
                     row.sd ? format_double(row.sd->auprc) : std::string()})
        << '\n';
  }
}

void write_markdown(std::ostream& out, const SummaryTable& table) {
  out << "| Model | Speaker | Tokens |";
  for (std::string_view metric : kMetricNames) {
    out << ' ' << display_name(std::string(metric)) << " |";
  }
  out << "\n|---|---|---|";
  for (std::size_t i = 0; i < std::size(kMetricNames); ++i) out << "---|";
  out << '\n';
  for (const auto& row : table.rows) {
    out << "| " << row.model << " | " << row.config << " | " << row.tokens
        << " |";
    for (std::string_view metric : kMetricNames) {
      const auto it = row.metrics.find(std::string(metric));
      if (it == row.metrics.end()) {
        out << " - |";
        continue;
      }
      const auto& [mean, sd] = it->second;
      out << ' ' << format_fixed(mean, 3);
      if (sd) out << " ± " << format_fixed(*sd, 3);
      out << " |";
    }
    out << '\n';
  }
  out << "\nCross-validated rows report mean ± sample SD across folds; rows "
         "without SD are single full-dataset evaluations.\n";
  if (!table.footer.empty()) {
    out << '\n';
    for (const auto& [key, value] : table.footer) {
      out << "- " << key << ": " << value << '\n';
    }
  }
}

SummaryTable read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      csv_split(line) != std::vector<std::string>{"model", "speaker_config",
                                                  "tokens", "metric", "mean",
                                                  "sd"}) {
    fail("summary header must be model,speaker_config,tokens,metric,mean,sd");
  }
  SummaryTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      table.footer.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    const auto f = csv_split(line);
    const std::string where = " at line " + std::to_string(line_no);
    if (f.size() != 6) fail("expected 6 fields" + where);
    double mean = 0.0;
    if (!parse_double(f[4], mean)) fail("bad mean" + where);
    std::optional<double> sd;
    if (!f[5].empty()) {
      double v = 0.0;
      if (!parse_double(f[5], v)) fail("bad sd" + where);
      sd = v;
    }
    if (table.rows.empty() || table.rows.back().model != f[0] ||
        table.rows.back().config != f[1] || table.rows.back().tokens != f[2]) {
      table.rows.push_back({f[0], f[1], f[2], {}});
    }
    table.rows.back().metrics[f[3]] = {mean, sd};
  }
  return table;
}

SummaryTable read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  return read_summary_csv(in);
}

void write_report_files(const std::filesystem::path& prefix,
                        const EvalReport& report) {
  const std::string base = prefix.string();
  {
    auto out = open_out(base + "_summary.csv");
    write_summary_csv(out, report);
  }
  {
    auto out = open_out(base + "_folds.csv");
    write_folds_csv(out, report);
  }
  {
    auto out = open_out(base + "_curve.csv");
    write_curve_csv(out, report);
  }
  {
    auto out = open_out(base + ".md");
    write_markdown(out, summary_table(report));
  }
}

}  // namespace dyadscreen
