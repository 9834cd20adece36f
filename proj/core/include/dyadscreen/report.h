#ifndef DYADSCREEN_REPORT_H_
#define DYADSCREEN_REPORT_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dyadscreen/eval.h"

namespace dyadscreen {

using Footer = std::vector<std::pair<std::string, std::string>>;

// One (model, config, tokens) row of a summary table as read back from CSV.
struct SummaryRow {
  std::string model;
  std::string config;
  std::string tokens;
  std::map<std::string, std::pair<double, std::optional<double>>> metrics;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
  Footer footer;
};

// Footer plus per-row bookkeeping (excluded scores, empty documents).
Footer report_footer(const EvalReport& report);
SummaryTable summary_table(const EvalReport& report);

// model,speaker_config,tokens,metric,mean,sd then "# key=value" footer lines.
void write_summary_csv(std::ostream& out, const EvalReport& report);
// model,speaker_config,tokens,fold,metric,value
void write_folds_csv(std::ostream& out, const EvalReport& report);
// model,tokens,speaker_config,auprc_mean,auprc_sd for every row.
void write_curve_csv(std::ostream& out, const EvalReport& report);
// Table of metric mean +/- SD per row, then the footer.
void write_markdown(std::ostream& out, const SummaryTable& table);

SummaryTable read_summary_csv(std::istream& in);
SummaryTable read_summary_csv(const std::filesystem::path& path);

// Writes <prefix>_summary.csv, <prefix>_folds.csv, <prefix>_curve.csv and
// <prefix>.md.
void write_report_files(const std::filesystem::path& prefix,
                        const EvalReport& report);

}  // namespace dyadscreen

#endif  // DYADSCREEN_REPORT_H_
