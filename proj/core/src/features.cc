#include "dyadscreen/features.h"

#include <fstream>
#include <istream>
#include <ostream>

#include "dyadscreen/error.h"
#include "dyadscreen/text_format.h"

namespace dyadscreen {
namespace {

[[noreturn]] void fail(const std::string& message) {
  throw Error("features", message);
}

}  // namespace

void validate(const FeatureMatrix& m) {
  if (m.labels.size() != m.ids.size() ||
      static_cast<std::size_t>(m.values.rows()) != m.ids.size()) {
    fail("row count mismatch between ids, labels and values");
  }
  if (static_cast<std::size_t>(m.values.cols()) != m.feature_names.size()) {
    fail("column count mismatch between names and values");
  }
  for (int y : m.labels) {
    if (y != 0 && y != 1) fail("labels must be 0 or 1");
  }
}

FeatureMatrix lexicon_features(std::span<const Encounter> corpus,
                               const Lexicon& lexicon, SpeakerConfig config,
                               TokenBudget budget) {
  FeatureMatrix m;
  m.feature_names = lexicon_feature_names(lexicon);
  m.values.resize(static_cast<Eigen::Index>(corpus.size()),
                  static_cast<Eigen::Index>(m.feature_names.size()));
  m.ids.reserve(corpus.size());
  m.labels.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Document doc = build_document(corpus[i], config, budget);
    if (doc.empty()) ++m.empty_documents;
    const auto row = lexicon_feature_row(extract_features(doc, lexicon), lexicon);
    for (std::size_t j = 0; j < row.size(); ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          row[j];
    }
    m.ids.push_back(corpus[i].id);
    m.labels.push_back(static_cast<int>(label_of(corpus[i])));
  }
  return m;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
  validate(m);
  std::vector<std::string> header = {"encounter_id", "label"};
  header.insert(header.end(), m.feature_names.begin(), m.feature_names.end());
  out << csv_join(header) << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::vector<std::string> fields = {m.ids[i], std::to_string(m.labels[i])};
    for (std::size_t j = 0; j < m.cols(); ++j) {
      fields.push_back(format_double(
          m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    out << csv_join(fields) << '\n';
  }
}

void write_feature_csv(const std::filesystem::path& path,
                       const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path.string());
  write_feature_csv(out, m);
}

FeatureMatrix read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail("empty feature file");
  const auto header = csv_split(line);
  if (header.size() < 2 || header[0] != "encounter_id" || header[1] != "label") {
    fail("feature file header must start with encounter_id,label");
  }
  FeatureMatrix m;
  m.feature_names.assign(header.begin() + 2, header.end());
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = csv_split(line);
    if (fields.size() != header.size()) {
      fail("expected " + std::to_string(header.size()) + " fields at line " +
           std::to_string(line_no) + ", got " + std::to_string(fields.size()));
    }
    if (fields[1] != "0" && fields[1] != "1") {
      fail("label must be 0 or 1 at line " + std::to_string(line_no));
    }
    m.ids.push_back(fields[0]);
    m.labels.push_back(fields[1] == "1" ? 1 : 0);
    for (std::size_t j = 2; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_double(fields[j], v)) {
        fail("bad number '" + fields[j] + "' at line " +
             std::to_string(line_no));
      }
      flat.push_back(v);
    }
  }
  const auto rows = static_cast<Eigen::Index>(m.ids.size());
  const auto cols = static_cast<Eigen::Index>(m.feature_names.size());
  m.values.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m.values(i, j) = flat[static_cast<std::size_t>(i * cols + j)];
    }
  }
  return m;
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  return read_feature_csv(in);
}

FeatureMatrix select_rows(const FeatureMatrix& m,
                          std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.feature_names = m.feature_names;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), m.values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.ids.push_back(m.ids[rows[i]]);
    out.labels.push_back(m.labels[rows[i]]);
    out.values.row(static_cast<Eigen::Index>(i)) =
        m.values.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace dyadscreen
