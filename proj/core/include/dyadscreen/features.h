#ifndef DYADSCREEN_FEATURES_H_
#define DYADSCREEN_FEATURES_H_

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dyadscreen/corpus.h"
#include "dyadscreen/lexicon.h"

namespace dyadscreen {

// Row-aligned feature table: one row per encounter, labels in {0, 1}.
struct FeatureMatrix {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd values;
  std::vector<int> labels;
  // Rows built from documents with no tokens (kept as all-zero rows).
  std::size_t empty_documents = 0;

  std::size_t rows() const { return ids.size(); }
  std::size_t cols() const { return feature_names.size(); }
};

// Throws if rows, labels and ids disagree in count or labels are not 0/1.
void validate(const FeatureMatrix& matrix);

FeatureMatrix lexicon_features(std::span<const Encounter> corpus,
                               const Lexicon& lexicon, SpeakerConfig config,
                               TokenBudget budget = std::nullopt);

// Header: encounter_id,label,<feature names...>
void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix);
void write_feature_csv(const std::filesystem::path& path,
                       const FeatureMatrix& matrix);
FeatureMatrix read_feature_csv(std::istream& in);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

// Rows selected by index, in the given order.
FeatureMatrix select_rows(const FeatureMatrix& matrix,
                          std::span<const std::size_t> rows);

}  // namespace dyadscreen

#endif  // DYADSCREEN_FEATURES_H_
