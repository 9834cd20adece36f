#include "dyadscreen/embedpool.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include "dyadscreen/error.h"
#include "json.hpp"

namespace dyadscreen {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw Error("embedpool", message);
}

std::string chunk_key(const std::string& id, std::size_t index) {
  return id + "#" + std::to_string(index);
}

json parse_line(const std::string& text, std::size_t line) {
  try {
    json record = json::parse(text);
    if (record.is_object()) return record;
  } catch (const json::parse_error&) {
  }
  fail("malformed record at line " + std::to_string(line));
}

std::pair<std::string, std::size_t> chunk_id(const json& record,
                                             std::size_t line) {
  const auto id = record.find("encounter_id");
  const auto index = record.find("chunk_index");
  if (id == record.end() || !id->is_string() || index == record.end() ||
      !index->is_number_unsigned()) {
    fail("record without encounter_id/chunk_index at line " +
         std::to_string(line));
  }
  return {id->get<std::string>(), index->get<std::size_t>()};
}

}  // namespace

std::vector<std::vector<std::string>> chunk_tokens(
    std::span<const std::string> tokens, std::size_t chunk_size) {
  if (chunk_size == 0) fail("chunk size must be >= 1");
  std::vector<std::vector<std::string>> chunks;
  for (std::size_t begin = 0; begin < tokens.size(); begin += chunk_size) {
    const std::size_t end = std::min(tokens.size(), begin + chunk_size);
    chunks.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                        tokens.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return chunks;
}

ChunkManifest build_manifest(std::span<const Document> documents,
                             std::size_t chunk_size) {
  ChunkManifest manifest;
  for (const auto& doc : documents) {
    const auto chunks = chunk_document(doc, chunk_size);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      std::string text;
      for (const auto& token : chunks[i]) {
        if (!text.empty()) text += ' ';
        text += token;
      }
      manifest.entries.push_back({doc.encounter_id, i, std::move(text)});
    }
  }
  return manifest;
}

void write_manifest(std::ostream& out, const ChunkManifest& manifest) {
  for (const auto& e : manifest.entries) {
    out << "{\"encounter_id\":" << json(e.encounter_id).dump()
        << ",\"chunk_index\":" << e.chunk_index
        << ",\"text\":" << json(e.text).dump() << "}\n";
  }
}

ChunkManifest read_manifest(std::istream& in) {
  ChunkManifest manifest;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json record = parse_line(text, line);
    auto [id, index] = chunk_id(record, line);
    const auto body = record.find("text");
    if (body == record.end() || !body->is_string()) {
      fail("chunk record without text at line " + std::to_string(line));
    }
    manifest.entries.push_back({std::move(id), index, body->get<std::string>()});
  }
  return manifest;
}

ChunkVectors ingest_vectors(std::istream& in, const ChunkManifest& manifest) {
  std::set<std::string> expected;
  for (const auto& e : manifest.entries) {
    expected.insert(chunk_key(e.encounter_id, e.chunk_index));
  }
  std::map<std::string, std::vector<double>> by_key;
  std::size_t dim = 0;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json record = parse_line(text, line);
    const auto [id, index] = chunk_id(record, line);
    const std::string key = chunk_key(id, index);
    if (expected.count(key) == 0) fail("vector for unknown chunk " + key);
    const auto vec = record.find("vector");
    if (vec == record.end() || !vec->is_array() || vec->empty()) {
      fail("missing or empty vector for " + key);
    }
    std::vector<double> values;
    values.reserve(vec->size());
    for (const auto& v : *vec) {
      if (!v.is_number()) fail("non-numeric component in vector for " + key);
      const double x = v.get<double>();
      if (!std::isfinite(x)) fail("non-finite component in vector for " + key);
      values.push_back(x);
    }
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      fail("dimension mismatch for " + key + ": expected " +
           std::to_string(dim) + ", got " + std::to_string(values.size()));
    }
    if (!by_key.emplace(key, std::move(values)).second) {
      fail("duplicate vector for " + key);
    }
  }
  ChunkVectors out;
  for (const auto& e : manifest.entries) {
    const std::string key = chunk_key(e.encounter_id, e.chunk_index);
    const auto it = by_key.find(key);
    if (it == by_key.end()) fail("missing vector " + key);
    auto& list = out[e.encounter_id];
    if (list.size() != e.chunk_index) {
      fail("manifest chunks for " + e.encounter_id + " are not contiguous");
    }
    list.push_back(std::move(it->second));
  }
  return out;
}

ChunkVectors ingest_vectors(const std::filesystem::path& path,
                            const ChunkManifest& manifest) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  return ingest_vectors(in, manifest);
}

void write_vectors(std::ostream& out, const ChunkManifest& manifest,
                   const ChunkVectors& vectors) {
  for (const auto& e : manifest.entries) {
    const auto& vec = vectors.at(e.encounter_id).at(e.chunk_index);
    out << "{\"encounter_id\":" << json(e.encounter_id).dump()
        << ",\"chunk_index\":" << e.chunk_index
        << ",\"vector\":" << json(vec).dump() << "}\n";
  }
}

std::vector<double> pool_mean(std::span<const std::vector<double>> chunks) {
  if (chunks.empty()) {
    fail("cannot pool zero chunks; drop the document or zero-fill it");
  }
  const std::size_t dim = chunks.front().size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& chunk : chunks) {
    if (chunk.size() != dim) {
      fail("dimension mismatch while pooling: expected " +
           std::to_string(dim) + ", got " + std::to_string(chunk.size()));
    }
    for (std::size_t j = 0; j < dim; ++j) mean[j] += chunk[j];
  }
  const auto n = static_cast<double>(chunks.size());
  for (double& v : mean) v /= n;
  return mean;
}

FeatureMatrix pooled_features(std::span<const Document> documents,
                              std::span<const int> labels,
                              const ChunkVectors& vectors, std::size_t dim) {
  if (labels.size() != documents.size()) {
    fail("labels and documents differ in count");
  }
  for (const auto& [id, chunks] : vectors) {
    if (chunks.empty()) continue;
    if (dim == 0) dim = chunks.front().size();
    if (chunks.front().size() != dim) {
      fail("dimension mismatch for " + id + ": expected " +
           std::to_string(dim) + ", got " +
           std::to_string(chunks.front().size()));
    }
  }
  if (dim == 0) fail("embedding dimension unknown: no vectors supplied");

  FeatureMatrix m;
  for (std::size_t j = 0; j < dim; ++j) {
    m.feature_names.push_back("emb_" + std::to_string(j));
  }
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(documents.size()),
                                   static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const auto& doc = documents[i];
    m.ids.push_back(doc.encounter_id);
    m.labels.push_back(labels[i]);
    const auto it = vectors.find(doc.encounter_id);
    if (it == vectors.end() || it->second.empty()) {
      if (!doc.empty()) fail("missing vectors for " + doc.encounter_id);
      ++m.empty_documents;
      continue;
    }
    const auto pooled = pool_mean(it->second);
    for (std::size_t j = 0; j < dim; ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          pooled[j];
    }
  }
  return m;
}

}  // namespace dyadscreen
