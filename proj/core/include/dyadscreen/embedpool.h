#ifndef DYADSCREEN_EMBEDPOOL_H_
#define DYADSCREEN_EMBEDPOOL_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dyadscreen/corpus.h"
#include "dyadscreen/features.h"

namespace dyadscreen {

inline constexpr std::size_t kDefaultChunkSize = 128;

struct ChunkEntry {
  std::string encounter_id;
  std::size_t chunk_index = 0;
  std::string text;
};

// Chunks awaiting an external embedder, in document then chunk order.
struct ChunkManifest {
  std::vector<ChunkEntry> entries;
};

using ChunkVectors = std::map<std::string, std::vector<std::vector<double>>>;

// Consecutive runs of `chunk_size` tokens; the last may be short. An empty
// token list yields no chunks.
std::vector<std::vector<std::string>> chunk_tokens(
    std::span<const std::string> tokens, std::size_t chunk_size);

inline std::vector<std::vector<std::string>> chunk_document(
    const Document& document, std::size_t chunk_size) {
  return chunk_tokens(document.tokens, chunk_size);
}

ChunkManifest build_manifest(std::span<const Document> documents,
                             std::size_t chunk_size);

void write_manifest(std::ostream& out, const ChunkManifest& manifest);
ChunkManifest read_manifest(std::istream& in);

// Embedding sidecar: {"encounter_id":..,"chunk_index":..,"vector":[..]}.
// Every manifest entry must receive exactly one vector of uniform dimension.
ChunkVectors ingest_vectors(std::istream& in, const ChunkManifest& manifest);
ChunkVectors ingest_vectors(const std::filesystem::path& path,
                            const ChunkManifest& manifest);

void write_vectors(std::ostream& out, const ChunkManifest& manifest,
                   const ChunkVectors& vectors);

// Component-wise mean. Throws on zero chunks or ragged input.
std::vector<double> pool_mean(std::span<const std::vector<double>> chunks);

// One pooled row per document, in document order. Documents with no chunks
// become all-zero rows of dimension `dim` (counted in empty_documents).
// `dim` may be 0 to infer it from the vectors.
FeatureMatrix pooled_features(std::span<const Document> documents,
                              std::span<const int> labels,
                              const ChunkVectors& vectors,
                              std::size_t dim = 0);

}  // namespace dyadscreen

#endif  // DYADSCREEN_EMBEDPOOL_H_
