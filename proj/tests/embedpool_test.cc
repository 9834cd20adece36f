#include "dyadscreen/embedpool.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <sstream>

#include "dyadscreen/error.h"
#include "dyadscreen/random.h"
#include "support/oracles.h"

namespace dyadscreen {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

std::vector<std::string> numbered_tokens(std::size_t n) {
  std::vector<std::string> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("w" + std::to_string(i));
  return t;
}

Document doc_with(const std::string& id, std::size_t n) {
  Document d;
  d.encounter_id = id;
  d.tokens = numbered_tokens(n);
  return d;
}

std::string ingest_error(const std::string& sidecar, const ChunkManifest& m) {
  std::istringstream in(sidecar);
  try {
    ingest_vectors(in, m);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(Chunking, MeanTranscriptLength) {
  const auto chunks = chunk_tokens(numbered_tokens(2374), 128);
  ASSERT_EQ(chunks.size(), 19u);
  EXPECT_EQ(chunks.back().size(), 70u);
  for (std::size_t i = 0; i + 1 < chunks.size(); ++i) EXPECT_EQ(chunks[i].size(), 128u);
}

TEST(Chunking, ExactFitAndEmpty) {
  EXPECT_EQ(chunk_tokens(numbered_tokens(128), 128).size(), 1u);
  EXPECT_TRUE(chunk_tokens(numbered_tokens(0), 128).empty());
  EXPECT_THROW(chunk_tokens(numbered_tokens(3), 0), Error);
}

TEST(Chunking, ConcatenationIsIdentity) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto tokens = numbered_tokens(rng.index(300));
    const std::size_t size = 1 + rng.index(64);
    const auto chunks = chunk_tokens(tokens, size);
    EXPECT_EQ(chunks.size(), (tokens.size() + size - 1) / size);
    std::vector<std::string> joined;
    for (const auto& c : chunks) joined.insert(joined.end(), c.begin(), c.end());
    EXPECT_EQ(joined, tokens);
  }
}

TEST(Manifest, ContiguousIndicesAndRoundTrip) {
  const std::vector<Document> docs = {doc_with("a", 5), doc_with("b", 0), doc_with("c", 2)};
  const auto m = build_manifest(docs, 2);
  ASSERT_EQ(m.entries.size(), 4u);
  EXPECT_EQ(m.entries[0].text, "w0 w1");
  EXPECT_EQ(m.entries[2].chunk_index, 2u);
  EXPECT_EQ(m.entries[2].text, "w4");
  EXPECT_EQ(m.entries[3].encounter_id, "c");
  std::stringstream buffer;
  write_manifest(buffer, m);
  const auto back = read_manifest(buffer);
  ASSERT_EQ(back.entries.size(), m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].encounter_id, m.entries[i].encounter_id);
    EXPECT_EQ(back.entries[i].chunk_index, m.entries[i].chunk_index);
    EXPECT_EQ(back.entries[i].text, m.entries[i].text);
  }
}

ChunkManifest two_chunks() {
  ChunkManifest m;
  m.entries = {{"enc-0001", 0, "a"}, {"enc-0001", 1, "b"}};
  return m;
}

TEST(Ingest, BothChunks) {
  std::istringstream in(
      R"({"encounter_id":"enc-0001","chunk_index":1,"vector":[5,6,7,8]})" "\n"
      R"({"encounter_id":"enc-0001","chunk_index":0,"vector":[1,2,3,4]})" "\n");
  const auto v = ingest_vectors(in, two_chunks());
  ASSERT_EQ(v.size(), 1u);
  const auto& chunks = v.at("enc-0001");
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_THAT(chunks[0], ElementsAre(1, 2, 3, 4));
  EXPECT_THAT(chunks[1], ElementsAre(5, 6, 7, 8));
}

TEST(Ingest, MissingChunk) {
  EXPECT_THAT(
      ingest_error(R"({"encounter_id":"enc-0001","chunk_index":0,"vector":[1,2,3,4]})",
                   two_chunks()),
      HasSubstr("missing vector enc-0001#1"));
}

TEST(Ingest, DimensionMismatch) {
  EXPECT_THAT(
      ingest_error(
          R"({"encounter_id":"enc-0001","chunk_index":0,"vector":[1,2,3,4]})" "\n"
          R"({"encounter_id":"enc-0001","chunk_index":1,"vector":[1,2,3,4,5]})",
          two_chunks()),
      HasSubstr("expected 4, got 5"));
}

TEST(Ingest, UnknownDuplicateAndNonFinite) {
  EXPECT_THAT(ingest_error(R"({"encounter_id":"zzz","chunk_index":0,"vector":[1]})",
                           two_chunks()),
              HasSubstr("unknown chunk zzz#0"));
  const std::string line =
      R"({"encounter_id":"enc-0001","chunk_index":0,"vector":[1]})" "\n";
  EXPECT_THAT(ingest_error(line + line, two_chunks()), HasSubstr("duplicate"));
  EXPECT_THAT(ingest_error("{oops", two_chunks()), HasSubstr("malformed record at line 1"));
}

TEST(PoolMean, Examples) {
  const std::vector<std::vector<double>> a = {{1, 2}, {3, 4}};
  EXPECT_THAT(pool_mean(a), ElementsAre(2, 3));
  const std::vector<std::vector<double>> b = {{5, -1}};
  EXPECT_THAT(pool_mean(b), ElementsAre(5, -1));
  const std::vector<std::vector<double>> c = {{1, 1}, {1, 1}, {4, 7}};
  EXPECT_THAT(pool_mean(c), ElementsAre(2, 3));
}

TEST(PoolMean, ZeroChunksIsAnError) {
  const std::vector<std::vector<double>> none;
  try {
    pool_mean(none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_THAT(e.message(), HasSubstr("zero-fill"));
  }
}

TEST(PoolMeanProperty, OrderDuplicationAndBound) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(6);
    const std::size_t dim = 1 + rng.index(5);
    std::vector<std::vector<double>> chunks(n, std::vector<double>(dim));
    double bound = 0.0;
    for (auto& c : chunks) {
      for (auto& x : c) {
        x = rng.normal() * 3.0;
        bound = std::max(bound, std::abs(x));
      }
    }
    const auto base = pool_mean(chunks);
    auto shuffled = chunks;
    rng.shuffle(std::span<std::vector<double>>(shuffled));
    auto doubled = chunks;
    doubled.insert(doubled.end(), chunks.begin(), chunks.end());
    const auto perm = pool_mean(shuffled);
    const auto dup = pool_mean(doubled);
    for (std::size_t j = 0; j < dim; ++j) {
      EXPECT_NEAR(perm[j], base[j], 1e-12);
      EXPECT_NEAR(dup[j], base[j], 1e-12);
      EXPECT_LE(std::abs(base[j]), bound + 1e-12);
    }
  }
}

TEST(PooledFeatures, PseudoEmbeddingPathZeroFillsEmpty) {
  const std::vector<Document> docs = {doc_with("a", 300), doc_with("b", 0), doc_with("c", 10)};
  const auto manifest = build_manifest(docs, 128);
  ChunkVectors vectors;
  std::stringstream sidecar;
  for (const auto& e : manifest.entries) {
    vectors[e.encounter_id].push_back(testing::pseudo_embedding(e.text, 6));
  }
  write_vectors(sidecar, manifest, vectors);
  const auto ingested = ingest_vectors(sidecar, manifest);
  EXPECT_EQ(ingested, vectors);

  const std::vector<int> labels = {1, 0, 0};
  const auto m = pooled_features(docs, labels, ingested, 6);
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.cols(), 6u);
  EXPECT_EQ(m.empty_documents, 1u);
  EXPECT_EQ(m.feature_names.front(), "emb_0");
  EXPECT_TRUE(m.values.row(1).isZero());
  const auto pooled = pool_mean(vectors.at("a"));
  for (int j = 0; j < 6; ++j) EXPECT_DOUBLE_EQ(m.values(0, j), pooled[j]);
}

TEST(PooledFeatures, MissingVectorsForNonEmptyDocument) {
  const std::vector<Document> docs = {doc_with("a", 3), doc_with("b", 3)};
  ChunkVectors vectors;
  vectors["a"] = {{1.0, 2.0}};
  const std::vector<int> labels = {1, 0};
  EXPECT_THROW(pooled_features(docs, labels, vectors), Error);
}

}  // namespace
}  // namespace dyadscreen
