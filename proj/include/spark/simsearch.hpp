// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "spark/corpus.hpp"
#include "spark/filtering.hpp"

namespace spark {

/// Half-open span [start, start + length) in embedder units.
struct ChunkSpan {
  std::size_t start = 0;
  std::size_t length = 0;

  bool operator==(const ChunkSpan&) const = default;
};

/// Sliding windows of `window` units where consecutive windows share exactly
/// `overlap` units. The last window may be shorter. Text no longer than the
/// window (including empty text) yields one span. Throws Error{InvalidWindow}
/// when window <= overlap.
std::vector<ChunkSpan> chunk_spans(std::size_t length, std::size_t window, std::size_t overlap);

/// Character-unit chunking of UTF-8 text; returns UTF-8 chunks.
std::vector<std::string> chunk_text(std::string_view text, std::size_t window, std::size_t overlap);

/// Maps a chunk of text to a fixed-size vector. Implementations must be
/// deterministic for a given name().
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  /// Chunk window, counted in Unicode scalar values.
  virtual std::size_t max_chunk_len() const = 0;
  virtual std::vector<float> encode_chunk(std::string_view text) const = 0;

  /// Batched form; the default loops over encode_chunk.
  virtual std::vector<std::vector<float>> encode_batch(const std::vector<std::string>& chunks) const;
};

/// Character-trigram feature hashing into `dimension` buckets, L2 normalized.
/// Strings with fewer than three characters hash as a single feature.
class NgramHashEmbedder final : public Embedder {
 public:
  explicit NgramHashEmbedder(std::size_t dimension = 1024, std::size_t max_chunk_len = 8192);

  std::string name() const override { return "ngram3-fnv1a"; }
  std::size_t dimension() const override { return dimension_; }
  std::size_t max_chunk_len() const override { return max_chunk_len_; }
  std::vector<float> encode_chunk(std::string_view text) const override;

 private:
  std::size_t dimension_;
  std::size_t max_chunk_len_;
};

struct EmbeddingRecord {
  std::string test_id;
  std::vector<float> vector;  // unit length unless every chunk encoded to zero
  std::uint32_t chunk_count = 0;

  bool operator==(const EmbeddingRecord&) const = default;
};

/// The text embedded for a test case: error message, newline, then the lines
/// joined by newlines.
std::string embedding_input(const TestCase& tc);

/// Chunks embedding_input(tc) with a 10% overlap, mean-pools the chunk
/// vectors and renormalizes. Embedder failures are rethrown as
/// Error{EmbedderFailure} naming the test id.
EmbeddingRecord embed_test(const TestCase& tc, const Embedder& embedder);

/// Cosine similarity; 0 when either vector has zero norm. Throws
/// Error{DimensionMismatch}.
double cosine(std::span<const float> u, std::span<const float> v);

/// Embedding records for a corpus, keyed by test id.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  EmbeddingIndex(std::string embedder_name, std::size_t dimension)
      : embedder_name_(std::move(embedder_name)), dimension_(dimension) {}

  /// Replaces an existing record with the same id. Throws
  /// Error{DimensionMismatch}.
  void put(EmbeddingRecord record);
  const EmbeddingRecord* find(std::string_view id) const;

  const std::string& embedder_name() const { return embedder_name_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return records_.size(); }
  /// Records sorted by test id.
  std::vector<const EmbeddingRecord*> sorted_records() const;

  bool operator==(const EmbeddingIndex& other) const;

 private:
  std::string embedder_name_;
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, EmbeddingRecord> records_;
};

/// Embeds every case of the corpus, using up to `parallelism` threads.
EmbeddingIndex build_index(const Corpus& corpus, const Embedder& embedder, unsigned parallelism = 1);

/// Binary sidecar: magic "SPKEMB01", u32 name length, name bytes, u32 d,
/// u64 count, then per record u32 id length, id bytes, u32 chunk_count and
/// d little-endian float32 values. Records are written sorted by id.
void write_index(std::ostream& out, const EmbeddingIndex& index);
EmbeddingIndex read_index(std::istream& in);
void save_index(const std::filesystem::path& path, const EmbeddingIndex& index);
EmbeddingIndex load_index(const std::filesystem::path& path);
nlohmann::json index_to_json(const EmbeddingIndex& index);

struct SimilarityHit {
  std::string test_id;
  double score = 0.0;
};

/// Nearest-neighbour retrieval over a knowledge base. Implementations return
/// at most r hits, best first.
class SimilarityIndex {
 public:
  virtual ~SimilarityIndex() = default;
  virtual std::vector<SimilarityHit> search(std::string_view query_id, std::span<const float> query,
                                            const KnowledgeBase& kb, std::size_t r) const = 0;
};

/// Brute-force cosine KNN. Ties on score are broken by earlier failure
/// timestamp, then by id. Throws Error{MissingEmbedding} for kb members
/// without a record and Error{Leakage} if the kb contains the query id.
class ExactSimilarityIndex final : public SimilarityIndex {
 public:
  ExactSimilarityIndex(const EmbeddingIndex& embeddings, const Corpus& corpus)
      : embeddings_(embeddings), corpus_(corpus) {}

  std::vector<SimilarityHit> search(std::string_view query_id, std::span<const float> query,
                                    const KnowledgeBase& kb, std::size_t r) const override;

 private:
  const EmbeddingIndex& embeddings_;
  const Corpus& corpus_;
};

}  // namespace spark
