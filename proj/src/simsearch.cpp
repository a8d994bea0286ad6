// SPDX-License-Identifier: Apache-2.0
#include "spark/simsearch.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "spark/error.hpp"
#include "spark/file_io.hpp"
#include "spark/hashing.hpp"
#include "spark/text.hpp"

namespace spark {

std::vector<ChunkSpan> chunk_spans(std::size_t length, std::size_t window, std::size_t overlap) {
  if (window <= overlap) {
    throw Error(ErrorCode::InvalidWindow,
                "window " + std::to_string(window) + " must exceed overlap " + std::to_string(overlap));
  }
  std::vector<ChunkSpan> spans;
  const std::size_t step = window - overlap;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = std::min(start + window, length);
    spans.push_back({start, end - start});
    if (end >= length) break;
    start += step;
  }
  return spans;
}

std::vector<std::string> chunk_text(std::string_view text, std::size_t window, std::size_t overlap) {
  const std::u32string units = text::decode_utf8(text);
  std::vector<std::string> chunks;
  for (const auto& span : chunk_spans(units.size(), window, overlap)) {
    chunks.push_back(text::encode_utf8(std::u32string_view(units).substr(span.start, span.length)));
  }
  return chunks;
}

std::vector<std::vector<float>> Embedder::encode_batch(const std::vector<std::string>& chunks) const {
  std::vector<std::vector<float>> out;
  out.reserve(chunks.size());
  for (const auto& c : chunks) out.push_back(encode_chunk(c));
  return out;
}

NgramHashEmbedder::NgramHashEmbedder(std::size_t dimension, std::size_t max_chunk_len)
    : dimension_(dimension), max_chunk_len_(max_chunk_len) {
  if (dimension_ == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
  if (max_chunk_len_ < 2) throw Error(ErrorCode::InvalidArgument, "chunk length must be >= 2");
}

std::vector<float> NgramHashEmbedder::encode_chunk(std::string_view chunk) const {
  std::vector<float> v(dimension_, 0.0f);
  const std::u32string units = text::decode_utf8(chunk);
  auto bump = [&](std::u32string_view gram) {
    const std::string bytes = text::encode_utf8(gram);
    v[hashing::fnv1a64(bytes) % dimension_] += 1.0f;
  };
  if (units.size() < 3) {
    if (!units.empty()) bump(units);
  } else {
    const std::u32string_view view(units);
    for (std::size_t i = 0; i + 3 <= units.size(); ++i) bump(view.substr(i, 3));
  }
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  if (norm > 0.0) {
    const double inv = 1.0 / std::sqrt(norm);
    for (float& x : v) x = static_cast<float>(x * inv);
  }
  return v;
}

std::string embedding_input(const TestCase& tc) {
  return tc.error_message + "\n" + text::join(tc.lines, "\n");
}

EmbeddingRecord embed_test(const TestCase& tc, const Embedder& embedder) {
  const std::size_t window = embedder.max_chunk_len();
  const auto overlap = static_cast<std::size_t>(std::llround(0.10 * static_cast<double>(window)));
  const auto chunks = chunk_text(embedding_input(tc), window, overlap);

  std::vector<std::vector<float>> vectors;
  try {
    vectors = embedder.encode_batch(chunks);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::EmbedderFailure, "test '" + tc.id + "': " + e.what());
  }
  if (vectors.size() != chunks.size()) {
    throw Error(ErrorCode::EmbedderFailure, "test '" + tc.id + "': embedder returned " +
                                                std::to_string(vectors.size()) + " vectors for " +
                                                std::to_string(chunks.size()) + " chunks");
  }
  const std::size_t d = embedder.dimension();
  std::vector<double> acc(d, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != d) {
      throw Error(ErrorCode::EmbedderFailure, "test '" + tc.id + "': expected dimension " + std::to_string(d) +
                                                  ", got " + std::to_string(v.size()));
    }
    for (std::size_t i = 0; i < d; ++i) acc[i] += v[i];
  }
  double norm = 0.0;
  for (double x : acc) norm += x * x;
  norm = std::sqrt(norm);

  EmbeddingRecord rec;
  rec.test_id = tc.id;
  rec.chunk_count = static_cast<std::uint32_t>(chunks.size());
  rec.vector.resize(d);
  // The mean's direction equals the sum's; normalizing the sum is enough.
  for (std::size_t i = 0; i < d; ++i) rec.vector[i] = norm > 0.0 ? static_cast<float>(acc[i] / norm) : 0.0f;
  return rec;
}

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

void EmbeddingIndex::put(EmbeddingRecord record) {
  if (record.vector.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, "record '" + record.test_id + "' has dimension " +
                                                  std::to_string(record.vector.size()) + ", index expects " +
                                                  std::to_string(dimension_));
  }
  auto id = record.test_id;
  records_.insert_or_assign(std::move(id), std::move(record));
}

const EmbeddingRecord* EmbeddingIndex::find(std::string_view id) const {
  auto it = records_.find(std::string(id));
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<const EmbeddingRecord*> EmbeddingIndex::sorted_records() const {
  std::vector<const EmbeddingRecord*> out;
  out.reserve(records_.size());
  for (const auto& [id, rec] : records_) out.push_back(&rec);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->test_id < b->test_id; });
  return out;
}

bool EmbeddingIndex::operator==(const EmbeddingIndex& other) const {
  return embedder_name_ == other.embedder_name_ && dimension_ == other.dimension_ && records_ == other.records_;
}

EmbeddingIndex build_index(const Corpus& corpus, const Embedder& embedder, unsigned parallelism) {
  const auto& cases = corpus.cases();
  std::vector<EmbeddingRecord> records(cases.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      try {
        records[i] = embed_test(cases[i], embedder);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(cases.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EmbeddingIndex index(embedder.name(), embedder.dimension());
  for (auto& r : records) index.put(std::move(r));
  return index;
}

namespace {

constexpr char kMagic[8] = {'S', 'P', 'K', 'E', 'M', 'B', '0', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw Error(ErrorCode::MalformedRecord, "truncated embedding sidecar");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string get_string(std::istream& in, std::uint32_t len) {
  std::string s(len, '\0');
  if (len && !in.read(s.data(), len)) throw Error(ErrorCode::MalformedRecord, "truncated embedding sidecar");
  return s;
}

}  // namespace

void write_index(std::ostream& out, const EmbeddingIndex& index) {
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.embedder_name().size()));
  out.write(index.embedder_name().data(), static_cast<std::streamsize>(index.embedder_name().size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dimension()));
  put_le<std::uint64_t>(out, index.size());
  for (const auto* rec : index.sorted_records()) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec->test_id.size()));
    out.write(rec->test_id.data(), static_cast<std::streamsize>(rec->test_id.size()));
    put_le<std::uint32_t>(out, rec->chunk_count);
    for (float x : rec->vector) put_le<float>(out, x);
  }
}

EmbeddingIndex read_index(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::MalformedRecord, "not an embedding sidecar (bad magic)");
  }
  std::string name = get_string(in, get_le<std::uint32_t>(in));
  const auto dim = get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  EmbeddingIndex index(std::move(name), dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    EmbeddingRecord rec;
    rec.test_id = get_string(in, get_le<std::uint32_t>(in));
    rec.chunk_count = get_le<std::uint32_t>(in);
    rec.vector.resize(dim);
    for (auto& x : rec.vector) x = get_le<float>(in);
    if (index.find(rec.test_id)) throw Error(ErrorCode::DuplicateId, rec.test_id);
    index.put(std::move(rec));
  }
  return index;
}

void save_index(const std::filesystem::path& path, const EmbeddingIndex& index) {
  std::ostringstream ss(std::ios::binary);
  write_index(ss, index);
  io::write_file_atomic(path, ss.str());
}

EmbeddingIndex load_index(const std::filesystem::path& path) {
  std::istringstream ss(io::read_file(path), std::ios::binary);
  return read_index(ss);
}

nlohmann::json index_to_json(const EmbeddingIndex& index) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto* rec : index.sorted_records()) {
    records.push_back({{"test_id", rec->test_id}, {"chunk_count", rec->chunk_count}, {"vector", rec->vector}});
  }
  return {{"embedder", index.embedder_name()},
          {"dimension", index.dimension()},
          {"count", index.size()},
          {"records", std::move(records)}};
}

std::vector<SimilarityHit> ExactSimilarityIndex::search(std::string_view query_id, std::span<const float> query,
                                                        const KnowledgeBase& kb, std::size_t r) const {
  struct Scored {
    SimilarityHit hit;
    std::int64_t ts;
  };
  std::vector<Scored> scored;
  scored.reserve(kb.members.size());
  for (const auto& id : kb.members) {
    if (id == query_id || id == kb.query_id) {
      throw Error(ErrorCode::Leakage, "knowledge base for '" + std::string(query_id) + "' contains the query");
    }
    const EmbeddingRecord* rec = embeddings_.find(id);
    if (!rec) throw Error(ErrorCode::MissingEmbedding, id);
    const TestCase* tc = corpus_.find(id);
    scored.push_back({{id, cosine(query, rec->vector)}, tc ? tc->failure_ts.epoch_ms : 0});
  }
  auto better = [](const Scored& a, const Scored& b) {
    if (a.hit.score != b.hit.score) return a.hit.score > b.hit.score;
    if (a.ts != b.ts) return a.ts < b.ts;
    return a.hit.test_id < b.hit.test_id;
  };
  const std::size_t keep = std::min(r, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
  std::vector<SimilarityHit> hits;
  hits.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) hits.push_back(std::move(scored[i].hit));
  return hits;
}

}  // namespace spark
