#pragma once

// Exact top-k cosine retrieval over embedded corpus chunks.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "drugrag/embedding.hpp"
#include "drugrag/error.hpp"
#include "drugrag/kb.hpp"

namespace drugrag {

/// Splits a rendered corpus at newlines into chunks, one per nonempty line,
/// resolving each line's drug (and, for format B, term) against `kb`.
inline std::vector<Chunk> chunk_corpus(std::string_view corpus, CorpusFormat format, const KnowledgeBase& kb) {
  std::vector<Chunk> chunks;
  std::size_t number = 0;
  for (auto line : text::split(corpus, '\n')) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    Chunk chunk;
    chunk.format = format;
    chunk.text = std::string(line);
    if (format == CorpusFormat::kA) {
      const auto parsed = parse_format_a_line(line);
      const DrugRecord* drug = parsed ? kb.find_drug_by_name(parsed->drug_name) : nullptr;
      if (!drug) throw Error(ErrorCode::kMalformedCorpusLine, "line " + std::to_string(number) + " is not a format A line for a known drug");
      chunk.drug_id = drug->drug_id;
    } else {
      const auto parsed = parse_format_b_line(line, &kb);
      const DrugRecord* drug = parsed ? kb.find_drug_by_name(parsed->first) : nullptr;
      const SideEffectTerm* term = parsed ? kb.find_term_by_name(parsed->second) : nullptr;
      if (!drug || !term || !kb.contains(drug->drug_id, term->term_id)) {
        throw Error(ErrorCode::kMalformedCorpusLine,
                    "line " + std::to_string(number) + " is not a format B line for a known association");
      }
      chunk.drug_id = drug->drug_id;
      chunk.term_id = term->term_id;
    }
    chunk.chunk_id = make_chunk_id(format, chunk.drug_id, chunk.term_id);
    chunks.push_back(std::move(chunk));
  }
  if (chunks.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no nonempty lines");
  return chunks;
}

struct IndexEntry {
  Chunk chunk;
  EmbeddingVector vector;
  double norm = 0.0;
};

struct SearchHit {
  const Chunk* chunk = nullptr;
  double score = 0.0;
};

class VectorIndex {
 public:
  static constexpr std::string_view kMetric = "cosine";

  VectorIndex(std::size_t dimension, std::string provider_fingerprint)
      : dimension_(dimension), fingerprint_(std::move(provider_fingerprint)) {
    if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "index dimension must be positive");
  }

  void add(Chunk chunk, EmbeddingVector vector) {
    if (vector.size() != dimension_) {
      throw Error(ErrorCode::kDimensionMismatch, "chunk " + chunk.chunk_id + " has dimension " +
                                                     std::to_string(vector.size()) + ", index expects " +
                                                     std::to_string(dimension_));
    }
    for (float x : vector.values) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, "non-finite embedding for " + chunk.chunk_id);
    }
    const double norm = l2_norm(vector.values);
    if (norm == 0.0) throw Error(ErrorCode::kInvalidArgument, "zero embedding for " + chunk.chunk_id);
    if (!ids_.insert(chunk.chunk_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate chunk id " + chunk.chunk_id);
    }
    entries_.push_back(IndexEntry{std::move(chunk), std::move(vector), norm});
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dimension() const { return dimension_; }
  const std::string& fingerprint() const { return fingerprint_; }
  const std::vector<IndexEntry>& entries() const { return entries_; }

  /// Exact scan: descending cosine, ties by ascending chunk id; min(k, size) hits.
  std::vector<SearchHit> top_k(std::span<const float> query, std::size_t k = 5) const {
    if (entries_.empty()) throw Error(ErrorCode::kEmptyIndex, "index is empty");
    if (query.size() != dimension_) {
      throw Error(ErrorCode::kDimensionMismatch, "query has dimension " + std::to_string(query.size()) +
                                                     ", index expects " + std::to_string(dimension_));
    }
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
    const double qnorm = l2_norm(query);
    if (qnorm == 0.0) throw Error(ErrorCode::kInvalidArgument, "zero query vector");

    std::vector<SearchHit> hits(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      double dot = 0.0;
      for (std::size_t d = 0; d < dimension_; ++d) {
        dot += static_cast<double>(query[d]) * static_cast<double>(e.vector.values[d]);
      }
      hits[i] = SearchHit{&e.chunk, std::clamp(dot / (qnorm * e.norm), -1.0, 1.0)};
    }
    const std::size_t n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(),
                      [](const SearchHit& a, const SearchHit& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.chunk->chunk_id < b.chunk->chunk_id;
                      });
    hits.resize(n);
    return hits;
  }

  /// Embeds `query` with `provider` and searches; the provider must be the one
  /// that built the index.
  std::vector<SearchHit> search(const EmbeddingProvider& provider, std::string_view query, std::size_t k = 5) const {
    if (provider.fingerprint() != fingerprint_) {
      throw Error(ErrorCode::kProviderMismatch,
                  "index built with '" + fingerprint_ + "', query embedded with '" + provider.fingerprint() + "'");
    }
    const auto vec = provider.embed(query);
    return top_k(vec.values, k);
  }

  // Binary layout, little-endian:
  //   "DRAGIDX\0" | u32 version | u32 dimension | u64 count | str fingerprint | str metric
  //   then per entry: str chunk-json | dimension x f32
  // where str = u32 length + bytes.
  void save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(dimension_));
    put_u64(out, entries_.size());
    put_str(out, fingerprint_);
    put_str(out, kMetric);
    for (const auto& e : entries_) {
      put_str(out, chunk_to_json(e.chunk).dump());
      for (float x : e.vector.values) put_u32(out, std::bit_cast<std::uint32_t>(x));
    }
    if (!out) throw Error(ErrorCode::kIo, "failed writing vector index");
  }

  static VectorIndex load(std::istream& in) {
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || !std::equal(magic, magic + sizeof magic, kMagic)) throw Error(ErrorCode::kIo, "not a vector index file");
    const auto version = get_u32(in);
    if (version != kVersion) throw Error(ErrorCode::kIo, "unsupported index version " + std::to_string(version));
    const auto dimension = get_u32(in);
    const auto count = get_u64(in);
    VectorIndex index(dimension, get_str(in));
    if (get_str(in) != kMetric) throw Error(ErrorCode::kIo, "unsupported similarity metric");
    for (std::uint64_t i = 0; i < count; ++i) {
      Chunk chunk = chunk_from_json(nlohmann::ordered_json::parse(get_str(in)));
      EmbeddingVector v;
      v.values.resize(dimension);
      for (auto& x : v.values) x = std::bit_cast<float>(get_u32(in));
      index.add(std::move(chunk), std::move(v));
    }
    return index;
  }

 private:
  static constexpr char kMagic[8] = {'D', 'R', 'A', 'G', 'I', 'D', 'X', '\0'};
  static constexpr std::uint32_t kVersion = 1;

  static void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
  }
  static void put_u64(std::ostream& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
  }
  static void put_str(std::ostream& out, std::string_view s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  static std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw Error(ErrorCode::kIo, "truncated vector index");
    return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
  }
  static std::uint64_t get_u64(std::istream& in) {
    const std::uint64_t lo = get_u32(in);
    return lo | std::uint64_t{get_u32(in)} << 32;
  }
  static std::string get_str(std::istream& in) {
    const auto n = get_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw Error(ErrorCode::kIo, "truncated vector index");
    return s;
  }

  std::size_t dimension_;
  std::string fingerprint_;
  std::vector<IndexEntry> entries_;
  std::set<std::string> ids_;
};

/// Embeds every chunk with `provider`. Batches may run on several threads;
/// entries are always stored in input order.
inline VectorIndex build_index(const std::vector<Chunk>& chunks, const EmbeddingProvider& provider,
                               std::size_t threads = 1, std::size_t batch_size = 64) {
  if (chunks.empty()) throw Error(ErrorCode::kEmptyCorpus, "no chunks to index");
  std::vector<EmbeddingVector> vectors(chunks.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::size_t failure_at = chunks.size();

  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(batch_size);
      if (begin >= chunks.size()) return;
      const std::size_t end = std::min(begin + batch_size, chunks.size());
      std::vector<std::string> texts;
      for (std::size_t i = begin; i < end; ++i) texts.push_back(chunks[i].text);
      try {
        auto batch = provider.embed_batch(texts);
        if (batch.size() != texts.size()) {
          throw Error(ErrorCode::kProviderFailure, "provider returned " + std::to_string(batch.size()) +
                                                       " vectors for " + std::to_string(texts.size()) + " inputs");
        }
        for (std::size_t i = begin; i < end; ++i) vectors[i] = std::move(batch[i - begin]);
      } catch (...) {
        // Retry one by one so the error names the chunk that fails.
        std::size_t at = begin;
        std::exception_ptr cause = std::current_exception();
        for (std::size_t i = begin; i < end && end - begin > 1; ++i) {
          try {
            (void)provider.embed(chunks[i].text);
          } catch (...) {
            at = i;
            cause = std::current_exception();
            break;
          }
        }
        std::lock_guard lock(failure_mutex);
        if (at < failure_at) {
          failure_at = at;
          failure = cause;
        }
        return;
      }
    }
  };
  threads = std::max<std::size_t>(1, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kDimensionMismatch) throw;
      throw Error(ErrorCode::kProviderFailure, "embedding chunk " + chunks[failure_at].chunk_id + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kProviderFailure, "embedding chunk " + chunks[failure_at].chunk_id + ": " + e.what());
    }
  }

  VectorIndex index(provider.dimension(), provider.fingerprint());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (vectors[i].size() != provider.dimension()) {
      throw Error(ErrorCode::kDimensionMismatch, "provider returned dimension " + std::to_string(vectors[i].size()) +
                                                     " for chunk " + chunks[i].chunk_id + ", expected " +
                                                     std::to_string(provider.dimension()));
    }
    index.add(chunks[i], std::move(vectors[i]));
  }
  return index;
}

}  // namespace drugrag
