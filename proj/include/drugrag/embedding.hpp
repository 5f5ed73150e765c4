#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drugrag/error.hpp"
#include "drugrag/text.hpp"

namespace drugrag {

inline constexpr std::size_t kDefaultDimension = 1536;

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

inline double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

inline double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "cosine of vectors with different lengths");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  const double denom = l2_norm(a) * l2_norm(b);
  if (denom == 0.0) throw Error(ErrorCode::kInvalidArgument, "cosine of a zero vector");
  return std::clamp(dot / denom, -1.0, 1.0);
}

/// Turns text into vectors. Implementations are deterministic (same text, same
/// vector) and callable from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// Identifies model and settings; an index only accepts queries embedded by
  /// a provider with the same fingerprint.
  virtual std::string fingerprint() const = 0;
  virtual std::size_t dimension() const = 0;
  /// Longest accepted input, in characters.
  virtual std::size_t max_input_chars() const = 0;

  virtual EmbeddingVector embed(std::string_view text) const = 0;

  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
  }
};

/// Signed feature hashing over lowercase word tokens. Each token adds +-1 to
/// `kCoordsPerToken` coordinates chosen by a seeded hash; the sum is
/// L2-normalized. Texts sharing more tokens get higher cosine similarity.
class HashEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kCoordsPerToken = 8;
  static constexpr std::uint64_t kDefaultSeed = 0x5eed0f5dde0ffec7ULL;

  explicit HashEmbedder(std::size_t dimension = kDefaultDimension, std::uint64_t seed = kDefaultSeed)
      : dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
  }

  std::string fingerprint() const override {
    return "hash-embed/v1/dim=" + std::to_string(dimension_) + "/seed=" + text::hex64(seed_);
  }
  std::size_t dimension() const override { return dimension_; }
  std::size_t max_input_chars() const override { return std::size_t{1} << 24; }

  /// Zero vector when the text has no word tokens.
  EmbeddingVector embed(std::string_view input) const override {
    std::vector<double> acc(dimension_, 0.0);
    for (const auto& token : text::word_tokens(input)) {
      std::uint64_t state = text::fnv1a64(token) ^ seed_;
      for (std::size_t i = 0; i < kCoordsPerToken; ++i) {
        state = text::splitmix64(state);
        const std::size_t coord = static_cast<std::size_t>(state % dimension_);
        acc[coord] += (state >> 63) ? -1.0 : 1.0;
      }
    }
    double norm = 0.0;
    for (double x : acc) norm += x * x;
    norm = std::sqrt(norm);
    EmbeddingVector out;
    out.values.resize(dimension_);
    for (std::size_t i = 0; i < dimension_; ++i) out.values[i] = norm > 0.0 ? static_cast<float>(acc[i] / norm) : 0.0f;
    return out;
  }

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

inline EmbeddingVector hash_embed(std::string_view text, std::size_t dimension = kDefaultDimension) {
  return HashEmbedder(dimension).embed(text);
}

}  // namespace drugrag
