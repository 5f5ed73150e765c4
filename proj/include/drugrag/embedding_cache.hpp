#pragma once

// On-disk cache in front of a (typically remote) embedding provider. Entries
// live under dir/<fingerprint hash>/<text hash>.vec and hold the text itself,
// so a hash collision reads as a miss. No eviction.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drugrag/embedding.hpp"
#include "drugrag/error.hpp"
#include "drugrag/text.hpp"

namespace drugrag {

class CachedEmbeddingProvider final : public EmbeddingProvider {
 public:
  CachedEmbeddingProvider(std::shared_ptr<const EmbeddingProvider> inner, const std::filesystem::path& dir)
      : inner_(std::move(inner)) {
    if (!inner_) throw Error(ErrorCode::kInvalidArgument, "no embedding provider to cache");
    dir_ = dir / text::hex64(text::fnv1a64(inner_->fingerprint()));
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create embedding cache " + dir_.string() + ": " + ec.message());
  }

  std::string fingerprint() const override { return inner_->fingerprint(); }
  std::size_t dimension() const override { return inner_->dimension(); }
  std::size_t max_input_chars() const override { return inner_->max_input_chars(); }

  EmbeddingVector embed(std::string_view text) const override {
    const std::string one(text);
    return std::move(embed_batch(std::span<const std::string>(&one, 1)).front());
  }

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::size_t> missing;
    std::vector<std::string> missing_texts;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto hit = read(texts[i])) {
        out[i] = std::move(*hit);
        hits_.fetch_add(1);
      } else {
        missing.push_back(i);
        missing_texts.push_back(texts[i]);
      }
    }
    if (missing.empty()) return out;
    auto fresh = inner_->embed_batch(missing_texts);
    for (std::size_t j = 0; j < missing.size(); ++j) {
      write(missing_texts[j], fresh[j]);
      out[missing[j]] = std::move(fresh[j]);
    }
    return out;
  }

  std::size_t hits() const { return hits_.load(); }

 private:
  std::filesystem::path entry_path(std::string_view text) const {
    return dir_ / (text::hex64(text::fnv1a64(text)) + ".vec");
  }

  std::optional<EmbeddingVector> read(std::string_view text) const {
    std::ifstream in(entry_path(text), std::ios::binary);
    if (!in) return std::nullopt;
    std::uint64_t len = 0, dim = 0;
    if (!in.read(reinterpret_cast<char*>(&len), sizeof len) || len != text.size()) return std::nullopt;
    std::string stored(len, '\0');
    if (!in.read(stored.data(), static_cast<std::streamsize>(len)) || stored != text) return std::nullopt;
    if (!in.read(reinterpret_cast<char*>(&dim), sizeof dim) || dim != inner_->dimension()) return std::nullopt;
    EmbeddingVector v;
    v.values.resize(dim);
    if (!in.read(reinterpret_cast<char*>(v.values.data()), static_cast<std::streamsize>(dim * sizeof(float)))) {
      return std::nullopt;
    }
    return v;
  }

  // Write to a private temp file, then rename, so readers never see a partial entry.
  void write(std::string_view text, const EmbeddingVector& v) const {
    const auto path = entry_path(text);
    auto tmp = path;
    tmp += ".tmp" + text::hex64(nonce_) + "." + std::to_string(counter_.fetch_add(1));
    std::error_code ec;
    {
      std::ofstream out(tmp, std::ios::binary);
      const std::uint64_t len = text.size(), dim = v.size();
      out.write(reinterpret_cast<const char*>(&len), sizeof len);
      out.write(text.data(), static_cast<std::streamsize>(len));
      out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
      out.write(reinterpret_cast<const char*>(v.values.data()), static_cast<std::streamsize>(dim * sizeof(float)));
      if (!out) {
        out.close();
        std::filesystem::remove(tmp, ec);  // a cache that cannot write just stays cold
        return;
      }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
  }

  std::shared_ptr<const EmbeddingProvider> inner_;
  std::filesystem::path dir_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::uint64_t> counter_{0};
  std::uint64_t nonce_ = (std::uint64_t{std::random_device{}()} << 32) | std::random_device{}();
};

}  // namespace drugrag
