#pragma once

// Key-value configuration shared by the CLI and the service.
//
//   # comment
//   data_dir = data
//   backend = http
//   chat.endpoint = https://llm.example.org/v1
//   chat.model = some-model
//   chat.api_key_env = MY_CHAT_KEY
//
// Secrets are never read from the file itself: keys only name the environment
// variable holding them.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "drugrag/error.hpp"
#include "drugrag/prompts.hpp"
#include "drugrag/text.hpp"

namespace drugrag {

struct RemoteConfig {
  std::string endpoint;
  std::string model;
  std::string api_key_env;
  double timeout_seconds = 60.0;
};

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  std::string backend = "deterministic";  // deterministic | http | always-yes | always-no
  std::string embedder = "hash";          // hash | http
  std::size_t dimension = 1536;
  RemoteConfig chat;
  RemoteConfig embed;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string pipeline = "graphrag";
  std::size_t k = 5;
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> static_dir;

  std::filesystem::path kb_path() const { return data_dir / "kb.tsv"; }
  std::filesystem::path corpus_path(char format) const {
    return data_dir / (std::string("corpus_") + static_cast<char>(text::to_lower(format)) + ".txt");
  }
  std::filesystem::path index_path(char format) const {
    return data_dir / (std::string("index_") + static_cast<char>(text::to_lower(format)) + ".bin");
  }
  std::filesystem::path graph_path() const { return data_dir / "graph.jsonl"; }
  std::filesystem::path dataset_path(std::uint64_t seed) const {
    return data_dir / ("dataset_seed" + std::to_string(seed) + ".jsonl");
  }
};

namespace detail {

inline bool looks_like_secret(std::string_view key) {
  const auto last = key.substr(key.rfind('.') == std::string_view::npos ? 0 : key.rfind('.') + 1);
  return last == "api_key" || last == "key" || last == "token" || last == "password" || last == "secret";
}

inline std::size_t to_size(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(std::string(value), &used);
    if (used != value.size() || v < 0) throw std::invalid_argument("range");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, std::string(key) + ": expected a non-negative integer, got '" + std::string(value) + "'");
  }
}

inline double to_double(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(value), &used);
    if (used != value.size() || !(v > 0)) throw std::invalid_argument("range");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, std::string(key) + ": expected a positive number, got '" + std::string(value) + "'");
  }
}

}  // namespace detail

inline void apply_config_value(ServiceConfig& cfg, std::string_view key, std::string_view value) {
  if (detail::looks_like_secret(key)) {
    throw Error(ErrorCode::kConfig, std::string(key) + ": credentials must not be inlined; set " +
                                        std::string(key) + "_env to the name of an environment variable");
  }
  const std::string v(value);
  if (key == "data_dir") cfg.data_dir = v;
  else if (key == "backend") {
    if (v != "deterministic" && v != "http" && v != "always-yes" && v != "always-no") {
      throw Error(ErrorCode::kConfig, "backend: unknown backend '" + v + "'");
    }
    cfg.backend = v;
  } else if (key == "embedder") {
    if (v != "hash" && v != "http") throw Error(ErrorCode::kConfig, "embedder: unknown embedder '" + v + "'");
    cfg.embedder = v;
  } else if (key == "dimension") {
    cfg.dimension = detail::to_size(key, value);
    if (cfg.dimension == 0) throw Error(ErrorCode::kConfig, "dimension must be positive");
  } else if (key == "chat.endpoint") cfg.chat.endpoint = v;
  else if (key == "chat.model") cfg.chat.model = v;
  else if (key == "chat.api_key_env") cfg.chat.api_key_env = v;
  else if (key == "chat.timeout") cfg.chat.timeout_seconds = detail::to_double(key, value);
  else if (key == "embed.endpoint") cfg.embed.endpoint = v;
  else if (key == "embed.model") cfg.embed.model = v;
  else if (key == "embed.api_key_env") cfg.embed.api_key_env = v;
  else if (key == "embed.timeout") cfg.embed.timeout_seconds = detail::to_double(key, value);
  else if (key == "host") cfg.host = v;
  else if (key == "port") {
    const auto p = detail::to_size(key, value);
    if (p == 0 || p > 65535) throw Error(ErrorCode::kConfig, "port out of range");
    cfg.port = static_cast<int>(p);
  } else if (key == "pipeline") {
    if (!parse_pipeline(v)) throw Error(ErrorCode::kConfig, "pipeline: unknown pipeline '" + v + "'");
    cfg.pipeline = v;
  } else if (key == "k") {
    cfg.k = detail::to_size(key, value);
    if (cfg.k == 0) throw Error(ErrorCode::kConfig, "k must be at least 1");
  } else if (key == "jobs") cfg.jobs = std::max<std::size_t>(1, detail::to_size(key, value));
  else if (key == "static_dir") cfg.static_dir = v;
  else throw Error(ErrorCode::kConfig, "unknown configuration key '" + std::string(key) + "'");
}

inline ServiceConfig parse_config(std::istream& in, ServiceConfig cfg = {}) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = text::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, "config line " + std::to_string(number) + ": expected key = value");
    }
    apply_config_value(cfg, text::trim(view.substr(0, eq)), text::trim(view.substr(eq + 1)));
  }
  return cfg;
}

inline ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config file " + path.string());
  return parse_config(in);
}

/// DRUGRAG_CHAT_ENDPOINT, DRUGRAG_CHAT_MODEL, DRUGRAG_EMBED_ENDPOINT and
/// DRUGRAG_EMBED_MODEL override the file.
inline void apply_env_overrides(ServiceConfig& cfg) {
  auto env = [](const char* name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name); v && *v) return std::string(v);
    return std::nullopt;
  };
  if (auto v = env("DRUGRAG_CHAT_ENDPOINT")) cfg.chat.endpoint = *v;
  if (auto v = env("DRUGRAG_CHAT_MODEL")) cfg.chat.model = *v;
  if (auto v = env("DRUGRAG_EMBED_ENDPOINT")) cfg.embed.endpoint = *v;
  if (auto v = env("DRUGRAG_EMBED_MODEL")) cfg.embed.model = *v;
}

/// Value of the environment variable a credential reference names; empty when
/// no reference is configured.
inline std::string resolve_credential(const RemoteConfig& remote) {
  if (remote.api_key_env.empty()) return {};
  const char* v = std::getenv(remote.api_key_env.c_str());
  if (!v || !*v) {
    throw Error(ErrorCode::kConfig, "environment variable " + remote.api_key_env + " is not set");
  }
  return v;
}

}  // namespace drugrag
