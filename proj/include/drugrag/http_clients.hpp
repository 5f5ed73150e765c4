#pragma once

// Clients for remote embedding and chat-completion endpoints speaking the
// common JSON protocols:
//   POST {endpoint}/embeddings        {"model", "input": [...]}  -> data[i].embedding
//   POST {endpoint}/chat/completions  {"model", "messages", ...} -> choices[0].message.content
// https endpoints need the build to have found OpenSSL.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "drugrag/chat.hpp"
#include "drugrag/embedding.hpp"
#include "drugrag/error.hpp"

namespace drugrag {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base_path;  // without trailing slash, may be empty
};

inline Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || url.substr(0, scheme_end).empty()) {
    throw Error(ErrorCode::kConfig, "endpoint must be an absolute http(s) URL: '" + std::string(url) + "'");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kConfig, "unsupported endpoint scheme '" + std::string(scheme) + "'");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw Error(ErrorCode::kConfig, "https endpoints need a build with OpenSSL");
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos) {
    std::string_view path = url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.remove_suffix(1);
    e.base_path = std::string(path);
  }
  if (e.origin.size() == scheme_end + 3) throw Error(ErrorCode::kConfig, "endpoint has no host: '" + std::string(url) + "'");
  return e;
}

namespace detail {

/// POSTs JSON and returns the parsed reply; transport errors, non-2xx status
/// codes and non-JSON bodies throw `failure`.
inline nlohmann::json post_json(const Endpoint& endpoint, const std::string& path, const nlohmann::json& body,
                                const std::string& api_key, double timeout_seconds, ErrorCode failure) {
  httplib::Client client(endpoint.origin);
  const auto timeout = std::chrono::duration<double>(timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
  const auto url = endpoint.base_path + path;
  auto res = client.Post(url, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(failure, "POST " + endpoint.origin + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(failure, "POST " + endpoint.origin + url + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw Error(failure, "POST " + endpoint.origin + url + " returned a non-JSON body");
  }
}

}  // namespace detail

class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string endpoint, std::string model, std::size_t dimension, std::string api_key = {},
                        double timeout_seconds = 60.0, std::size_t max_input_chars = 30000)
      : endpoint_(parse_endpoint(endpoint)),
        model_(std::move(model)),
        dimension_(dimension),
        api_key_(std::move(api_key)),
        timeout_(timeout_seconds),
        max_chars_(max_input_chars) {
    if (model_.empty()) throw Error(ErrorCode::kConfig, "embedding model is not configured");
    if (dimension_ == 0) throw Error(ErrorCode::kConfig, "embedding dimension must be positive");
  }

  // Endpoint is deliberately not part of the fingerprint: the same model
  // behind another host gives the same vectors.
  std::string fingerprint() const override { return "http-embed/v1/model=" + model_ + "/dim=" + std::to_string(dimension_); }
  std::size_t dimension() const override { return dimension_; }
  std::size_t max_input_chars() const override { return max_chars_; }

  EmbeddingVector embed(std::string_view text) const override {
    const std::string one(text);
    return std::move(embed_batch(std::span<const std::string>(&one, 1)).front());
  }

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
    for (const auto& t : texts) {
      if (t.size() > max_chars_) {
        throw Error(ErrorCode::kProviderFailure, "input of " + std::to_string(t.size()) + " characters exceeds the " +
                                                     std::to_string(max_chars_) + " character limit");
      }
    }
    const nlohmann::json body{{"model", model_}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto reply = detail::post_json(endpoint_, "/embeddings", body, api_key_, timeout_, ErrorCode::kProviderFailure);
    std::vector<EmbeddingVector> out;
    try {
      const auto& data = reply.at("data");
      if (!data.is_array() || data.size() != texts.size()) {
        throw Error(ErrorCode::kProviderFailure, "embedding reply has " + std::to_string(data.size()) +
                                                     " vectors for " + std::to_string(texts.size()) + " inputs");
      }
      out.resize(texts.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        // Replies may carry an explicit index; honour it when present.
        const std::size_t slot = data[i].contains("index") ? data[i].at("index").get<std::size_t>() : i;
        if (slot >= out.size()) throw Error(ErrorCode::kProviderFailure, "embedding reply index out of range");
        out[slot].values = data[i].at("embedding").get<std::vector<float>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProviderFailure, std::string("malformed embedding reply: ") + e.what());
    }
    for (const auto& v : out) {
      if (v.size() != dimension_) {
        throw Error(ErrorCode::kDimensionMismatch, "provider returned a " + std::to_string(v.size()) +
                                                       "-dimensional vector, expected " + std::to_string(dimension_));
      }
      for (float x : v.values) {
        if (!std::isfinite(x)) throw Error(ErrorCode::kProviderFailure, "provider returned a non-finite value");
      }
    }
    return out;
  }

 private:
  Endpoint endpoint_;
  std::string model_;
  std::size_t dimension_;
  std::string api_key_;
  double timeout_;
  std::size_t max_chars_;
};

/// Single-turn chat completion at temperature 0, the most deterministic
/// setting such endpoints offer.
class HttpChatBackend final : public ChatBackend {
 public:
  HttpChatBackend(std::string endpoint, std::string model, std::string api_key = {}, double timeout_seconds = 60.0)
      : endpoint_(parse_endpoint(endpoint)), model_(std::move(model)), api_key_(std::move(api_key)), timeout_(timeout_seconds) {
    if (model_.empty()) throw Error(ErrorCode::kConfig, "chat model is not configured");
  }

  std::string name() const override { return "http:" + model_; }
  nlohmann::json generation_parameters() const override { return {{"model", model_}, {"temperature", 0}}; }

  std::string complete(std::string_view prompt) const override {
    nlohmann::json body = generation_parameters();
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}});
    const auto reply =
        detail::post_json(endpoint_, "/chat/completions", body, api_key_, timeout_, ErrorCode::kBackendUnavailable);
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kBackendUnavailable, std::string("malformed chat reply: ") + e.what());
    }
  }

 private:
  Endpoint endpoint_;
  std::string model_;
  std::string api_key_;
  double timeout_;
};

}  // namespace drugrag
