#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"

#include "drugrag/prompts.hpp"

namespace drugrag {

/// A language model that answers a single user prompt. Implementations must
/// tolerate concurrent calls.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string name() const = 0;
  /// Sampling settings sent with each request, recorded in the audit trail.
  virtual nlohmann::json generation_parameters() const { return nlohmann::json::object(); }
  virtual std::string complete(std::string_view prompt) const = 0;
};

/// Perfect instruction follower: answers YES exactly when the prompt's
/// assertion is one of the positive templates.
inline std::string deterministic_chat(std::string_view prompt) {
  const auto assertion = locate_assertion(prompt);
  return std::string(assertion.positive ? "YES" : "NO") + ", based on the RAG Results: " + assertion.text;
}

class DeterministicChat final : public ChatBackend {
 public:
  std::string name() const override { return "deterministic"; }
  nlohmann::json generation_parameters() const override { return {{"temperature", 0}}; }
  std::string complete(std::string_view prompt) const override { return deterministic_chat(prompt); }
};

/// Replies with the same text to every prompt.
class ConstantChat final : public ChatBackend {
 public:
  ConstantChat(std::string name, std::string reply) : name_(std::move(name)), reply_(std::move(reply)) {}
  std::string name() const override { return name_; }
  std::string complete(std::string_view) const override { return reply_; }

 private:
  std::string name_;
  std::string reply_;
};

}  // namespace drugrag
