#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace drugrag {

enum class ErrorCode {
  kMalformedRow,
  kEmptyResult,
  kUnknownDrug,
  kNoAssociations,
  kUnknownAssociation,
  kEmptyCorpus,
  kMalformedCorpusLine,
  kDimensionMismatch,
  kProviderFailure,
  kProviderMismatch,
  kEmptyIndex,
  kInvalidArgument,
  kCypherSyntax,
  kUnknownProperty,
  kDrugNotFound,
  kSideEffectNotFound,
  kAmbiguousDrug,
  kAmbiguousSideEffect,
  kMalformedPrompt,
  kUnparseable,
  kBackendUnavailable,
  kNoEligibleDrugs,
  kEmptyMatrix,
  kResourceUnavailable,
  kConfig,
  kIo,
};

/// Stable snake_case name used in API payloads and CLI diagnostics.
inline std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRow: return "malformed_row";
    case ErrorCode::kEmptyResult: return "empty_result";
    case ErrorCode::kUnknownDrug: return "unknown_drug";
    case ErrorCode::kNoAssociations: return "no_associations";
    case ErrorCode::kUnknownAssociation: return "unknown_association";
    case ErrorCode::kEmptyCorpus: return "empty_corpus";
    case ErrorCode::kMalformedCorpusLine: return "malformed_corpus_line";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kProviderFailure: return "provider_failure";
    case ErrorCode::kProviderMismatch: return "provider_mismatch";
    case ErrorCode::kEmptyIndex: return "empty_index";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kCypherSyntax: return "cypher_syntax";
    case ErrorCode::kUnknownProperty: return "unknown_property";
    case ErrorCode::kDrugNotFound: return "drug_not_found";
    case ErrorCode::kSideEffectNotFound: return "side_effect_not_found";
    case ErrorCode::kAmbiguousDrug: return "ambiguous_drug";
    case ErrorCode::kAmbiguousSideEffect: return "ambiguous_side_effect";
    case ErrorCode::kMalformedPrompt: return "malformed_prompt";
    case ErrorCode::kUnparseable: return "unparseable";
    case ErrorCode::kBackendUnavailable: return "backend_unavailable";
    case ErrorCode::kNoEligibleDrugs: return "no_eligible_drugs";
    case ErrorCode::kEmptyMatrix: return "empty_matrix";
    case ErrorCode::kResourceUnavailable: return "resource_unavailable";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Input row rejected during ingestion; `line` is 1-based within the source file.
class MalformedRowError : public Error {
 public:
  MalformedRowError(std::size_t line, std::string reason)
      : Error(ErrorCode::kMalformedRow, "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(std::move(reason)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class CypherSyntaxError : public Error {
 public:
  CypherSyntaxError(std::size_t position, std::string expected)
      : Error(ErrorCode::kCypherSyntax,
              "cypher syntax error at offset " + std::to_string(position) + ": expected " + expected),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

/// Entity lookup failure. `candidates` lists competing matches for the
/// ambiguity codes and near-miss dictionary terms for the not-found codes.
class EntityError : public Error {
 public:
  EntityError(ErrorCode code, const std::string& message, std::vector<std::string> candidates = {})
      : Error(code, message), candidates_(std::move(candidates)) {}

  const std::vector<std::string>& candidates() const noexcept { return candidates_; }

 private:
  std::vector<std::string> candidates_;
};

}  // namespace drugrag
