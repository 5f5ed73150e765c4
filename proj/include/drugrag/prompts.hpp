#pragma once

// Prompt engineering: the retrieval assertion sentences, the instruction
// wrapper around the user's question, and parsing of the model's YES/NO reply.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "drugrag/error.hpp"
#include "drugrag/text.hpp"

namespace drugrag {

enum class Pipeline { kRagA, kRagB, kGraphRag, kBaseline };

inline std::string_view pipeline_tag(Pipeline p) {
  switch (p) {
    case Pipeline::kRagA: return "rag_a";
    case Pipeline::kRagB: return "rag_b";
    case Pipeline::kGraphRag: return "graphrag";
    case Pipeline::kBaseline: return "baseline";
  }
  return "unknown";
}

inline std::string_view pipeline_display_name(Pipeline p) {
  switch (p) {
    case Pipeline::kRagA: return "RAG (Format A)";
    case Pipeline::kRagB: return "RAG (Format B)";
    case Pipeline::kGraphRag: return "GraphRAG";
    case Pipeline::kBaseline: return "Baseline";
  }
  return "unknown";
}

inline std::optional<Pipeline> parse_pipeline(std::string_view tag) {
  for (Pipeline p : {Pipeline::kRagA, Pipeline::kRagB, Pipeline::kGraphRag, Pipeline::kBaseline}) {
    if (tag == pipeline_tag(p)) return p;
  }
  return std::nullopt;
}

inline constexpr std::string_view kInstruction =
    "You are asked to answer the following question with a single word: YES or NO. Base your answer strictly on "
    "the RAG Results provided below. After your YES or NO answer, briefly explain your reasoning using the "
    "information from the RAG Results. Do not infer or speculate beyond the information provided. Question:\n\n";

// Same instruction without the sentence that points the model at retrieved results.
inline constexpr std::string_view kBaselineInstruction =
    "You are asked to answer the following question with a single word: YES or NO. After your YES or NO answer, "
    "briefly explain your reasoning using the information from the RAG Results. Do not infer or speculate beyond "
    "the information provided. Question:\n\n";

namespace assertion_text {
inline constexpr std::string_view kRagYesLead = "Yes, the side effect ";
inline constexpr std::string_view kRagNoLead = "No, the side effect ";
inline constexpr std::string_view kRagYesMid = " is listed as an adverse effect, adverse reaction or side effect of the drug ";
inline constexpr std::string_view kRagNoMid =
    " is not listed as an adverse effect, adverse reaction or side effect of the drug ";
inline constexpr std::string_view kGraphYesMid = " is known to be associated with ";
inline constexpr std::string_view kGraphNoMid = " is not known to be associated with ";
inline constexpr std::string_view kGraphTail = " as a side effect";
}  // namespace assertion_text

/// The retrieval finding stated as a sentence for the model. Vector pipelines
/// and the graph pipeline use different wordings.
inline std::string build_assertion(bool associated, Pipeline pipeline, std::string_view drug_name,
                                   std::string_view se_name) {
  using namespace assertion_text;
  std::string out;
  if (pipeline == Pipeline::kGraphRag) {
    out = text::capitalize(drug_name);
    out += associated ? kGraphYesMid : kGraphNoMid;
    out += se_name;
    out += kGraphTail;
    return out;
  }
  out = associated ? kRagYesLead : kRagNoLead;
  out += se_name;
  out += associated ? kRagYesMid : kRagNoMid;
  out += drug_name;
  return out;
}

/// Instruction, then the question, then the assertion, concatenated as-is.
inline std::string build_modified_prompt(std::string_view question, std::string_view assertion) {
  if (question.empty()) throw Error(ErrorCode::kInvalidArgument, "question is empty");
  if (assertion.empty()) throw Error(ErrorCode::kInvalidArgument, "assertion is empty");
  std::string out(kInstruction);
  out += question;
  out += assertion;
  return out;
}

inline std::string build_baseline_prompt(std::string_view question) {
  if (question.empty()) throw Error(ErrorCode::kInvalidArgument, "question is empty");
  std::string out(kBaselineInstruction);
  out += question;
  return out;
}

enum class Decision { kYes, kNo };

inline std::string_view decision_name(Decision d) { return d == Decision::kYes ? "YES" : "NO"; }

struct ParsedAnswer {
  Decision decision;
  std::string explanation;
};

namespace detail {

// Leading whitespace, ASCII punctuation and the UTF-8 en/em dashes.
inline std::string_view skip_filler(std::string_view s) {
  for (;;) {
    if (!s.empty() && (text::is_space(s.front()) ||
                       (static_cast<unsigned char>(s.front()) < 0x80 && !text::is_ascii_alnum(s.front())))) {
      s.remove_prefix(1);
    } else if (s.starts_with("\xE2\x80\x94") || s.starts_with("\xE2\x80\x93")) {
      s.remove_prefix(3);
    } else {
      return s;
    }
  }
}

}  // namespace detail

/// Reads the decision from the completion's first word (case-insensitive).
/// Completions that lead with anything else are reported, never coerced.
inline ParsedAnswer parse_yes_no(std::string_view completion) {
  std::string_view rest = detail::skip_filler(completion);
  std::size_t n = 0;
  while (n < rest.size() && text::is_word_char(rest[n])) ++n;
  const std::string_view word = rest.substr(0, n);
  Decision decision;
  if (text::equals_ci(word, "yes")) {
    decision = Decision::kYes;
  } else if (text::equals_ci(word, "no")) {
    decision = Decision::kNo;
  } else {
    throw Error(ErrorCode::kUnparseable, "completion does not lead with YES or NO: '" +
                                             std::string(completion.substr(0, 80)) + "'");
  }
  return ParsedAnswer{decision, std::string(text::trim(detail::skip_filler(rest.substr(n))))};
}

struct LocatedAssertion {
  bool positive = false;
  std::string text;
};

/// Finds the single assertion sentence at the end of a modified prompt.
inline LocatedAssertion locate_assertion(std::string_view prompt) {
  using namespace assertion_text;
  if (!prompt.starts_with(kInstruction)) {
    throw Error(ErrorCode::kMalformedPrompt, "prompt does not start with the instruction template");
  }
  const std::string_view body = prompt.substr(kInstruction.size());
  auto count = [&](std::string_view needle) {
    std::size_t c = 0;
    for (auto pos = body.find(needle); pos != std::string_view::npos; pos = body.find(needle, pos + 1)) ++c;
    return c;
  };
  const std::size_t rag_yes = count(kRagYesMid), rag_no = count(kRagNoMid);
  const std::size_t graph_yes = count(kGraphYesMid), graph_no = count(kGraphNoMid);
  if (rag_yes + rag_no + graph_yes + graph_no != 1) {
    throw Error(ErrorCode::kMalformedPrompt, "prompt must contain exactly one assertion");
  }

  if (rag_yes + rag_no == 1) {
    const bool positive = rag_yes == 1;
    const auto mid = body.find(positive ? kRagYesMid : kRagNoMid);
    const auto lead = body.rfind(positive ? kRagYesLead : kRagNoLead, mid);
    if (lead == std::string_view::npos) throw Error(ErrorCode::kMalformedPrompt, "assertion lacks its opening");
    return {positive, std::string(body.substr(lead))};
  }

  const bool positive = graph_yes == 1;
  const auto mid = body.find(positive ? kGraphYesMid : kGraphNoMid);
  if (!body.ends_with(kGraphTail)) throw Error(ErrorCode::kMalformedPrompt, "assertion lacks its closing");
  // The question and the assertion are concatenated without a separator: the
  // assertion starts after the question mark, or failing that at the last
  // capital letter before the verb.
  std::size_t start = 0;
  if (const auto q = body.rfind('?', mid); q != std::string_view::npos) {
    start = q + 1;
    while (start < mid && text::is_space(body[start])) ++start;
  } else {
    for (std::size_t i = mid; i-- > 0;) {
      if (body[i] >= 'A' && body[i] <= 'Z') {
        start = i;
        break;
      }
    }
  }
  return {positive, std::string(body.substr(start))};
}

}  // namespace drugrag
