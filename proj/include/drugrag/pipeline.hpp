#pragma once

// Query orchestration for the four answering strategies:
//   rag_a / rag_b: embed question -> top-k -> filter check -> assertion -> prompt -> model
//   graphrag:      entities -> Cypher lookup -> assertion -> prompt -> model
//   baseline:      instruction + question -> model

#include <chrono>
#include <cstddef>
#include <exception>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "drugrag/chat.hpp"
#include "drugrag/cypher.hpp"
#include "drugrag/embedding.hpp"
#include "drugrag/entities.hpp"
#include "drugrag/error.hpp"
#include "drugrag/graph.hpp"
#include "drugrag/kb.hpp"
#include "drugrag/prompts.hpp"
#include "drugrag/vector_index.hpp"

namespace drugrag {

struct RetrievedHit {
  std::string chunk_id;
  double score = 0.0;
  std::string text;
};

struct RetrievalVerdict {
  bool associated = false;
  Pipeline pipeline = Pipeline::kBaseline;
  /// Matching chunk ids (vector pipelines) or the matched triple (graph).
  std::vector<std::string> evidence;
  std::vector<RetrievedHit> raw_hits;
};

struct PromptContext {
  std::string question;
  std::string assertion;  // empty for the baseline
  std::string final_prompt;
  Pipeline pipeline = Pipeline::kBaseline;
};

struct Answer {
  Decision decision = Decision::kNo;
  std::string explanation;
  std::string completion;
  RetrievalVerdict verdict;
  PromptContext prompt;
  std::optional<ExtractedEntities> entities;
  std::string backend;
  nlohmann::json generation;
  std::string cypher;  // graph pipeline only
  double latency_ms = 0.0;
};

/// Loaded, read-only resources shared by concurrent queries. Only the members
/// a pipeline needs have to be present.
struct Resources {
  std::shared_ptr<const KnowledgeBase> kb;
  std::shared_ptr<const Gazetteer> gazetteer;
  std::shared_ptr<const PropertyGraph> graph;
  std::shared_ptr<const VectorIndex> index_a;
  std::shared_ptr<const VectorIndex> index_b;
  std::shared_ptr<const EmbeddingProvider> embedder;
  std::size_t k = 5;

  void require(Pipeline pipeline) const {
    auto missing = [&](const char* what) {
      throw Error(ErrorCode::kResourceUnavailable,
                  std::string(what) + " not loaded for pipeline " + std::string(pipeline_tag(pipeline)));
    };
    if (pipeline == Pipeline::kBaseline) return;
    if (!gazetteer) missing("entity dictionary");
    if (pipeline == Pipeline::kGraphRag && !graph) missing("graph");
    if (pipeline == Pipeline::kRagA && !index_a) missing("format A index");
    if (pipeline == Pipeline::kRagB && !index_b) missing("format B index");
    if ((pipeline == Pipeline::kRagA || pipeline == Pipeline::kRagB) && !embedder) missing("embedding provider");
  }
};

namespace detail {

inline bool list_contains(std::string_view list, std::string_view item) {
  // Delimited membership: equal to exact element matching on the ", "-split
  // list, and also correct for names that themselves contain ", ".
  if (list == item) return true;
  if (list.starts_with(item) && list.substr(item.size()).starts_with(", ")) return true;
  if (list.ends_with(item) && list.substr(0, list.size() - item.size()).ends_with(", ")) return true;
  return list.find(std::string(", ") + std::string(item) + ", ") != std::string_view::npos;
}

inline std::vector<RetrievedHit> audit_hits(std::span<const SearchHit> hits) {
  std::vector<RetrievedHit> out;
  for (const auto& h : hits) out.push_back({h.chunk->chunk_id, h.score, h.chunk->text});
  return out;
}

}  // namespace detail

/// Associated iff a retrieved chunk belongs to the extracted drug and lists the
/// extracted side effect as an element of its side-effect list.
inline RetrievalVerdict filter_check_format_a(std::span<const SearchHit> hits, const ExtractedEntities& entities) {
  RetrievalVerdict v;
  v.pipeline = Pipeline::kRagA;
  v.raw_hits = detail::audit_hits(hits);
  for (const auto& h : hits) {
    if (h.chunk->drug_id != entities.drug.id) continue;
    if (detail::list_contains(format_a_list_tail(h.chunk->text), entities.side_effect.name)) {
      v.associated = true;
      v.evidence.push_back(h.chunk->chunk_id);
    }
  }
  return v;
}

/// Associated iff a retrieved chunk is exactly the extracted (drug, side effect) pair.
inline RetrievalVerdict filter_check_format_b(std::span<const SearchHit> hits, const ExtractedEntities& entities) {
  RetrievalVerdict v;
  v.pipeline = Pipeline::kRagB;
  v.raw_hits = detail::audit_hits(hits);
  for (const auto& h : hits) {
    if (h.chunk->drug_id == entities.drug.id && h.chunk->term_id == entities.side_effect.id) {
      v.associated = true;
      v.evidence.push_back(h.chunk->chunk_id);
    }
  }
  return v;
}

struct GraphLookup {
  RetrievalVerdict verdict;
  std::string cypher;
};

inline GraphLookup graph_lookup(const PropertyGraph& graph, const ExtractedEntities& entities) {
  GraphLookup out;
  out.cypher = cypher::build_cypher_for_pair(entities.drug.name, entities.side_effect.name);
  const auto rows = execute_cypher(graph, cypher::parse_cypher(out.cypher));
  out.verdict.pipeline = Pipeline::kGraphRag;
  out.verdict.associated = !rows.empty();
  for (const auto& row : rows) out.verdict.evidence.push_back(describe_triple(graph, row));
  return out;
}

inline Answer run_query(std::string_view question, Pipeline pipeline, const Resources& resources,
                        const ChatBackend& backend) {
  const auto started = std::chrono::steady_clock::now();
  resources.require(pipeline);
  Answer answer;
  answer.backend = backend.name();
  answer.generation = backend.generation_parameters();
  answer.prompt.question = std::string(question);
  answer.prompt.pipeline = pipeline;
  answer.verdict.pipeline = pipeline;

  if (pipeline == Pipeline::kBaseline) {
    answer.prompt.final_prompt = build_baseline_prompt(question);
  } else {
    answer.entities = resources.gazetteer->extract(question);
    const auto& e = *answer.entities;
    if (pipeline == Pipeline::kGraphRag) {
      auto lookup = graph_lookup(*resources.graph, e);
      answer.verdict = std::move(lookup.verdict);
      answer.cypher = std::move(lookup.cypher);
    } else {
      const auto& index = pipeline == Pipeline::kRagA ? *resources.index_a : *resources.index_b;
      const auto hits = index.search(*resources.embedder, question, resources.k);
      answer.verdict = pipeline == Pipeline::kRagA ? filter_check_format_a(hits, e) : filter_check_format_b(hits, e);
    }
    answer.prompt.assertion = build_assertion(answer.verdict.associated, pipeline, e.drug.name, e.side_effect.name);
    answer.prompt.final_prompt = build_modified_prompt(question, answer.prompt.assertion);
  }

  try {
    answer.completion = backend.complete(answer.prompt.final_prompt);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::kBackendUnavailable, std::string("chat backend failed: ") + ex.what());
  }
  const auto parsed = parse_yes_no(answer.completion);
  answer.decision = parsed.decision;
  answer.explanation = parsed.explanation;
  answer.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return answer;
}

/// The question form used by the evaluation harness.
inline std::string templated_question(std::string_view drug_name, std::string_view se_name) {
  return "Is " + std::string(se_name) + " an adverse effect of " + std::string(drug_name) + "?";
}

}  // namespace drugrag
