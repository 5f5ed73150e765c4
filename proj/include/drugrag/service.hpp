#pragma once

// JSON HTTP API over loaded resources.
//
//   POST /v1/query[?verbose=1]            {"question": ..., "pipeline": ...}
//   GET  /v1/drugs/{name}/side-effects
//   GET  /healthz
//
// Handlers are plain functions from request data to (status, JSON body) so
// they can be exercised without sockets; `mount` wires them to a server.

#include <chrono>
#include <ctime>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "httplib.h"
#include "json.hpp"

#include "drugrag/chat.hpp"
#include "drugrag/error.hpp"
#include "drugrag/graph.hpp"
#include "drugrag/pipeline.hpp"
#include "drugrag/text.hpp"

namespace drugrag {

struct ApiResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

inline int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kDrugNotFound:
    case ErrorCode::kSideEffectNotFound:
    case ErrorCode::kAmbiguousDrug:
    case ErrorCode::kAmbiguousSideEffect: return 422;
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kUnparseable:
    case ErrorCode::kMalformedPrompt:
    case ErrorCode::kProviderFailure: return 502;
    case ErrorCode::kResourceUnavailable: return 503;
    default: return 500;
  }
}

inline ApiResponse error_response(int status, std::string_view code, std::string_view message,
                                  const std::vector<std::string>& candidates = {}) {
  nlohmann::ordered_json err;
  err["code"] = code;
  err["message"] = message;
  err["candidates"] = candidates;
  return {status, {{"error", err}}};
}

inline nlohmann::ordered_json entity_json(const EntitySpan& e) {
  return {{"id", e.id}, {"name", e.name}, {"surface", e.surface}, {"begin", e.begin}, {"end", e.end}};
}

/// Body of a successful query. Compact by default; `verbose` adds the audit
/// trail (evidence, retrieved hits, Cypher, prompt, completion, generation settings).
inline nlohmann::ordered_json answer_json(const Answer& a, bool verbose) {
  nlohmann::ordered_json j;
  j["decision"] = decision_name(a.decision);
  j["explanation"] = a.explanation;
  j["pipeline"] = pipeline_tag(a.prompt.pipeline);
  if (a.entities) {
    j["entities"] = {{"drug", entity_json(a.entities->drug)}, {"side_effect", entity_json(a.entities->side_effect)}};
  } else {
    j["entities"] = nullptr;
  }
  j["associated"] = a.prompt.pipeline == Pipeline::kBaseline ? nlohmann::ordered_json(nullptr)
                                                             : nlohmann::ordered_json(a.verdict.associated);
  if (verbose) {
    j["evidence"] = a.verdict.evidence;
    auto hits = nlohmann::ordered_json::array();
    for (const auto& h : a.verdict.raw_hits) hits.push_back({{"chunk_id", h.chunk_id}, {"score", h.score}, {"text", h.text}});
    j["hits"] = hits;
    if (!a.cypher.empty()) j["cypher"] = a.cypher;
    j["assertion"] = a.prompt.assertion;
    j["prompt"] = a.prompt.final_prompt;
    j["completion"] = a.completion;
    j["backend"] = a.backend;
    j["generation"] = a.generation;
  }
  j["latency_ms"] = a.latency_ms;
  return j;
}

class QueryService {
 public:
  QueryService(Resources resources, std::shared_ptr<const ChatBackend> backend,
               Pipeline default_pipeline = Pipeline::kGraphRag)
      : resources_(std::move(resources)), backend_(std::move(backend)), default_pipeline_(default_pipeline) {
    if (!resources_.kb) throw Error(ErrorCode::kResourceUnavailable, "knowledge base not loaded");
    if (!backend_) throw Error(ErrorCode::kResourceUnavailable, "no chat backend configured");
    health_ = compute_health();
  }

  ApiResponse handle_query(std::string_view body, bool verbose) const {
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      return error_response(400, "malformed_body", "request body is not valid JSON");
    }
    if (!req.is_object()) return error_response(400, "malformed_body", "request body must be a JSON object");
    if (!req.contains("question") || !req["question"].is_string()) {
      return error_response(400, "malformed_body", "\"question\" must be a string");
    }
    const auto question = req["question"].get<std::string>();
    if (text::trim(question).empty()) return error_response(400, "malformed_body", "\"question\" is empty");
    Pipeline pipeline = default_pipeline_;
    if (req.contains("pipeline")) {
      const auto& p = req["pipeline"];
      const auto parsed = p.is_string() ? parse_pipeline(p.get<std::string>()) : std::nullopt;
      if (!parsed) {
        return error_response(400, "malformed_body", "\"pipeline\" must be one of rag_a, rag_b, graphrag, baseline");
      }
      pipeline = *parsed;
    }
    try {
      return {200, answer_json(run_query(question, pipeline, resources_, *backend_), verbose)};
    } catch (const EntityError& e) {
      return error_response(422, code_name(e.code()), e.what(), e.candidates());
    } catch (const Error& e) {
      return error_response(http_status_for(e.code()), code_name(e.code()), e.what());
    } catch (const std::exception& e) {
      return error_response(500, "internal", e.what());
    }
  }

  ApiResponse handle_lookup(std::string_view drug_name) const {
    const auto& kb = *resources_.kb;
    const auto* drug = kb.find_drug_by_name(text::canonical_name(drug_name));
    if (!drug) {
      return error_response(404, code_name(ErrorCode::kUnknownDrug), "unknown drug '" + std::string(drug_name) + "'");
    }
    nlohmann::ordered_json body;
    body["drug"] = {{"id", drug->drug_id}, {"name", drug->name}, {"atc_codes", drug->atc_codes}};
    auto list = nlohmann::ordered_json::array();
    for (const auto* term : kb.side_effects_by_name(drug->drug_id)) {
      list.push_back({{"id", term->term_id},
                      {"name", term->name},
                      {"soc", term->soc_class ? nlohmann::ordered_json(*term->soc_class) : nlohmann::ordered_json(nullptr)}});
    }
    body["count"] = list.size();
    body["side_effects"] = std::move(list);
    return {200, std::move(body)};
  }

  ApiResponse handle_health() const { return {200, health_}; }

  const Resources& resources() const { return resources_; }

 private:
  nlohmann::ordered_json compute_health() const {
    nlohmann::ordered_json j;
    j["status"] = "ok";
    j["backend"] = backend_->name();
    j["default_pipeline"] = pipeline_tag(default_pipeline_);
    auto& res = j["resources"];
    res["kb"] = {{"fingerprint", resources_.kb->fingerprint()},
                 {"drugs", resources_.kb->drugs().size()},
                 {"terms", resources_.kb->terms().size()},
                 {"associations", resources_.kb->associations().size()}};
    if (resources_.graph) {
      std::ostringstream dump;
      write_graph_jsonl(*resources_.graph, dump);
      res["graph"] = {{"fingerprint", text::hex64(text::fnv1a64(dump.str()))},
                      {"nodes", resources_.graph->node_count()},
                      {"edges", resources_.graph->edge_count()}};
    } else {
      res["graph"] = nullptr;
    }
    auto index = [](const std::shared_ptr<const VectorIndex>& idx) {
      if (!idx) return nlohmann::ordered_json(nullptr);
      return nlohmann::ordered_json{{"fingerprint", idx->fingerprint()}, {"entries", idx->size()}};
    };
    res["index_a"] = index(resources_.index_a);
    res["index_b"] = index(resources_.index_b);
    res["embedder"] = resources_.embedder ? nlohmann::ordered_json(resources_.embedder->fingerprint())
                                          : nlohmann::ordered_json(nullptr);
    auto pipelines = nlohmann::ordered_json::array();
    for (Pipeline p : {Pipeline::kRagA, Pipeline::kRagB, Pipeline::kGraphRag, Pipeline::kBaseline}) {
      try {
        resources_.require(p);
        pipelines.push_back(pipeline_tag(p));
      } catch (const Error&) {
      }
    }
    j["pipelines"] = std::move(pipelines);
    return j;
  }

  Resources resources_;
  std::shared_ptr<const ChatBackend> backend_;
  Pipeline default_pipeline_;
  nlohmann::ordered_json health_;
};

/// Writes one JSON object per request to a shared stream.
class RequestLog {
 public:
  explicit RequestLog(std::ostream* out) : out_(out) {}

  void write(const httplib::Request& req, int status, double latency_ms) {
    if (!out_) return;
    nlohmann::ordered_json j;
    j["ts"] = now_iso8601();
    j["method"] = req.method;
    j["path"] = req.path;
    j["status"] = status;
    j["latency_ms"] = latency_ms;
    if (req.has_param("verbose")) j["verbose"] = req.get_param_value("verbose");
    const std::lock_guard lock(mutex_);
    *out_ << j.dump() << '\n' << std::flush;
  }

 private:
  static std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::ostream* out_;
  std::mutex mutex_;
};

namespace detail {

inline void send(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body.dump(), "application/json");
}

inline bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes"; }

}  // namespace detail

/// Registers the API routes (and optionally a static directory) on `server`.
/// `service` and `log` must outlive the server.
inline void mount(httplib::Server& server, const QueryService& service, RequestLog& log,
                  const std::optional<std::string>& static_dir = std::nullopt) {
  using Clock = std::chrono::steady_clock;
  static thread_local Clock::time_point started;
  server.set_pre_routing_handler([](const httplib::Request&, httplib::Response&) {
    started = Clock::now();
    return httplib::Server::HandlerResponse::Unhandled;
  });
  server.set_logger([&log](const httplib::Request& req, const httplib::Response& res) {
    log.write(req, res.status, std::chrono::duration<double, std::milli>(Clock::now() - started).count());
  });
  server.Post("/v1/query", [&service](const httplib::Request& req, httplib::Response& res) {
    const bool verbose = req.has_param("verbose") && detail::truthy(req.get_param_value("verbose"));
    detail::send(res, service.handle_query(req.body, verbose));
  });
  server.Get("/v1/drugs/:name/side-effects", [&service](const httplib::Request& req, httplib::Response& res) {
    detail::send(res, service.handle_lookup(req.path_params.at("name")));
  });
  server.Get("/healthz", [&service](const httplib::Request&, httplib::Response& res) {
    detail::send(res, service.handle_health());
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      detail::send(res, error_response(res.status, "http_" + std::to_string(res.status), httplib::status_message(res.status)));
    }
  });
  if (static_dir && !server.set_mount_point("/", *static_dir)) {
    throw Error(ErrorCode::kConfig, "static directory " + *static_dir + " does not exist");
  }
}

}  // namespace drugrag
