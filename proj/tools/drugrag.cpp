// drugrag command line: build artifacts from an association table, then
// query, evaluate or serve them.
//
//   drugrag ingest fixtures/mini_sider.tsv
//   drugrag graph
//   drugrag query --pipeline graphrag "Is headache an adverse effect of metformin?"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "drugrag/drugrag.hpp"
#include "drugrag/http_clients.hpp"
#include "drugrag/service.hpp"

namespace fs = std::filesystem;
using namespace drugrag;

namespace {

struct Options {
  std::string config_path;
  std::string data_dir;
  std::string backend;
  std::string embedder;
  std::size_t dimension = 0;
  std::size_t jobs = 0;
};

ServiceConfig resolve_config(const Options& opt) {
  ServiceConfig cfg = opt.config_path.empty() ? ServiceConfig{} : load_config(opt.config_path);
  apply_env_overrides(cfg);
  if (!opt.data_dir.empty()) cfg.data_dir = opt.data_dir;
  if (!opt.backend.empty()) apply_config_value(cfg, "backend", opt.backend);
  if (!opt.embedder.empty()) apply_config_value(cfg, "embedder", opt.embedder);
  if (opt.dimension) cfg.dimension = opt.dimension;
  if (opt.jobs) cfg.jobs = opt.jobs;
  return cfg;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

std::shared_ptr<const KnowledgeBase> load_kb(const ServiceConfig& cfg) {
  if (!fs::exists(cfg.kb_path())) {
    throw Error(ErrorCode::kResourceUnavailable,
                "knowledge base not found at " + cfg.kb_path().string() + " (run `drugrag ingest` first)");
  }
  return std::make_shared<const KnowledgeBase>(load_association_table(cfg.kb_path()));
}

std::shared_ptr<const EmbeddingProvider> make_embedder(const ServiceConfig& cfg) {
  if (cfg.embedder == "http") {
    if (cfg.embed.endpoint.empty()) throw Error(ErrorCode::kConfig, "embed.endpoint is not configured");
    auto remote = std::make_shared<HttpEmbeddingProvider>(cfg.embed.endpoint, cfg.embed.model, cfg.dimension,
                                                          resolve_credential(cfg.embed), cfg.embed.timeout_seconds);
    return std::make_shared<CachedEmbeddingProvider>(std::move(remote), cfg.data_dir / "embed_cache");
  }
  return std::make_shared<HashEmbedder>(cfg.dimension);
}

std::shared_ptr<const ChatBackend> make_backend(const ServiceConfig& cfg) {
  if (cfg.backend == "http") {
    if (cfg.chat.endpoint.empty()) throw Error(ErrorCode::kConfig, "chat.endpoint is not configured");
    return std::make_shared<HttpChatBackend>(cfg.chat.endpoint, cfg.chat.model, resolve_credential(cfg.chat),
                                             cfg.chat.timeout_seconds);
  }
  if (cfg.backend == "always-yes") return std::make_shared<ConstantChat>("always-yes", "YES");
  if (cfg.backend == "always-no") return std::make_shared<ConstantChat>("always-no", "NO");
  return std::make_shared<DeterministicChat>();
}

std::shared_ptr<const VectorIndex> load_index(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::make_shared<const VectorIndex>(VectorIndex::load(in));
}

/// Loads what `pipelines` need; with `lenient`, missing optional artifacts are
/// skipped instead of failing.
Resources load_resources(const ServiceConfig& cfg, std::initializer_list<Pipeline> pipelines, bool lenient) {
  Resources r;
  r.k = cfg.k;
  r.kb = load_kb(cfg);
  r.gazetteer = std::make_shared<const Gazetteer>(*r.kb);
  auto missing = [&](const fs::path& path, const char* step) {
    if (lenient) return;
    throw Error(ErrorCode::kResourceUnavailable,
                path.filename().string() + " not found in " + cfg.data_dir.string() + " (run `drugrag " + step + "` first)");
  };
  for (Pipeline p : pipelines) {
    if (p == Pipeline::kGraphRag && !r.graph) {
      if (fs::exists(cfg.graph_path())) {
        std::ifstream in(cfg.graph_path(), std::ios::binary);
        r.graph = std::make_shared<const PropertyGraph>(read_graph_jsonl(in));
      } else {
        missing(cfg.graph_path(), "graph");
      }
    }
    if (p == Pipeline::kRagA || p == Pipeline::kRagB) {
      const char f = p == Pipeline::kRagA ? 'A' : 'B';
      auto& slot = p == Pipeline::kRagA ? r.index_a : r.index_b;
      if (fs::exists(cfg.index_path(f))) {
        slot = load_index(cfg.index_path(f));
        if (!r.embedder) r.embedder = make_embedder(cfg);
      } else {
        missing(cfg.index_path(f), f == 'A' ? "index --format A" : "index --format B");
      }
    }
  }
  return r;
}

Pipeline pipeline_arg(const std::string& tag) {
  const auto p = parse_pipeline(tag);
  if (!p) throw Error(ErrorCode::kInvalidArgument, "unknown pipeline '" + tag + "'");
  return *p;
}

// The deterministic backend answers from the retrieval assertion, which the
// baseline prompt does not have.
void check_backend_fits(const ServiceConfig& cfg, Pipeline pipeline) {
  if (pipeline == Pipeline::kBaseline && cfg.backend == "deterministic") {
    throw Error(ErrorCode::kConfig, "the baseline pipeline needs --backend http, always-yes or always-no");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drug side-effect question answering over a knowledge base"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--data", opt.data_dir, "artifact directory (default: data)");
  app.add_option("--backend", opt.backend, "chat backend")
      ->check(CLI::IsMember({"deterministic", "http", "always-yes", "always-no"}));
  app.add_option("--embedder", opt.embedder, "embedding provider")->check(CLI::IsMember({"hash", "http"}));
  app.add_option("--dimension", opt.dimension, "embedding dimension")->check(CLI::PositiveNumber);
  app.add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse an association table into the knowledge base");
  std::string table, mapping, sider_dir;
  ingest->add_option("table", table, "TSV with drug and MedDRA columns");
  ingest->add_option("--mapping", mapping, "column mapping file (field = header)")->check(CLI::ExistingFile);
  ingest->add_option("--sider-dir", sider_dir, "SIDER release directory")->check(CLI::ExistingDirectory);

  // corpus
  auto* corpus = app.add_subcommand("corpus", "render the text corpus");
  std::string format = "A";
  corpus->add_option("--format", format, "A (one line per drug) or B (one line per pair)")
      ->check(CLI::IsMember({"A", "B", "a", "b"}));

  // index
  auto* index = app.add_subcommand("index", "embed a corpus into a vector index");
  index->add_option("--format", format, "A or B")->check(CLI::IsMember({"A", "B", "a", "b"}));

  // graph
  auto* graph = app.add_subcommand("graph", "build the property graph");

  // sample-dataset
  std::uint64_t seed = 42;
  auto* sample = app.add_subcommand("sample-dataset", "draw the balanced evaluation dataset");
  sample->add_option("--seed", seed, "sampling seed");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "run a pipeline over the balanced dataset");
  std::string pipeline_tag_arg = "graphrag";
  std::string report_format = "markdown";
  std::string report_out;
  evaluate->add_option("--pipeline", pipeline_tag_arg, "rag_a, rag_b, graphrag or baseline")
      ->check(CLI::IsMember({"rag_a", "rag_b", "graphrag", "baseline"}));
  evaluate->add_option("--seed", seed, "sampling seed");
  evaluate->add_option("--format", report_format, "report printed to stdout")
      ->check(CLI::IsMember({"markdown", "json", "csv"}));
  evaluate->add_option("--out", report_out, "JSON report path (default: beside the dataset)");
  std::size_t k = 0;
  evaluate->add_option("--k", k, "retrieved chunks")->check(CLI::PositiveNumber);

  // query
  auto* query = app.add_subcommand("query", "answer one question");
  std::string question;
  bool as_json = false;
  query->add_option("question", question, "e.g. \"Is headache an adverse effect of metformin?\"")->required();
  query->add_option("--pipeline", pipeline_tag_arg, "rag_a, rag_b, graphrag or baseline")
      ->check(CLI::IsMember({"rag_a", "rag_b", "graphrag", "baseline"}));
  query->add_option("--k", k, "retrieved chunks")->check(CLI::PositiveNumber);
  query->add_flag("--json", as_json, "print the full answer record as JSON");

  // serve
  auto* serve = app.add_subcommand("serve", "start the HTTP API");
  std::string host;
  int port = 0;
  std::string static_dir;
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "bind port")->check(CLI::Range(1, 65535));
  serve->add_option("--static", static_dir, "directory served at /")->check(CLI::ExistingDirectory);
  serve->add_option("--pipeline", pipeline_tag_arg, "default pipeline")
      ->check(CLI::IsMember({"rag_a", "rag_b", "graphrag", "baseline"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ServiceConfig cfg = resolve_config(opt);
    if (k) cfg.k = k;

    if (*ingest) {
      if (table.empty() == sider_dir.empty()) {
        std::cerr << "error: give either a table path or --sider-dir\n";
        return 2;
      }
      KnowledgeBase kb = [&] {
        if (!sider_dir.empty()) return load_sider_release(sider_dir);
        TableLayout layout;
        if (!mapping.empty()) {
          std::ifstream in(mapping);
          layout = TableLayout::from_mapping(in);
        }
        return load_association_table(table, layout);
      }();
      auto out = open_out(cfg.kb_path());
      write_kb_tsv(kb, out);
      std::cout << "ingested " << kb.associations().size() << " associations, " << kb.drugs().size() << " drugs, "
                << kb.terms().size() << " terms -> " << cfg.kb_path().string() << "\n";
    } else if (*corpus) {
      const auto kb = load_kb(cfg);
      const auto f = parse_format_tag(format);
      const auto path = cfg.corpus_path(format_tag(f)[0]);
      auto out = open_out(path);
      out << render_corpus(*kb, f);
      std::cout << "wrote " << export_corpus(*kb, f).size() << " format " << format_tag(f) << " lines -> "
                << path.string() << "\n";
    } else if (*index) {
      const auto kb = load_kb(cfg);
      const auto f = parse_format_tag(format);
      const char tag = format_tag(f)[0];
      const std::string text = fs::exists(cfg.corpus_path(tag)) ? read_file(cfg.corpus_path(tag)) : render_corpus(*kb, f);
      const auto chunks = chunk_corpus(text, f, *kb);
      const auto embedder = make_embedder(cfg);
      const auto idx = build_index(chunks, *embedder, cfg.jobs);
      auto out = open_out(cfg.index_path(tag));
      idx.save(out);
      std::cout << "indexed " << idx.size() << " chunks (" << idx.fingerprint() << ") -> "
                << cfg.index_path(tag).string() << "\n";
    } else if (*graph) {
      const auto kb = load_kb(cfg);
      const auto g = build_graph(*kb);
      auto out = open_out(cfg.graph_path());
      write_graph_jsonl(g, out);
      const auto script_path = cfg.data_dir / "graph.cypher";
      auto script = open_out(script_path);
      write_cypher_script(g, script);
      std::cout << "graph: " << g.node_count(NodeLabel::kDrug) << " drugs, " << g.node_count(NodeLabel::kSideEffect)
                << " side effects, " << g.edge_count() << " edges -> " << cfg.graph_path().string() << "\n";
    } else if (*sample) {
      const auto kb = load_kb(cfg);
      const auto ds = build_balanced_dataset(*kb, seed);
      auto out = open_out(cfg.dataset_path(seed));
      write_dataset_jsonl(ds, out);
      std::cout << "sampled " << ds.pairs.size() << " pairs over " << ds.pairs.size() / (2 * kPairsPerClass)
                << " drugs -> " << cfg.dataset_path(seed).string() << "\n";
    } else if (*evaluate) {
      const Pipeline pipeline = pipeline_arg(pipeline_tag_arg);
      check_backend_fits(cfg, pipeline);
      const auto resources = load_resources(cfg, {pipeline}, false);
      EvalDataset ds;
      if (fs::exists(cfg.dataset_path(seed))) {
        std::ifstream in(cfg.dataset_path(seed), std::ios::binary);
        ds = read_dataset_jsonl(in);
        if (ds.kb_fingerprint != resources.kb->fingerprint()) {
          throw Error(ErrorCode::kConfig, cfg.dataset_path(seed).string() +
                                              " was sampled from a different knowledge base; re-run sample-dataset");
        }
      } else {
        ds = build_balanced_dataset(*resources.kb, seed);
      }
      const auto backend = make_backend(cfg);
      const auto run = run_eval(ds, pipeline, resources, *backend, cfg.jobs);
      const auto report = make_report(run, ds, *resources.kb, pipeline, backend->name());
      const fs::path json_path = report_out.empty()
                                     ? cfg.data_dir / ("report_" + std::string(drugrag::pipeline_tag(pipeline)) +
                                                       "_seed" + std::to_string(seed) + ".json")
                                     : fs::path(report_out);
      auto out = open_out(json_path);
      out << emit_report(report, ReportFormat::kJson);
      std::cout << emit_report(report, *parse_report_format(report_format));
    } else if (*query) {
      const Pipeline pipeline = pipeline_arg(pipeline_tag_arg);
      check_backend_fits(cfg, pipeline);
      const auto resources = load_resources(cfg, {pipeline}, false);
      const auto backend = make_backend(cfg);
      try {
        const auto answer = run_query(question, pipeline, resources, *backend);
        if (as_json) {
          std::cout << answer_json(answer, true).dump(2) << "\n";
        } else {
          std::cout << decision_name(answer.decision) << "\n" << answer.explanation << "\n";
        }
      } catch (const EntityError& e) {
        std::cerr << "error: " << code_name(e.code()) << ": " << e.what();
        if (!e.candidates().empty()) {
          const bool near_miss = e.code() == ErrorCode::kDrugNotFound || e.code() == ErrorCode::kSideEffectNotFound;
          std::cerr << (near_miss ? " (did you mean: " : " (candidates: ") << text::join(e.candidates(), ", ") << ")";
        }
        std::cerr << "\n";
        return 1;
      }
    } else if (*serve) {
      if (!host.empty()) cfg.host = host;
      if (port) cfg.port = port;
      if (!static_dir.empty()) cfg.static_dir = static_dir;
      if (serve->count("--pipeline")) cfg.pipeline = pipeline_tag_arg;
      const Pipeline default_pipeline = pipeline_arg(cfg.pipeline);
      auto resources = load_resources(
          cfg, {Pipeline::kRagA, Pipeline::kRagB, Pipeline::kGraphRag, Pipeline::kBaseline}, true);
      QueryService service(std::move(resources), make_backend(cfg), default_pipeline);
      httplib::Server server;
      RequestLog log(&std::cout);
      std::optional<std::string> dir;
      if (cfg.static_dir) dir = cfg.static_dir->string();
      mount(server, service, log, dir);
      std::cerr << "listening on " << cfg.host << ":" << cfg.port << "\n";
      if (!server.listen(cfg.host, cfg.port)) {
        throw Error(ErrorCode::kIo, "cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
