#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "drugrag/drugrag.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& name) { return std::string(DRUGRAG_FIXTURE_DIR) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(DRUGRAG_GOLDEN_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<const drugrag::KnowledgeBase> fixture_kb() {
  static const auto kb =
      std::make_shared<const drugrag::KnowledgeBase>(drugrag::load_association_table(fixture_path("mini_sider.tsv")));
  return kb;
}

inline drugrag::KnowledgeBase kb_from(const std::string& tsv) {
  std::istringstream in(tsv);
  return drugrag::parse_association_table(in);
}

// Everything every pipeline needs, built from the fixture with the hash embedder.
inline const drugrag::Resources& fixture_resources() {
  static const drugrag::Resources r = [] {
    using namespace drugrag;
    Resources out;
    out.kb = fixture_kb();
    out.gazetteer = std::make_shared<const Gazetteer>(*out.kb);
    out.graph = std::make_shared<const PropertyGraph>(build_graph(*out.kb));
    auto embedder = std::make_shared<const HashEmbedder>();
    out.embedder = embedder;
    out.index_a = std::make_shared<const VectorIndex>(build_index(export_corpus(*out.kb, CorpusFormat::kA), *embedder));
    out.index_b = std::make_shared<const VectorIndex>(build_index(export_corpus(*out.kb, CorpusFormat::kB), *embedder));
    return out;
  }();
  return r;
}

// Frozen output of fixtures/count_mini_sider.py.
inline constexpr std::size_t kFixtureDrugs = 60;
inline constexpr std::size_t kFixtureTerms = 83;
inline constexpr std::size_t kFixtureAssociations = 1120;
inline constexpr std::size_t kFixtureEligibleDrugs = 55;

}  // namespace testsupport
