#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace drugrag;
using testsupport::fixture_kb;

namespace {

const PropertyGraph& fixture_graph() {
  static const PropertyGraph g = build_graph(*fixture_kb());
  return g;
}

std::string dump(const PropertyGraph& g) {
  std::ostringstream out;
  write_graph_jsonl(g, out);
  return out.str();
}

}  // namespace

TEST(Graph, CountsMatchKb) {
  const auto& g = fixture_graph();
  const auto kb = fixture_kb();
  EXPECT_EQ(g.node_count(NodeLabel::kDrug), kb->drugs().size());
  EXPECT_EQ(g.node_count(NodeLabel::kSideEffect), kb->terms().size());
  EXPECT_EQ(g.edge_count(), kb->associations().size());
}

TEST(Graph, EmptyKbGivesEmptyGraph) {
  const auto g = build_graph(KnowledgeBase{});
  EXPECT_EQ(g.node_count(), 0u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Graph, EdgeSetEqualsAssociationsByName) {
  const auto& g = fixture_graph();
  const auto kb = fixture_kb();
  std::set<std::pair<std::string, std::string>> edges, expected;
  for (const auto s : g.nodes_by_name(NodeLabel::kDrug)) {
    for (const auto t : g.out_edges(s)) edges.emplace(g.node(s).name(), g.node(t).name());
  }
  for (const auto& a : kb->associations()) expected.emplace(kb->find_drug(a.drug_id)->name, kb->find_term(a.term_id)->name);
  EXPECT_EQ(edges, expected);
}

TEST(Graph, NodesCarryKbProperties) {
  const auto& g = fixture_graph();
  const auto id = g.find(NodeLabel::kDrug, "aspirin");
  ASSERT_TRUE(id);
  EXPECT_EQ(g.node(*id).properties.at("atc"), "B01AC06;N02BA01");
  EXPECT_TRUE(g.knows_property("soc"));
  EXPECT_FALSE(g.knows_property("color"));
}

TEST(Graph, RejectsInvalidStructure) {
  PropertyGraph g;
  const auto d = g.add_node(NodeLabel::kDrug, {{"name", "x"}});
  const auto s = g.add_node(NodeLabel::kSideEffect, {{"name", "x"}});
  EXPECT_THROW(g.add_node(NodeLabel::kDrug, {{"name", "x"}}), Error);
  EXPECT_THROW(g.add_node(NodeLabel::kDrug, {{"id", "1"}}), Error);
  EXPECT_THROW(g.add_edge(s, d), Error);
  g.add_edge(d, s);
  g.add_edge(d, s);
  EXPECT_EQ(g.edge_count(), 1u);
}

TEST(Execute, WorkedQueryBothForms) {
  const auto& g = fixture_graph();
  const auto rows = execute_cypher(g, cypher::build_cypher_for_pair("metformin", "headache"));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(describe_triple(g, rows[0]), "metformin -[MAY_CAUSE_SIDE_EFFECT]-> headache");
  ASSERT_EQ(rows[0].bindings.size(), 3u);
  EXPECT_TRUE(rows[0].bindings[1].is_edge);
  const auto inline_rows = execute_cypher(
      g, std::string_view("MATCH (d:Drug {name: 'metformin'})-[r:may_cause_side_effect]->(s:SideEffect {name: 'headache'}) "
                          "RETURN d, r, s"));
  ASSERT_EQ(inline_rows.size(), 1u);
  EXPECT_EQ(inline_rows[0].source, rows[0].source);
  EXPECT_EQ(inline_rows[0].target, rows[0].target);
}

TEST(Execute, AbsentEdgeIsEmpty) {
  const auto& g = fixture_graph();
  const auto kb = fixture_kb();
  const auto* metformin = kb->find_drug_by_name("metformin");
  const auto* insomnia = kb->find_term_by_name("insomnia");
  ASSERT_TRUE(metformin && insomnia);
  ASSERT_FALSE(kb->contains(metformin->drug_id, insomnia->term_id));
  EXPECT_TRUE(execute_cypher(g, cypher::build_cypher_for_pair("metformin", "insomnia")).empty());
  EXPECT_TRUE(execute_cypher(g, cypher::build_cypher_for_pair("not a drug", "headache")).empty());
}

TEST(Execute, OracleEquivalenceExhaustive) {
  const auto& g = fixture_graph();
  const auto kb = fixture_kb();
  std::size_t positives = 0;
  for (const auto& [did, drug] : kb->drugs()) {
    for (const auto& [tid, term] : kb->terms()) {
      const auto rows = execute_cypher(g, cypher::build_cypher_for_pair(drug.name, term.name));
      const bool expected = kb->contains(did, tid);
      ASSERT_EQ(rows.size(), expected ? 1u : 0u) << drug.name << " / " << term.name;
      positives += rows.size();
    }
  }
  EXPECT_EQ(positives, kb->associations().size());
}

TEST(Execute, EdgeLabelCasingVariants) {
  const auto& g = fixture_graph();
  for (const char* label : {"MAY_CAUSE_SIDE_EFFECT", "may_cause_side_effect", "May_Cause_Side_Effect"}) {
    const std::string q = std::string("MATCH (s)-[r:") + label + "]->(t) WHERE s.name = 'metformin' RETURN t";
    EXPECT_EQ(execute_cypher(g, std::string_view(q)).size(),
              fixture_kb()->side_effects_of(fixture_kb()->find_drug_by_name("metformin")->drug_id).size());
  }
  EXPECT_TRUE(execute_cypher(g, std::string_view("MATCH (s)-[r:TREATS]->(t) RETURN s")).empty());
}

TEST(Execute, RowsOrderedBySourceThenTarget) {
  const auto& g = fixture_graph();
  const auto rows = execute_cypher(g, std::string_view("MATCH (s)-[r:MAY_CAUSE_SIDE_EFFECT]->(t) RETURN s, t"));
  ASSERT_EQ(rows.size(), fixture_kb()->associations().size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto key = [&](const ResultRow& r) { return std::pair{g.node(r.source).name(), g.node(r.target).name()}; };
    EXPECT_LT(key(rows[i - 1]), key(rows[i]));
  }
}

TEST(Execute, OtherPropertiesAndLabels) {
  const auto& g = fixture_graph();
  const auto* aspirin = fixture_kb()->find_drug_by_name("aspirin");
  const auto by_id = execute_cypher(
      g, std::string_view("MATCH (s)-[r:MAY_CAUSE_SIDE_EFFECT]->(t) WHERE s.id = '" + aspirin->drug_id + "' RETURN t"));
  EXPECT_EQ(by_id.size(), fixture_kb()->side_effects_of(aspirin->drug_id).size());
  EXPECT_TRUE(execute_cypher(g, std::string_view("MATCH (s:SideEffect)-[r:MAY_CAUSE_SIDE_EFFECT]->(t) RETURN s")).empty());
}

TEST(Execute, UnknownProperty) {
  const auto& g = fixture_graph();
  auto code = [&](const char* q) {
    try {
      execute_cypher(g, std::string_view(q));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code("MATCH (s)-[r:MAY_CAUSE_SIDE_EFFECT]->(t) WHERE t.color = 'red' RETURN t"), ErrorCode::kUnknownProperty);
  EXPECT_EQ(code("MATCH (s)-[r:MAY_CAUSE_SIDE_EFFECT]->(t) WHERE r.weight = '1' RETURN t"), ErrorCode::kUnknownProperty);
}

TEST(Export, JsonLinesRoundTripAndDeterminism) {
  const auto& g = fixture_graph();
  const auto text = dump(g);
  EXPECT_EQ(text, dump(build_graph(*fixture_kb())));
  std::istringstream in(text);
  const auto back = read_graph_jsonl(in);
  EXPECT_EQ(back.edge_count(), g.edge_count());
  EXPECT_EQ(dump(back), text);
  EXPECT_EQ(text.substr(0, text.find('\n')).find("{\"source\":"), 0u);
}

TEST(Export, CypherScript) {
  std::ostringstream out;
  write_cypher_script(fixture_graph(), out);
  const auto s = out.str();
  EXPECT_NE(s.find("CREATE (:Drug {atc: 'B01AC06;N02BA01', id: '"), std::string::npos);
  EXPECT_NE(s.find("name: 'raynaud\\'s phenomenon'"), std::string::npos);
  EXPECT_NE(s.find("CREATE (d)-[:MAY_CAUSE_SIDE_EFFECT]->(s);"), std::string::npos);
}
