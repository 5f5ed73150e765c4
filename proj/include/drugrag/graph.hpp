#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "drugrag/cypher.hpp"
#include "drugrag/error.hpp"
#include "drugrag/kb.hpp"
#include "drugrag/text.hpp"

namespace drugrag {

inline constexpr std::string_view kSideEffectEdgeLabel = "MAY_CAUSE_SIDE_EFFECT";

enum class NodeLabel { kDrug, kSideEffect };

inline std::string_view label_name(NodeLabel label) { return label == NodeLabel::kDrug ? "Drug" : "SideEffect"; }

struct GraphNode {
  NodeLabel label;
  std::map<std::string, std::string> properties;  // always holds "name"

  const std::string& name() const { return properties.at("name"); }
};

/// Labeled property graph with Drug and SideEffect nodes joined by directed
/// MAY_CAUSE_SIDE_EFFECT edges. Immutable once built.
class PropertyGraph {
 public:
  std::size_t add_node(NodeLabel label, std::map<std::string, std::string> properties) {
    const auto name_it = properties.find("name");
    if (name_it == properties.end() || name_it->second.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "graph nodes need a nonempty name");
    }
    const std::size_t id = nodes_.size();
    if (!name_index_.emplace(std::pair{label, name_it->second}, id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate " + std::string(label_name(label)) + " node '" + name_it->second + "'");
    }
    for (const auto& [key, value] : properties) property_keys_.insert(key);
    nodes_.push_back(GraphNode{label, std::move(properties)});
    out_edges_.emplace_back();
    return id;
  }

  /// Duplicate edges are ignored.
  void add_edge(std::size_t source, std::size_t target) {
    if (source >= nodes_.size() || target >= nodes_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "edge endpoint out of range");
    }
    if (nodes_[source].label != NodeLabel::kDrug || nodes_[target].label != NodeLabel::kSideEffect) {
      throw Error(ErrorCode::kInvalidArgument, "edges must run from a Drug to a SideEffect");
    }
    auto& out = out_edges_[source];
    const auto pos = std::lower_bound(out.begin(), out.end(), target, [&](std::size_t a, std::size_t b) {
      return nodes_[a].name() < nodes_[b].name();
    });
    if (pos != out.end() && *pos == target) return;
    out.insert(pos, target);
    ++edge_count_;
  }

  std::optional<std::size_t> find(NodeLabel label, std::string_view name) const {
    const auto it = name_index_.find(std::pair{label, std::string(name)});
    if (it == name_index_.end()) return std::nullopt;
    return it->second;
  }

  const GraphNode& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t node_count(NodeLabel label) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [&](const GraphNode& n) { return n.label == label; }));
  }
  std::size_t edge_count() const { return edge_count_; }

  /// Targets of `source`, ordered by target name.
  const std::vector<std::size_t>& out_edges(std::size_t source) const { return out_edges_.at(source); }

  /// Node ids of one label ordered by name.
  std::vector<std::size_t> nodes_by_name(NodeLabel label) const {
    std::vector<std::size_t> out;
    for (const auto& [key, id] : name_index_) {
      if (key.first == label) out.push_back(id);
    }
    return out;
  }

  /// Property keys known to the schema or carried by any node.
  bool knows_property(std::string_view key) const {
    return key == "name" || key == "id" || property_keys_.count(std::string(key)) > 0;
  }

 private:
  std::vector<GraphNode> nodes_;
  std::vector<std::vector<std::size_t>> out_edges_;
  std::map<std::pair<NodeLabel, std::string>, std::size_t> name_index_;
  std::set<std::string> property_keys_;
  std::size_t edge_count_ = 0;
};

inline PropertyGraph build_graph(const KnowledgeBase& kb) {
  PropertyGraph graph;
  std::map<std::string, std::size_t> drug_nodes, term_nodes;
  for (const auto* drug : kb.drugs_by_name()) {
    drug_nodes[drug->drug_id] = graph.add_node(
        NodeLabel::kDrug, {{"name", drug->name}, {"id", drug->drug_id}, {"atc", text::join(drug->atc_codes, ";")}});
  }
  for (const auto* term : kb.terms_by_name()) {
    std::map<std::string, std::string> props{{"name", term->name}, {"id", term->term_id}};
    if (term->soc_class) props.emplace("soc", *term->soc_class);
    term_nodes[term->term_id] = graph.add_node(NodeLabel::kSideEffect, std::move(props));
  }
  for (const auto& a : kb.associations()) graph.add_edge(drug_nodes.at(a.drug_id), term_nodes.at(a.term_id));
  return graph;
}

/// One variable binding in a result row: a node, or the edge between two nodes.
struct Binding {
  std::string var;
  bool is_edge = false;
  std::size_t node = 0;    // node bindings
  std::size_t source = 0;  // edge bindings
  std::size_t target = 0;

  bool operator==(const Binding&) const = default;
};

struct ResultRow {
  std::size_t source = 0;
  std::size_t target = 0;
  std::vector<Binding> bindings;  // in RETURN order

  bool operator==(const ResultRow&) const = default;
};

/// "drug -[MAY_CAUSE_SIDE_EFFECT]-> side effect" for a matched row.
inline std::string describe_triple(const PropertyGraph& graph, const ResultRow& row) {
  return graph.node(row.source).name() + " -[" + std::string(kSideEffectEdgeLabel) + "]-> " +
         graph.node(row.target).name();
}

/// All (source, edge, target) matches ordered by source then target name.
inline std::vector<ResultRow> execute_cypher(const PropertyGraph& graph, const cypher::CypherQuery& query) {
  using cypher::Role;
  std::vector<const cypher::Predicate*> source_preds, target_preds;
  for (const auto& p : query.where_clauses) {
    const auto role = cypher::role_of(query, p.var);
    if (!role) throw Error(ErrorCode::kInvalidArgument, "predicate on undeclared variable '" + p.var + "'");
    if (*role == Role::kEdge || !graph.knows_property(p.property)) {
      throw Error(ErrorCode::kUnknownProperty, "no " + std::string(*role == Role::kEdge ? "relationship" : "node") +
                                                   " carries property '" + p.property + "'");
    }
    (*role == Role::kSource ? source_preds : target_preds).push_back(&p);
  }
  for (const auto& v : query.return_vars) {
    if (!cypher::role_of(query, v)) throw Error(ErrorCode::kInvalidArgument, "undeclared return variable " + v);
  }

  std::vector<ResultRow> rows;
  if (!text::equals_ci(query.edge_label, kSideEffectEdgeLabel)) return rows;
  auto label_ok = [](const GraphNode& n, const std::optional<std::string>& label) {
    return !label || *label == label_name(n.label);
  };
  auto preds_ok = [](const GraphNode& n, const std::vector<const cypher::Predicate*>& preds) {
    for (const auto* p : preds) {
      const auto it = n.properties.find(p->property);
      if (it == n.properties.end() || it->second != p->literal) return false;
    }
    return true;
  };

  std::vector<std::size_t> sources;
  const auto name_pred = std::find_if(source_preds.begin(), source_preds.end(),
                                      [](const auto* p) { return p->property == "name"; });
  if (name_pred != source_preds.end()) {
    if (const auto id = graph.find(NodeLabel::kDrug, (*name_pred)->literal)) sources.push_back(*id);
  } else {
    sources = graph.nodes_by_name(NodeLabel::kDrug);
  }

  for (const std::size_t s : sources) {
    const auto& src = graph.node(s);
    if (!label_ok(src, query.source_label) || !preds_ok(src, source_preds)) continue;
    for (const std::size_t t : graph.out_edges(s)) {
      const auto& tgt = graph.node(t);
      if (!label_ok(tgt, query.target_label) || !preds_ok(tgt, target_preds)) continue;
      ResultRow row{s, t, {}};
      for (const auto& v : query.return_vars) {
        switch (*cypher::role_of(query, v)) {
          case Role::kSource: row.bindings.push_back({v, false, s, 0, 0}); break;
          case Role::kTarget: row.bindings.push_back({v, false, t, 0, 0}); break;
          case Role::kEdge: row.bindings.push_back({v, true, 0, s, t}); break;
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::vector<ResultRow> execute_cypher(const PropertyGraph& graph, std::string_view query_text) {
  return execute_cypher(graph, cypher::parse_cypher(query_text));
}

/// One JSON object per edge: {"source":..., "label":..., "target":...}, by source then target name.
inline void write_graph_jsonl(const PropertyGraph& graph, std::ostream& out) {
  for (const std::size_t s : graph.nodes_by_name(NodeLabel::kDrug)) {
    for (const std::size_t t : graph.out_edges(s)) {
      nlohmann::ordered_json j;
      j["source"] = graph.node(s).name();
      j["label"] = kSideEffectEdgeLabel;
      j["target"] = graph.node(t).name();
      out << j.dump() << '\n';
    }
  }
}

/// Rebuilds a graph from its edge list. Nodes carry only their names.
inline PropertyGraph read_graph_jsonl(std::istream& in) {
  PropertyGraph graph;
  std::string line;
  std::size_t number = 0;
  std::vector<std::pair<std::string, std::string>> edges;
  std::set<std::string> drugs, terms;
  while (std::getline(in, line)) {
    ++number;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (!text::equals_ci(j.at("label").get<std::string>(), kSideEffectEdgeLabel)) {
        throw MalformedRowError(number, "unexpected edge label");
      }
      edges.emplace_back(j.at("source").get<std::string>(), j.at("target").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRowError(number, e.what());
    }
    drugs.insert(edges.back().first);
    terms.insert(edges.back().second);
  }
  for (const auto& d : drugs) graph.add_node(NodeLabel::kDrug, {{"name", d}});
  for (const auto& t : terms) graph.add_node(NodeLabel::kSideEffect, {{"name", t}});
  for (const auto& [d, t] : edges) {
    graph.add_edge(*graph.find(NodeLabel::kDrug, d), *graph.find(NodeLabel::kSideEffect, t));
  }
  return graph;
}

/// CREATE statements for loading the graph into an external graph database.
inline void write_cypher_script(const PropertyGraph& graph, std::ostream& out) {
  auto props = [](const GraphNode& n) {
    std::string s = "{";
    bool first = true;
    for (const auto& [key, value] : n.properties) {
      if (!first) s += ", ";
      first = false;
      s += key + ": " + cypher::quote_literal(value);
    }
    return s + "}";
  };
  for (const NodeLabel label : {NodeLabel::kDrug, NodeLabel::kSideEffect}) {
    for (const std::size_t id : graph.nodes_by_name(label)) {
      out << "CREATE (:" << label_name(label) << ' ' << props(graph.node(id)) << ");\n";
    }
  }
  for (const std::size_t s : graph.nodes_by_name(NodeLabel::kDrug)) {
    for (const std::size_t t : graph.out_edges(s)) {
      out << "MATCH (d:Drug {name: " << cypher::quote_literal(graph.node(s).name())
          << "}), (s:SideEffect {name: " << cypher::quote_literal(graph.node(t).name()) << "}) CREATE (d)-[:"
          << kSideEffectEdgeLabel << "]->(s);\n";
    }
  }
}

}  // namespace drugrag
