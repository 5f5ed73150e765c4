#pragma once

// Parser for the single-edge Cypher pattern the graph pipeline emits:
//
//   MATCH (a[:Label] [{prop: 'lit', ...}])-[r:EDGE_LABEL [{...}]]->(b[:Label] [{...}])
//   [WHERE v.prop = 'lit' [AND v.prop = 'lit']...]
//   RETURN v [, v]... [;]
//
// Anything else (multi-hop paths, OR, expressions in RETURN, reversed or
// undirected relationships) is rejected with a positioned syntax error.

#include <cctype>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "drugrag/error.hpp"
#include "drugrag/text.hpp"

namespace drugrag::cypher {

struct Predicate {
  std::string var;
  std::string property;
  std::string literal;

  bool operator==(const Predicate&) const = default;
};

struct CypherQuery {
  std::string source_var;
  std::optional<std::string> source_label;
  std::string edge_var;
  std::string edge_label;  // as written; matched case-insensitively at execution
  std::string target_var;
  std::optional<std::string> target_label;
  std::vector<Predicate> where_clauses;  // inline property maps are desugared here
  std::vector<std::string> return_vars;

  bool operator==(const CypherQuery&) const = default;
};

enum class Role { kSource, kEdge, kTarget };

inline std::optional<Role> role_of(const CypherQuery& q, std::string_view var) {
  if (var == q.source_var) return Role::kSource;
  if (var == q.edge_var) return Role::kEdge;
  if (var == q.target_var) return Role::kTarget;
  return std::nullopt;
}

/// Variable-name-independent form of a query. Node labels implied by the graph
/// schema (Drug sources, SideEffect targets) are dropped, the edge label is
/// uppercased and predicates become an unordered set.
struct NormalizedQuery {
  std::optional<std::string> source_label;
  std::optional<std::string> target_label;
  std::string edge_label;
  std::set<std::tuple<Role, std::string, std::string>> predicates;
  std::vector<Role> returns;

  bool operator==(const NormalizedQuery&) const = default;
};

inline NormalizedQuery normalize(const CypherQuery& q) {
  NormalizedQuery n;
  if (q.source_label && *q.source_label != "Drug") n.source_label = q.source_label;
  if (q.target_label && *q.target_label != "SideEffect") n.target_label = q.target_label;
  for (char c : q.edge_label) n.edge_label.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (const auto& p : q.where_clauses) n.predicates.emplace(*role_of(q, p.var), p.property, p.literal);
  for (const auto& v : q.return_vars) n.returns.push_back(*role_of(q, v));
  return n;
}

inline bool equivalent(const CypherQuery& a, const CypherQuery& b) { return normalize(a) == normalize(b); }

/// Single-quoted literal with backslash escapes for quote and backslash.
inline std::string quote_literal(std::string_view value) {
  std::string out = "'";
  for (char c : value) {
    if (c == '\\' || c == '\'') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

/// The lookup query for one (drug, side effect) pair, in the three-line form
/// with a WHERE clause.
inline std::string build_cypher_for_pair(std::string_view drug_name, std::string_view se_name) {
  std::string out = "MATCH (s)-[r:May_Cause_Side_Effect]->(t)\nWHERE s.name = ";
  out += quote_literal(drug_name);
  out += " AND t.name = ";
  out += quote_literal(se_name);
  out += "\nRETURN s, r, t";
  return out;
}

namespace detail {

enum class Tok { kIdent, kString, kPunct, kArrow, kEnd };

struct Token {
  Tok kind;
  std::string text;  // identifier, decoded literal, or punctuation
  std::size_t pos;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (text::is_space(c)) {
      ++i;
      continue;
    }
    if (text::is_ascii_alnum(c) || c == '_') {
      const std::size_t start = i;
      while (i < src.size() && (text::is_ascii_alnum(src[i]) || src[i] == '_')) ++i;
      out.push_back({Tok::kIdent, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (c == '\'' || c == '"') {
      const std::size_t start = i++;
      std::string value;
      bool closed = false;
      while (i < src.size()) {
        const char d = src[i];
        if (d == c) {
          closed = true;
          ++i;
          break;
        }
        if (d == '\\') {
          if (i + 1 >= src.size()) break;
          const char e = src[i + 1];
          switch (e) {
            case '\\': value.push_back('\\'); break;
            case '\'': value.push_back('\''); break;
            case '"': value.push_back('"'); break;
            case 'n': value.push_back('\n'); break;
            case 't': value.push_back('\t'); break;
            default: throw CypherSyntaxError(i, "a valid escape sequence");
          }
          i += 2;
          continue;
        }
        value.push_back(d);
        ++i;
      }
      if (!closed) throw CypherSyntaxError(start, "closing quote");
      out.push_back({Tok::kString, std::move(value), start});
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      out.push_back({Tok::kArrow, "->", i});
      i += 2;
      continue;
    }
    static constexpr std::string_view kPunct = "()[]{}:,.=-<;";
    if (kPunct.find(c) != std::string_view::npos) {
      out.push_back({Tok::kPunct, std::string(1, c), i});
      ++i;
      continue;
    }
    throw CypherSyntaxError(i, "a token");
  }
  out.push_back({Tok::kEnd, "", src.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  CypherQuery parse() {
    CypherQuery q;
    keyword("MATCH");
    std::vector<Predicate> inline_preds;

    node(q.source_var, q.source_label, inline_preds);
    if (peek_punct("<")) throw CypherSyntaxError(peek().pos, "'-' (only left-to-right relationships)");
    punct("-");
    punct("[");
    q.edge_var = ident("relationship variable");
    punct(":");
    q.edge_label = ident("relationship type");
    properties(q.edge_var, inline_preds);
    punct("]");
    if (peek().kind != Tok::kArrow) throw CypherSyntaxError(peek().pos, "'->'");
    ++at_;
    node(q.target_var, q.target_label, inline_preds);
    if (peek_punct("-") || peek_punct("<") || peek().kind == Tok::kArrow || peek_punct(",")) {
      throw CypherSyntaxError(peek().pos, "WHERE or RETURN (multi-hop patterns are not supported)");
    }

    if (q.source_var == q.edge_var || q.source_var == q.target_var || q.edge_var == q.target_var) {
      throw CypherSyntaxError(toks_[0].pos, "distinct pattern variables");
    }
    q.where_clauses = std::move(inline_preds);

    if (peek_keyword("WHERE")) {
      ++at_;
      predicate(q);
      while (peek_keyword("AND")) {
        ++at_;
        predicate(q);
      }
      if (peek_keyword("OR") || peek_keyword("XOR")) throw CypherSyntaxError(peek().pos, "AND or RETURN");
    }
    keyword("RETURN");
    return_item(q);
    while (peek_punct(",")) {
      ++at_;
      return_item(q);
    }
    if (peek_punct(";")) ++at_;
    if (peek().kind != Tok::kEnd) throw CypherSyntaxError(peek().pos, "',' or end of query");
    return q;
  }

 private:
  const Token& peek() const { return toks_[at_]; }

  bool peek_punct(std::string_view p) const { return peek().kind == Tok::kPunct && peek().text == p; }
  bool peek_keyword(std::string_view kw) const {
    return peek().kind == Tok::kIdent && text::equals_ci(peek().text, kw);
  }

  void keyword(std::string_view kw) {
    if (!peek_keyword(kw)) throw CypherSyntaxError(peek().pos, std::string(kw));
    ++at_;
  }
  void punct(std::string_view p) {
    if (!peek_punct(p)) throw CypherSyntaxError(peek().pos, "'" + std::string(p) + "'");
    ++at_;
  }
  std::string ident(const std::string& what) {
    if (peek().kind != Tok::kIdent || !(std::isalpha(static_cast<unsigned char>(peek().text[0])) ||
                                        peek().text[0] == '_')) {
      throw CypherSyntaxError(peek().pos, what);
    }
    return toks_[at_++].text;
  }
  std::string literal() {
    if (peek().kind != Tok::kString) throw CypherSyntaxError(peek().pos, "string literal");
    return toks_[at_++].text;
  }

  void node(std::string& var, std::optional<std::string>& label, std::vector<Predicate>& preds) {
    punct("(");
    var = ident("node variable");
    if (peek_punct(":")) {
      ++at_;
      label = ident("node label");
    }
    properties(var, preds);
    punct(")");
  }

  void properties(const std::string& var, std::vector<Predicate>& preds) {
    if (!peek_punct("{")) return;
    ++at_;
    for (;;) {
      Predicate p;
      p.var = var;
      p.property = ident("property name");
      punct(":");
      p.literal = literal();
      preds.push_back(std::move(p));
      if (peek_punct(",")) {
        ++at_;
        continue;
      }
      break;
    }
    punct("}");
  }

  void predicate(CypherQuery& q) {
    const std::size_t pos = peek().pos;
    Predicate p;
    p.var = ident("variable");
    if (!role_of(q, p.var)) throw CypherSyntaxError(pos, "declared variable (undeclared '" + p.var + "')");
    punct(".");
    p.property = ident("property name");
    punct("=");
    p.literal = literal();
    q.where_clauses.push_back(std::move(p));
  }

  void return_item(CypherQuery& q) {
    const std::size_t pos = peek().pos;
    std::string var = ident("return variable");
    if (!role_of(q, var)) throw CypherSyntaxError(pos, "declared variable (undeclared '" + var + "')");
    q.return_vars.push_back(std::move(var));
  }

  std::vector<Token> toks_;
  std::size_t at_ = 0;
};

}  // namespace detail

inline CypherQuery parse_cypher(std::string_view src) {
  if (text::trim(src).empty()) throw CypherSyntaxError(0, "MATCH");
  return detail::Parser(src).parse();
}

}  // namespace drugrag::cypher
