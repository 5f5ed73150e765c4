#pragma once

// Knowledge-base ingestion: SIDER-style association tables in, a filtered and
// canonicalized drug -> side-effect knowledge base out, plus the two textual
// corpus renderings (one aggregated line per drug, one line per pair).

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "drugrag/error.hpp"
#include "drugrag/text.hpp"

namespace drugrag {

struct DrugRecord {
  std::string drug_id;
  std::string name;
  std::vector<std::string> atc_codes;
};

struct SideEffectTerm {
  std::string term_id;
  std::string name;
  std::optional<std::string> soc_class;
};

struct Association {
  std::string drug_id;
  std::string term_id;

  auto operator<=>(const Association&) const = default;
};

/// One input row before filtering. `atc_codes` may be empty (row is dropped).
struct AssociationRow {
  std::string drug_id;
  std::string drug_name;
  std::vector<std::string> atc_codes;
  std::string term_type;
  std::string term_id;
  std::string term_name;
  std::string soc;
};

inline bool valid_atc_code(std::string_view code) {
  static constexpr std::string_view kLevel1 = "ABCDGHJLMNPRSV";
  return !code.empty() && kLevel1.find(code.front()) != std::string_view::npos;
}

class KnowledgeBaseBuilder;

/// Immutable after construction; safe for concurrent reads.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  const std::map<std::string, DrugRecord>& drugs() const { return drugs_; }
  const std::map<std::string, SideEffectTerm>& terms() const { return terms_; }
  const std::set<Association>& associations() const { return associations_; }
  bool empty() const { return associations_.empty(); }

  const DrugRecord* find_drug(std::string_view drug_id) const {
    const auto it = drugs_.find(std::string(drug_id));
    return it == drugs_.end() ? nullptr : &it->second;
  }
  const SideEffectTerm* find_term(std::string_view term_id) const {
    const auto it = terms_.find(std::string(term_id));
    return it == terms_.end() ? nullptr : &it->second;
  }
  const DrugRecord* find_drug_by_name(std::string_view name) const {
    const auto it = drug_by_name_.find(text::canonical_name(name));
    return it == drug_by_name_.end() ? nullptr : find_drug(it->second);
  }
  const SideEffectTerm* find_term_by_name(std::string_view name) const {
    const auto it = term_by_name_.find(text::canonical_name(name));
    return it == term_by_name_.end() ? nullptr : find_term(it->second);
  }

  /// Term ids associated with `drug_id`, ordered by id. Empty for unknown drugs.
  const std::set<std::string>& side_effects_of(std::string_view drug_id) const {
    static const std::set<std::string> kNone;
    const auto it = adjacency_.find(std::string(drug_id));
    return it == adjacency_.end() ? kNone : it->second;
  }

  /// Side effects of a drug ordered by canonical term name.
  std::vector<const SideEffectTerm*> side_effects_by_name(std::string_view drug_id) const {
    std::vector<const SideEffectTerm*> out;
    for (const auto& term_id : side_effects_of(drug_id)) out.push_back(find_term(term_id));
    std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->name < b->name; });
    return out;
  }

  bool contains(std::string_view drug_id, std::string_view term_id) const {
    return side_effects_of(drug_id).count(std::string(term_id)) > 0;
  }

  /// Drugs ordered by canonical name.
  std::vector<const DrugRecord*> drugs_by_name() const {
    std::vector<const DrugRecord*> out;
    for (const auto& [name, id] : drug_by_name_) out.push_back(find_drug(id));
    return out;
  }

  /// Terms ordered by canonical name.
  std::vector<const SideEffectTerm*> terms_by_name() const {
    std::vector<const SideEffectTerm*> out;
    for (const auto& [name, id] : term_by_name_) out.push_back(find_term(id));
    return out;
  }

  /// Hex FNV-1a of the canonical TSV serialization.
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  friend class KnowledgeBaseBuilder;

  std::map<std::string, DrugRecord> drugs_;
  std::map<std::string, SideEffectTerm> terms_;
  std::set<Association> associations_;
  std::map<std::string, std::set<std::string>> adjacency_;
  std::map<std::string, std::string> drug_by_name_;
  std::map<std::string, std::string> term_by_name_;
  std::string fingerprint_;
};

/// Canonical TSV: header plus one row per association ordered by drug then term name.
/// Re-ingesting this output reproduces the same knowledge base.
inline void write_kb_tsv(const KnowledgeBase& kb, std::ostream& out) {
  out << "drug_id\tdrug_name\tatc_codes\tterm_type\tterm_id\tterm_name\tsoc\n";
  for (const auto* drug : kb.drugs_by_name()) {
    const std::string atc = text::join(drug->atc_codes, ";");
    for (const auto* term : kb.side_effects_by_name(drug->drug_id)) {
      out << drug->drug_id << '\t' << drug->name << '\t' << atc << "\tPT\t" << term->term_id << '\t'
          << term->name << '\t' << term->soc_class.value_or("") << '\n';
    }
  }
}

inline std::string kb_tsv(const KnowledgeBase& kb) {
  std::ostringstream out;
  write_kb_tsv(kb, out);
  return out.str();
}

/// Accumulates rows, applies the ATC/PT filters and enforces the KB invariants.
class KnowledgeBaseBuilder {
 public:
  /// Returns false when the row is filtered out (no ATC code, or not a PT).
  bool add(const AssociationRow& row, std::size_t line) {
    if (text::trim(row.term_type) != "PT") return false;
    std::vector<std::string> atc;
    for (const auto& code : row.atc_codes) {
      std::string c(text::trim(code));
      for (char& ch : c) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      if (!c.empty()) atc.push_back(std::move(c));
    }
    if (atc.empty()) return false;

    const std::string drug_id(text::trim(row.drug_id));
    const std::string term_id(text::trim(row.term_id));
    const std::string drug_name = text::canonical_name(row.drug_name);
    const std::string term_name = text::canonical_name(row.term_name);
    const std::string soc = collapse_spaces(row.soc);
    if (drug_id.empty()) throw MalformedRowError(line, "empty drug_id");
    if (term_id.empty()) throw MalformedRowError(line, "empty term_id");
    if (drug_name.empty()) throw MalformedRowError(line, "empty drug name");
    if (term_name.empty()) throw MalformedRowError(line, "empty term name");
    for (const auto& c : atc) {
      if (!valid_atc_code(c)) throw MalformedRowError(line, "invalid ATC code '" + c + "'");
    }

    auto [drug_it, drug_new] = kb_.drugs_.try_emplace(drug_id, DrugRecord{drug_id, drug_name, {}});
    if (!drug_new && drug_it->second.name != drug_name) {
      throw MalformedRowError(line, "drug " + drug_id + " renamed from '" + drug_it->second.name + "' to '" +
                                        drug_name + "'");
    }
    auto [dn_it, dn_new] = kb_.drug_by_name_.try_emplace(drug_name, drug_id);
    if (!dn_new && dn_it->second != drug_id) {
      throw MalformedRowError(line, "drug name '" + drug_name + "' maps to both " + dn_it->second + " and " +
                                        drug_id);
    }
    auto& codes = drug_it->second.atc_codes;
    for (auto& c : atc) {
      if (std::find(codes.begin(), codes.end(), c) == codes.end()) codes.push_back(std::move(c));
    }

    auto [term_it, term_new] = kb_.terms_.try_emplace(term_id, SideEffectTerm{term_id, term_name, std::nullopt});
    if (!term_new && term_it->second.name != term_name) {
      throw MalformedRowError(line, "term " + term_id + " renamed from '" + term_it->second.name + "' to '" +
                                        term_name + "'");
    }
    auto [tn_it, tn_new] = kb_.term_by_name_.try_emplace(term_name, term_id);
    if (!tn_new && tn_it->second != term_id) {
      throw MalformedRowError(line, "term name '" + term_name + "' maps to both " + tn_it->second + " and " +
                                        term_id);
    }
    if (!soc.empty()) {
      auto& existing = term_it->second.soc_class;
      if (existing && *existing != soc) {
        throw MalformedRowError(line, "term " + term_id + " has conflicting SOC '" + *existing + "' and '" +
                                          soc + "'");
      }
      existing = soc;
    }

    kb_.associations_.insert(Association{drug_id, term_id});
    kb_.adjacency_[drug_id].insert(term_id);
    return true;
  }

  KnowledgeBase build() && {
    if (kb_.associations_.empty()) throw Error(ErrorCode::kEmptyResult, "no rows survived filtering");
    for (auto& [id, drug] : kb_.drugs_) std::sort(drug.atc_codes.begin(), drug.atc_codes.end());
    kb_.fingerprint_ = text::hex64(text::fnv1a64(kb_tsv(kb_)));
    return std::move(kb_);
  }

 private:
  static std::string collapse_spaces(std::string_view s) {
    std::string out;
    bool pending = false;
    for (char c : text::trim(s)) {
      if (text::is_space(c)) {
        pending = true;
        continue;
      }
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
    return out;
  }

  KnowledgeBase kb_;
};

/// Maps the logical columns onto header names in the input file. The defaults
/// match the layout written by write_kb_tsv.
struct TableLayout {
  std::string drug_id = "drug_id";
  std::string drug_name = "drug_name";
  std::string atc_codes = "atc_codes";
  std::string term_type = "term_type";
  std::string term_id = "term_id";
  std::string term_name = "term_name";
  std::string soc = "soc";  // optional column

  /// Reads `field = header name` lines; '#' starts a comment.
  static TableLayout from_mapping(std::istream& in) {
    TableLayout layout;
    std::map<std::string, std::string*> fields = {
        {"drug_id", &layout.drug_id},     {"drug_name", &layout.drug_name}, {"atc_codes", &layout.atc_codes},
        {"term_type", &layout.term_type}, {"term_id", &layout.term_id},     {"term_name", &layout.term_name},
        {"soc", &layout.soc},
    };
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      const auto content = text::trim(std::string_view(line).substr(0, line.find('#')));
      if (content.empty()) continue;
      const auto eq = content.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::kConfig, "mapping line " + std::to_string(number) + ": expected field = column");
      }
      const std::string key(text::trim(content.substr(0, eq)));
      const auto it = fields.find(key);
      if (it == fields.end()) {
        throw Error(ErrorCode::kConfig, "mapping line " + std::to_string(number) + ": unknown field '" + key + "'");
      }
      *it->second = std::string(text::trim(content.substr(eq + 1)));
    }
    return layout;
  }
};

namespace detail {

inline std::vector<std::string> split_atc(std::string_view field) {
  std::vector<std::string> out;
  std::string current;
  for (char c : field) {
    if (c == ';' || c == ',' || c == '|') {
      if (!text::trim(current).empty()) out.emplace_back(text::trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!text::trim(current).empty()) out.emplace_back(text::trim(current));
  return out;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

/// Parses a tab-separated association table with a header row. Blank lines are
/// skipped; ATC codes may be separated by ';', ',' or '|'.
inline KnowledgeBase parse_association_table(std::istream& in, const TableLayout& layout = {}) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedRowError(1, "missing header row");
  detail::strip_cr(line);
  std::map<std::string, std::size_t> header;
  {
    const auto names = text::split(line, '\t');
    for (std::size_t i = 0; i < names.size(); ++i) header.emplace(std::string(text::trim(names[i])), i);
  }
  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    const auto it = header.find(name);
    if (it != header.end()) return it->second;
    if (required) throw MalformedRowError(1, "header lacks column '" + name + "'");
    return std::nullopt;
  };
  const std::size_t c_drug_id = *column(layout.drug_id, true);
  const std::size_t c_drug_name = *column(layout.drug_name, true);
  const std::size_t c_atc = *column(layout.atc_codes, true);
  const std::size_t c_type = *column(layout.term_type, true);
  const std::size_t c_term_id = *column(layout.term_id, true);
  const std::size_t c_term_name = *column(layout.term_name, true);
  const std::optional<std::size_t> c_soc = column(layout.soc, false);
  const std::size_t required_width =
      1 + std::max({c_drug_id, c_drug_name, c_atc, c_type, c_term_id, c_term_name});

  KnowledgeBaseBuilder builder;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    detail::strip_cr(line);
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() < required_width) {
      throw MalformedRowError(number, "expected at least " + std::to_string(required_width) + " columns, got " +
                                          std::to_string(cols.size()));
    }
    AssociationRow row;
    row.drug_id = cols[c_drug_id];
    row.drug_name = cols[c_drug_name];
    row.atc_codes = detail::split_atc(cols[c_atc]);
    row.term_type = cols[c_type];
    row.term_id = cols[c_term_id];
    row.term_name = cols[c_term_name];
    if (c_soc && *c_soc < cols.size()) row.soc = cols[*c_soc];
    builder.add(row, number);
  }
  return std::move(builder).build();
}

inline KnowledgeBase load_association_table(const std::filesystem::path& path, const TableLayout& layout = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return parse_association_table(in, layout);
}

/// Reads a SIDER release directory directly: meddra_all_se.tsv (headerless;
/// flat compound id, stereo id, label CUI, MedDRA type, MedDRA CUI, name),
/// drug_names.tsv (flat id, name) and drug_atc.tsv (flat id, ATC code). An
/// optional term_soc.tsv (MedDRA CUI, SOC label) supplies organ classes.
inline KnowledgeBase load_sider_release(const std::filesystem::path& dir) {
  auto open = [&](const char* name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + (dir / name).string());
    return in;
  };
  std::map<std::string, std::string> names;
  std::map<std::string, std::vector<std::string>> atc;
  std::map<std::string, std::string> soc;
  std::string line;
  {
    auto in = open("drug_names.tsv");
    while (std::getline(in, line)) {
      detail::strip_cr(line);
      const auto cols = text::split(line, '\t');
      if (cols.size() >= 2) names[std::string(text::trim(cols[0]))] = std::string(cols[1]);
    }
  }
  {
    auto in = open("drug_atc.tsv");
    while (std::getline(in, line)) {
      detail::strip_cr(line);
      const auto cols = text::split(line, '\t');
      if (cols.size() >= 2 && !text::trim(cols[1]).empty()) {
        atc[std::string(text::trim(cols[0]))].emplace_back(text::trim(cols[1]));
      }
    }
  }
  if (std::filesystem::exists(dir / "term_soc.tsv")) {
    auto in = open("term_soc.tsv");
    while (std::getline(in, line)) {
      detail::strip_cr(line);
      const auto cols = text::split(line, '\t');
      if (cols.size() >= 2) soc[std::string(text::trim(cols[0]))] = std::string(cols[1]);
    }
  }

  auto in = open("meddra_all_se.tsv");
  KnowledgeBaseBuilder builder;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    detail::strip_cr(line);
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() < 6) throw MalformedRowError(number, "meddra_all_se.tsv row needs 6 columns");
    AssociationRow row;
    row.drug_id = std::string(text::trim(cols[0]));
    const auto name_it = names.find(row.drug_id);
    if (name_it == names.end()) continue;  // no generic name, cannot be queried
    row.drug_name = name_it->second;
    if (const auto it = atc.find(row.drug_id); it != atc.end()) row.atc_codes = it->second;
    row.term_type = cols[3];
    row.term_id = cols[4];
    row.term_name = cols[5];
    if (const auto it = soc.find(std::string(text::trim(cols[4]))); it != soc.end()) row.soc = it->second;
    builder.add(row, number);
  }
  return std::move(builder).build();
}

// ---------------------------------------------------------------------------
// Corpus rendering

enum class CorpusFormat { kA, kB };

inline std::string_view format_tag(CorpusFormat format) { return format == CorpusFormat::kA ? "A" : "B"; }

inline CorpusFormat parse_format_tag(std::string_view tag) {
  if (tag == "A" || tag == "a") return CorpusFormat::kA;
  if (tag == "B" || tag == "b") return CorpusFormat::kB;
  throw Error(ErrorCode::kInvalidArgument, "corpus format must be A or B, got '" + std::string(tag) + "'");
}

inline constexpr std::string_view kFormatAPrefix = "The drug ";
inline constexpr std::string_view kFormatAMiddle = " causes the following side effects or adverse reactions: ";
inline constexpr std::string_view kFormatBMiddle = " may cause ";
inline constexpr std::string_view kFormatBSuffix = " as an adverse effect, adverse reaction, or side effect.";

inline std::string render_format_a(const KnowledgeBase& kb, std::string_view drug_id) {
  const auto* drug = kb.find_drug(drug_id);
  if (!drug) throw Error(ErrorCode::kUnknownDrug, "unknown drug id " + std::string(drug_id));
  const auto terms = kb.side_effects_by_name(drug_id);
  if (terms.empty()) throw Error(ErrorCode::kNoAssociations, "drug " + drug->name + " has no side effects");
  std::string out(kFormatAPrefix);
  out += drug->name;
  out += kFormatAMiddle;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += ", ";
    out += terms[i]->name;
  }
  out += '\n';
  return out;
}

inline std::string render_format_b(const KnowledgeBase& kb, const Association& association) {
  if (!kb.contains(association.drug_id, association.term_id)) {
    throw Error(ErrorCode::kUnknownAssociation,
                "unknown association (" + association.drug_id + ", " + association.term_id + ")");
  }
  std::string out(kFormatAPrefix);
  out += kb.find_drug(association.drug_id)->name;
  out += kFormatBMiddle;
  out += kb.find_term(association.term_id)->name;
  out += kFormatBSuffix;
  out += '\n';
  return out;
}

struct FormatALine {
  std::string drug_name;
  std::vector<std::string> side_effects;
};

/// Inverse of render_format_a for one line (no trailing newline required).
inline std::optional<FormatALine> parse_format_a_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (line.substr(0, kFormatAPrefix.size()) != kFormatAPrefix) return std::nullopt;
  line.remove_prefix(kFormatAPrefix.size());
  const auto mid = line.find(kFormatAMiddle);
  if (mid == std::string_view::npos) return std::nullopt;
  FormatALine out{std::string(line.substr(0, mid)), {}};
  for (auto item : text::split(line.substr(mid + kFormatAMiddle.size()), ", ")) out.side_effects.emplace_back(item);
  return out;
}

/// The comma-separated side-effect list of a Format A line, without the leading sentence.
inline std::string_view format_a_list_tail(std::string_view line) {
  const auto mid = line.find(kFormatAMiddle);
  if (mid == std::string_view::npos) return {};
  line.remove_prefix(mid + kFormatAMiddle.size());
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  return line;
}

/// Inverse of render_format_b. Names containing " may cause " are resolved with
/// `kb` when given, otherwise the first occurrence splits.
inline std::optional<std::pair<std::string, std::string>> parse_format_b_line(std::string_view line,
                                                                              const KnowledgeBase* kb = nullptr) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (line.substr(0, kFormatAPrefix.size()) != kFormatAPrefix) return std::nullopt;
  if (line.size() < kFormatAPrefix.size() + kFormatBSuffix.size() ||
      line.substr(line.size() - kFormatBSuffix.size()) != kFormatBSuffix) {
    return std::nullopt;
  }
  const auto body = line.substr(kFormatAPrefix.size(), line.size() - kFormatAPrefix.size() - kFormatBSuffix.size());
  std::optional<std::pair<std::string, std::string>> first;
  for (auto pos = body.find(kFormatBMiddle); pos != std::string_view::npos;
       pos = body.find(kFormatBMiddle, pos + 1)) {
    std::pair<std::string, std::string> candidate{std::string(body.substr(0, pos)),
                                                  std::string(body.substr(pos + kFormatBMiddle.size()))};
    if (!kb) return candidate;
    if (!first) first = candidate;
    if (kb->find_drug_by_name(candidate.first) && kb->find_term_by_name(candidate.second)) return candidate;
  }
  return first;
}

/// A retrievable text unit. Format A chunks carry no term id.
struct Chunk {
  std::string chunk_id;
  CorpusFormat format = CorpusFormat::kA;
  std::string drug_id;
  std::optional<std::string> term_id;
  std::string text;  // one rendered line, without the newline

  bool operator==(const Chunk&) const = default;
};

inline std::string make_chunk_id(CorpusFormat format, std::string_view drug_id,
                                 const std::optional<std::string>& term_id) {
  std::string key(drug_id);
  if (term_id) {
    key.push_back('\x1f');
    key += *term_id;
  }
  return std::string(format_tag(format)) + "-" + text::hex64(text::fnv1a64(key));
}

inline nlohmann::ordered_json chunk_to_json(const Chunk& chunk) {
  nlohmann::ordered_json j;
  j["chunk_id"] = chunk.chunk_id;
  j["format"] = format_tag(chunk.format);
  j["drug_id"] = chunk.drug_id;
  j["term_id"] = chunk.term_id ? nlohmann::ordered_json(*chunk.term_id) : nlohmann::ordered_json(nullptr);
  j["text"] = chunk.text;
  return j;
}

inline Chunk chunk_from_json(const nlohmann::ordered_json& j) {
  Chunk chunk;
  chunk.chunk_id = j.at("chunk_id").get<std::string>();
  chunk.format = parse_format_tag(j.at("format").get<std::string>());
  chunk.drug_id = j.at("drug_id").get<std::string>();
  if (j.contains("term_id") && !j.at("term_id").is_null()) chunk.term_id = j.at("term_id").get<std::string>();
  chunk.text = j.at("text").get<std::string>();
  return chunk;
}

/// Format A: one chunk per drug; format B: one chunk per association. Ordered
/// by drug name, then term name.
inline std::vector<Chunk> export_corpus(const KnowledgeBase& kb, CorpusFormat format) {
  if (kb.empty()) throw Error(ErrorCode::kEmptyResult, "knowledge base is empty");
  std::vector<Chunk> chunks;
  std::set<std::string> seen;
  auto push = [&](Chunk chunk) {
    if (!seen.insert(chunk.chunk_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "chunk id collision on " + chunk.chunk_id);
    }
    chunks.push_back(std::move(chunk));
  };
  for (const auto* drug : kb.drugs_by_name()) {
    if (kb.side_effects_of(drug->drug_id).empty()) continue;
    if (format == CorpusFormat::kA) {
      std::string line = render_format_a(kb, drug->drug_id);
      line.pop_back();
      push(Chunk{make_chunk_id(format, drug->drug_id, std::nullopt), format, drug->drug_id, std::nullopt,
                 std::move(line)});
      continue;
    }
    for (const auto* term : kb.side_effects_by_name(drug->drug_id)) {
      std::string line = render_format_b(kb, Association{drug->drug_id, term->term_id});
      line.pop_back();
      push(Chunk{make_chunk_id(format, drug->drug_id, term->term_id), format, drug->drug_id, term->term_id,
                 std::move(line)});
    }
  }
  return chunks;
}

/// The whole corpus as newline-terminated text, as fed to the chunker.
inline std::string render_corpus(const KnowledgeBase& kb, CorpusFormat format) {
  std::string out;
  for (const auto& chunk : export_corpus(kb, format)) {
    out += chunk.text;
    out += '\n';
  }
  return out;
}

inline void write_corpus_jsonl(const std::vector<Chunk>& chunks, std::ostream& out) {
  for (const auto& chunk : chunks) out << chunk_to_json(chunk).dump() << '\n';
}

}  // namespace drugrag
