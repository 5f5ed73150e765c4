#pragma once

// Dictionary (gazetteer) recognition of one drug and one side-effect term in a
// question. Matching is case-insensitive, whitespace-normalized and anchored on
// word boundaries; longer matches shadow the shorter matches they contain.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "drugrag/error.hpp"
#include "drugrag/kb.hpp"
#include "drugrag/text.hpp"

namespace drugrag {

struct EntitySpan {
  std::string surface;  // text as it appears in the question
  std::size_t begin = 0;  // byte offsets into the question
  std::size_t end = 0;
  std::string id;    // drug_id or term_id
  std::string name;  // canonical name

  bool operator==(const EntitySpan&) const = default;
};

struct ExtractedEntities {
  EntitySpan drug;
  EntitySpan side_effect;
  std::string question;
};

enum class EntityKind { kDrug, kSideEffect };

class Gazetteer {
 public:
  explicit Gazetteer(const KnowledgeBase& kb) {
    for (const auto& [id, drug] : kb.drugs()) add(drug.name, id, EntityKind::kDrug);
    for (const auto& [id, term] : kb.terms()) add(term.name, id, EntityKind::kSideEffect);
    for (std::size_t i = 0; i < entries_.size(); ++i) by_first_token_[first_tokens_[i]].push_back(i);
  }

  ExtractedEntities extract(std::string_view question) const {
    if (text::trim(question).empty()) throw Error(ErrorCode::kInvalidArgument, "question is empty");
    const Normalized norm = normalize(question);

    std::vector<Candidate> found;
    for (std::size_t p = 0; p < norm.text.size(); ++p) {
      if (!text::is_word_char(norm.text[p]) || (p > 0 && text::is_word_char(norm.text[p - 1]))) continue;
      std::size_t q = p;
      while (q < norm.text.size() && text::is_word_char(norm.text[q])) ++q;
      const auto it = by_first_token_.find(norm.text.substr(p, q - p));
      if (it == by_first_token_.end()) continue;
      for (const std::size_t index : it->second) {
        const Entry* e = &entries_[index];
        if (e->lead > p) continue;
        const std::size_t begin = p - e->lead;
        const std::size_t end = begin + e->name.size();
        if (end > norm.text.size() || norm.text.compare(begin, e->name.size(), e->name) != 0) continue;
        if (begin > 0 && text::is_word_char(norm.text[begin - 1]) && text::is_word_char(e->name.front())) continue;
        if (end < norm.text.size() && text::is_word_char(norm.text[end]) && text::is_word_char(e->name.back())) continue;
        found.push_back(Candidate{begin, end, index});
      }
    }

    // Drop matches strictly inside a longer match of either kind.
    std::vector<Candidate> kept;
    for (const auto& c : found) {
      const bool shadowed = std::any_of(found.begin(), found.end(), [&](const Candidate& o) {
        return o.begin <= c.begin && c.end <= o.end && (o.end - o.begin) > (c.end - c.begin);
      });
      if (!shadowed) kept.push_back(c);
    }

    const auto drugs = of_kind(kept, EntityKind::kDrug);
    const auto terms = of_kind(kept, EntityKind::kSideEffect);
    check_unique(drugs, EntityKind::kDrug, norm.text);
    check_unique(terms, EntityKind::kSideEffect, norm.text);

    for (const auto& d : drugs) {
      for (const auto& t : terms) {
        if (d.end <= t.begin || t.end <= d.begin) {
          return ExtractedEntities{span(question, norm, d), span(question, norm, t), std::string(question)};
        }
      }
    }
    throw EntityError(ErrorCode::kAmbiguousDrug, "drug and side-effect mentions overlap",
                      {entries_[drugs.front().entry].name, entries_[terms.front().entry].name});
  }

  /// Dictionary names of `kind` within a small edit distance of some 1-3 word
  /// window of the question, closest first.
  std::vector<std::string> near_misses(std::string_view question, EntityKind kind, std::size_t limit = 5) const {
    const auto tokens = text::word_tokens(question);
    std::set<std::string> windows;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      std::string w;
      for (std::size_t n = 0; n < 3 && i + n < tokens.size(); ++n) {
        if (n) w += ' ';
        w += tokens[i + n];
        windows.insert(w);
      }
    }
    std::vector<std::pair<std::size_t, std::string>> scored;
    for (const auto& e : entries_) {
      if (e.kind != kind) continue;
      const std::size_t budget = std::max<std::size_t>(1, e.name.size() / 4);
      std::size_t best = budget + 1;
      for (const auto& w : windows) {
        const std::size_t diff = w.size() > e.name.size() ? w.size() - e.name.size() : e.name.size() - w.size();
        if (diff > budget) continue;
        best = std::min(best, text::levenshtein(w, e.name));
      }
      if (best <= budget) scored.emplace_back(best, e.name);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < scored.size() && i < limit; ++i) out.push_back(scored[i].second);
    return out;
  }

 private:
  struct Entry {
    std::string name;
    std::string id;
    EntityKind kind;
    std::size_t lead;  // offset of the first word token within name
  };
  struct Candidate {
    std::size_t begin;
    std::size_t end;
    std::size_t entry;
  };
  struct Normalized {
    std::string text;                  // lowercased, whitespace runs collapsed
    std::vector<std::size_t> origin;   // normalized offset -> question offset
  };

  void add(const std::string& name, const std::string& id, EntityKind kind) {
    std::size_t lead = 0;
    while (lead < name.size() && !text::is_word_char(name[lead])) ++lead;
    if (lead == name.size()) return;
    std::size_t stop = lead;
    while (stop < name.size() && text::is_word_char(name[stop])) ++stop;
    entries_.push_back(Entry{name, id, kind, lead});
    first_tokens_.push_back(name.substr(lead, stop - lead));
  }

  static Normalized normalize(std::string_view q) {
    Normalized n;
    bool pending = false;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (text::is_space(q[i])) {
        pending = !n.text.empty();
        continue;
      }
      if (pending) {
        n.text.push_back(' ');
        n.origin.push_back(i - 1);
        pending = false;
      }
      n.text.push_back(text::to_lower(q[i]));
      n.origin.push_back(i);
    }
    return n;
  }

  EntitySpan span(std::string_view question, const Normalized& norm, const Candidate& c) const {
    const std::size_t begin = norm.origin[c.begin];
    const std::size_t end = norm.origin[c.end - 1] + 1;
    return EntitySpan{std::string(question.substr(begin, end - begin)), begin, end, entries_[c.entry].id, entries_[c.entry].name};
  }

  std::vector<Candidate> of_kind(const std::vector<Candidate>& all, EntityKind kind) const {
    std::vector<Candidate> out;
    for (const auto& c : all) {
      if (entries_[c.entry].kind == kind) out.push_back(c);
    }
    return out;
  }

  void check_unique(const std::vector<Candidate>& cands, EntityKind kind, std::string_view question) const {
    const bool drug = kind == EntityKind::kDrug;
    if (cands.empty()) {
      throw EntityError(drug ? ErrorCode::kDrugNotFound : ErrorCode::kSideEffectNotFound,
                        std::string(drug ? "no known drug" : "no known side effect") + " mentioned in the question",
                        near_misses(question, kind));
    }
    std::set<std::string> names;
    for (const auto& c : cands) names.insert(entries_[c.entry].name);
    if (names.size() > 1) {
      throw EntityError(drug ? ErrorCode::kAmbiguousDrug : ErrorCode::kAmbiguousSideEffect,
                        std::string("question mentions several ") + (drug ? "drugs" : "side effects"),
                        {names.begin(), names.end()});
    }
  }

  std::vector<Entry> entries_;
  std::vector<std::string> first_tokens_;
  std::map<std::string, std::vector<std::size_t>> by_first_token_;
};

inline ExtractedEntities extract_entities(std::string_view question, const KnowledgeBase& kb) {
  return Gazetteer(kb).extract(question);
}

}  // namespace drugrag
