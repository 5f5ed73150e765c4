#pragma once

// Balanced benchmark construction, evaluation runs and classification metrics
// with ATC-class and organ-class breakdowns.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "drugrag/error.hpp"
#include "drugrag/kb.hpp"
#include "drugrag/pipeline.hpp"
#include "drugrag/text.hpp"

namespace drugrag {

enum class Label { kPositive, kNegative };

inline std::string_view label_name(Label l) { return l == Label::kPositive ? "positive" : "negative"; }

struct EvalPair {
  std::string drug_id;
  std::string term_id;
  Label label = Label::kPositive;

  bool operator==(const EvalPair&) const = default;
};

struct EvalDataset {
  std::vector<EvalPair> pairs;
  std::uint64_t seed = 0;
  std::string kb_fingerprint;
};

inline constexpr std::size_t kPairsPerClass = 10;

/// Unbiased integer in [0, n) from a 64-bit engine. Portable, unlike
/// std::uniform_int_distribution whose algorithm differs between libraries.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

/// `count` distinct elements of `pool` via a partial Fisher-Yates shuffle.
inline std::vector<std::string> sample_without_replacement(std::vector<std::string> pool, std::size_t count,
                                                           std::mt19937_64& rng) {
  count = std::min(count, pool.size());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

/// Per eligible drug (>= 10 associations): 10 sampled known side effects and
/// 10 terms sampled from all KB terms the drug is not associated with. Each
/// drug draws from its own mt19937_64 stream seeded with seed ^ fnv1a64(drug_id),
/// over candidate lists ordered by term id, so samples do not depend on the
/// order drugs are visited in.
inline EvalDataset build_balanced_dataset(const KnowledgeBase& kb, std::uint64_t seed) {
  EvalDataset ds;
  ds.seed = seed;
  ds.kb_fingerprint = kb.fingerprint();
  std::vector<std::string> all_terms;
  for (const auto& [id, term] : kb.terms()) all_terms.push_back(id);

  for (const auto* drug : kb.drugs_by_name()) {
    const auto& known = kb.side_effects_of(drug->drug_id);
    if (known.size() < kPairsPerClass) continue;
    std::vector<std::string> unknown;
    for (const auto& t : all_terms) {
      if (!known.count(t)) unknown.push_back(t);
    }
    if (unknown.size() < kPairsPerClass) {
      throw Error(ErrorCode::kNoEligibleDrugs, "drug " + drug->name + " has fewer than 10 unassociated terms");
    }
    std::mt19937_64 rng(seed ^ text::fnv1a64(drug->drug_id));
    auto positives = sample_without_replacement({known.begin(), known.end()}, kPairsPerClass, rng);
    auto negatives = sample_without_replacement(std::move(unknown), kPairsPerClass, rng);
    auto by_name = [&](const std::string& a, const std::string& b) {
      return kb.find_term(a)->name < kb.find_term(b)->name;
    };
    std::sort(positives.begin(), positives.end(), by_name);
    std::sort(negatives.begin(), negatives.end(), by_name);
    for (auto& t : positives) ds.pairs.push_back({drug->drug_id, std::move(t), Label::kPositive});
    for (auto& t : negatives) ds.pairs.push_back({drug->drug_id, std::move(t), Label::kNegative});
  }
  if (ds.pairs.empty()) throw Error(ErrorCode::kNoEligibleDrugs, "no drug has at least 10 known side effects");
  return ds;
}

/// Header line {"seed":..., "kb_fingerprint":..., "pairs":N} then one pair per line.
inline void write_dataset_jsonl(const EvalDataset& ds, std::ostream& out) {
  nlohmann::ordered_json header;
  header["seed"] = ds.seed;
  header["kb_fingerprint"] = ds.kb_fingerprint;
  header["pairs"] = ds.pairs.size();
  out << header.dump() << '\n';
  for (const auto& p : ds.pairs) {
    nlohmann::ordered_json j;
    j["drug_id"] = p.drug_id;
    j["term_id"] = p.term_id;
    j["label"] = label_name(p.label);
    out << j.dump() << '\n';
  }
}

inline std::string dataset_jsonl(const EvalDataset& ds) {
  std::ostringstream out;
  write_dataset_jsonl(ds, out);
  return out.str();
}

inline EvalDataset read_dataset_jsonl(std::istream& in) {
  EvalDataset ds;
  std::string line;
  std::size_t number = 0;
  bool header = false;
  try {
    while (std::getline(in, line)) {
      ++number;
      if (text::trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (!header) {
        ds.seed = j.at("seed").get<std::uint64_t>();
        ds.kb_fingerprint = j.at("kb_fingerprint").get<std::string>();
        header = true;
        continue;
      }
      const auto label = j.at("label").get<std::string>();
      if (label != "positive" && label != "negative") throw MalformedRowError(number, "bad label '" + label + "'");
      ds.pairs.push_back({j.at("drug_id").get<std::string>(), j.at("term_id").get<std::string>(),
                          label == "positive" ? Label::kPositive : Label::kNegative});
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRowError(number, e.what());
  }
  if (!header) throw Error(ErrorCode::kIo, "dataset file has no header record");
  return ds;
}

// ---------------------------------------------------------------------------
// Metrics

struct ConfusionMatrix {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  void add(Label label, Decision decision) {
    const bool predicted = decision == Decision::kYes;
    if (label == Label::kPositive) {
      (predicted ? tp : fn) += 1;
    } else {
      (predicted ? fp : tn) += 1;
    }
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  /// Metrics whose denominator was zero; they are reported as 0.0.
  std::vector<std::string> undefined;

  bool operator==(const Metrics&) const = default;
};

inline Metrics compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");
  Metrics m;
  auto ratio = [&](double num, double den, const char* name) {
    if (den == 0.0) {
      m.undefined.emplace_back(name);
      return 0.0;
    }
    return num / den;
  };
  const auto tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
  const auto fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
  m.accuracy = (tp + tn) / static_cast<double>(cm.total());
  m.precision = ratio(tp, tp + fp, "precision");
  m.sensitivity = ratio(tp, tp + fn, "sensitivity");
  m.specificity = ratio(tn, tn + fp, "specificity");
  m.f1 = ratio(2.0 * m.precision * m.sensitivity, m.precision + m.sensitivity, "f1");
  return m;
}

// ---------------------------------------------------------------------------
// Evaluation runs

struct PairRecord {
  EvalPair pair;
  std::optional<Decision> decision;  // empty when the query failed
  bool associated = false;
  std::string error_code;
  std::string error;
  double latency_ms = 0.0;
};

struct EvalRun {
  ConfusionMatrix matrix;
  std::vector<PairRecord> records;  // dataset order
  std::size_t failures = 0;
};

/// Runs every pair through the pipeline on up to `parallelism` threads.
/// Failed pairs are recorded and left out of the matrix.
inline EvalRun run_eval(const EvalDataset& dataset, Pipeline pipeline, const Resources& resources,
                        const ChatBackend& backend, std::size_t parallelism = 1) {
  if (!resources.kb) throw Error(ErrorCode::kResourceUnavailable, "knowledge base not loaded");
  resources.require(pipeline);
  const auto& kb = *resources.kb;
  EvalRun run;
  run.records.resize(dataset.pairs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < dataset.pairs.size(); i = next.fetch_add(1)) {
      const auto& pair = dataset.pairs[i];
      PairRecord& rec = run.records[i];
      rec.pair = pair;
      const auto* drug = kb.find_drug(pair.drug_id);
      const auto* term = kb.find_term(pair.term_id);
      if (!drug || !term) {
        rec.error_code = std::string(code_name(ErrorCode::kUnknownAssociation));
        rec.error = "pair references ids missing from the knowledge base";
        continue;
      }
      try {
        const auto answer = run_query(templated_question(drug->name, term->name), pipeline, resources, backend);
        rec.decision = answer.decision;
        rec.associated = answer.verdict.associated;
        rec.latency_ms = answer.latency_ms;
      } catch (const Error& e) {
        rec.error_code = std::string(code_name(e.code()));
        rec.error = e.what();
      } catch (const std::exception& e) {
        rec.error_code = "internal";
        rec.error = e.what();
      }
    }
  };
  parallelism = std::max<std::size_t>(1, parallelism);
  if (parallelism == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < parallelism; ++t) pool.emplace_back(worker);
  }

  for (const auto& rec : run.records) {
    if (rec.decision) {
      run.matrix.add(rec.pair.label, *rec.decision);
    } else {
      ++run.failures;
    }
  }
  return run;
}

enum class Grouping { kAtcLevel1, kSoc };

inline std::string_view grouping_name(Grouping g) { return g == Grouping::kAtcLevel1 ? "atc_level1" : "soc"; }

struct GroupStats {
  ConfusionMatrix matrix;
  Metrics metrics;
};

/// Per-group matrices over the successfully evaluated records. A drug with ATC
/// codes in several level-1 classes counts once in each of them; terms
/// without an organ class fall under "unknown".
inline std::map<std::string, GroupStats> group_breakdown(const std::vector<PairRecord>& records,
                                                         const KnowledgeBase& kb, Grouping grouping) {
  std::map<std::string, ConfusionMatrix> matrices;
  for (const auto& rec : records) {
    if (!rec.decision) continue;
    std::set<std::string> groups;
    if (grouping == Grouping::kAtcLevel1) {
      if (const auto* drug = kb.find_drug(rec.pair.drug_id)) {
        for (const auto& code : drug->atc_codes) groups.insert(code.substr(0, 1));
      }
    } else {
      const auto* term = kb.find_term(rec.pair.term_id);
      groups.insert(term && term->soc_class ? *term->soc_class : "unknown");
    }
    for (const auto& g : groups) matrices[g].add(rec.pair.label, *rec.decision);
  }
  std::map<std::string, GroupStats> out;
  for (const auto& [g, cm] : matrices) out[g] = GroupStats{cm, compute_metrics(cm)};
  return out;
}

// ---------------------------------------------------------------------------
// Reports

struct MetricsReport {
  std::string pipeline;
  std::string backend;
  std::uint64_t seed = 0;
  std::string kb_fingerprint;
  std::size_t pairs = 0;
  ConfusionMatrix matrix;
  Metrics metrics;
  std::size_t failures = 0;
  std::map<std::string, std::size_t> failures_by_code;
  std::map<std::string, GroupStats> by_atc;
  std::map<std::string, GroupStats> by_soc;
  std::vector<PairRecord> records;
};

inline MetricsReport make_report(const EvalRun& run, const EvalDataset& dataset, const KnowledgeBase& kb,
                                 Pipeline pipeline, std::string backend) {
  MetricsReport r;
  r.pipeline = std::string(pipeline_tag(pipeline));
  r.backend = std::move(backend);
  r.seed = dataset.seed;
  r.kb_fingerprint = dataset.kb_fingerprint;
  r.pairs = dataset.pairs.size();
  r.matrix = run.matrix;
  if (run.matrix.total() > 0) r.metrics = compute_metrics(run.matrix);
  r.failures = run.failures;
  for (const auto& rec : run.records) {
    if (!rec.decision) ++r.failures_by_code[rec.error_code];
  }
  r.by_atc = group_breakdown(run.records, kb, Grouping::kAtcLevel1);
  r.by_soc = group_breakdown(run.records, kb, Grouping::kSoc);
  r.records = run.records;
  return r;
}

namespace detail {

inline nlohmann::ordered_json matrix_json(const ConfusionMatrix& cm) {
  return nlohmann::ordered_json{{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}};
}

inline nlohmann::ordered_json metrics_json(const Metrics& m) {
  nlohmann::ordered_json j{{"accuracy", m.accuracy},
                           {"f1", m.f1},
                           {"precision", m.precision},
                           {"sensitivity", m.sensitivity},
                           {"specificity", m.specificity}};
  j["undefined"] = m.undefined;
  return j;
}

inline ConfusionMatrix matrix_from(const nlohmann::ordered_json& j) {
  return {j.at("tp").get<std::uint64_t>(), j.at("tn").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(),
          j.at("fn").get<std::uint64_t>()};
}

inline Metrics metrics_from(const nlohmann::ordered_json& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.precision = j.at("precision").get<double>();
  m.sensitivity = j.at("sensitivity").get<double>();
  m.specificity = j.at("specificity").get<double>();
  m.undefined = j.at("undefined").get<std::vector<std::string>>();
  return m;
}

inline nlohmann::ordered_json groups_json(const std::map<std::string, GroupStats>& groups) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [g, s] : groups) j[g] = {{"matrix", matrix_json(s.matrix)}, {"metrics", metrics_json(s.metrics)}};
  return j;
}

inline std::map<std::string, GroupStats> groups_from(const nlohmann::ordered_json& j) {
  std::map<std::string, GroupStats> out;
  for (const auto& [g, v] : j.items()) out[g] = GroupStats{matrix_from(v.at("matrix")), metrics_from(v.at("metrics"))};
  return out;
}

inline std::size_t membership_total(const std::map<std::string, GroupStats>& groups) {
  std::size_t n = 0;
  for (const auto& [g, s] : groups) n += s.matrix.total();
  return n;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

inline std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace detail

/// Canonical machine-readable report. Latencies are left out so identical runs
/// produce identical bytes.
inline nlohmann::ordered_json report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["pipeline"] = r.pipeline;
  j["backend"] = r.backend;
  j["dataset"] = {{"seed", r.seed}, {"kb_fingerprint", r.kb_fingerprint}, {"pairs", r.pairs}};
  j["matrix"] = detail::matrix_json(r.matrix);
  j["metrics"] = detail::metrics_json(r.metrics);
  j["failures"] = {{"count", r.failures}, {"by_code", r.failures_by_code}};
  j["breakdowns"] = {{"atc_level1", detail::groups_json(r.by_atc)}, {"soc", detail::groups_json(r.by_soc)}};
  j["multiplicity"] = {{"evaluated_records", r.matrix.total()},
                       {"atc_level1_memberships", detail::membership_total(r.by_atc)},
                       {"soc_memberships", detail::membership_total(r.by_soc)}};
  auto& records = j["records"] = nlohmann::ordered_json::array();
  for (const auto& rec : r.records) {
    nlohmann::ordered_json x;
    x["drug_id"] = rec.pair.drug_id;
    x["term_id"] = rec.pair.term_id;
    x["label"] = label_name(rec.pair.label);
    if (rec.decision) {
      x["decision"] = decision_name(*rec.decision);
      x["associated"] = rec.associated;
    } else {
      x["decision"] = nullptr;
      x["error_code"] = rec.error_code;
      x["error"] = rec.error;
    }
    records.push_back(std::move(x));
  }
  return j;
}

inline MetricsReport report_from_json(const nlohmann::ordered_json& j) {
  MetricsReport r;
  r.pipeline = j.at("pipeline").get<std::string>();
  r.backend = j.at("backend").get<std::string>();
  r.seed = j.at("dataset").at("seed").get<std::uint64_t>();
  r.kb_fingerprint = j.at("dataset").at("kb_fingerprint").get<std::string>();
  r.pairs = j.at("dataset").at("pairs").get<std::size_t>();
  r.matrix = detail::matrix_from(j.at("matrix"));
  r.metrics = detail::metrics_from(j.at("metrics"));
  r.failures = j.at("failures").at("count").get<std::size_t>();
  r.failures_by_code = j.at("failures").at("by_code").get<std::map<std::string, std::size_t>>();
  r.by_atc = detail::groups_from(j.at("breakdowns").at("atc_level1"));
  r.by_soc = detail::groups_from(j.at("breakdowns").at("soc"));
  for (const auto& x : j.at("records")) {
    PairRecord rec;
    rec.pair.drug_id = x.at("drug_id").get<std::string>();
    rec.pair.term_id = x.at("term_id").get<std::string>();
    rec.pair.label = x.at("label").get<std::string>() == "positive" ? Label::kPositive : Label::kNegative;
    if (!x.at("decision").is_null()) {
      rec.decision = x.at("decision").get<std::string>() == "YES" ? Decision::kYes : Decision::kNo;
      rec.associated = x.at("associated").get<bool>();
    } else {
      rec.error_code = x.at("error_code").get<std::string>();
      rec.error = x.at("error").get<std::string>();
    }
    r.records.push_back(std::move(rec));
  }
  return r;
}

enum class ReportFormat { kJson, kCsv, kMarkdown };

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "markdown" || s == "md") return ReportFormat::kMarkdown;
  return std::nullopt;
}

inline std::string emit_report(const MetricsReport& r, ReportFormat format) {
  std::ostringstream out;
  static constexpr std::pair<const char*, double Metrics::*> kColumns[] = {
      {"accuracy", &Metrics::accuracy},       {"f1", &Metrics::f1},
      {"precision", &Metrics::precision},     {"sensitivity", &Metrics::sensitivity},
      {"specificity", &Metrics::specificity},
  };
  switch (format) {
    case ReportFormat::kJson:
      out << report_to_json(r).dump(2) << '\n';
      break;
    case ReportFormat::kCsv: {
      // header, then 5 rows for the overall scope and 5 per group
      out << "scope,group,metric,value\n";
      auto rows = [&](std::string_view scope, std::string_view group, const Metrics& m) {
        for (const auto& [name, member] : kColumns) {
          out << scope << ',' << detail::csv_field(group) << ',' << name << ',' << detail::fixed4(m.*member)
              << '\n';
        }
      };
      rows("overall", r.pipeline, r.metrics);
      for (const auto& [g, s] : r.by_atc) rows("atc_level1", g, s.metrics);
      for (const auto& [g, s] : r.by_soc) rows("soc", g, s.metrics);
      break;
    }
    case ReportFormat::kMarkdown: {
      const auto display = parse_pipeline(r.pipeline) ? pipeline_display_name(*parse_pipeline(r.pipeline))
                                                      : std::string_view(r.pipeline);
      out << "| Method | Accuracy | F1 | Precision | Sensitivity | Specificity |\n";
      out << "|---|---|---|---|---|---|\n";
      out << "| " << display;
      for (const auto& [name, member] : kColumns) out << " | " << detail::fixed4(r.metrics.*member);
      out << " |\n\n";
      out << "Pairs: " << r.pairs << ", evaluated: " << r.matrix.total() << " (TP " << r.matrix.tp << ", TN "
          << r.matrix.tn << ", FP " << r.matrix.fp << ", FN " << r.matrix.fn << "), failed: " << r.failures
          << "\n";
      if (!r.metrics.undefined.empty()) {
        out << "Undefined (0/0, shown as 0): " << text::join(r.metrics.undefined, ", ") << "\n";
      }
      auto table = [&](const char* title, const std::map<std::string, GroupStats>& groups) {
        out << "\n### Accuracy by " << title << "\n\n| Group | Pairs | Accuracy |\n|---|---|---|\n";
        for (const auto& [g, s] : groups) {
          out << "| " << g << " | " << s.matrix.total() << " | " << detail::fixed4(s.metrics.accuracy) << " |\n";
        }
      };
      table("ATC class", r.by_atc);
      out << "\nATC memberships: " << detail::membership_total(r.by_atc) << " for " << r.matrix.total()
          << " evaluated pairs (drugs in several classes count in each).\n";
      table("organ class", r.by_soc);
      break;
    }
  }
  return out.str();
}

}  // namespace drugrag
