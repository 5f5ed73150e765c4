#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace drugrag;
using testsupport::fixture_kb;
using testsupport::kb_from;

namespace {

const char* kHeader = "drug_id\tdrug_name\tatc_codes\tterm_type\tterm_id\tterm_name\tsoc\n";

std::string row(const std::string& id, const std::string& name, const std::string& atc, const std::string& type,
                const std::string& tid, const std::string& tname, const std::string& soc = "") {
  return id + "\t" + name + "\t" + atc + "\t" + type + "\t" + tid + "\t" + tname + "\t" + soc + "\n";
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

}  // namespace

TEST(Ingest, SingleRow) {
  const auto kb = kb_from(std::string(kHeader) + row("D1", "Aspirin", "N02BA01", "PT", "T1", "Urticaria"));
  EXPECT_EQ(kb.drugs().size(), 1u);
  EXPECT_EQ(kb.terms().size(), 1u);
  EXPECT_EQ(kb.associations().size(), 1u);
  EXPECT_EQ(kb.find_drug("D1")->name, "aspirin");
  EXPECT_EQ(kb.find_term("T1")->name, "urticaria");
  EXPECT_FALSE(kb.find_term("T1")->soc_class.has_value());
}

TEST(Ingest, FiltersNonPreferredTermsAndMissingAtc) {
  const auto kb = kb_from(std::string(kHeader) + row("D1", "aspirin", "N02BA01", "PT", "T1", "urticaria") +
                          row("D1", "aspirin", "N02BA01", "LLT", "T2", "hives") +
                          row("D2", "mystery", "", "PT", "T1", "urticaria") +
                          row("D3", "other", " ; ", "PT", "T3", "rash"));
  EXPECT_EQ(kb.associations().size(), 1u);
  EXPECT_EQ(kb.find_drug("D2"), nullptr);
  EXPECT_EQ(kb.find_term("T2"), nullptr);
  EXPECT_EQ(kb.find_term("T3"), nullptr);
}

TEST(Ingest, CanonicalizesAndCollapsesDuplicates) {
  const auto kb = kb_from(std::string(kHeader) + row("D1", "  Valproic   ACID ", "n03ag01", "PT", "T1", "Hair  Loss") +
                          row("D1", "valproic acid", "N03AG01", "PT", "T1", "hair loss", "Skin  disorders") +
                          row("D1", "valproic acid", "N03AG01", " PT ", "T1", "HAIR LOSS"));
  EXPECT_EQ(kb.associations().size(), 1u);
  EXPECT_EQ(kb.find_drug_by_name("valproic acid")->drug_id, "D1");
  EXPECT_EQ(kb.find_drug("D1")->atc_codes, std::vector<std::string>{"N03AG01"});
  EXPECT_EQ(*kb.find_term("T1")->soc_class, "Skin disorders");
}

TEST(Ingest, MultipleAtcSeparators) {
  const auto kb = kb_from(std::string(kHeader) + row("D1", "aspirin", "N02BA01;B01AC06", "PT", "T1", "shock") +
                          row("D1", "aspirin", "B01AC06|A01AD05", "PT", "T2", "contusion"));
  EXPECT_EQ(kb.find_drug("D1")->atc_codes, (std::vector<std::string>{"A01AD05", "B01AC06", "N02BA01"}));
}

TEST(Ingest, MalformedRowsReportTheirLine) {
  const std::string good = row("D1", "aspirin", "N02BA01", "PT", "T1", "urticaria");
  auto line_of = [](const std::string& tsv) -> std::size_t {
    try {
      kb_from(tsv);
    } catch (const MalformedRowError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of(std::string(kHeader) + good + "D2\tx\n"), 3u);
  EXPECT_EQ(line_of(std::string(kHeader) + good + row("D2", "x", "Z99", "PT", "T2", "y")), 3u);
  EXPECT_EQ(line_of(std::string(kHeader) + good + row("", "x", "N02", "PT", "T2", "y")), 3u);
  EXPECT_EQ(line_of(std::string(kHeader) + good + row("D2", "  ", "N02", "PT", "T2", "y")), 3u);
  EXPECT_EQ(line_of(std::string(kHeader) + good + row("D1", "acetylsalicylic acid", "N02", "PT", "T2", "y")), 3u);
  EXPECT_EQ(line_of(std::string(kHeader) + good + row("D9", "aspirin", "N02", "PT", "T2", "y")), 3u);
  EXPECT_EQ(line_of(std::string(kHeader) + good + row("D1", "aspirin", "N02", "PT", "T9", "urticaria")), 3u);
  EXPECT_EQ(line_of(std::string(kHeader) + row("D1", "aspirin", "N02", "PT", "T1", "u", "A") +
                    row("D2", "b", "N02", "PT", "T1", "u", "B")),
            3u);
  EXPECT_EQ(line_of("drug_id\tdrug_name\n"), 1u);
  EXPECT_EQ(line_of(""), 1u);
}

TEST(Ingest, EverythingFilteredIsEmptyResult) {
  EXPECT_EQ(code_of([] { kb_from(std::string(kHeader) + row("D1", "aspirin", "", "PT", "T1", "u")); }),
            ErrorCode::kEmptyResult);
  EXPECT_EQ(code_of([] { kb_from(kHeader); }), ErrorCode::kEmptyResult);
}

TEST(Ingest, ColumnMapping) {
  std::istringstream mapping("# SIDER-like headers\ndrug_id = stitch\ndrug_name = name\natc_codes = atc\n"
                             "term_type = type\nterm_id = cui\nterm_name = pt\n");
  const auto layout = TableLayout::from_mapping(mapping);
  std::istringstream table("pt\tcui\ttype\tatc\tname\tstitch\nheadache\tT1\tPT\tA10BA02\tmetformin\tD1\n");
  const auto kb = parse_association_table(table, layout);
  EXPECT_TRUE(kb.contains("D1", "T1"));
  EXPECT_EQ(kb.find_drug("D1")->name, "metformin");

  std::istringstream bad("drug = x\n");
  EXPECT_THROW(TableLayout::from_mapping(bad), Error);
}

TEST(Ingest, SiderReleaseDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "drugrag_sider_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "drug_names.tsv") << "CID100000085\tcarnitine\nCID100000119\tgamma-aminobutyric acid\n"
                                           "CID100000999\tno atc drug\n";
  std::ofstream(dir / "drug_atc.tsv") << "CID100000085\tA16AA01\nCID100000119\tN03AG03\n";
  std::ofstream(dir / "term_soc.tsv") << "C0000737\tGastrointestinal disorders\n";
  std::ofstream(dir / "meddra_all_se.tsv")
      << "CID100000085\tCID000010917\tC0000737\tLLT\tC0000737\tAbdominal pain\n"
         "CID100000085\tCID000010917\tC0000737\tPT\tC0000737\tAbdominal pain\n"
         "CID100000119\tCID000000119\tC0002792\tPT\tC0002792\tAnaphylactic reaction\n"
         "CID100000999\tCID000000999\tC0002792\tPT\tC0002792\tAnaphylactic reaction\n"
         "CID100000555\tCID000000555\tC0002792\tPT\tC0002792\tAnaphylactic reaction\n";
  const auto kb = load_sider_release(dir);
  EXPECT_EQ(kb.associations().size(), 2u);
  EXPECT_EQ(kb.drugs().size(), 2u);
  EXPECT_EQ(*kb.find_term("C0000737")->soc_class, "Gastrointestinal disorders");
  EXPECT_FALSE(kb.find_term("C0002792")->soc_class);
  EXPECT_EQ(kb.find_drug_by_name("gamma-aminobutyric acid")->drug_id, "CID100000119");
  std::filesystem::remove_all(dir);
}

TEST(Fixture, CountsMatchIndependentCounter) {
  const auto kb = fixture_kb();
  EXPECT_EQ(kb->drugs().size(), testsupport::kFixtureDrugs);
  EXPECT_EQ(kb->terms().size(), testsupport::kFixtureTerms);
  EXPECT_EQ(kb->associations().size(), testsupport::kFixtureAssociations);
  std::size_t sum = 0;
  for (const auto& [id, d] : kb->drugs()) sum += kb->side_effects_of(id).size();
  EXPECT_EQ(sum, kb->associations().size());
}

TEST(Fixture, InvariantsHold) {
  const auto kb = fixture_kb();
  for (const auto& [id, d] : kb->drugs()) {
    EXPECT_FALSE(d.atc_codes.empty());
    for (const auto& c : d.atc_codes) EXPECT_TRUE(valid_atc_code(c)) << c;
    EXPECT_EQ(d.name, text::canonical_name(d.name));
    EXPECT_EQ(kb->find_drug_by_name(d.name), &d);
  }
  for (const auto& [id, t] : kb->terms()) {
    EXPECT_EQ(kb->find_term_by_name(t.name), &t);
    if (t.soc_class) {
      EXPECT_FALSE(t.soc_class->empty());
    }
  }
  for (const auto& a : kb->associations()) {
    EXPECT_NE(kb->find_drug(a.drug_id), nullptr);
    EXPECT_NE(kb->find_term(a.term_id), nullptr);
  }
}

TEST(Fixture, ReingestIsIdempotent) {
  const auto kb = fixture_kb();
  const auto again = kb_from(kb_tsv(*kb));
  EXPECT_EQ(kb_tsv(again), kb_tsv(*kb));
  EXPECT_EQ(again.fingerprint(), kb->fingerprint());
}

TEST(Fixture, FingerprintIgnoresRowOrder) {
  auto text = testsupport::slurp(testsupport::fixture_path("mini_sider.tsv"));
  auto lines = text::split(text, '\n');
  std::vector<std::string> body(lines.begin() + 1, lines.end());
  std::reverse(body.begin(), body.end());
  std::string reversed = std::string(lines.front()) + "\n";
  for (const auto& l : body) {
    if (!l.empty()) reversed += l + "\n";
  }
  EXPECT_EQ(kb_from(reversed).fingerprint(), fixture_kb()->fingerprint());
}

TEST(FormatA, AspirinExample) {
  const auto kb = kb_from(std::string(kHeader) + row("D1", "aspirin", "N02BA01", "PT", "T1", "shock") +
                          row("D1", "aspirin", "N02BA01", "PT", "T2", "peptic ulcer") +
                          row("D1", "aspirin", "N02BA01", "PT", "T3", "contusion"));
  EXPECT_EQ(render_format_a(kb, "D1"),
            "The drug aspirin causes the following side effects or adverse reactions: contusion, peptic ulcer, shock\n");
}

TEST(FormatA, Singleton) {
  const auto kb = kb_from(std::string(kHeader) + row("D1", "aspirin", "N02BA01", "PT", "T1", "shock"));
  EXPECT_EQ(render_format_a(kb, "D1"), "The drug aspirin causes the following side effects or adverse reactions: shock\n");
  EXPECT_EQ(code_of([&] { render_format_a(kb, "nope"); }), ErrorCode::kUnknownDrug);
}

TEST(FormatA, RoundTripEveryFixtureDrug) {
  const auto kb = fixture_kb();
  for (const auto& [id, drug] : kb->drugs()) {
    const auto parsed = parse_format_a_line(render_format_a(*kb, id));
    ASSERT_TRUE(parsed);
    EXPECT_EQ(parsed->drug_name, drug.name);
    std::set<std::string> names(parsed->side_effects.begin(), parsed->side_effects.end());
    std::set<std::string> expected;
    for (const auto& t : kb->side_effects_of(id)) expected.insert(kb->find_term(t)->name);
    EXPECT_EQ(names, expected);
    EXPECT_EQ(parsed->side_effects.size(), expected.size());
  }
}

TEST(FormatB, UrticariaExample) {
  const auto kb = kb_from(std::string(kHeader) + row("D1", "aspirin", "N02BA01", "PT", "T1", "urticaria"));
  EXPECT_EQ(render_format_b(kb, {"D1", "T1"}),
            "The drug aspirin may cause urticaria as an adverse effect, adverse reaction, or side effect.\n");
  EXPECT_EQ(code_of([&] { render_format_b(kb, {"D1", "T2"}); }), ErrorCode::kUnknownAssociation);
}

TEST(FormatB, RoundTripEveryFixtureAssociation) {
  const auto kb = fixture_kb();
  for (const auto& a : kb->associations()) {
    const auto parsed = parse_format_b_line(render_format_b(*kb, a), kb.get());
    ASSERT_TRUE(parsed);
    EXPECT_EQ(parsed->first, kb->find_drug(a.drug_id)->name);
    EXPECT_EQ(parsed->second, kb->find_term(a.term_id)->name);
  }
}

TEST(FormatB, AmbiguousSplitResolvedByKb) {
  const auto kb = kb_from(std::string(kHeader) + row("D1", "x may cause y", "N02", "PT", "T1", "z") +
                          row("D2", "w", "N02", "PT", "T2", "q may cause r"));
  const auto line = render_format_b(kb, {"D1", "T1"});
  EXPECT_EQ(parse_format_b_line(line, &kb)->first, "x may cause y");
  EXPECT_EQ(parse_format_b_line(line)->first, "x");
  const auto other = parse_format_b_line(render_format_b(kb, {"D2", "T2"}), &kb);
  EXPECT_EQ(other->first, "w");
  EXPECT_EQ(other->second, "q may cause r");
}

TEST(Corpus, ChunkCountsAndOrder) {
  const auto kb = fixture_kb();
  const auto a = export_corpus(*kb, CorpusFormat::kA);
  const auto b = export_corpus(*kb, CorpusFormat::kB);
  EXPECT_EQ(a.size(), kb->drugs().size());
  EXPECT_EQ(b.size(), kb->associations().size());
  std::set<std::string> ids;
  for (const auto& c : a) {
    EXPECT_FALSE(c.term_id);
    EXPECT_TRUE(ids.insert(c.chunk_id).second);
    EXPECT_EQ(c.chunk_id.substr(0, 2), "A-");
  }
  for (const auto& c : b) {
    EXPECT_TRUE(c.term_id);
    EXPECT_TRUE(ids.insert(c.chunk_id).second);
  }
  for (std::size_t i = 1; i < b.size(); ++i) {
    const auto& p = b[i - 1];
    const auto& q = b[i];
    const auto key = [&](const Chunk& c) {
      return std::pair{kb->find_drug(c.drug_id)->name, kb->find_term(*c.term_id)->name};
    };
    EXPECT_LT(key(p), key(q));
  }
}

TEST(Corpus, JsonLinesRoundTrip) {
  const auto chunks = export_corpus(*fixture_kb(), CorpusFormat::kB);
  std::ostringstream out;
  write_corpus_jsonl(chunks, out);
  std::istringstream in(out.str());
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(chunk_from_json(nlohmann::ordered_json::parse(line)), chunks[i]);
    ++i;
  }
  EXPECT_EQ(i, chunks.size());
  EXPECT_EQ(chunk_to_json(chunks[0]).dump().substr(0, 13), "{\"chunk_id\":\"");
}

TEST(Corpus, DeterministicAcrossIngests) {
  const auto again = load_association_table(testsupport::fixture_path("mini_sider.tsv"));
  EXPECT_EQ(render_corpus(again, CorpusFormat::kA), render_corpus(*fixture_kb(), CorpusFormat::kA));
  EXPECT_EQ(render_corpus(again, CorpusFormat::kB), render_corpus(*fixture_kb(), CorpusFormat::kB));
}
