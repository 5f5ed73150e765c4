#include <gtest/gtest.h>

#include "support.hpp"

using namespace drugrag;
using testsupport::fixture_kb;
using testsupport::kb_from;

namespace {

const Gazetteer& fixture_gazetteer() {
  static const Gazetteer g(*fixture_kb());
  return g;
}

EntityError entity_error(const Gazetteer& g, const std::string& q) {
  try {
    g.extract(q);
  } catch (const EntityError& e) {
    return e;
  }
  ADD_FAILURE() << "extracted from: " << q;
  return EntityError(ErrorCode::kIo, "", {});
}

const char* kHeader = "drug_id\tdrug_name\tatc_codes\tterm_type\tterm_id\tterm_name\n";

}  // namespace

TEST(Entities, WorkedExamples) {
  const auto& g = fixture_gazetteer();
  auto e = g.extract("Is urticaria an adverse effect of aspirin?");
  EXPECT_EQ(e.drug.name, "aspirin");
  EXPECT_EQ(e.side_effect.name, "urticaria");
  EXPECT_EQ(e.side_effect.surface, "urticaria");
  EXPECT_EQ(e.side_effect.begin, 3u);
  EXPECT_EQ(e.drug.end, 41u);

  e = g.extract("Is headache an adverse effect of metformin?");
  EXPECT_EQ(e.drug.id, fixture_kb()->find_drug_by_name("metformin")->drug_id);
  EXPECT_EQ(e.side_effect.id, fixture_kb()->find_term_by_name("headache")->term_id);
}

TEST(Entities, SurfaceKeepsOriginalCasingAndSpacing) {
  const auto e = fixture_gazetteer().extract("Does  VALPROIC\tAcid cause Blurred Vision??");
  EXPECT_EQ(e.drug.name, "valproic acid");
  EXPECT_EQ(e.drug.surface, "VALPROIC\tAcid");
  EXPECT_EQ(e.side_effect.surface, "Blurred Vision");
}

TEST(Entities, DrugNotFoundOffersNearMisses) {
  const auto& g = fixture_gazetteer();
  EXPECT_EQ(entity_error(g, "Is headache an adverse effect of flying?").code(), ErrorCode::kDrugNotFound);
  const auto e = entity_error(g, "Is headache an adverse effect of metformine?");
  EXPECT_EQ(e.code(), ErrorCode::kDrugNotFound);
  ASSERT_FALSE(e.candidates().empty());
  EXPECT_EQ(e.candidates().front(), "metformin");
  EXPECT_EQ(entity_error(g, "Is aspirin safe?").code(), ErrorCode::kSideEffectNotFound);
}

TEST(Entities, WordBoundariesAndPunctuation) {
  const auto& g = fixture_gazetteer();
  // "aspirins" is not "aspirin"
  EXPECT_EQ(entity_error(g, "Is headache an adverse effect of aspirins?").code(), ErrorCode::kDrugNotFound);
  const auto e = g.extract("headache,aspirin?");
  EXPECT_EQ(e.drug.name, "aspirin");
  EXPECT_EQ(e.side_effect.name, "headache");
}

TEST(Entities, LongestMatchWins) {
  const auto& g = fixture_gazetteer();
  auto e = g.extract("Is peptic ulcer an adverse effect of aspirin?");
  EXPECT_EQ(e.side_effect.name, "peptic ulcer");
  e = g.extract("Is ulcer an adverse effect of aspirin?");
  EXPECT_EQ(e.side_effect.name, "ulcer");
  e = g.extract("Is nausea an adverse effect of ethinyl estradiol?");
  EXPECT_EQ(e.drug.name, "ethinyl estradiol");
  e = g.extract("Is nausea an adverse effect of estradiol?");
  EXPECT_EQ(e.drug.name, "estradiol");
}

TEST(Entities, Ambiguity) {
  const auto& g = fixture_gazetteer();
  auto e = entity_error(g, "Is headache an adverse effect of aspirin or metformin?");
  EXPECT_EQ(e.code(), ErrorCode::kAmbiguousDrug);
  EXPECT_EQ(e.candidates(), (std::vector<std::string>{"aspirin", "metformin"}));
  e = entity_error(g, "Is headache or nausea an adverse effect of aspirin?");
  EXPECT_EQ(e.code(), ErrorCode::kAmbiguousSideEffect);
  // the same name twice is not ambiguous
  EXPECT_EQ(g.extract("Aspirin: is headache an adverse effect of aspirin?").drug.name, "aspirin");
}

TEST(Entities, NameSharedByDrugAndTermDoesNotOverlap) {
  const auto kb = kb_from(std::string(kHeader) + "D1\tlithium\tN05AN01\tPT\tT1\ttremor\n" +
                          "D2\tdigoxin\tC01AA05\tPT\tT2\tlithium toxicity\n");
  const Gazetteer g(kb);
  const auto e = g.extract("Is lithium toxicity an adverse effect of digoxin?");
  EXPECT_EQ(e.drug.name, "digoxin");
  EXPECT_EQ(e.side_effect.name, "lithium toxicity");
  EXPECT_EQ(entity_error(g, "Is lithium toxicity bad?").code(), ErrorCode::kDrugNotFound);
}

TEST(Entities, CaseInsensitive) {
  const auto& g = fixture_gazetteer();
  const auto a = g.extract("Is raynaud's phenomenon an adverse effect of metformin?");
  const auto b = g.extract("IS RAYNAUD'S PHENOMENON AN ADVERSE EFFECT OF METFORMIN?");
  EXPECT_EQ(a.drug.id, b.drug.id);
  EXPECT_EQ(a.side_effect.id, b.side_effect.id);
  EXPECT_EQ(a.side_effect.name, "raynaud's phenomenon");
}

TEST(Entities, FullFixtureSweep) {
  const auto kb = fixture_kb();
  const auto& g = fixture_gazetteer();
  for (const auto& [did, drug] : kb->drugs()) {
    for (const auto& [tid, term] : kb->terms()) {
      const auto q = templated_question(drug.name, term.name);
      const auto e = g.extract(q);
      ASSERT_EQ(e.drug.id, did) << q;
      ASSERT_EQ(e.side_effect.id, tid) << q;
      ASSERT_TRUE(e.drug.end <= e.side_effect.begin || e.side_effect.end <= e.drug.begin);
      ASSERT_EQ(text::canonical_name(q.substr(e.drug.begin, e.drug.end - e.drug.begin)), drug.name);
    }
  }
}

TEST(Entities, EmptyQuestion) {
  EXPECT_THROW(fixture_gazetteer().extract("   "), Error);
  EXPECT_EQ(extract_entities("Is urticaria an adverse effect of aspirin?", *fixture_kb()).drug.name, "aspirin");
}
