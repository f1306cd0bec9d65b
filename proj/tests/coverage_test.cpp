#include <gtest/gtest.h>

#include "repro/repro.hpp"
#include "support/fixtures.hpp"

using namespace repro;
using repro::testing::minimal_graph;

namespace {

// H1 with two supporting interpretations, both on E1.
StudyGraph two_interpretations() {
  StudyGraph g = minimal_graph();
  g.interpretations.push_back({"I2", "A is also more stable.", {"H1"}, {"E1"}, Verdict::supports, {}});
  return g;
}

ReproductionAttempt full_attempt(const StudyGraph& g) {
  ReproductionAttempt a;
  a.study_id = g.metadata.source_id;
  for (const auto& e : g.experiments) a.experiment_outcomes[e.id] = {true, true, {}};
  for (const auto& i : g.interpretations) a.interpretation_verdicts[i.id] = true;
  return a;
}

const ExplanationEntry& entry(const std::vector<ExplanationEntry>& es, const Id& id) {
  for (const auto& e : es)
    if (e.element_id == id) return e;
  throw std::out_of_range(id);
}

}  // namespace

TEST(Coverage, EmptyAttemptScoresZero) {
  CoverageScore s = score_reproduction(minimal_graph(), {});
  EXPECT_EQ(s.interpretations_upheld, 0.0);
  EXPECT_EQ(s.hypotheses_supported, 0.0);
  EXPECT_EQ(s.experiments_reproduced, 0.0);
  EXPECT_FALSE(s.per_hypothesis.at("H1"));
}

TEST(Coverage, FullAttemptScoresOne) {
  StudyGraph g = two_interpretations();
  CoverageScore s = score_reproduction(g, full_attempt(g));
  EXPECT_EQ(s.interpretations_upheld, 1.0);
  EXPECT_EQ(s.hypotheses_supported, 1.0);
  EXPECT_EQ(s.experiments_reproduced, 1.0);
}

TEST(Coverage, AllFourUpholdCombinations) {
  // (I1 upheld, I2 upheld) -> (interpretations_upheld, H1 supported)
  struct Row {
    bool i1, i2;
    double upheld;
    bool supported;
  };
  const Row table[] = {{false, false, 0.0, false}, {true, false, 0.5, false}, {false, true, 0.5, false},
                       {true, true, 1.0, true}};
  StudyGraph g = two_interpretations();
  for (const Row& row : table) {
    ReproductionAttempt a = full_attempt(g);
    a.interpretation_verdicts["I1"] = row.i1;
    a.interpretation_verdicts["I2"] = row.i2;
    CoverageScore s = score_reproduction(g, a);
    EXPECT_EQ(s.interpretations_upheld, row.upheld);
    EXPECT_EQ(s.per_hypothesis.at("H1"), row.supported);
    EXPECT_EQ(s.hypotheses_supported, row.supported ? 1.0 : 0.0);
  }
}

TEST(Coverage, NonSupportingInterpretationsDoNotCount) {
  StudyGraph g = two_interpretations();
  g.interpretations[1].verdict = Verdict::inconclusive;
  ReproductionAttempt a = full_attempt(g);
  a.interpretation_verdicts["I2"] = false;
  EXPECT_TRUE(score_reproduction(g, a).per_hypothesis.at("H1"));
}

TEST(Coverage, RejectsUnknownIdsAndInconsistency) {
  StudyGraph g = minimal_graph();
  ReproductionAttempt a;
  a.experiment_outcomes["E9"] = {};
  EXPECT_THROW(score_reproduction(g, a), UnknownId);
  ReproductionAttempt b;
  b.interpretation_verdicts["I7"] = true;
  EXPECT_THROW(score_reproduction(g, b), UnknownId);
  ReproductionAttempt c;
  c.interpretation_verdicts["I1"] = true;
  EXPECT_THROW(score_reproduction(g, c), InconsistentAttempt);
}

TEST(Explain, FullCoverage) {
  StudyGraph g = minimal_graph();
  auto es = explain_score(g, full_attempt(g));
  ASSERT_EQ(es.size(), 3u);
  EXPECT_EQ(es[0].status, "supported");
  EXPECT_EQ(es[1].status, "reproduced");
  EXPECT_EQ(es[2].status, "upheld");
}

TEST(Explain, FailedExperimentBlocksItsInterpretations) {
  StudyGraph g = two_interpretations();
  g.experiments.push_back(g.experiments[0]);
  g.experiments[1].id = "E2";
  g.interpretations.push_back({"I3", "Unrelated.", {"H1"}, {"E2"}, Verdict::inconclusive, {}});
  ReproductionAttempt a = full_attempt(g);
  a.experiment_outcomes["E1"] = {false, false, {}};
  a.interpretation_verdicts["I1"] = false;
  a.interpretation_verdicts["I2"] = false;
  auto es = explain_score(g, a);
  EXPECT_EQ(entry(es, "I1").status, "blocked");
  EXPECT_EQ(entry(es, "I1").reason, "experiment not reproduced: E1");
  EXPECT_EQ(entry(es, "I2").status, "blocked");
  EXPECT_EQ(entry(es, "I3").status, "upheld");
  EXPECT_EQ(entry(es, "E1").status, "not_reproduced");
  EXPECT_EQ(entry(es, "E1").reason, "assessment test failed");
  EXPECT_EQ(entry(es, "H1").status, "unsupported");
}

TEST(Explain, HypothesisWithoutSupportingInterpretation) {
  StudyGraph g = minimal_graph();
  g.hypotheses.push_back({"H2", "Lonely.", HypothesisKind::stated, {}});
  auto es = explain_score(g, full_attempt(g));
  EXPECT_EQ(entry(es, "H2").status, "unsupported");
  EXPECT_EQ(entry(es, "H2").reason, "no supporting interpretation");
}

TEST(AttemptFormat, RoundTrip) {
  StudyGraph g = minimal_graph();
  ReproductionAttempt a = full_attempt(g);
  a.experiment_outcomes["E1"].reproduced_results = g.experiments[0].results;
  a.experiment_outcomes["E1"].test_passed.reset();
  std::string doc = serialize_attempt(a);
  EXPECT_EQ(parse_attempt(doc), a);
  EXPECT_EQ(serialize_attempt(parse_attempt(doc)), doc);
  EXPECT_THROW(parse_attempt(R"({"format_version":"1","study_id":"x","experiment_outcomes":[{"experiment_id":"E1","reproduced":true},{"experiment_id":"E1","reproduced":false}]})"),
               ParseError);
}
