#include "beq/bgp_engine.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "beq/reference.hpp"
#include "generators.hpp"
#include "test_util.hpp"

namespace {

using namespace beq;

Store load_presidents() {
  std::ifstream in(test::fixture_path("data/presidents.nt"));
  return load_ntriples(in);
}

const std::string kWiki = "http://dbpedia.org/ontology/wikiPageWikiLink";
const std::string kPresident =
    "http://dbpedia.org/resource/President_of_the_United_States";
const std::string kName = "http://xmlns.com/foaf/0.1/name";

Bgp presidents_bgp() {
  Bgp b;
  b.triples.push_back({Variable{"x"}, Term::iri(kWiki), Term::iri(kPresident)});
  b.triples.push_back({Variable{"x"}, Term::iri(kName), Variable{"n"}});
  return b;
}

TEST(EvaluateBgp, TwoPatternJoin) {
  Store st = load_presidents();
  Bag out = evaluate_bgp(st, presidents_bgp(), nullptr);
  EXPECT_EQ(out.rows.size(), 2u);
  for (const Mapping& m : out.rows) EXPECT_EQ(m.size(), 2u);
}

TEST(EvaluateBgp, CandidateRestrictsOutput) {
  Store st = load_presidents();
  TermId clinton =
      *st.id_of(Term::iri("http://dbpedia.org/resource/Bill_Clinton"));
  CandidateSet cand;
  cand.variables.push_back(Variable{"x"});
  Mapping m;
  m.bind(Variable{"x"}, clinton);
  cand.rows.rows.push_back(m);
  Bag out = evaluate_bgp(st, presidents_bgp(), &cand);
  ASSERT_EQ(out.rows.size(), 1u);
  EXPECT_EQ(out.rows[0].lookup(Variable{"x"}), std::optional<TermId>(clinton));
}

TEST(EvaluateBgp, EmptyCandidateRowsYieldEmptyBag) {
  Store st = load_presidents();
  CandidateSet cand;
  cand.variables.push_back(Variable{"x"});  // shared variable, zero rows
  EXPECT_TRUE(evaluate_bgp(st, presidents_bgp(), &cand).rows.empty());
}

TEST(EvaluateBgp, EmptyBgpIsIdentity) {
  Store st = load_presidents();
  Bag out = evaluate_bgp(st, Bgp{}, nullptr);
  ASSERT_EQ(out.rows.size(), 1u);
  EXPECT_EQ(out.rows[0].size(), 0u);
}

TEST(EvaluateBgp, ConstantOnlyPatternChecksPresence) {
  Store st = load_presidents();
  Bgp present;
  present.triples.push_back(
      {Term::iri("http://dbpedia.org/resource/George_W._Bush"),
       Term::iri(kWiki), Term::iri(kPresident)});
  Bag out = evaluate_bgp(st, present, nullptr);
  ASSERT_EQ(out.rows.size(), 1u);  // identity row: the statement exists
  EXPECT_EQ(out.rows[0].size(), 0u);

  Bgp absent;
  absent.triples.push_back(
      {Term::iri("http://dbpedia.org/resource/George_W._Bush"),
       Term::iri(kName), Term::iri(kPresident)});
  EXPECT_TRUE(evaluate_bgp(st, absent, nullptr).rows.empty());
}

TEST(EvaluateBgp, DisconnectedBlockIsRejected) {
  Store st = load_presidents();
  Bgp b;
  b.triples.push_back({Variable{"x"}, Term::iri(kName), Variable{"n"}});
  b.triples.push_back({Variable{"y"}, Term::iri(kWiki), Variable{"z"}});
  EXPECT_THROW(evaluate_bgp(st, b, nullptr), std::logic_error);
}

TEST(EvaluateBgp, MatchesOracleOnRandomStores) {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 200; ++round) {
    Store st = test::gen_store(rng, 50, 8, 4);
    test::QueryGen gen(rng, 8, 4, 5);
    // Build a connected BGP of up to 5 patterns by chaining.
    PatternPtr chunk = gen.gen_bgp();
    Bgp b;
    b.triples = chunk->triples;
    while (int(b.triples.size()) < 1 + int(rng() % 4)) {
      std::vector<Variable> vars;
      for (const TriplePattern& t : b.triples) {
        if (is_var(t.s)) vars.push_back(as_var(t.s));
        if (is_var(t.o)) vars.push_back(as_var(t.o));
      }
      if (vars.empty()) break;
      TriplePattern t = gen.gen_pattern();
      if (rng() % 2)
        t.s = vars[rng() % vars.size()];
      else
        t.o = vars[rng() % vars.size()];
      b.triples.push_back(t);
    }
    Bag got = evaluate_bgp(st, b, nullptr);
    Bag want = reference_evaluate(make_bgp(b.triples), st);
    ASSERT_TRUE(bag_equal(got, want));
  }
}

TEST(EvaluateBgp, CandidateEqualsPostFilteredOutput) {
  std::mt19937_64 rng(37);
  for (int round = 0; round < 100; ++round) {
    Store st = test::gen_store(rng, 40, 6, 3);
    test::QueryGen gen(rng, 6, 3, 4);
    PatternPtr chunk = gen.gen_bgp();
    Bgp b;
    b.triples = chunk->triples;
    Bag noCand = evaluate_bgp(st, b, nullptr);

    // Candidate rows: some drawn from real results, some noise, sometimes
    // partially bound.
    std::vector<Variable> vars;
    for (const TriplePattern& t : b.triples) collect_vars(t, vars);
    if (vars.empty()) continue;
    CandidateSet cand;
    for (const Variable& v : vars)
      if (rng() % 2) cand.variables.push_back(v);
    if (cand.variables.empty()) cand.variables.push_back(vars[0]);
    for (int r = 0; r < int(rng() % 4); ++r) {
      Mapping m;
      for (const Variable& v : cand.variables) {
        if (rng() % 4 == 0) continue;  // leave unbound
        if (!noCand.rows.empty() && rng() % 2) {
          auto val = noCand.rows[rng() % noCand.rows.size()].lookup(v);
          if (val) m.bind(v, *val);
        } else {
          m.bind(v, TermId(rng() % 10));
        }
      }
      cand.rows.rows.push_back(m);
    }

    Bag got = evaluate_bgp(st, b, &cand);
    Bag want;
    for (const Mapping& m : noCand.rows) {
      bool keep = false;
      for (const Mapping& c : cand.rows.rows)
        if (compatible(m, c)) keep = true;
      if (keep) want.rows.push_back(m);
    }
    ASSERT_TRUE(bag_equal(got, want));
  }
}

TEST(Costs, StepAndBinaryJoinFormulas) {
  EXPECT_DOUBLE_EQ(wco_step_cost(10.0, 3.0), 30.0);
  EXPECT_DOUBLE_EQ(binary_join_cost(5.0, 7.0), 17.0);  // 2*min + max
  EXPECT_DOUBLE_EQ(binary_join_cost(7.0, 5.0), 17.0);
}

TEST(Planner, SinglePatternPlan) {
  Store st = load_presidents();
  Bgp b;
  b.triples.push_back({Variable{"s"}, Term::iri(kName), Variable{"n"}});
  CardEstimator est(1);
  BgpPlan plan = plan_bgp(st, b, est);
  ASSERT_EQ(plan.perStepCost.size(), 1u);
  EXPECT_DOUBLE_EQ(plan.perStepCost[0], 2.0);  // exact index count
  EXPECT_EQ(plan.vertexOrder.size(), 2u);
  EXPECT_DOUBLE_EQ(plan.estimatedResultSize, 2.0);
}

TEST(Planner, DeterministicGivenSeed) {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 20; ++round) {
    Store st = test::gen_store(rng, 50, 8, 4);
    test::QueryGen gen(rng, 8, 4, 4);
    Bgp b;
    b.triples = gen.gen_bgp()->triples;
    CardEstimator e1(7), e2(7);
    BgpPlan p1 = plan_bgp(st, b, e1);
    BgpPlan p2 = plan_bgp(st, b, e2);
    EXPECT_EQ(p1.vertexOrder, p2.vertexOrder);
    EXPECT_EQ(p1.perStepCost, p2.perStepCost);
    EXPECT_DOUBLE_EQ(p1.estimatedResultSize, p2.estimatedResultSize);
  }
}

TEST(Planner, VertexOrderCoversEachVertexOnce) {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 50; ++round) {
    Store st = test::gen_store(rng, 50, 8, 4);
    test::QueryGen gen(rng, 8, 4, 4);
    Bgp b;
    b.triples = gen.gen_bgp()->triples;
    CardEstimator est(1);
    BgpPlan plan = plan_bgp(st, b, est);
    std::vector<std::string> sorted = plan.vertexOrder;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_TRUE(std::unique(sorted.begin(), sorted.end()) == sorted.end());
  }
}

TEST(Estimator, SinglePatternIsExact) {
  Store st = load_presidents();
  Bgp b;
  b.triples.push_back({Variable{"s"}, Term::iri(kName), Variable{"n"}});
  CardEstimator est(1);
  EXPECT_DOUBLE_EQ(estimate_cardinality(st, b, est), 2.0);
}

TEST(Estimator, ZeroExtendClampsToOne) {
  // The q edge exists but never connects to a p object: the base pattern is
  // non-empty, the extension ratio is 0, and the estimate clamps to 1.
  Store st;
  st.insert(Term::iri("http://e/a"), Term::iri("http://e/p"), Term::iri("http://e/b"));
  st.insert(Term::iri("http://e/c"), Term::iri("http://e/q"), Term::iri("http://e/d"));
  Bgp b;
  b.triples.push_back({Variable{"x"}, Term::iri("http://e/p"), Variable{"y"}});
  b.triples.push_back({Variable{"y"}, Term::iri("http://e/q"), Variable{"z"}});
  CardEstimator est(1);
  EXPECT_DOUBLE_EQ(estimate_cardinality(st, b, est), 1.0);
}

TEST(Estimator, UnitRatioKeepsBaseEstimate) {
  // Every ?y has exactly one q-successor: ratio 1, estimate stays 2.
  Store st;
  st.insert(Term::iri("http://e/a1"), Term::iri("http://e/p"), Term::iri("http://e/b1"));
  st.insert(Term::iri("http://e/a2"), Term::iri("http://e/p"), Term::iri("http://e/b2"));
  st.insert(Term::iri("http://e/b1"), Term::iri("http://e/q"), Term::iri("http://e/c1"));
  st.insert(Term::iri("http://e/b2"), Term::iri("http://e/q"), Term::iri("http://e/c2"));
  Bgp b;
  b.triples.push_back({Variable{"x"}, Term::iri("http://e/p"), Variable{"y"}});
  b.triples.push_back({Variable{"y"}, Term::iri("http://e/q"), Variable{"z"}});
  CardEstimator est(1);
  EXPECT_DOUBLE_EQ(estimate_cardinality(st, b, est), 2.0);
}

TEST(Estimator, EmptyBaseYieldsZeroWithoutClamp) {
  Store st;
  st.insert(Term::iri("http://e/a"), Term::iri("http://e/p"), Term::iri("http://e/b"));
  Bgp b;
  b.triples.push_back({Variable{"x"}, Term::iri("http://e/absent"), Variable{"y"}});
  b.triples.push_back({Variable{"y"}, Term::iri("http://e/p"), Variable{"z"}});
  CardEstimator est(1);
  EXPECT_DOUBLE_EQ(estimate_cardinality(st, b, est), 0.0);
}

TEST(Estimator, EstimateIgnoresTripleOrder) {
  std::mt19937_64 rng(47);
  for (int round = 0; round < 20; ++round) {
    Store st = test::gen_store(rng, 50, 8, 4);
    test::QueryGen gen(rng, 8, 4, 4);
    Bgp b;
    b.triples = gen.gen_bgp()->triples;
    if (b.triples.size() < 2) continue;
    Bgp rev = b;
    std::reverse(rev.triples.begin(), rev.triples.end());
    CardEstimator est(5);
    double e1 = estimate_cardinality(st, b, est);
    double e2 = estimate_cardinality(st, rev, est);
    EXPECT_DOUBLE_EQ(e1, e2);
  }
}

}  // namespace
