#include "beq/store.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "test_util.hpp"

namespace {

using namespace beq;

const std::string kBush = "http://dbpedia.org/resource/George_W._Bush";
const std::string kClinton = "http://dbpedia.org/resource/Bill_Clinton";
const std::string kPresident =
    "http://dbpedia.org/resource/President_of_the_United_States";
const std::string kName = "http://xmlns.com/foaf/0.1/name";
const std::string kLabel = "http://www.w3.org/2000/01/rdf-schema#label";
const std::string kWikiLink = "http://dbpedia.org/ontology/wikiPageWikiLink";
const std::string kBirthDate = "http://dbpedia.org/property/birthDate";
const std::string kSameAs = "http://www.w3.org/2002/07/owl#sameAs";

Store load_presidents() {
  std::ifstream in(test::fixture_path("data/presidents.nt"));
  return load_ntriples(in);
}

TEST(Store, LoadCountsAndPredicateStats) {
  Store st = load_presidents();
  EXPECT_EQ(st.size(), 7u);
  auto name = st.id_of(Term::iri(kName));
  ASSERT_TRUE(name.has_value());
  EXPECT_EQ(st.predicate_count(*name), 2u);
  auto label = st.id_of(Term::iri(kLabel));
  ASSERT_TRUE(label.has_value());
  EXPECT_EQ(st.predicate_count(*label), 1u);
}

TEST(Store, DuplicateStatementsStoredOnce) {
  std::string text = test::read_file(test::fixture_path("data/presidents.nt"));
  std::istringstream in(text + text);  // every statement twice
  Store st = load_ntriples(in);
  EXPECT_EQ(st.size(), 7u);
}

TEST(Store, IdsAssignedInFirstSeenOrder) {
  Store st = load_presidents();
  EXPECT_EQ(st.id_of(Term::iri(kBush)), TermId{0});
  EXPECT_EQ(st.id_of(Term::iri(kName)), TermId{1});
  EXPECT_EQ(st.id_of(Term::literal("George Walker Bush", "en")), TermId{2});
  EXPECT_EQ(st.id_of(Term::iri(kClinton)), TermId{7});
  // Unknown terms have no id.
  EXPECT_FALSE(st.id_of(Term::iri("http://example.org/absent")).has_value());
  // Round trip through the catalog.
  EXPECT_EQ(st.term(TermId{7}), Term::iri(kClinton));
  EXPECT_EQ(st.term(TermId{2}), Term::literal("George Walker Bush", "en"));
}

TEST(Store, ScanBoundPrefixCombinations) {
  Store st = load_presidents();
  TermId bush = *st.id_of(Term::iri(kBush));
  TermId clinton = *st.id_of(Term::iri(kClinton));
  TermId president = *st.id_of(Term::iri(kPresident));
  TermId name = *st.id_of(Term::iri(kName));
  TermId wiki = *st.id_of(Term::iri(kWikiLink));
  TermId bushName = *st.id_of(Term::literal("George Walker Bush", "en"));

  EXPECT_EQ(st.scan(clinton, std::nullopt, std::nullopt).size(), 4u);
  EXPECT_EQ(st.scan(std::nullopt, std::nullopt, std::nullopt).size(), 7u);
  EXPECT_TRUE(st.scan(clinton, name, bushName).empty());
  EXPECT_EQ(st.scan(std::nullopt, name, std::nullopt).size(), 2u);
  EXPECT_EQ(st.scan(std::nullopt, wiki, president).size(), 2u);
  EXPECT_EQ(st.scan(bush, std::nullopt, president).size(), 1u);
  EXPECT_EQ(st.scan(std::nullopt, std::nullopt, president).size(), 2u);
  EXPECT_EQ(st.scan(bush, wiki, president).size(), 1u);
}

TEST(Store, ScanUnknownIdYieldsEmpty) {
  Store st = load_presidents();
  EXPECT_TRUE(st.scan(TermId{9999}, std::nullopt, std::nullopt).empty());
}

TEST(Store, AverageFanOut) {
  Store st = load_presidents();
  TermId name = *st.id_of(Term::iri(kName));
  TermId wiki = *st.id_of(Term::iri(kWikiLink));
  TermId birth = *st.id_of(Term::iri(kBirthDate));
  // foaf:name: 2 triples over 2 distinct subjects.
  EXPECT_DOUBLE_EQ(st.average_size(name, Direction::bySubject), 1.0);
  // wikiPageWikiLink: 2 triples share 1 distinct object.
  EXPECT_DOUBLE_EQ(st.average_size(wiki, Direction::byObject), 2.0);
  EXPECT_DOUBLE_EQ(st.average_size(birth, Direction::bySubject), 1.0);
  // Absent predicate contributes nothing.
  EXPECT_DOUBLE_EQ(st.average_size(TermId{9999}, Direction::bySubject), 0.0);
  // Whole-store fan-out: 7 triples, 2 distinct subjects, 6 distinct objects.
  EXPECT_DOUBLE_EQ(st.average_size_any(Direction::bySubject), 3.5);
  EXPECT_DOUBLE_EQ(st.average_size_any(Direction::byObject), 7.0 / 6.0);
}

TEST(Store, IndexesAgreeOnTripleSet) {
  Store st = load_presidents();
  auto all = st.scan(std::nullopt, std::nullopt, std::nullopt);
  EXPECT_EQ(all.size(), st.size());
  // Sum of per-predicate counts equals the store size.
  std::size_t sum = 0;
  for (TermId id = 0; id < st.term_count(); ++id) sum += st.predicate_count(id);
  EXPECT_EQ(sum, st.size());
}

TEST(Store, MalformedInputReportsLineNumber) {
  std::ifstream in(test::fixture_path("data/bad_line.nt"));
  try {
    load_ntriples(in);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.line, 3u);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

TEST(Store, LiteralForms) {
  std::istringstream in(
      "<http://e/s> <http://e/p> \"plain\" .\n"
      "<http://e/s> <http://e/p> \"tab\\tnewline\\n\" .\n"
      "<http://e/s> <http://e/p> \"ja\"@de .\n"
      "<http://e/s> <http://e/p> "
      "\"1\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
      "_:b0 <http://e/p> _:b1 .\n");
  Store st = load_ntriples(in);
  EXPECT_EQ(st.size(), 5u);
  EXPECT_TRUE(st.id_of(Term::literal("plain")).has_value());
  EXPECT_TRUE(st.id_of(Term::literal("tab\tnewline\n")).has_value());
  EXPECT_TRUE(st.id_of(Term::literal("ja", "de")).has_value());
  EXPECT_TRUE(
      st.id_of(Term::typed_literal(
                   "1", "http://www.w3.org/2001/XMLSchema#integer"))
          .has_value());
  EXPECT_TRUE(st.id_of(Term::blank("b0")).has_value());
  // Same lexical form with different lang/datatype stays distinct.
  EXPECT_FALSE(st.id_of(Term::literal("ja")).has_value());
}

// Every scan result equals brute-force filtration of the full triple list.
TEST(Store, ScanMatchesBruteForceOnRandomStores) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 40; ++round) {
    Store st;
    int nTerms = 2 + int(rng() % 7);
    int nPred = 1 + int(rng() % 4);
    int nTriples = int(rng() % 51);
    for (int i = 0; i < nTriples; ++i) {
      Term s = Term::iri("http://e/t" + std::to_string(rng() % nTerms));
      Term p = Term::iri("http://e/p" + std::to_string(rng() % nPred));
      Term o = Term::iri("http://e/t" + std::to_string(rng() % nTerms));
      st.insert(s, p, o);
    }
    auto all = st.scan(std::nullopt, std::nullopt, std::nullopt);
    for (int probe = 0; probe < 24; ++probe) {
      auto pick = [&](int mod) -> std::optional<TermId> {
        if (rng() % 2) return std::nullopt;
        auto id = st.id_of(Term::iri(
            std::string("http://e/") +
            (mod ? "p" + std::to_string(rng() % nPred)
                 : "t" + std::to_string(rng() % nTerms))));
        return id;
      };
      auto s = pick(0), p = pick(1), o = pick(0);
      auto got = st.scan(s, p, o);
      std::vector<Triple> want;
      for (const Triple& t : all) {
        if (s && t.s != *s) continue;
        if (p && t.p != *p) continue;
        if (o && t.o != *o) continue;
        want.push_back(t);
      }
      auto key = [](const Triple& t) {
        return std::tuple(t.s, t.p, t.o);
      };
      std::sort(got.begin(), got.end(),
                [&](auto& a, auto& b) { return key(a) < key(b); });
      std::sort(want.begin(), want.end(),
                [&](auto& a, auto& b) { return key(a) < key(b); });
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(key(got[i]), key(want[i]));
      }
    }
  }
}

}  // namespace
