#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "topomap/labeling.hpp"

using namespace topomap;
using testsupport::direct_nmi;

TEST_CASE("contingency tables") {
  const std::set<std::string> u = {"d1", "d2", "d3", "d4"};
  CHECK(contingency({"d1", "d2"}, {"d1", "d2"}, u) == Contingency{2, 0, 0, 2});
  CHECK(contingency({"d1", "d2"}, {"d3"}, u).n11 == 0);
  auto sat = contingency({"d1"}, u, u);
  CHECK(sat.n10 + sat.n11 == 4);
  CHECK(sat.n01 == 0);
  CHECK(sat.n00 == 0);
  CHECK_THROWS_AS(contingency({"x"}, {}, u), std::invalid_argument);
}

TEST_CASE("nmi fixtures") {
  auto perfect = nmi_score({2, 0, 0, 2});
  CHECK(perfect.nmi == 1.0);
  CHECK(perfect.direction == Direction::enriched);
  CHECK(nmi_score({1, 1, 1, 1}).nmi == 0.0);
  CHECK(nmi_score({3, 5, 0, 0}).nmi == 0.0);  // label everywhere in the universe
  CHECK(nmi_score({0, 3, 2, 1}).direction == Direction::depleted);
  CHECK_THROWS_AS(nmi_score({0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("nmi matches the direct probability oracle") {
  topomap::Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    Contingency t{static_cast<std::int64_t>(rng.below(50)), static_cast<std::int64_t>(rng.below(50)),
                  static_cast<std::int64_t>(rng.below(50)), 1 + static_cast<std::int64_t>(rng.below(50))};
    CHECK(nmi_score(t).nmi == doctest::Approx(direct_nmi(t.n11, t.n10, t.n01, t.n00)).epsilon(1e-12));
    CHECK(nmi_score(t, NmiNormalization::min).nmi ==
          doctest::Approx(direct_nmi(t.n11, t.n10, t.n01, t.n00, true)).epsilon(1e-12));
  }
}

TEST_CASE("nmi lies in the unit interval and is symmetric in the roles") {
  topomap::Rng rng(18);
  for (int i = 0; i < 500; ++i) {
    Contingency t{static_cast<std::int64_t>(rng.below(9)), static_cast<std::int64_t>(rng.below(9)),
                  static_cast<std::int64_t>(rng.below(9)), 1 + static_cast<std::int64_t>(rng.below(9))};
    const double a = nmi_score(t).nmi;
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    Contingency swapped{t.n11, t.n01, t.n10, t.n00};
    CHECK(nmi_score(swapped).nmi == doctest::Approx(a).epsilon(1e-12));
  }
}

namespace {

std::vector<LabeledDoc> toy_corpus() {
  std::vector<LabeledDoc> docs;
  for (int i = 0; i < 12; ++i) {
    LabeledDoc d{"d" + std::to_string(i), i < 6 ? 1 : 2, {"common"}};
    if (i < 6) d.labels.push_back("marker");
    if (i >= 6) d.labels.push_back("other");
    if (i % 2 == 0) d.labels.push_back("half");
    docs.push_back(d);
  }
  return docs;
}

}  // namespace

TEST_CASE("perfect marker ranks first") {
  LabelOptions o;
  o.min_doc_freq = 1;
  auto ranked = rank_labels(toy_corpus(), o);
  REQUIRE(!ranked[1].empty());
  CHECK(ranked[1][0].label == "marker");
  CHECK(ranked[1][0].nmi == 1.0);
  CHECK(ranked[2][0].label == "other");
}

TEST_CASE("depleted labels are filtered") {
  // "frequent" is in every document except cluster 1's: table (0, k, m, n).
  std::vector<LabeledDoc> docs;
  for (int i = 0; i < 20; ++i) {
    LabeledDoc d{"d" + std::to_string(i), i < 5 ? 1 : 2, {}};
    if (i >= 5) d.labels.push_back("frequent");
    docs.push_back(d);
  }
  LabelOptions o;
  o.min_doc_freq = 1;
  auto ranked = rank_labels(docs, o);
  for (const auto& s : ranked[1]) CHECK(s.label != "frequent");
  auto table = nmi_score({0, 15, 5, 0});
  CHECK(table.nmi == 1.0);
  CHECK(table.direction == Direction::depleted);
}

TEST_CASE("journal exclusive to a cluster tops its list") {
  std::vector<LabeledDoc> docs;
  for (int i = 0; i < 10; ++i) docs.push_back({"d" + std::to_string(i), i < 4 ? 0 : 1, {i < 4 ? "Weed Research" : (i % 2 ? "Oikos" : "Ecology")}});
  LabelOptions o;
  o.min_doc_freq = 2;
  auto ranked = rank_labels(docs, o);
  CHECK(ranked[0][0].label == "Weed Research");
}

TEST_CASE("minimum document frequency and top_n") {
  LabelOptions o;
  o.min_doc_freq = 7;
  auto ranked = rank_labels(toy_corpus(), o);
  for (const auto& [c, scores] : ranked)
    for (const auto& s : scores) CHECK(s.counts.n11 + s.counts.n10 >= 7);
  o.min_doc_freq = 1;
  o.top_n = 1;
  for (const auto& [c, scores] : rank_labels(toy_corpus(), o)) CHECK(scores.size() <= 1);
}

TEST_CASE("universe choice changes the tables") {
  auto docs = toy_corpus();
  docs.push_back({"x1", -1, {"marker"}});
  docs.push_back({"x2", -1, {}});
  LabelOptions o;
  o.min_doc_freq = 1;
  auto giant = rank_labels(docs, o);
  CHECK(giant[1][0].counts.total() == 14);
  CHECK(giant[1][0].counts.n10 == 1);
  o.universe = Universe::solution_members;
  auto members = rank_labels(docs, o);
  CHECK(members[1][0].counts.total() == 12);
  CHECK(members[1][0].nmi == 1.0);
  CHECK_THROWS_AS(rank_labels(std::vector<LabeledDoc>{{"a", -1, {}}}, o), std::invalid_argument);
}

TEST_CASE("label table output") {
  LabelOptions o;
  o.min_doc_freq = 1;
  o.top_n = 1;
  std::ostringstream out;
  write_labels_tsv(rank_labels(toy_corpus(), o), LabelMode::journal, out);
  CHECK(out.str() == "cluster_id\trank\tlabel\tnmi\tn11\tn10\tn01\tn00\tmode\n"
                     "1\t1\tmarker\t1\t6\t0\t0\t6\tjournal\n"
                     "2\t1\tother\t1\t6\t0\t0\t6\tjournal\n");
}
