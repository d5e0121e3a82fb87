#include <sstream>

#include "doctest.h"
#include "topomap/errors.hpp"
#include "topomap/graph.hpp"

using namespace topomap;

namespace {

PublicationRecord pub(std::string id, std::vector<std::string> refs) {
  PublicationRecord r;
  r.id = std::move(id);
  r.year = 2005;
  r.doc_type = DocType::parse("article");
  r.references = std::move(refs);
  return r;
}

CitationGraph graph_of(std::vector<std::string> ids, std::vector<Edge> edges) {
  const auto n = ids.size();
  return CitationGraph::from_edges(std::move(ids), std::vector<std::int64_t>(n, 1), std::move(edges));
}

}  // namespace

TEST_CASE("normalized out-weights") {
  std::vector<PublicationRecord> recs = {pub("i", {"a", "b", "c", "d"}), pub("a", {}), pub("b", {}), pub("c", {}), pub("d", {})};
  BuildStats stats;
  auto g = build_graph(recs, Weighting::normalized_out, &stats);
  const int i = *g.find("i");
  REQUIRE(g.out_weights(i).size() == 4);
  for (double w : g.out_weights(i)) CHECK(w == 0.25);
  CHECK(g.out_weight_sum(i) == 1.0);
  CHECK(stats.resolved == 4);
}

TEST_CASE("unit weighting") {
  auto g = build_graph(std::vector{pub("i", {"a", "b"}), pub("a", {}), pub("b", {})}, Weighting::unit);
  for (double w : g.out_weights(*g.find("i"))) CHECK(w == 1.0);
}

TEST_CASE("out-of-corpus and self references are dropped") {
  BuildStats stats;
  auto g = build_graph(std::vector{pub("a", {"x", "y", "a"}), pub("b", {"a"})}, Weighting::normalized_out, &stats);
  CHECK(g.out_targets(*g.find("a")).empty());
  CHECK(stats.out_of_corpus == 2);
  CHECK(stats.self_references == 1);
  CHECK(g.out_weight_sum(*g.find("b")) == 1.0);
}

TEST_CASE("normalization counts in-corpus references only") {
  auto g = build_graph(std::vector{pub("a", {"b", "x"}), pub("b", {})});
  CHECK(g.out_weights(*g.find("a"))[0] == 1.0);
}

TEST_CASE("duplicate record ids are a schema error") {
  CHECK_THROWS_AS(build_graph(std::vector{pub("a", {}), pub("a", {})}), SchemaError);
}

TEST_CASE("giant component keeps the largest weak component") {
  auto g = graph_of({"a", "b", "c", "d", "e"}, {{0, 1, 1}, {1, 2, 1}, {3, 4, 1}});
  auto [giant, rep] = giant_component(g);
  CHECK(giant.ids() == std::vector<std::string>{"a", "b", "c"});
  CHECK(rep.dropped_nodes == 2);
  CHECK(rep.component_count == 2);
  CHECK(giant.edge_count() == 2);
}

TEST_CASE("connected graph is its own giant component") {
  auto g = graph_of({"a", "b", "c"}, {{0, 1, 1}, {2, 1, 1}});
  auto [giant, rep] = giant_component(g);
  CHECK(giant.ids() == g.ids());
  CHECK(giant.edge_count() == g.edge_count());
  CHECK(rep.dropped_nodes == 0);
}

TEST_CASE("equal components resolve to the smallest id") {
  auto g = graph_of({"d", "c", "b", "a"}, {{0, 1, 1}, {2, 3, 1}});
  auto [giant, rep] = giant_component(g);
  REQUIRE(giant.node_count() == 2);
  CHECK(giant.find("a").has_value());
  CHECK(giant.find("b").has_value());
}

TEST_CASE("symmetric view sums both directions") {
  auto g = graph_of({"i", "j", "k", "l"}, {{0, 1, 0.25}, {1, 0, 0.5}, {2, 0, 0.7}});
  auto s = undirected_view(g);
  CHECK(s.weight(0, 1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(s.weight(1, 0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(s.weight(0, 2) == 0.7);
  CHECK(s.weight(0, 3) == 0.0);
  CHECK(s.total_weight() == doctest::Approx(1.45));
}

TEST_CASE("parallel edges merge and self-loops vanish") {
  auto g = graph_of({"a", "b"}, {{0, 1, 0.5}, {0, 1, 0.25}, {0, 0, 1.0}});
  CHECK(g.edge_count() == 1);
  CHECK(g.out_weights(0)[0] == 0.75);
}

TEST_CASE("negative weights and bad indices are rejected") {
  CHECK_THROWS_AS(graph_of({"a", "b"}, {{0, 1, -1}}), std::invalid_argument);
  CHECK_THROWS_AS(graph_of({"a", "b"}, {{0, 2, 1}}), std::invalid_argument);
}

TEST_CASE("tsv round trip preserves weights exactly") {
  auto g = build_graph(std::vector{pub("a", {"b", "c", "d"}), pub("b", {"c"}), pub("c", {}), pub("d", {"a"})});
  std::ostringstream nodes, edges;
  write_nodes_tsv(g, nodes);
  write_edges_tsv(g, edges);
  std::istringstream ni(nodes.str()), ei(edges.str());
  auto h = read_graph_tsv(ni, ei);
  REQUIRE(h.ids() == g.ids());
  auto ge = g.edges(), he = h.edges();
  REQUIRE(ge.size() == he.size());
  for (std::size_t k = 0; k < ge.size(); ++k) {
    CHECK(ge[k].source == he[k].source);
    CHECK(ge[k].target == he[k].target);
    CHECK(ge[k].weight == he[k].weight);
  }
}

TEST_CASE("tsv edge to unknown node is a parse error") {
  std::istringstream ni("id\tnode_size\na\t1\n"), ei("source_id\ttarget_id\tweight\na\tz\t1\n");
  CHECK_THROWS_AS(read_graph_tsv(ni, ei), ParseError);
}

TEST_CASE("undirected construction accumulates self-weight") {
  std::vector<Edge> e = {{0, 1, 1.0}, {1, 0, 2.0}, {1, 1, 0.5}};
  auto s = SymmetricGraph::from_undirected({1.0, 2.0}, e);
  CHECK(s.weight(0, 1) == 3.0);
  CHECK(s.self_weight(1) == 0.5);
  CHECK(s.total_weight() == 3.5);
  CHECK(s.total_size() == 3.0);
}
