// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "topomap/analysis.hpp"
#include "topomap/io_util.hpp"
#include "topomap/labeling.hpp"
#include "topomap/leiden.hpp"
#include "topomap/pipeline.hpp"
#include "topomap/projection.hpp"

namespace fs = std::filesystem;
using namespace topomap;
using namespace testsupport;

namespace {

// Tolerances and sizes.
constexpr double kGainTol = 1e-9;
constexpr double kWeightTol = 1e-12;
constexpr double kNmiTol = 1e-12;
constexpr double kAffinityTol = 1e-9;
constexpr double kDiscardTol = 1e-12;
constexpr double kOptimumTol = 1e-9;
constexpr double kTraceTol = 1e-9;
constexpr double kOptimalShare = 0.95;
constexpr double kOracleSeconds = 60.0;
constexpr double kPaperScaleSeconds = 10.0;
constexpr double kMillionEdgeSeconds = 60.0;

struct Outcome {
  bool pass;
  std::string detail;
};

// Quality traces gathered from every cluster() call in the suite.
std::vector<std::vector<double>> g_traces;

ClusterSolution run_cluster(const SymmetricGraph& g, CpmParams p) {
  auto sol = cluster(g, p);
  for (const auto& s : sol.starts) g_traces.push_back(s.quality_trace);
  return sol;
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome connectivity() {
  Rng rng(1001);
  int graphs = 0, violations = 0, clusters = 0;
  for (int i = 0; i < 120; ++i) {
    const int n = 50 + static_cast<int>(rng.below(451));
    RawGraph g = (i % 2 == 0) ? erdos_renyi(n, 4.0 / n, rng, i % 4 == 0)
                              : planted_partition(n, 2 + static_cast<int>(rng.below(8)), 12.0 / n, 1.5 / n, rng, i % 3 == 0);
    CpmParams p;
    p.gamma = 0.02 + 0.3 * rng.uniform();
    p.iterations = 10;
    p.random_starts = 3;
    p.seed = static_cast<std::uint64_t>(i);
    auto sol = run_cluster(g.build(), p);
    violations += disconnected_clusters(g, sol.partition.assignment);
    clusters += static_cast<int>(sol.partition.nonempty_count());
    ++graphs;
  }
  return {graphs >= 100 && violations == 0, fmt("%d graphs, %d clusters, %d disconnected", graphs, clusters, violations)};
}

Outcome brute_force_optimality() {
  Rng rng(2002);
  std::vector<RawGraph> suite;
  for (int i = 0; i < 36; ++i) {
    const int n = 4 + static_cast<int>(rng.below(5));
    suite.push_back(i % 3 == 2 ? planted_partition(n, 2, 0.9, 0.2, rng, true) : erdos_renyi(n, 0.3 + 0.4 * rng.uniform(), rng, i % 2 == 1));
  }
  int trials = 0, matched = 0, exceeded = 0;
  double oracle_time = 0.0;
  for (const auto& g : suite) {
    for (double gamma : {0.1, 0.5, 1.0}) {
      const auto t0 = std::chrono::steady_clock::now();
      const Optimum opt = brute_force_cpm(g, gamma);
      oracle_time += seconds(t0);
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        CpmParams p;
        p.gamma = gamma;
        p.random_starts = 10;
        p.iterations = 20;
        p.seed = seed;
        auto sol = run_cluster(g.build(), p);
        const double q = raw_cpm(g, sol.partition.assignment, gamma);
        ++trials;
        if (q > opt.quality + kOptimumTol) ++exceeded;
        if (std::abs(q - opt.quality) <= kOptimumTol) ++matched;
      }
    }
  }
  const double share = static_cast<double>(matched) / trials;
  return {suite.size() >= 30 && share >= kOptimalShare && exceeded == 0 && oracle_time < kOracleSeconds,
          fmt("%zu graphs, %d trials, optimum matched %.4f, exceeded %d, oracle %.2fs", suite.size(), trials, share,
              exceeded, oracle_time)};
}

Outcome resolution() {
  const RawGraph g = two_cliques_bridge();
  bool ok = true;
  std::ostringstream d;
  for (auto [gamma, want] : {std::pair{0.05, 1}, std::pair{0.9, 2}}) {
    const Optimum opt = brute_force_cpm(g, gamma);
    const int opt_clusters = *std::max_element(opt.assignment.begin(), opt.assignment.end()) + 1;
    CpmParams p;
    p.gamma = gamma;
    p.seed = 5;
    auto sol = run_cluster(g.build(), p);
    const int got = static_cast<int>(sol.partition.nonempty_count());
    const double q = raw_cpm(g, sol.partition.assignment, gamma);
    const bool matches_oracle = std::abs(q - opt.quality) <= kOptimumTol && got == opt_clusters;
    ok = ok && got == want && matches_oracle;
    d << fmt("gamma=%g: clusters=%d (want %d), Q=%g, enumeration optimum %d clusters Q=%g; ", gamma, got, want, q,
             opt_clusters, opt.quality);
  }
  // One cluster (Q = 21 - 45g) beats two cliques (Q = 20 - 20g) only for g < 0.04.
  const Optimum low = brute_force_cpm(g, 0.03);
  d << fmt("enumeration at gamma=0.03: %d clusters", *std::max_element(low.assignment.begin(), low.assignment.end()) + 1);
  return {ok, d.str()};
}

Outcome monotone_and_gain() {
  int bad_traces = 0;
  for (const auto& t : g_traces)
    for (std::size_t i = 1; i < t.size(); ++i)
      if (t[i] < t[i - 1] - kTraceTol * std::max(1.0, std::abs(t[i - 1]))) {
        ++bad_traces;
        break;
      }
  Rng rng(4004);
  double worst = 0.0;
  int moves = 0;
  while (moves < 10000) {
    const int n = 5 + static_cast<int>(rng.below(40));
    RawGraph g = erdos_renyi(n, 0.25, rng, true);
    const auto sg = g.build();
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    std::vector<int> a(static_cast<std::size_t>(n));
    for (auto& c : a) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    const Partition part = make_partition(sg, a);
    for (int m = 0; m < 50; ++m, ++moves) {
      const double gamma = 0.01 + rng.uniform();
      const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      const int target = static_cast<int>(rng.below(static_cast<std::uint64_t>(k + 1)));  // k = empty cluster
      const double gain = move_gain(sg, part, v, target, gamma);
      auto moved = a;
      moved[static_cast<std::size_t>(v)] = target;
      const double full = raw_cpm(g, moved, gamma) - raw_cpm(g, a, gamma);
      worst = std::max(worst, std::abs(gain - full));
    }
  }
  return {bad_traces == 0 && worst <= kGainTol,
          fmt("%zu traces, %d decreasing; %d moves, max |gain - recomputed| = %.3g", g_traces.size(), bad_traces, moves, worst)};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb) {
    why = "file lists differ";
    return false;
  }
  for (const auto& rel : fa) {
    std::ifstream x(a / rel, std::ios::binary), y(b / rel, std::ios::binary);
    std::string sx((std::istreambuf_iterator<char>(x)), {}), sy((std::istreambuf_iterator<char>(y)), {});
    if (sx != sy) {
      why = rel.string() + " differs";
      return false;
    }
  }
  why = std::to_string(fa.size()) + " files identical";
  return true;
}

Outcome determinism() {
  const fs::path config = fs::path(TOPOMAP_SOURCE_DIR) / "data" / "synthetic" / "config.json";
  RunConfig cfg = load_config_file(config);
  cfg.cpm.seed = 42;
  const fs::path root = fs::temp_directory_path() / "topomap_acceptance_determinism";
  fs::remove_all(root);
  run_pipeline(cfg, root / "a");
  run_pipeline(cfg, root / "b");
  std::string why;
  const bool ok = same_tree(root / "a", root / "b", why);
  fs::remove_all(root);
  return {ok, why};
}

Outcome weighting() {
  const fs::path pubs = fs::path(TOPOMAP_SOURCE_DIR) / "data" / "synthetic" / "publications.jsonl";
  auto in = io::open_input(pubs);
  auto ingest = ingest_corpus(in, CorpusFormat::jsonl);
  auto kept = filter_corpus(ingest.records, CorpusFilter{}).kept;
  auto g = build_graph(kept, Weighting::normalized_out);
  double worst = 0.0;
  std::size_t citing = 0;
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    auto ws = g.out_weights(static_cast<int>(v));
    if (ws.empty()) continue;
    ++citing;
    double s = 0.0;
    for (double w : ws) s += w;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return {citing > 0 && worst <= kWeightTol, fmt("%zu citing nodes, max |sum - 1| = %.3g", citing, worst)};
}

Outcome nmi_oracle() {
  Rng rng(7007);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Contingency t;
    const std::uint64_t scale = i % 10 == 0 ? 5 : 1000;
    t.n11 = static_cast<std::int64_t>(rng.below(scale));
    t.n10 = static_cast<std::int64_t>(rng.below(scale));
    t.n01 = static_cast<std::int64_t>(rng.below(scale));
    t.n00 = static_cast<std::int64_t>(rng.below(scale));
    if (t.total() == 0) t.n00 = 1;
    const auto norm = i % 2 ? NmiNormalization::min : NmiNormalization::sqrt;
    const double got = nmi_score(t, norm).nmi;
    const double want = direct_nmi(t.n11, t.n10, t.n01, t.n00, norm == NmiNormalization::min);
    worst = std::max(worst, std::abs(got - want));
  }
  const double perfect = nmi_score({.n11 = 20, .n10 = 0, .n01 = 0, .n00 = 80}).nmi;
  const double independent = nmi_score({.n11 = 10, .n10 = 40, .n01 = 10, .n00 = 40}).nmi;
  return {worst <= kNmiTol && perfect == 1.0 && independent == 0.0,
          fmt("max |nmi - oracle| = %.3g over 10000 tables; perfect marker %g; independence %g", worst, perfect, independent)};
}

Outcome affinity() {
  Rng rng(8008);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 30 + static_cast<int>(rng.below(120));
    const int k = 2 + static_cast<int>(rng.below(9));
    std::vector<std::string> ids;
    for (int v = 0; v < n; ++v) ids.push_back("d" + std::to_string(v));
    std::vector<Edge> edges;
    for (int v = 0; v < n; ++v)
      for (int r = 0; r < 4; ++r) {
        const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        if (t != v) edges.push_back({v, t, 0.1 + rng.uniform()});
      }
    auto g = CitationGraph::from_edges(ids, std::vector<std::int64_t>(static_cast<std::size_t>(n), 1), edges);
    std::vector<int> a(static_cast<std::size_t>(n));
    for (auto& c : a) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    auto net = affinity_network(g, a);
    if (net.no_inter_cluster_weight) continue;
    // Observed inter-cluster flow, recomputed from the edge list.
    std::vector<double> obs(static_cast<std::size_t>(k * k), 0.0);
    for (const auto& e : g.edges()) {
      const int ca = a[static_cast<std::size_t>(e.source)], cb = a[static_cast<std::size_t>(e.target)];
      if (ca != cb) obs[static_cast<std::size_t>(ca * k + cb)] += e.weight;
    }
    double sum_expected = 0.0, sum_observed = 0.0;
    for (const auto& node : net.nodes) {
      double row = 0.0;
      for (const auto& other : net.nodes) row += net.expected(node.cluster, other.cluster);
      double out = 0.0;
      for (int b = 0; b < k; ++b) out += obs[static_cast<std::size_t>(node.cluster * k + b)];
      worst = std::max(worst, std::abs(row - out));
      sum_expected += row;
      sum_observed += out;
    }
    worst = std::max(worst, std::abs(sum_expected - sum_observed));
  }
  // out_A = 4, in_B = 3, W = 6; observed A->B = 3.
  const std::vector<double> flows = {0, 3, 1, 0, 0, 2, 0, 0, 0};
  const std::vector<std::int64_t> sizes = {10, 10, 10};
  auto hand = affinity_from_flows(flows, sizes);
  bool hand_ok = false;
  for (const auto& e : hand.edges)
    if (e.source == 0 && e.target == 1) hand_ok = e.expected == 2.0 && e.affinity == 1.5;
  return {worst <= kAffinityTol && hand_ok,
          fmt("max marginal deviation %.3g over 100 graphs; hand example %s", worst, hand_ok ? "expected 2, affinity 1.5" : "mismatch")};
}

Outcome flow_and_coverage() {
  const Membership a = {{"d1", 0}, {"d2", 0}, {"d3", 1}, {"d4", 1}, {"d5", 1}, {"d6", -1}};
  const Membership b = {{"d1", 7}, {"d2", 8}, {"d3", 8}, {"d4", 8}, {"d6", 7}, {"d7", 7}};
  auto f = flow_matrix(a, b);
  // Rows {0, 1}, columns {7, 8}: intersections {d1}, {d2}, {}, {d3, d4}.
  const bool flow_ok = f.row_clusters == std::vector<int>{0, 1} && f.col_clusters == std::vector<int>{7, 8} &&
                       f.cell(0, 0) == 1 && f.cell(0, 1) == 1 && f.cell(1, 0) == 0 && f.cell(1, 1) == 2 &&
                       f.unassigned_col(1) == 1 && f.unassigned_row(0) == 2 && f.shared_total() == 4;
  const std::vector<std::int64_t> sizes = {50, 30, 15, 5};
  const auto k = smallest_k(sizes, 100, 0.9);
  const bool cov_ok = k && *k == 3;
  const bool cat_ok = categorize_microfield(0.527) == MicrofieldCategory::core &&
                      categorize_microfield(0.34) == MicrofieldCategory::boundary &&
                      categorize_microfield(0.05) == MicrofieldCategory::boundary_crossing;
  return {flow_ok && cov_ok && cat_ok, fmt("flow fixture %s; smallest_k = %s; categories %s", flow_ok ? "ok" : "mismatch",
                                           k ? std::to_string(*k).c_str() : "none", cat_ok ? "ok" : "mismatch")};
}

// Directed citation graph with out-weights normalized per citing node.
CitationGraph citation_graph(const RawGraph& g) {
  std::vector<std::string> ids(static_cast<std::size_t>(g.n));
  for (int v = 0; v < g.n; ++v) ids[static_cast<std::size_t>(v)] = "p" + std::to_string(v);
  std::vector<int> outdeg(static_cast<std::size_t>(g.n), 0);
  for (const auto& e : g.edges) ++outdeg[static_cast<std::size_t>(e.target)];  // newer node cites older
  std::vector<Edge> edges;
  edges.reserve(g.edges.size());
  for (const auto& e : g.edges) edges.push_back({e.target, e.source, 1.0 / outdeg[static_cast<std::size_t>(e.target)]});
  return CitationGraph::from_edges(ids, std::vector<std::int64_t>(static_cast<std::size_t>(g.n), 1), edges);
}

Outcome performance() {
  Rng rng(10010);
  const RawGraph paper = sparse_planted(25680, 229572, 60, 0.8, rng);
  const auto cg = citation_graph(paper);
  CpmParams p;
  p.gamma = 8e-5;
  p.min_cluster_size = 350;
  p.random_starts = 10;
  p.iterations = 100;
  p.seed = 42;
  auto t0 = std::chrono::steady_clock::now();
  auto sol = cluster(cg, p);
  const double t_paper = seconds(t0);

  const RawGraph big = sparse_planted(200000, 1000000, 400, 0.8, rng);
  const auto big_cg = citation_graph(big);
  p.random_starts = 1;
  p.gamma = 1e-5;
  p.min_cluster_size = 1;
  t0 = std::chrono::steady_clock::now();
  auto big_sol = cluster(big_cg, p);
  const double t_big = seconds(t0);
  return {t_paper < kPaperScaleSeconds && t_big < kMillionEdgeSeconds,
          fmt("%zu nodes/%zu edges, 10x100: %.2fs (%d retained clusters, %d iterations best start); %zu edges, 1 start: %.2fs (%zu clusters)",
              cg.node_count(), cg.edge_count(), t_paper, sol.retained_clusters, sol.starts[static_cast<std::size_t>(sol.best_start)].iterations_run,
              big_cg.edge_count(), t_big, big_sol.partition.nonempty_count())};
}

Outcome discard() {
  // Four 23-node cliques and two 4-node cliques; min size 10 discards 8 of 100.
  RawGraph g{0, {}};
  for (int size : {23, 23, 23, 23, 4, 4}) {
    const int base = g.n;
    for (int u = 0; u < size; ++u)
      for (int v = u + 1; v < size; ++v) g.edges.push_back({base + u, base + v, 1.0});
    g.n += size;
  }
  CpmParams p;
  p.gamma = 0.5;
  p.min_cluster_size = 10;
  p.seed = 11;
  auto sol = run_cluster(g.build(), p);
  return {std::abs(sol.discarded_share - 0.08) <= kDiscardTol && sol.retained_clusters == 4,
          fmt("discarded_share = %.17g, retained clusters %d, discarded nodes %zu", sol.discarded_share,
              sol.retained_clusters, sol.discarded_nodes.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 connectivity guarantee", connectivity},
      {"2 brute-force CPM optimality", brute_force_optimality},
      {"3 resolution behavior (two cliques)", resolution},
      {"4 quality monotonicity and move_gain", monotone_and_gain},
      {"5 pipeline determinism", determinism},
      {"6 normalized_out weighting", weighting},
      {"7 NMI labelling oracle", nmi_oracle},
      {"8 affinity null model", affinity},
      {"9 flow, coverage and categories", flow_and_coverage},
      {"10 performance at scale", performance},
      {"11 discard accounting", discard},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << fmt(" [%.2fs]", seconds(t0)) << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
