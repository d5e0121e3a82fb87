#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "topomap/graph.hpp"
#include "topomap/rng.hpp"

namespace testsupport {

using topomap::Edge;
using topomap::Rng;
using topomap::SymmetricGraph;

// Edge list plus node count, kept alongside SymmetricGraph so oracles can
// compute from the raw description.
struct RawGraph {
  int n = 0;
  std::vector<Edge> edges;  // undirected, u < v, no duplicates
  SymmetricGraph build() const { return SymmetricGraph::from_undirected(std::vector<double>(static_cast<std::size_t>(n), 1.0), edges); }
};

inline RawGraph erdos_renyi(int n, double p, Rng& rng, bool weighted = false) {
  RawGraph g{n, {}};
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) g.edges.push_back({u, v, weighted ? 0.1 + rng.uniform() : 1.0});
  return g;
}

inline RawGraph planted_partition(int n, int groups, double p_in, double p_out, Rng& rng, bool weighted = false) {
  RawGraph g{n, {}};
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      const double p = (u % groups == v % groups) ? p_in : p_out;
      if (rng.uniform() < p) g.edges.push_back({u, v, weighted ? 0.1 + rng.uniform() : 1.0});
    }
  return g;
}

// Sparse planted graph with an exact number of distinct edges; O(m) memory.
inline RawGraph sparse_planted(int n, std::size_t m, int groups, double p_in, Rng& rng) {
  RawGraph g{n, {}};
  std::set<std::uint64_t> seen;
  const int per = n / groups;
  while (g.edges.size() < m) {
    int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int v;
    if (rng.uniform() < p_in) {
      const int base = (u / per) * per;
      const int span = std::min(per, n - base);
      v = base + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
    } else {
      v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    }
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    const std::uint64_t key = static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(v);
    if (!seen.insert(key).second) continue;
    g.edges.push_back({u, v, 0.05 + rng.uniform()});
  }
  return g;
}

inline RawGraph two_cliques_bridge() {
  RawGraph g{10, {}};
  for (int base : {0, 5})
    for (int u = 0; u < 5; ++u)
      for (int v = u + 1; v < 5; ++v) g.edges.push_back({base + u, base + v, 1.0});
  g.edges.push_back({4, 5, 1.0});
  return g;
}

// CPM quality from the raw edge list with unit node sizes.
inline double raw_cpm(const RawGraph& g, const std::vector<int>& a, double gamma) {
  double internal = 0.0;
  for (const auto& e : g.edges)
    if (a[static_cast<std::size_t>(e.source)] == a[static_cast<std::size_t>(e.target)]) internal += e.weight;
  std::map<int, double> sizes;
  for (int c : a) sizes[c] += 1.0;
  double penalty = 0.0;
  for (const auto& [c, s] : sizes) penalty += s * (s - 1.0) / 2.0;
  return internal - gamma * penalty;
}

struct Optimum {
  double quality = 0.0;
  std::vector<int> assignment;
  std::size_t partitions = 0;
};

// Exhaustive CPM optimum over all set partitions (restricted growth strings).
inline Optimum brute_force_cpm(const RawGraph& g, double gamma) {
  const int n = g.n;
  std::vector<int> a(static_cast<std::size_t>(n), 0), maxv(static_cast<std::size_t>(n), 0);
  Optimum best;
  best.quality = -INFINITY;
  while (true) {
    ++best.partitions;
    const double q = raw_cpm(g, a, gamma);
    if (q > best.quality) {
      best.quality = q;
      best.assignment = a;
    }
    int i = n - 1;
    while (i > 0 && a[static_cast<std::size_t>(i)] == maxv[static_cast<std::size_t>(i - 1)] + 1) --i;
    if (i <= 0) break;
    ++a[static_cast<std::size_t>(i)];
    for (int j = i; j < n; ++j) {
      if (j > i) a[static_cast<std::size_t>(j)] = 0;
      maxv[static_cast<std::size_t>(j)] = std::max(maxv[static_cast<std::size_t>(j - 1)], a[static_cast<std::size_t>(j)]);
    }
  }
  return best;
}

// Connectivity of each cluster by BFS over the raw edge list.
inline int disconnected_clusters(const RawGraph& g, const std::vector<int>& a) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.n));
  for (const auto& e : g.edges) {
    adj[static_cast<std::size_t>(e.source)].push_back(e.target);
    adj[static_cast<std::size_t>(e.target)].push_back(e.source);
  }
  std::map<int, std::vector<int>> members;
  for (int v = 0; v < g.n; ++v) members[a[static_cast<std::size_t>(v)]].push_back(v);
  int bad = 0;
  for (const auto& [c, vs] : members) {
    std::set<int> seen{vs.front()};
    std::vector<int> stack{vs.front()};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int w : adj[static_cast<std::size_t>(u)])
        if (a[static_cast<std::size_t>(w)] == c && seen.insert(w).second) stack.push_back(w);
    }
    if (seen.size() != vs.size()) ++bad;
  }
  return bad;
}

inline double entropy2(std::initializer_list<double> ps) {
  double h = 0.0;
  for (double p : ps)
    if (p > 0) h -= p * std::log2(p);
  return h;
}

// NMI of a 2x2 table from joint and marginal probabilities.
inline double direct_nmi(double n11, double n10, double n01, double n00, bool min_norm = false) {
  const double n = n11 + n10 + n01 + n00;
  const double joint[2][2] = {{n11 / n, n10 / n}, {n01 / n, n00 / n}};  // [cluster][label]
  const double pc[2] = {joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]};
  const double pt[2] = {joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]};
  double mi = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (joint[i][j] > 0) mi += joint[i][j] * std::log2(joint[i][j] / (pc[i] * pt[j]));
  const double hc = entropy2({pc[0], pc[1]}), ht = entropy2({pt[0], pt[1]});
  if (hc <= 0 || ht <= 0) return 0.0;
  return mi / (min_norm ? std::min(hc, ht) : std::sqrt(hc * ht));
}

// Adjusted Rand index by counting agreeing pairs directly.
inline double pair_count_ari(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double both = 0, in_a = 0, in_b = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      both += sa && sb;
      in_a += sa;
      in_b += sb;
      pairs += 1;
    }
  const double expected = in_a * in_b / pairs;
  const double max_index = (in_a + in_b) / 2.0;
  if (max_index == expected) return 1.0;
  return (both - expected) / (max_index - expected);
}

}  // namespace testsupport
