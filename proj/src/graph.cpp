#include "topomap/graph.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "topomap/errors.hpp"
#include "topomap/io_util.hpp"

namespace topomap {

Weighting parse_weighting(std::string_view text) {
  if (text == "unit") return Weighting::unit;
  if (text == "normalized_out") return Weighting::normalized_out;
  throw std::invalid_argument("unknown weighting '" + std::string(text) + "' (expected unit|normalized_out)");
}

std::string to_string(Weighting w) { return w == Weighting::unit ? "unit" : "normalized_out"; }

CitationGraph CitationGraph::from_edges(std::vector<std::string> ids, std::vector<std::int64_t> node_sizes,
                                        std::vector<Edge> edges) {
  const std::size_t n = ids.size();
  if (node_sizes.empty()) node_sizes.assign(n, 1);
  if (node_sizes.size() != n) throw std::invalid_argument("node_sizes length differs from ids");
  for (auto s : node_sizes)
    if (s <= 0) throw std::invalid_argument("node sizes must be positive");

  CitationGraph g;
  g.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.index_.emplace(ids[i], static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate node id '" + ids[i] + "'");
  }
  for (const auto& e : edges) {
    if (e.source < 0 || e.target < 0 || static_cast<std::size_t>(e.source) >= n ||
        static_cast<std::size_t>(e.target) >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (!(e.weight >= 0.0)) throw std::invalid_argument("edge weights must be nonnegative");
  }
  std::erase_if(edges, [](const Edge& e) { return e.source == e.target; });
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });

  g.ids_ = std::move(ids);
  g.sizes_ = std::move(node_sizes);
  g.offsets_.assign(n + 1, 0);
  g.targets_.reserve(edges.size());
  g.weights_.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (!g.targets_.empty() && k > 0 && edges[k - 1].source == e.source && edges[k - 1].target == e.target) {
      g.weights_.back() += e.weight;
      continue;
    }
    g.targets_.push_back(e.target);
    g.weights_.push_back(e.weight);
    ++g.offsets_[static_cast<std::size_t>(e.source) + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  return g;
}

std::optional<int> CitationGraph::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const int> CitationGraph::out_targets(int v) const {
  auto b = offsets_[static_cast<std::size_t>(v)], e = offsets_[static_cast<std::size_t>(v) + 1];
  return {targets_.data() + b, e - b};
}

std::span<const double> CitationGraph::out_weights(int v) const {
  auto b = offsets_[static_cast<std::size_t>(v)], e = offsets_[static_cast<std::size_t>(v) + 1];
  return {weights_.data() + b, e - b};
}

double CitationGraph::out_weight_sum(int v) const {
  double s = 0.0;
  for (double w : out_weights(v)) s += w;
  return s;
}

std::vector<Edge> CitationGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(targets_.size());
  for (std::size_t v = 0; v < ids_.size(); ++v) {
    for (auto k = offsets_[v]; k < offsets_[v + 1]; ++k)
      out.push_back({static_cast<int>(v), targets_[k], weights_[k]});
  }
  return out;
}

double CitationGraph::total_weight() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

CitationGraph build_graph(std::span<const PublicationRecord> records, Weighting weighting, BuildStats* stats) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  std::unordered_map<std::string, int> index;
  index.reserve(records.size());
  for (const auto& r : records) {
    if (!index.emplace(r.id, static_cast<int>(ids.size())).second)
      throw SchemaError("duplicate publication id '" + r.id + "'");
    ids.push_back(r.id);
  }

  BuildStats local;
  std::vector<Edge> edges;
  std::vector<int> targets;
  for (std::size_t i = 0; i < records.size(); ++i) {
    targets.clear();
    for (const auto& ref : records[i].references) {
      ++local.references_total;
      auto it = index.find(ref);
      if (it == index.end()) {
        ++local.out_of_corpus;
      } else if (it->second == static_cast<int>(i)) {
        ++local.self_references;
      } else {
        targets.push_back(it->second);
      }
    }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    local.resolved += targets.size();
    const double w = weighting == Weighting::unit ? 1.0 : 1.0 / static_cast<double>(targets.size());
    for (int t : targets) edges.push_back({static_cast<int>(i), t, w});
  }
  if (stats) *stats = local;
  return CitationGraph::from_edges(std::move(ids), std::vector<std::int64_t>(records.size(), 1), std::move(edges));
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

std::pair<CitationGraph, ComponentReport> giant_component(const CitationGraph& graph) {
  ComponentReport report;
  const std::size_t n = graph.node_count();
  if (n == 0) return {CitationGraph{}, report};

  DisjointSets sets(n);
  for (std::size_t v = 0; v < n; ++v)
    for (int t : graph.out_targets(static_cast<int>(v))) sets.unite(static_cast<int>(v), t);

  std::vector<std::size_t> comp_size(n, 0);
  std::vector<int> comp_min(n, -1);  // node index holding the smallest id
  for (std::size_t v = 0; v < n; ++v) {
    int r = sets.find(static_cast<int>(v));
    auto ru = static_cast<std::size_t>(r);
    if (comp_size[ru]++ == 0) ++report.component_count;
    if (comp_min[ru] < 0 || graph.id(static_cast<int>(v)) < graph.id(comp_min[ru])) comp_min[ru] = static_cast<int>(v);
  }
  int best = -1;
  for (std::size_t r = 0; r < n; ++r) {
    if (comp_size[r] == 0) continue;
    if (best < 0) {
      best = static_cast<int>(r);
      continue;
    }
    auto bu = static_cast<std::size_t>(best);
    if (comp_size[r] > comp_size[bu] ||
        (comp_size[r] == comp_size[bu] && graph.id(comp_min[r]) < graph.id(comp_min[bu])))
      best = static_cast<int>(r);
  }

  std::vector<int> remap(n, -1);
  std::vector<std::string> ids;
  std::vector<std::int64_t> sizes;
  for (std::size_t v = 0; v < n; ++v) {
    if (sets.find(static_cast<int>(v)) != best) continue;
    remap[v] = static_cast<int>(ids.size());
    ids.push_back(graph.id(static_cast<int>(v)));
    sizes.push_back(graph.node_size(static_cast<int>(v)));
  }
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < n; ++v) {
    if (remap[v] < 0) continue;
    auto ts = graph.out_targets(static_cast<int>(v));
    auto ws = graph.out_weights(static_cast<int>(v));
    for (std::size_t k = 0; k < ts.size(); ++k) edges.push_back({remap[v], remap[static_cast<std::size_t>(ts[k])], ws[k]});
  }
  report.giant_size = ids.size();
  report.dropped_nodes = n - ids.size();
  auto sub = CitationGraph::from_edges(std::move(ids), std::move(sizes), std::move(edges));
  report.giant_edge_count = sub.edge_count();
  return {std::move(sub), report};
}

SymmetricGraph SymmetricGraph::from_citation_graph(const CitationGraph& graph) {
  std::vector<double> sizes(graph.node_sizes().begin(), graph.node_sizes().end());
  auto edges = graph.edges();
  return from_undirected(std::move(sizes), edges);
}

SymmetricGraph SymmetricGraph::from_undirected(std::vector<double> node_sizes, std::span<const Edge> edges,
                                               std::vector<double> self_weights) {
  const std::size_t n = node_sizes.size();
  if (self_weights.empty()) self_weights.assign(n, 0.0);
  if (self_weights.size() != n) throw std::invalid_argument("self_weights length differs from node count");

  struct Half {
    int from;
    int to;
    double w;
  };
  std::vector<Half> halves;
  halves.reserve(2 * edges.size());
  for (const auto& e : edges) {
    if (e.source < 0 || e.target < 0 || static_cast<std::size_t>(e.source) >= n ||
        static_cast<std::size_t>(e.target) >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.source == e.target) {
      self_weights[static_cast<std::size_t>(e.source)] += e.weight;
      continue;
    }
    halves.push_back({e.source, e.target, e.weight});
    halves.push_back({e.target, e.source, e.weight});
  }
  std::sort(halves.begin(), halves.end(),
            [](const Half& a, const Half& b) { return a.from != b.from ? a.from < b.from : a.to < b.to; });

  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<int> nbrs;
  std::vector<double> ws;
  nbrs.reserve(halves.size());
  ws.reserve(halves.size());
  for (std::size_t k = 0; k < halves.size(); ++k) {
    if (k > 0 && halves[k - 1].from == halves[k].from && halves[k - 1].to == halves[k].to) {
      ws.back() += halves[k].w;
      continue;
    }
    nbrs.push_back(halves[k].to);
    ws.push_back(halves[k].w);
    ++offsets[static_cast<std::size_t>(halves[k].from) + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return from_csr(std::move(node_sizes), std::move(self_weights), std::move(offsets), std::move(nbrs), std::move(ws));
}

SymmetricGraph SymmetricGraph::from_csr(std::vector<double> node_sizes, std::vector<double> self_weights,
                                        std::vector<std::size_t> offsets, std::vector<int> neighbors,
                                        std::vector<double> weights) {
  SymmetricGraph g;
  g.sizes_ = std::move(node_sizes);
  g.self_ = std::move(self_weights);
  g.offsets_ = std::move(offsets);
  g.neighbors_ = std::move(neighbors);
  g.weights_ = std::move(weights);
  return g;
}

double SymmetricGraph::weight(int u, int v) const {
  if (u == v) return self_weight(u);
  auto ns = neighbors(u);
  auto it = std::lower_bound(ns.begin(), ns.end(), v);
  if (it == ns.end() || *it != v) return 0.0;
  return weights(u)[static_cast<std::size_t>(it - ns.begin())];
}

double SymmetricGraph::total_size() const { return std::accumulate(sizes_.begin(), sizes_.end(), 0.0); }

double SymmetricGraph::total_weight() const {
  double total = std::accumulate(self_.begin(), self_.end(), 0.0);
  for (int u = 0; u < node_count(); ++u) {
    auto ns = neighbors(u);
    auto ws = weights(u);
    for (std::size_t k = 0; k < ns.size(); ++k)
      if (ns[k] > u) total += ws[k];
  }
  return total;
}

void write_edges_tsv(const CitationGraph& graph, std::ostream& out) {
  out << "source_id\ttarget_id\tweight\n";
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    auto ts = graph.out_targets(static_cast<int>(v));
    auto ws = graph.out_weights(static_cast<int>(v));
    for (std::size_t k = 0; k < ts.size(); ++k)
      out << graph.id(static_cast<int>(v)) << '\t' << graph.id(ts[k]) << '\t' << io::format_double(ws[k]) << '\n';
  }
}

void write_nodes_tsv(const CitationGraph& graph, std::ostream& out) {
  out << "id\tnode_size\n";
  for (std::size_t v = 0; v < graph.node_count(); ++v)
    out << graph.id(static_cast<int>(v)) << '\t' << graph.node_size(static_cast<int>(v)) << '\n';
}

CitationGraph read_graph_tsv(std::istream& nodes, std::istream& edges) {
  std::vector<std::string> ids;
  std::vector<std::int64_t> sizes;
  std::unordered_map<std::string, int> index;
  std::string line;
  std::size_t row = 0;
  while (std::getline(nodes, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (row == 1 && line.rfind("id\t", 0) == 0)) continue;
    auto f = io::split(line, '\t');
    if (f.size() > 2) throw ParseError(row, "node row: expected id, node_size");
    std::string id(io::trim(f[0]));
    if (id.empty()) throw ParseError(row, "node row: empty id");
    std::int64_t size = 1;
    if (f.size() == 2) {
      auto t = io::trim(f[1]);
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), size);
      if (ec != std::errc() || p != t.data() + t.size() || size <= 0)
        throw ParseError(row, "node row: node_size must be a positive integer");
    }
    if (!index.emplace(id, static_cast<int>(ids.size())).second) throw ParseError(row, "duplicate node id '" + id + "'");
    ids.push_back(std::move(id));
    sizes.push_back(size);
  }

  std::vector<Edge> es;
  row = 0;
  while (std::getline(edges, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (row == 1 && line.rfind("source_id\t", 0) == 0)) continue;
    auto f = io::split(line, '\t');
    if (f.size() != 3) throw ParseError(row, "edge row: expected source_id, target_id, weight");
    auto s = index.find(std::string(io::trim(f[0])));
    auto t = index.find(std::string(io::trim(f[1])));
    if (s == index.end() || t == index.end()) throw ParseError(row, "edge row references an unknown node");
    double w = 0.0;
    auto wt = io::trim(f[2]);
    auto [p, ec] = std::from_chars(wt.data(), wt.data() + wt.size(), w);
    if (ec != std::errc() || p != wt.data() + wt.size() || !(w >= 0.0))
      throw ParseError(row, "edge row: weight must be a nonnegative number");
    es.push_back({s->second, t->second, w});
  }
  return CitationGraph::from_edges(std::move(ids), std::move(sizes), std::move(es));
}

}  // namespace topomap
