#include "topomap/leiden.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <thread>

namespace topomap {

namespace {

// Gains at or below this are treated as zero by local moving, which keeps
// rounding noise from cycling a node between equivalent clusters.
constexpr double kMinGain = 1e-10;

// Refinement attempts per level before giving up on a level that does not shrink.
constexpr int kRefineAttempts = 8;

constexpr CpmPreset kPresets[] = {
    {"coarse", 2e-5, 400},
    {"fine", 8e-5, 350},
};

std::size_t id_bound(const SymmetricGraph& graph, std::span<const int> assignment) {
  std::size_t bound = static_cast<std::size_t>(graph.node_count());
  for (int c : assignment) bound = std::max(bound, static_cast<std::size_t>(c) + 1);
  return bound;
}

void check_assignment(const SymmetricGraph& graph, std::span<const int> assignment) {
  if (assignment.size() != static_cast<std::size_t>(graph.node_count()))
    throw std::invalid_argument("partition does not cover every node");
  for (int c : assignment)
    if (c < 0) throw std::invalid_argument("partition leaves a node unassigned");
}

// Relabels by first appearance so two assignments can be compared as partitions.
std::vector<int> canonical(std::span<const int> assignment) {
  const int max_id = assignment.empty() ? -1 : *std::max_element(assignment.begin(), assignment.end());
  std::vector<int> label(static_cast<std::size_t>(max_id + 1), -1);
  std::vector<int> out(assignment.size());
  int next = 0;
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    auto& l = label[static_cast<std::size_t>(assignment[v])];
    if (l < 0) l = next++;
    out[v] = l;
  }
  return out;
}

}  // namespace

StartNesting parse_start_nesting(std::string_view text) {
  if (text == "independent_starts") return StartNesting::independent_starts;
  if (text == "starts_per_iteration") return StartNesting::starts_per_iteration;
  throw std::invalid_argument("unknown start nesting '" + std::string(text) + "'");
}

std::string to_string(StartNesting nesting) {
  return nesting == StartNesting::independent_starts ? "independent_starts" : "starts_per_iteration";
}

void CpmParams::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(theta >= 0.0)) throw std::invalid_argument("theta must be nonnegative");
  if (iterations < 1) throw std::invalid_argument("iterations must be positive");
  if (random_starts < 1) throw std::invalid_argument("random_starts must be positive");
  if (min_cluster_size < 1) throw std::invalid_argument("min_cluster_size must be positive");
  if (threads < 0) throw std::invalid_argument("threads must be nonnegative");
}

std::span<const CpmPreset> cpm_presets() { return kPresets; }

const CpmPreset& find_cpm_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (name == p.name) return p;
  throw std::invalid_argument("unknown preset '" + std::string(name) + "' (expected coarse|fine)");
}

std::size_t Partition::nonempty_count() const {
  return static_cast<std::size_t>(std::count_if(cluster_sizes.begin(), cluster_sizes.end(), [](double s) { return s > 0.0; }));
}

Partition singleton_partition(const SymmetricGraph& graph) {
  Partition p;
  p.assignment.resize(static_cast<std::size_t>(graph.node_count()));
  std::iota(p.assignment.begin(), p.assignment.end(), 0);
  p.cluster_sizes = graph.node_sizes();
  return p;
}

Partition make_partition(const SymmetricGraph& graph, std::vector<int> assignment) {
  check_assignment(graph, assignment);
  Partition p;
  p.cluster_sizes.assign(id_bound(graph, assignment), 0.0);
  for (std::size_t v = 0; v < assignment.size(); ++v)
    p.cluster_sizes[static_cast<std::size_t>(assignment[v])] += graph.node_size(static_cast<int>(v));
  p.assignment = std::move(assignment);
  return p;
}

Partition renumber_by_size(const SymmetricGraph& graph, const Partition& partition) {
  check_assignment(graph, partition.assignment);
  const std::size_t bound = id_bound(graph, partition.assignment);
  std::vector<double> size(bound, 0.0);
  std::vector<int> first(bound, -1);
  for (int v = 0; v < graph.node_count(); ++v) {
    auto c = static_cast<std::size_t>(partition.cluster_of(v));
    size[c] += graph.node_size(v);
    if (first[c] < 0) first[c] = v;
  }
  std::vector<int> ids;
  for (std::size_t c = 0; c < bound; ++c)
    if (first[c] >= 0) ids.push_back(static_cast<int>(c));
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    auto au = static_cast<std::size_t>(a), bu = static_cast<std::size_t>(b);
    if (size[au] != size[bu]) return size[au] > size[bu];
    return first[au] < first[bu];
  });
  std::vector<int> remap(bound, -1);
  for (std::size_t k = 0; k < ids.size(); ++k) remap[static_cast<std::size_t>(ids[k])] = static_cast<int>(k);

  Partition out;
  out.assignment.resize(partition.assignment.size());
  for (std::size_t v = 0; v < out.assignment.size(); ++v)
    out.assignment[v] = remap[static_cast<std::size_t>(partition.assignment[v])];
  out.cluster_sizes.resize(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) out.cluster_sizes[k] = size[static_cast<std::size_t>(ids[k])];
  out.quality = partition.quality;
  return out;
}

double cpm_quality(const SymmetricGraph& graph, std::span<const int> assignment, double gamma) {
  check_assignment(graph, assignment);
  const std::size_t bound = id_bound(graph, assignment);
  std::vector<double> internal(bound, 0.0);
  std::vector<double> size(bound, 0.0);
  for (int v = 0; v < graph.node_count(); ++v) {
    auto c = static_cast<std::size_t>(assignment[static_cast<std::size_t>(v)]);
    size[c] += graph.node_size(v);
    internal[c] += graph.self_weight(v);
    auto ns = graph.neighbors(v);
    auto ws = graph.weights(v);
    for (std::size_t k = 0; k < ns.size(); ++k) {
      if (ns[k] > v && assignment[static_cast<std::size_t>(ns[k])] == static_cast<int>(c)) internal[c] += ws[k];
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < bound; ++c) q += internal[c] - gamma * size[c] * (size[c] - 1.0) / 2.0;
  return q;
}

double move_gain(const SymmetricGraph& graph, const Partition& partition, int v, int target, double gamma) {
  const int current = partition.cluster_of(v);
  if (target == current) return 0.0;
  double w_target = 0.0, w_current = 0.0;
  auto ns = graph.neighbors(v);
  auto ws = graph.weights(v);
  for (std::size_t k = 0; k < ns.size(); ++k) {
    int c = partition.cluster_of(ns[k]);
    if (c == target) w_target += ws[k];
    else if (c == current) w_current += ws[k];
  }
  const double sv = graph.node_size(v);
  const double join = w_target - gamma * sv * partition.size_of(target);
  const double leave = w_current - gamma * sv * (partition.size_of(current) - sv);
  return join - leave;
}

namespace {

// Dense per-cluster accumulator reused across nodes.
class NeighborWeights {
 public:
  explicit NeighborWeights(std::size_t bound) : weight_(bound, 0.0), seen_(bound, 0) {}

  void add(int c, double w) {
    auto cu = static_cast<std::size_t>(c);
    if (!seen_[cu]) {
      seen_[cu] = 1;
      touched_.push_back(c);
    }
    weight_[cu] += w;
  }
  double operator[](int c) const { return weight_[static_cast<std::size_t>(c)]; }
  const std::vector<int>& touched() const { return touched_; }
  void clear() {
    for (int c : touched_) {
      weight_[static_cast<std::size_t>(c)] = 0.0;
      seen_[static_cast<std::size_t>(c)] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<double> weight_;
  std::vector<char> seen_;
  std::vector<int> touched_;
};

}  // namespace

Partition local_move_phase(const SymmetricGraph& graph, Partition partition, double gamma, Rng& rng) {
  check_assignment(graph, partition.assignment);
  const int n = graph.node_count();
  const std::size_t bound = id_bound(graph, partition.assignment);
  auto& member = partition.assignment;

  std::vector<double> size(bound, 0.0);
  std::vector<int> count(bound, 0);
  for (int v = 0; v < n; ++v) {
    auto c = static_cast<std::size_t>(member[static_cast<std::size_t>(v)]);
    size[c] += graph.node_size(v);
    ++count[c];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> empty;
  for (std::size_t c = 0; c < bound; ++c)
    if (count[c] == 0) empty.push(static_cast<int>(c));

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  std::deque<int> queue(order.begin(), order.end());
  std::vector<char> queued(static_cast<std::size_t>(n), 1);
  NeighborWeights nw(bound);

  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    queued[static_cast<std::size_t>(v)] = 0;

    const int current = member[static_cast<std::size_t>(v)];
    const auto cur = static_cast<std::size_t>(current);
    const double sv = graph.node_size(v);
    auto ns = graph.neighbors(v);
    auto ws = graph.weights(v);
    for (std::size_t k = 0; k < ns.size(); ++k) nw.add(member[static_cast<std::size_t>(ns[k])], ws[k]);

    const double leave = nw[current] - gamma * sv * (size[cur] - sv);
    int best = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    auto consider = [&](int c, double gain) {
      if (gain > best_gain || (gain == best_gain && c < best)) {
        best = c;
        best_gain = gain;
      }
    };
    for (int c : nw.touched()) {
      if (c == current) continue;
      consider(c, nw[c] - gamma * sv * size[static_cast<std::size_t>(c)] - leave);
    }
    if (count[cur] > 1) consider(empty.top(), -leave);
    nw.clear();

    if (best < 0 || !(best_gain > kMinGain)) continue;

    const auto to = static_cast<std::size_t>(best);
    if (count[to] == 0) empty.pop();
    size[cur] -= sv;
    if (--count[cur] == 0) empty.push(current);
    size[to] += sv;
    ++count[to];
    member[static_cast<std::size_t>(v)] = best;

    for (int u : ns) {
      auto uu = static_cast<std::size_t>(u);
      if (!queued[uu] && member[uu] != best) {
        queued[uu] = 1;
        queue.push_back(u);
      }
    }
  }

  for (std::size_t c = 0; c < bound; ++c)
    if (count[c] == 0) size[c] = 0.0;
  partition.cluster_sizes = std::move(size);
  return partition;
}

Partition refine_phase(const SymmetricGraph& graph, const Partition& partition, double gamma, double theta, Rng& rng) {
  check_assignment(graph, partition.assignment);
  const int n = graph.node_count();
  const auto& outer = partition.assignment;

  std::vector<double> outer_size(id_bound(graph, outer), 0.0);
  for (int v = 0; v < n; ++v) outer_size[static_cast<std::size_t>(outer[static_cast<std::size_t>(v)])] += graph.node_size(v);

  std::vector<int> ref(static_cast<std::size_t>(n));
  std::iota(ref.begin(), ref.end(), 0);
  std::vector<double> size = graph.node_sizes();
  std::vector<int> count(static_cast<std::size_t>(n), 1);
  // Weight from each node (later each refined cluster) to the rest of its outer cluster.
  std::vector<double> external(static_cast<std::size_t>(n), 0.0);
  for (int v = 0; v < n; ++v) {
    auto ns = graph.neighbors(v);
    auto ws = graph.weights(v);
    for (std::size_t k = 0; k < ns.size(); ++k)
      if (outer[static_cast<std::size_t>(ns[k])] == outer[static_cast<std::size_t>(v)])
        external[static_cast<std::size_t>(v)] += ws[k];
  }
  const std::vector<double> node_external = external;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));

  NeighborWeights nw(static_cast<std::size_t>(n));
  std::vector<int> candidates;
  std::vector<double> gains;

  for (int v : order) {
    const auto vu = static_cast<std::size_t>(v);
    const int own = ref[vu];
    if (count[static_cast<std::size_t>(own)] != 1) continue;
    const double sv = graph.node_size(v);
    const double outer_total = outer_size[static_cast<std::size_t>(outer[vu])];
    if (node_external[vu] < gamma * sv * (outer_total - sv)) continue;

    auto ns = graph.neighbors(v);
    auto ws = graph.weights(v);
    for (std::size_t k = 0; k < ns.size(); ++k) {
      auto u = static_cast<std::size_t>(ns[k]);
      if (outer[u] == outer[vu]) nw.add(ref[u], ws[k]);
    }

    candidates.assign(1, own);
    gains.assign(1, 0.0);
    std::vector<int> touched = nw.touched();
    std::sort(touched.begin(), touched.end());
    for (int c : touched) {
      if (c == own) continue;
      auto cu = static_cast<std::size_t>(c);
      if (external[cu] < gamma * size[cu] * (outer_total - size[cu])) continue;
      double gain = nw[c] - gamma * sv * size[cu];
      if (gain < 0.0) continue;
      candidates.push_back(c);
      gains.push_back(gain);
    }

    int chosen = own;
    if (candidates.size() > 1) {
      const double gmax = *std::max_element(gains.begin(), gains.end());
      if (theta > 0.0) {
        double total = 0.0;
        for (double& g : gains) {
          g = std::exp((g - gmax) / theta);
          total += g;
        }
        double r = rng.uniform() * total;
        chosen = candidates.back();
        for (std::size_t k = 0; k < candidates.size(); ++k) {
          if (r < gains[k]) {
            chosen = candidates[k];
            break;
          }
          r -= gains[k];
        }
      } else {
        std::vector<int> top;
        for (std::size_t k = 0; k < candidates.size(); ++k)
          if (gains[k] == gmax) top.push_back(candidates[k]);
        chosen = top[static_cast<std::size_t>(rng.below(top.size()))];
      }
    }

    if (chosen != own) {
      auto cu = static_cast<std::size_t>(chosen);
      external[cu] += external[static_cast<std::size_t>(own)] - 2.0 * nw[chosen];
      size[cu] += sv;
      ++count[cu];
      size[static_cast<std::size_t>(own)] = 0.0;
      count[static_cast<std::size_t>(own)] = 0;
      ref[vu] = chosen;
    }
    nw.clear();
  }

  Partition out;
  out.assignment = std::move(ref);
  out.cluster_sizes = std::move(size);
  return out;
}

Aggregation aggregate(const SymmetricGraph& graph, const Partition& refined, const Partition& partition) {
  check_assignment(graph, refined.assignment);
  check_assignment(graph, partition.assignment);
  const int n = graph.node_count();

  const std::size_t rbound = id_bound(graph, refined.assignment);
  std::vector<int> outer_of(rbound, -1);
  for (int v = 0; v < n; ++v) {
    auto r = static_cast<std::size_t>(refined.cluster_of(v));
    int p = partition.cluster_of(v);
    if (outer_of[r] < 0) outer_of[r] = p;
    else if (outer_of[r] != p) throw std::invalid_argument("refined partition is not a refinement of the partition");
  }

  Aggregation agg;
  agg.node_of_cluster.assign(rbound, -1);
  int m = 0;
  for (std::size_t r = 0; r < rbound; ++r)
    if (outer_of[r] >= 0) agg.node_of_cluster[r] = m++;

  std::vector<int> agg_of(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> members(static_cast<std::size_t>(m));
  std::vector<double> sizes(static_cast<std::size_t>(m), 0.0), self(static_cast<std::size_t>(m), 0.0);
  for (int v = 0; v < n; ++v) {
    int a = agg.node_of_cluster[static_cast<std::size_t>(refined.cluster_of(v))];
    agg_of[static_cast<std::size_t>(v)] = a;
    members[static_cast<std::size_t>(a)].push_back(v);
    sizes[static_cast<std::size_t>(a)] += graph.node_size(v);
    self[static_cast<std::size_t>(a)] += graph.self_weight(v);
  }

  std::vector<std::size_t> offsets(static_cast<std::size_t>(m) + 1, 0);
  std::vector<int> nbrs;
  std::vector<double> wts;
  NeighborWeights nw(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    for (int v : members[static_cast<std::size_t>(a)]) {
      auto ns = graph.neighbors(v);
      auto ws = graph.weights(v);
      for (std::size_t k = 0; k < ns.size(); ++k) {
        int b = agg_of[static_cast<std::size_t>(ns[k])];
        if (b == a) {
          if (ns[k] > v) self[static_cast<std::size_t>(a)] += ws[k];
        } else {
          nw.add(b, ws[k]);
        }
      }
    }
    std::vector<int> touched = nw.touched();
    std::sort(touched.begin(), touched.end());
    for (int b : touched) {
      nbrs.push_back(b);
      wts.push_back(nw[b]);
    }
    offsets[static_cast<std::size_t>(a) + 1] = nbrs.size();
    nw.clear();
  }
  agg.graph = SymmetricGraph::from_csr(std::move(sizes), std::move(self), std::move(offsets), std::move(nbrs),
                                       std::move(wts));

  // Outer cluster ids made dense, preserving their relative order.
  std::vector<int> outer_ids;
  for (std::size_t r = 0; r < rbound; ++r)
    if (outer_of[r] >= 0) outer_ids.push_back(outer_of[r]);
  std::sort(outer_ids.begin(), outer_ids.end());
  outer_ids.erase(std::unique(outer_ids.begin(), outer_ids.end()), outer_ids.end());
  std::vector<int> initial(static_cast<std::size_t>(m));
  for (std::size_t r = 0; r < rbound; ++r) {
    if (outer_of[r] < 0) continue;
    auto pos = std::lower_bound(outer_ids.begin(), outer_ids.end(), outer_of[r]) - outer_ids.begin();
    initial[static_cast<std::size_t>(agg.node_of_cluster[r])] = static_cast<int>(pos);
  }
  agg.initial = make_partition(agg.graph, std::move(initial));
  return agg;
}

ConnectivityReport connectivity_check(const SymmetricGraph& graph, const Partition& partition, int cluster_limit) {
  check_assignment(graph, partition.assignment);
  const int n = graph.node_count();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  };
  for (int v = 0; v < n; ++v) {
    auto ns = graph.neighbors(v);
    auto ws = graph.weights(v);
    for (std::size_t k = 0; k < ns.size(); ++k) {
      if (ns[k] <= v || !(ws[k] > 0.0) || partition.cluster_of(ns[k]) != partition.cluster_of(v)) continue;
      int a = find(v), b = find(ns[k]);
      if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  }
  const std::size_t bound = id_bound(graph, partition.assignment);
  std::vector<int> root(bound, -1);
  std::vector<char> broken(bound, 0);
  for (int v = 0; v < n; ++v) {
    auto c = static_cast<std::size_t>(partition.cluster_of(v));
    int r = find(v);
    if (root[c] < 0) root[c] = r;
    else if (root[c] != r) broken[c] = 1;
  }
  ConnectivityReport report;
  for (std::size_t c = 0; c < bound; ++c) {
    if (!broken[c] || (cluster_limit >= 0 && static_cast<int>(c) >= cluster_limit)) continue;
    report.connected = false;
    report.offending_clusters.push_back(static_cast<int>(c));
  }
  return report;
}

Partition leiden_iteration(const SymmetricGraph& graph, const Partition& start, double gamma, double theta, Rng& rng) {
  const int n = graph.node_count();
  std::vector<int> level_of(static_cast<std::size_t>(n));
  std::iota(level_of.begin(), level_of.end(), 0);

  SymmetricGraph owned;
  const SymmetricGraph* level = &graph;
  Partition current = make_partition(graph, start.assignment);

  while (true) {
    current = local_move_phase(*level, std::move(current), gamma, rng);
    if (current.nonempty_count() == static_cast<std::size_t>(level->node_count())) break;

    Partition refined;
    bool shrinks = false;
    for (int attempt = 0; attempt < kRefineAttempts && !shrinks; ++attempt) {
      refined = refine_phase(*level, current, gamma, theta, rng);
      shrinks = refined.nonempty_count() < static_cast<std::size_t>(level->node_count());
    }
    if (!shrinks) break;

    Aggregation agg = aggregate(*level, refined, current);
    for (auto& l : level_of) l = agg.node_of_cluster[static_cast<std::size_t>(refined.assignment[static_cast<std::size_t>(l)])];
    owned = std::move(agg.graph);
    level = &owned;
    current = std::move(agg.initial);
  }

  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (std::size_t v = 0; v < assignment.size(); ++v) assignment[v] = current.assignment[static_cast<std::size_t>(level_of[v])];
  Partition out = make_partition(graph, std::move(assignment));
  out.quality = cpm_quality(graph, out.assignment, gamma);
  return out;
}

namespace {

// Runs fn(i) for i in [0, count) over a small worker pool. Results are written
// by index, so the outcome does not depend on scheduling.
void run_indexed(int count, int threads, const std::function<void(int)>& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

bool same_partition(const Partition& a, const Partition& b) { return canonical(a.assignment) == canonical(b.assignment); }

}  // namespace

ClusterSolution cluster(const SymmetricGraph& graph, const CpmParams& params) {
  params.validate();
  if (graph.node_count() == 0) throw std::invalid_argument("cannot cluster an empty graph");

  ClusterSolution sol;
  sol.params = params;
  sol.starts.resize(static_cast<std::size_t>(params.random_starts));
  const Partition singletons = [&] {
    Partition p = singleton_partition(graph);
    p.quality = cpm_quality(graph, p.assignment, params.gamma);
    return p;
  }();

  Partition best;
  if (params.nesting == StartNesting::independent_starts) {
    std::vector<Partition> finals(static_cast<std::size_t>(params.random_starts));
    run_indexed(params.random_starts, params.threads, [&](int s) {
      auto& rec = sol.starts[static_cast<std::size_t>(s)];
      rec.seed = params.seed + static_cast<std::uint64_t>(s);
      Rng rng(rec.seed);
      Partition p = singletons;
      rec.quality_trace.push_back(p.quality);
      for (int it = 0; it < params.iterations; ++it) {
        Partition next = leiden_iteration(graph, p, params.gamma, params.theta, rng);
        ++rec.iterations_run;
        rec.quality_trace.push_back(next.quality);
        const bool stable = same_partition(next, p);
        p = std::move(next);
        if (stable) break;
      }
      rec.final_quality = p.quality;
      finals[static_cast<std::size_t>(s)] = std::move(p);
    });
    for (int s = 1; s < params.random_starts; ++s)
      if (sol.starts[static_cast<std::size_t>(s)].final_quality > sol.starts[static_cast<std::size_t>(sol.best_start)].final_quality)
        sol.best_start = s;
    best = std::move(finals[static_cast<std::size_t>(sol.best_start)]);
  } else {
    std::vector<Rng> rngs;
    for (int s = 0; s < params.random_starts; ++s) {
      sol.starts[static_cast<std::size_t>(s)].seed = params.seed + static_cast<std::uint64_t>(s);
      sol.starts[static_cast<std::size_t>(s)].quality_trace.push_back(singletons.quality);
      rngs.emplace_back(params.seed + static_cast<std::uint64_t>(s));
    }
    best = singletons;
    std::vector<Partition> candidates(static_cast<std::size_t>(params.random_starts));
    for (int it = 0; it < params.iterations; ++it) {
      run_indexed(params.random_starts, params.threads, [&](int s) {
        auto su = static_cast<std::size_t>(s);
        candidates[su] = leiden_iteration(graph, best, params.gamma, params.theta, rngs[su]);
        auto& rec = sol.starts[su];
        ++rec.iterations_run;
        rec.quality_trace.push_back(candidates[su].quality);
        rec.final_quality = candidates[su].quality;
      });
      int winner = 0;
      for (int s = 1; s < params.random_starts; ++s)
        if (candidates[static_cast<std::size_t>(s)].quality > candidates[static_cast<std::size_t>(winner)].quality) winner = s;
      sol.best_start = winner;
      const bool stable = same_partition(candidates[static_cast<std::size_t>(winner)], best);
      best = std::move(candidates[static_cast<std::size_t>(winner)]);
      if (stable) break;
    }
  }

  sol.partition = renumber_by_size(graph, best);
  sol.partition.quality = cpm_quality(graph, sol.partition.assignment, params.gamma);

  const auto min_size = static_cast<double>(params.min_cluster_size);
  while (static_cast<std::size_t>(sol.retained_clusters) < sol.partition.cluster_sizes.size() &&
         sol.partition.cluster_sizes[static_cast<std::size_t>(sol.retained_clusters)] >= min_size)
    ++sol.retained_clusters;

  double discarded = 0.0;
  for (int v = 0; v < graph.node_count(); ++v) {
    if (sol.is_discarded(v)) {
      sol.discarded_nodes.push_back(v);
      discarded += graph.node_size(v);
    }
  }
  sol.discarded_share = discarded / graph.total_size();
  return sol;
}

ClusterSolution cluster(const CitationGraph& graph, const CpmParams& params) {
  return cluster(undirected_view(graph), params);
}

}  // namespace topomap
