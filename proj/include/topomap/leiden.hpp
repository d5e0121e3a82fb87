#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topomap/graph.hpp"
#include "topomap/rng.hpp"

namespace topomap {

// How the iteration budget and the random starts combine.
//  independent_starts: each start runs up to `iterations` Leiden iterations
//    from singletons; the best final partition wins.
//  starts_per_iteration: every iteration runs all starts from the current
//    best partition and keeps the best result.
enum class StartNesting { independent_starts, starts_per_iteration };

StartNesting parse_start_nesting(std::string_view text);
std::string to_string(StartNesting nesting);

struct CpmParams {
  double gamma = 8e-5;
  int iterations = 100;
  int random_starts = 10;
  std::uint64_t seed = 0;
  double theta = 0.01;
  std::int64_t min_cluster_size = 1;
  StartNesting nesting = StartNesting::independent_starts;
  // Worker threads for the random starts; 0 = hardware concurrency.
  int threads = 0;

  // Throws std::invalid_argument on gamma <= 0, theta < 0 or nonpositive counts.
  void validate() const;
};

struct CpmPreset {
  const char* name;
  double gamma;
  std::int64_t min_cluster_size;
};

// Coarse and fine resolution presets. The values are plausible scales for a
// corpus of a few ten thousand publications, not calibrated constants.
std::span<const CpmPreset> cpm_presets();
const CpmPreset& find_cpm_preset(std::string_view name);

// Cluster assignment over the nodes of a SymmetricGraph. Cluster ids need not
// be dense; cluster_sizes is indexed by id and holds summed node sizes.
struct Partition {
  std::vector<int> assignment;
  std::vector<double> cluster_sizes;
  double quality = 0.0;

  int cluster_of(int v) const { return assignment[static_cast<std::size_t>(v)]; }
  double size_of(int c) const {
    return static_cast<std::size_t>(c) < cluster_sizes.size() ? cluster_sizes[static_cast<std::size_t>(c)] : 0.0;
  }
  std::size_t nonempty_count() const;
};

Partition singleton_partition(const SymmetricGraph& graph);
// Validates ids (nonnegative, one per node) and computes cluster sizes.
Partition make_partition(const SymmetricGraph& graph, std::vector<int> assignment);
// Dense ids ordered by descending size; ties by smallest member index.
Partition renumber_by_size(const SymmetricGraph& graph, const Partition& partition);

// Sum over clusters of [w_c - gamma * S_c (S_c - 1) / 2]. Throws
// std::invalid_argument when a node is unassigned.
double cpm_quality(const SymmetricGraph& graph, std::span<const int> assignment, double gamma);

// Change in CPM quality when v moves from its cluster into `target`. A target
// id with no members (or beyond cluster_sizes) is an empty cluster.
double move_gain(const SymmetricGraph& graph, const Partition& partition, int v, int target, double gamma);

// Queue-based local moving. Nodes move only on strictly positive gain; ties
// resolve to the lowest cluster id.
Partition local_move_phase(const SymmetricGraph& graph, Partition partition, double gamma, Rng& rng);

// Refinement of `partition` starting from singletons; merges stay inside the
// enclosing cluster and are sampled with probability ~ exp(gain / theta).
Partition refine_phase(const SymmetricGraph& graph, const Partition& partition, double gamma, double theta, Rng& rng);

struct Aggregation {
  SymmetricGraph graph;
  // Aggregated-node assignment to the clusters of the unrefined partition.
  Partition initial;
  // Refined cluster id -> aggregated node index (-1 for unused ids).
  std::vector<int> node_of_cluster;
};

// Collapses each refined cluster into one node. Throws std::invalid_argument
// when `refined` is not a refinement of `partition`.
Aggregation aggregate(const SymmetricGraph& graph, const Partition& refined, const Partition& partition);

struct ConnectivityReport {
  bool connected = true;
  std::vector<int> offending_clusters;
};

// Checks that every cluster with id < cluster_limit (all when negative)
// induces a connected subgraph.
ConnectivityReport connectivity_check(const SymmetricGraph& graph, const Partition& partition, int cluster_limit = -1);

struct StartRecord {
  std::uint64_t seed = 0;
  double final_quality = 0.0;
  int iterations_run = 0;
  // Quality before the first iteration followed by the quality after each one.
  std::vector<double> quality_trace;
};

struct ClusterSolution {
  // Full partition, ids dense and ordered by descending size. Clusters
  // [0, retained_clusters) are kept; the rest fall below min_cluster_size.
  Partition partition;
  int retained_clusters = 0;
  std::vector<int> discarded_nodes;
  double discarded_share = 0.0;
  CpmParams params;
  std::vector<StartRecord> starts;
  int best_start = 0;

  const std::vector<double>& run_log() const { return starts[static_cast<std::size_t>(best_start)].quality_trace; }
  bool is_discarded(int v) const { return partition.cluster_of(v) >= retained_clusters; }
  // Retained cluster id or -1 for discarded nodes.
  int retained_cluster_of(int v) const { return is_discarded(v) ? -1 : partition.cluster_of(v); }
};

// One Leiden iteration (local move, refine, aggregate until stable) starting
// from `start` on the base graph.
Partition leiden_iteration(const SymmetricGraph& graph, const Partition& start, double gamma, double theta, Rng& rng);

ClusterSolution cluster(const SymmetricGraph& graph, const CpmParams& params);
ClusterSolution cluster(const CitationGraph& graph, const CpmParams& params);

}  // namespace topomap
