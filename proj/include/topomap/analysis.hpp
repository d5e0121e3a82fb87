#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topomap/graph.hpp"

namespace topomap {

struct AffinityOptions {
  // Minimum observed/expected ratio for an emitted link.
  double threshold = 1.0;
  // Optional binomial z-score filter applied on top of the ratio.
  std::optional<double> min_z;
  // Count citations instead of summing edge weights.
  bool raw_counts = false;
};

struct AffinityNode {
  int cluster = 0;
  std::int64_t size = 0;  // publications in the cluster
  double out_weight = 0.0;
  double in_weight = 0.0;
};

struct AffinityEdge {
  int source = 0;
  int target = 0;
  double observed = 0.0;
  double expected = 0.0;
  double affinity = 0.0;
  double z = 0.0;
};

struct AffinityNetwork {
  std::vector<AffinityNode> nodes;
  std::vector<AffinityEdge> edges;
  double total_weight = 0.0;  // all inter-cluster weight W
  bool no_inter_cluster_weight = false;

  // out_A * in_B / W, including the diagonal (never emitted as an edge).
  double expected(int source, int target) const;
};

// Directed inter-cluster flows against the null model expected = out_A in_B / W.
// `observed` is a k x k row-major matrix of source -> target weights; the
// diagonal is ignored. `sizes` gives publications per cluster.
AffinityNetwork affinity_from_flows(std::span<const double> observed, std::span<const std::int64_t> sizes,
                                    const AffinityOptions& options = {});

// Clusters are the ids >= 0 of `assignment` (one per graph node); nodes with
// a negative id are left out of every total.
AffinityNetwork affinity_network(const CitationGraph& graph, std::span<const int> assignment,
                                 const AffinityOptions& options = {});

void write_affinity_json(const AffinityNetwork& net, std::ostream& out);
void write_affinity_graphml(const AffinityNetwork& net, std::ostream& out);
void write_affinity_dot(const AffinityNetwork& net, std::ostream& out);

// Document -> cluster assignments of one solution; -1 = unassigned.
using Membership = std::vector<std::pair<std::string, int>>;

// Reads (pub_id, cluster_id) rows.
Membership read_membership_tsv(std::istream& in);

// Shared-document contingency between two solutions. Row and column index
// `unassigned_index()` collects documents absent from, or unassigned in, the
// other solution.
struct FlowMatrix {
  std::vector<int> row_clusters;
  std::vector<int> col_clusters;
  std::vector<std::int64_t> cells;  // (rows + 1) x (cols + 1), row-major

  std::size_t rows() const { return row_clusters.size(); }
  std::size_t cols() const { return col_clusters.size(); }
  std::int64_t cell(std::size_t i, std::size_t j) const { return cells[i * (cols() + 1) + j]; }
  std::int64_t unassigned_row(std::size_t j) const { return cell(rows(), j); }
  std::int64_t unassigned_col(std::size_t i) const { return cell(i, cols()); }

  std::vector<std::int64_t> row_totals() const;  // shared block only
  std::vector<std::int64_t> col_totals() const;
  std::int64_t shared_total() const;

  FlowMatrix transposed() const;
};

FlowMatrix flow_matrix(const Membership& a, const Membership& b);

struct PartitionSimilarity {
  double nmi = 0.0;
  double ari = 0.0;
};

// NMI (sqrt normalization, 0 when either entropy vanishes) and adjusted Rand
// index over the shared block. Throws std::invalid_argument when empty.
PartitionSimilarity partition_similarity(const FlowMatrix& flow);

void write_flow_json(const FlowMatrix& flow, std::ostream& out, const std::string& name_a = "A",
                     const std::string& name_b = "B");

}  // namespace topomap
