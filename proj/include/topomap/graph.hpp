#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topomap/corpus.hpp"

namespace topomap {

enum class Weighting { unit, normalized_out };

Weighting parse_weighting(std::string_view text);
std::string to_string(Weighting w);

struct Edge {
  int source = 0;
  int target = 0;
  double weight = 0.0;
};

// Directed weighted citation graph over string publication ids, stored as
// compressed out-adjacency. Immutable once built.
class CitationGraph {
 public:
  CitationGraph() = default;

  // Parallel edges are summed; self-loops dropped. Edge endpoints must be
  // valid indices and weights nonnegative (std::invalid_argument otherwise).
  static CitationGraph from_edges(std::vector<std::string> ids, std::vector<std::int64_t> node_sizes,
                                  std::vector<Edge> edges);

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return targets_.size(); }

  const std::string& id(int v) const { return ids_[static_cast<std::size_t>(v)]; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::int64_t node_size(int v) const { return sizes_[static_cast<std::size_t>(v)]; }
  const std::vector<std::int64_t>& node_sizes() const { return sizes_; }
  std::optional<int> find(const std::string& id) const;

  std::span<const int> out_targets(int v) const;
  std::span<const double> out_weights(int v) const;
  double out_weight_sum(int v) const;

  std::vector<Edge> edges() const;
  double total_weight() const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::int64_t> sizes_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> targets_;
  std::vector<double> weights_;
};

struct BuildStats {
  std::size_t references_total = 0;
  std::size_t resolved = 0;
  std::size_t out_of_corpus = 0;
  std::size_t self_references = 0;
};

// One edge i -> j per distinct in-corpus reference of i (j != i). Under
// normalized_out every edge out of i weighs 1/r_i. Duplicate record ids raise
// SchemaError.
CitationGraph build_graph(std::span<const PublicationRecord> records, Weighting weighting = Weighting::normalized_out,
                          BuildStats* stats = nullptr);

struct ComponentReport {
  std::size_t component_count = 0;
  std::size_t giant_size = 0;
  std::size_t giant_edge_count = 0;
  std::size_t dropped_nodes = 0;
};

// Induced subgraph on the largest weakly connected component. Equal-size
// components resolve to the one holding the lexicographically smallest id.
std::pair<CitationGraph, ComponentReport> giant_component(const CitationGraph& graph);

// Symmetric weighted adjacency with node sizes and self-weights. Self-weight
// holds weight internal to a node (nonzero only after aggregation). Neighbor
// lists are sorted by index.
class SymmetricGraph {
 public:
  SymmetricGraph() = default;

  // weight(i,j) = w(i->j) + w(j->i)
  static SymmetricGraph from_citation_graph(const CitationGraph& graph);

  // Undirected edges (u, v, w); duplicates summed, u == v adds to self-weight.
  static SymmetricGraph from_undirected(std::vector<double> node_sizes, std::span<const Edge> edges,
                                        std::vector<double> self_weights = {});

  // Takes prebuilt CSR arrays; used by aggregation.
  static SymmetricGraph from_csr(std::vector<double> node_sizes, std::vector<double> self_weights,
                                 std::vector<std::size_t> offsets, std::vector<int> neighbors,
                                 std::vector<double> weights);

  int node_count() const { return static_cast<int>(sizes_.size()); }
  std::size_t adjacency_size() const { return neighbors_.size(); }
  std::span<const int> neighbors(int v) const {
    auto b = offsets_[static_cast<std::size_t>(v)], e = offsets_[static_cast<std::size_t>(v) + 1];
    return {neighbors_.data() + b, e - b};
  }
  std::span<const double> weights(int v) const {
    auto b = offsets_[static_cast<std::size_t>(v)], e = offsets_[static_cast<std::size_t>(v) + 1];
    return {weights_.data() + b, e - b};
  }
  double node_size(int v) const { return sizes_[static_cast<std::size_t>(v)]; }
  const std::vector<double>& node_sizes() const { return sizes_; }
  double self_weight(int v) const { return self_[static_cast<std::size_t>(v)]; }

  double weight(int u, int v) const;
  double total_size() const;
  // Self-weights plus each undirected edge once.
  double total_weight() const;

 private:
  std::vector<double> sizes_;
  std::vector<double> self_;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> neighbors_;
  std::vector<double> weights_;
};

inline SymmetricGraph undirected_view(const CitationGraph& graph) { return SymmetricGraph::from_citation_graph(graph); }

// TSV export/import: edges (source_id, target_id, weight), nodes (id, node_size).
void write_edges_tsv(const CitationGraph& graph, std::ostream& out);
void write_nodes_tsv(const CitationGraph& graph, std::ostream& out);
CitationGraph read_graph_tsv(std::istream& nodes, std::istream& edges);

}  // namespace topomap
