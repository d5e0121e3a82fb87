#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace topomap {

// Publication -> microfield assignment of an external global classification.
struct ClassificationMap {
  std::unordered_map<std::string, std::string> assignment;
  // Total publications per microfield in the global map, when known.
  std::map<std::string, std::int64_t> microfield_sizes;
  std::map<std::string, std::string> microfield_labels;

  std::optional<std::int64_t> size_of(const std::string& microfield) const;
};

// Reads (pub_id, microfield_id) rows; a pub_id mapped twice raises ParseError.
ClassificationMap read_classification_tsv(std::istream& assignments);
// Adds (microfield_id, global_size[, label]) metadata rows.
void read_microfield_metadata_tsv(std::istream& metadata, ClassificationMap& map);

enum class MicrofieldCategory { core, boundary, boundary_crossing };

std::string to_string(MicrofieldCategory category);

struct ProjectionCluster {
  int cluster_id = 0;
  std::string microfield;
  std::vector<std::string> members;  // sorted
  std::optional<double> share;       // members / microfield size
  std::optional<MicrofieldCategory> category;
};

struct CategoryThresholds {
  double core = 0.50;
  double boundary = 0.15;
};

struct ProjectionResult {
  std::vector<ProjectionCluster> clusters;
  std::vector<std::string> unmapped;  // sorted
  // Intersections cut by top_k; their members belong to no returned cluster.
  std::size_t truncated_clusters = 0;
  std::size_t truncated_members = 0;
};

// Groups corpus ids by microfield; clusters ordered by descending member
// count (ties: lower microfield id) and numbered by rank from 0.
ProjectionResult project(std::span<const std::string> corpus_ids, const ClassificationMap& map,
                         std::optional<std::size_t> top_k = std::nullopt,
                         const CategoryThresholds& thresholds = {});

// core when share >= core threshold, boundary when share >= boundary
// threshold, else boundary_crossing. Throws std::invalid_argument when share
// lies outside [0, 1] or the thresholds are not ordered.
MicrofieldCategory categorize_microfield(double share, const CategoryThresholds& thresholds = {});

struct CoveragePoint {
  std::size_t k = 0;
  double share = 0.0;
};

// Cumulative share after each of the k largest clusters, k = 1..n.
// Requires sizes sorted descending and total >= their sum.
std::vector<CoveragePoint> coverage_curve(std::span<const std::int64_t> sizes_desc, std::int64_t total);

// Smallest k whose cumulative share reaches target; nullopt when unreachable.
std::optional<std::size_t> smallest_k(std::span<const std::int64_t> sizes_desc, std::int64_t total, double target);

void write_projection_tsv(const ProjectionResult& result, std::ostream& out);
void write_projection_membership_tsv(const ProjectionResult& result, std::ostream& out);

}  // namespace topomap
