#include "topomap/projection.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "topomap/errors.hpp"
#include "topomap/io_util.hpp"

namespace topomap {

std::optional<std::int64_t> ClassificationMap::size_of(const std::string& microfield) const {
  auto it = microfield_sizes.find(microfield);
  if (it == microfield_sizes.end()) return std::nullopt;
  return it->second;
}

ClassificationMap read_classification_tsv(std::istream& assignments) {
  ClassificationMap map;
  std::string line;
  std::size_t row = 0;
  while (std::getline(assignments, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (row == 1 && line.rfind("pub_id\t", 0) == 0)) continue;
    auto f = io::split(line, '\t');
    if (f.size() != 2) throw ParseError(row, "classification row: expected pub_id, microfield_id");
    std::string pub(io::trim(f[0])), field(io::trim(f[1]));
    if (pub.empty() || field.empty()) throw ParseError(row, "classification row: empty field");
    auto [it, inserted] = map.assignment.emplace(pub, field);
    if (!inserted && it->second != field)
      throw ParseError(row, "publication '" + pub + "' mapped to more than one microfield");
  }
  return map;
}

void read_microfield_metadata_tsv(std::istream& metadata, ClassificationMap& map) {
  std::string line;
  std::size_t row = 0;
  while (std::getline(metadata, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (row == 1 && line.rfind("microfield_id\t", 0) == 0)) continue;
    auto f = io::split(line, '\t');
    if (f.size() < 2 || f.size() > 3) throw ParseError(row, "microfield row: expected microfield_id, global_size[, label]");
    std::string field(io::trim(f[0]));
    auto t = io::trim(f[1]);
    std::int64_t size = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), size);
    if (field.empty() || ec != std::errc() || p != t.data() + t.size() || size <= 0)
      throw ParseError(row, "microfield row: global_size must be a positive integer");
    map.microfield_sizes[field] = size;
    if (f.size() == 3) map.microfield_labels[field] = std::string(io::trim(f[2]));
  }
}

std::string to_string(MicrofieldCategory category) {
  switch (category) {
    case MicrofieldCategory::core: return "core";
    case MicrofieldCategory::boundary: return "boundary";
    case MicrofieldCategory::boundary_crossing: return "boundary_crossing";
  }
  return "unknown";
}

MicrofieldCategory categorize_microfield(double share, const CategoryThresholds& thresholds) {
  if (!(share >= 0.0 && share <= 1.0)) throw std::invalid_argument("share must lie in [0, 1]");
  if (!(thresholds.boundary < thresholds.core)) throw std::invalid_argument("boundary threshold must be below core threshold");
  if (share >= thresholds.core) return MicrofieldCategory::core;
  if (share >= thresholds.boundary) return MicrofieldCategory::boundary;
  return MicrofieldCategory::boundary_crossing;
}

ProjectionResult project(std::span<const std::string> corpus_ids, const ClassificationMap& map,
                         std::optional<std::size_t> top_k, const CategoryThresholds& thresholds) {
  std::map<std::string, std::vector<std::string>> groups;
  ProjectionResult result;
  std::vector<std::string> ids(corpus_ids.begin(), corpus_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (const auto& id : ids) {
    auto it = map.assignment.find(id);
    if (it == map.assignment.end())
      result.unmapped.push_back(id);
    else
      groups[it->second].push_back(id);
  }

  std::vector<std::pair<std::string, std::vector<std::string>>> ordered(groups.begin(), groups.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });
  std::size_t keep = top_k ? std::min(*top_k, ordered.size()) : ordered.size();
  for (std::size_t k = keep; k < ordered.size(); ++k) {
    ++result.truncated_clusters;
    result.truncated_members += ordered[k].second.size();
  }
  ordered.resize(keep);

  for (std::size_t k = 0; k < ordered.size(); ++k) {
    ProjectionCluster c;
    c.cluster_id = static_cast<int>(k);
    c.microfield = ordered[k].first;
    c.members = std::move(ordered[k].second);
    if (auto size = map.size_of(c.microfield)) {
      if (static_cast<std::int64_t>(c.members.size()) > *size)
        throw SchemaError("microfield '" + c.microfield + "' is smaller than its observed intersection");
      c.share = static_cast<double>(c.members.size()) / static_cast<double>(*size);
      c.category = categorize_microfield(*c.share, thresholds);
    }
    result.clusters.push_back(std::move(c));
  }
  return result;
}

namespace {

void check_sizes(std::span<const std::int64_t> sizes, std::int64_t total) {
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 0) throw std::invalid_argument("cluster sizes must be nonnegative");
    if (k > 0 && sizes[k] > sizes[k - 1]) throw std::invalid_argument("cluster sizes must be sorted descending");
    sum += sizes[k];
  }
  if (total <= 0 || total < sum) throw std::invalid_argument("total must be positive and at least the sum of sizes");
}

}  // namespace

std::vector<CoveragePoint> coverage_curve(std::span<const std::int64_t> sizes_desc, std::int64_t total) {
  check_sizes(sizes_desc, total);
  std::vector<CoveragePoint> out;
  std::int64_t running = 0;
  for (std::size_t k = 0; k < sizes_desc.size(); ++k) {
    running += sizes_desc[k];
    out.push_back({k + 1, static_cast<double>(running) / static_cast<double>(total)});
  }
  return out;
}

std::optional<std::size_t> smallest_k(std::span<const std::int64_t> sizes_desc, std::int64_t total, double target) {
  check_sizes(sizes_desc, total);
  if (target <= 0.0) return 0;
  std::int64_t running = 0;
  for (std::size_t k = 0; k < sizes_desc.size(); ++k) {
    running += sizes_desc[k];
    if (static_cast<double>(running) / static_cast<double>(total) >= target) return k + 1;
  }
  return std::nullopt;
}

void write_projection_tsv(const ProjectionResult& result, std::ostream& out) {
  out << "cluster_id\tmicrofield_id\tmember_count\tshare\tcategory\n";
  for (const auto& c : result.clusters) {
    out << c.cluster_id << '\t' << c.microfield << '\t' << c.members.size() << '\t'
        << (c.share ? io::format_double(*c.share) : "unknown") << '\t'
        << (c.category ? to_string(*c.category) : "unknown") << '\n';
  }
}

void write_projection_membership_tsv(const ProjectionResult& result, std::ostream& out) {
  out << "pub_id\tcluster_id\n";
  std::vector<std::pair<std::string, int>> rows;
  for (const auto& c : result.clusters)
    for (const auto& m : c.members) rows.emplace_back(m, c.cluster_id);
  std::sort(rows.begin(), rows.end());
  for (const auto& [id, c] : rows) out << id << '\t' << c << '\n';
}

}  // namespace topomap
