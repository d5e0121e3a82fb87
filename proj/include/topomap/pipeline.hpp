#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "topomap/analysis.hpp"
#include "topomap/corpus.hpp"
#include "topomap/graph.hpp"
#include "topomap/labeling.hpp"
#include "topomap/leiden.hpp"
#include "topomap/projection.hpp"

namespace topomap {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything a run depends on. Paths are absolute once loaded; the output
// directory is a run location and deliberately not part of the config.
struct RunConfig {
  std::filesystem::path publications;
  CorpusFormat publications_format = CorpusFormat::jsonl;
  std::filesystem::path classification;
  std::filesystem::path microfields;
  std::filesystem::path terms;
  std::filesystem::path stopwords;
  std::filesystem::path exclusions;
  bool exclusion_substring = false;
  std::size_t max_ngram = 3;

  CorpusFilter filter;
  Weighting weighting = Weighting::normalized_out;
  CpmParams cpm{.gamma = 8e-5, .min_cluster_size = 350};

  std::optional<std::size_t> projection_top_k;
  // Projection clusters entering the comparison; unset = the coverage k.
  std::optional<std::size_t> compare_top_k;
  CategoryThresholds thresholds;

  std::size_t label_top_n = 20;
  std::int64_t min_doc_freq = 5;
  NmiNormalization normalization = NmiNormalization::sqrt;

  AffinityOptions affinity;
  double coverage_target = 0.9;
  bool record_wall_time = false;
};

nlohmann::ordered_json config_to_json(const RunConfig& config);
// Applies the keys present in `j` on top of `base`. Relative paths resolve
// against `base_dir`. A manifest (object with a "config" key) is accepted.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base, const std::filesystem::path& base_dir);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});
std::string config_hash(const RunConfig& config);

// Throws InputError for any configured input path that does not exist.
void validate_input_paths(const RunConfig& config, bool need_publications);

// Collects output files and writes manifest.json into the output directory.
class Manifest {
 public:
  Manifest(std::filesystem::path out_dir, std::string command);
  void add_input(const std::filesystem::path& path);
  // Path relative to the output directory.
  void add_output(const std::filesystem::path& relative);
  void write(const RunConfig& config, std::optional<double> wall_seconds) const;

 private:
  std::filesystem::path out_dir_;
  std::string command_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
};

struct PipelineReport {
  nlohmann::ordered_json summary;
};

// Subcommand stages. Each writes its files under out_dir plus manifest.json.
void run_ingest(const RunConfig& config, const std::filesystem::path& out_dir);
void run_graph(const RunConfig& config, const std::filesystem::path& out_dir);
void run_cluster(const RunConfig& config, const std::filesystem::path& nodes, const std::filesystem::path& edges,
                 const std::filesystem::path& out_dir);
void run_project(const RunConfig& config, const std::filesystem::path& nodes, const std::filesystem::path& out_dir);
void run_label(const RunConfig& config, const std::filesystem::path& membership, LabelMode mode, Universe universe,
               const std::filesystem::path& out_dir);
void run_affinity(const RunConfig& config, const std::filesystem::path& nodes, const std::filesystem::path& edges,
                  const std::filesystem::path& membership, const std::filesystem::path& out_dir);
void run_compare(const RunConfig& config, const std::filesystem::path& a, const std::filesystem::path& b,
                 const std::filesystem::path& out_dir);
void run_coverage(const RunConfig& config, const std::filesystem::path& membership, std::optional<std::int64_t> total,
                  const std::filesystem::path& out_dir);

// ingest -> filter -> graph -> giant component -> {cluster, project} ->
// {label, affinity, compare, coverage}.
PipelineReport run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace topomap
