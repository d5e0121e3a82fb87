#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "topomap/errors.hpp"
#include "topomap/pipeline.hpp"

namespace fs = std::filesystem;
using namespace topomap;

namespace {

// Flag values; unset optionals leave the config file (or default) untouched.
struct Overrides {
  std::string config;
  std::string out_dir;
  std::string publications, format, classification, microfields, terms, stopwords, exclusions;
  std::optional<int> year_min, year_max;
  std::vector<std::string> doc_types;
  std::optional<std::string> weighting;
  std::optional<std::string> preset;
  std::optional<double> gamma, theta;
  std::optional<std::int64_t> min_size;
  std::optional<int> starts, iterations, threads;
  std::optional<std::string> seed;
  std::optional<std::string> nesting;
  std::optional<std::size_t> top_k, compare_top_k, label_top_n;
  std::optional<std::int64_t> min_doc_freq;
  std::optional<std::string> normalization;
  std::optional<double> core, boundary, threshold, min_z, coverage_target;
  bool raw_counts = false;
  bool exclusion_substring = false;
  bool wall_time = false;
};

fs::path abs_path(const std::string& s) { return fs::absolute(fs::path(s)).lexically_normal(); }

std::uint64_t parse_seed(const std::string& s) {
  if (s == "random") return (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  std::size_t pos = 0;
  const auto v = std::stoull(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("seed must be an integer or 'random'");
  return v;
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) c = load_config_file(o.config, c);
  auto set_path = [](const std::string& v, fs::path& out) {
    if (!v.empty()) out = abs_path(v);
  };
  set_path(o.publications, c.publications);
  set_path(o.classification, c.classification);
  set_path(o.microfields, c.microfields);
  set_path(o.terms, c.terms);
  set_path(o.stopwords, c.stopwords);
  set_path(o.exclusions, c.exclusions);
  if (!o.format.empty()) c.publications_format = o.format == "tsv" ? CorpusFormat::tsv : CorpusFormat::jsonl;
  if (o.exclusion_substring) c.exclusion_substring = true;
  if (o.year_min) c.filter.year_min = *o.year_min;
  if (o.year_max) c.filter.year_max = *o.year_max;
  if (!o.doc_types.empty()) {
    c.filter.allowed_doc_types.clear();
    for (const auto& t : o.doc_types) c.filter.allowed_doc_types.insert(DocType::parse(t));
  }
  if (o.weighting) c.weighting = parse_weighting(*o.weighting);
  if (o.preset) {
    const auto& p = find_cpm_preset(*o.preset);
    c.cpm.gamma = p.gamma;
    c.cpm.min_cluster_size = p.min_cluster_size;
  }
  if (o.gamma) c.cpm.gamma = *o.gamma;
  if (o.theta) c.cpm.theta = *o.theta;
  if (o.min_size) c.cpm.min_cluster_size = *o.min_size;
  if (o.starts) c.cpm.random_starts = *o.starts;
  if (o.iterations) c.cpm.iterations = *o.iterations;
  if (o.threads) c.cpm.threads = *o.threads;
  if (o.seed) c.cpm.seed = parse_seed(*o.seed);
  if (o.nesting) c.cpm.nesting = parse_start_nesting(*o.nesting);
  if (o.top_k) c.projection_top_k = *o.top_k;
  if (o.compare_top_k) c.compare_top_k = *o.compare_top_k;
  if (o.label_top_n) c.label_top_n = *o.label_top_n;
  if (o.min_doc_freq) c.min_doc_freq = *o.min_doc_freq;
  if (o.normalization) c.normalization = parse_nmi_normalization(*o.normalization);
  if (o.core) c.thresholds.core = *o.core;
  if (o.boundary) c.thresholds.boundary = *o.boundary;
  if (o.threshold) c.affinity.threshold = *o.threshold;
  if (o.min_z) c.affinity.min_z = *o.min_z;
  if (o.raw_counts) c.affinity.raw_counts = true;
  if (o.coverage_target) c.coverage_target = *o.coverage_target;
  if (o.wall_time) c.record_wall_time = true;
  c.cpm.validate();
  c.filter.validate();
  return c;
}

fs::path out_dir_for(const Overrides& o, const std::string& command) {
  if (!o.out_dir.empty()) return abs_path(o.out_dir);
  if (const char* env = std::getenv("TOPOMAP_OUT_DIR"); env && *env) return abs_path(env) / command;
  return abs_path("topomap_out") / command;
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON config file (a manifest.json is accepted too)");
  sub->add_option("-o,--out", o.out_dir, "output directory (default $TOPOMAP_OUT_DIR/<command>)");
  sub->add_option("--seed", o.seed, "integer seed or 'random'");
  sub->add_flag("--record-wall-time", o.wall_time, "write wall time into the manifest");
}

void add_corpus(CLI::App* sub, Overrides& o) {
  sub->add_option("--publications", o.publications, "publication records (jsonl or tsv)");
  sub->add_option("--format", o.format, "publications format")->check(CLI::IsMember({"jsonl", "tsv"}));
  sub->add_option("--year-min", o.year_min);
  sub->add_option("--year-max", o.year_max);
  sub->add_option("--doc-types", o.doc_types, "allowed document types");
  sub->add_option("--weighting", o.weighting)->check(CLI::IsMember({"normalized_out", "unit"}));
}

void add_cpm(CLI::App* sub, Overrides& o) {
  sub->add_option("--preset", o.preset, "named resolution preset")->check(CLI::IsMember({"coarse", "fine"}));
  sub->add_option("--gamma", o.gamma, "CPM resolution");
  sub->add_option("--min-size", o.min_size, "smallest retained cluster");
  sub->add_option("--starts", o.starts, "random starts");
  sub->add_option("--iterations", o.iterations, "iterations per start");
  sub->add_option("--theta", o.theta, "refinement randomness");
  sub->add_option("--threads", o.threads, "worker threads (0 = hardware)");
  sub->add_option("--nesting", o.nesting)->check(CLI::IsMember({"independent_starts", "starts_per_iteration"}));
}

void add_labels(CLI::App* sub, Overrides& o) {
  sub->add_option("--terms", o.terms, "precomputed term vectors (doc_id<TAB>term)");
  sub->add_option("--stopwords", o.stopwords);
  sub->add_option("--exclusions", o.exclusions, "excluded terms, one per line");
  sub->add_flag("--exclusion-substring", o.exclusion_substring, "exclude terms containing an entry");
  sub->add_option("--top-n", o.label_top_n);
  sub->add_option("--min-doc-freq", o.min_doc_freq);
  sub->add_option("--normalization", o.normalization)->check(CLI::IsMember({"sqrt", "min"}));
}

void add_projection(CLI::App* sub, Overrides& o) {
  sub->add_option("--classification", o.classification, "doc_id<TAB>microfield_id");
  sub->add_option("--microfields", o.microfields, "microfield_id<TAB>global_size[<TAB>label]");
  sub->add_option("--top-k", o.top_k, "keep the k largest projection clusters");
  sub->add_option("--core", o.core, "core share threshold");
  sub->add_option("--boundary", o.boundary, "boundary share threshold");
}

void add_affinity(CLI::App* sub, Overrides& o) {
  sub->add_option("--threshold", o.threshold, "minimum observed/expected ratio");
  sub->add_option("--min-z", o.min_z, "minimum z-score");
  sub->add_flag("--raw-counts", o.raw_counts, "use raw link counts instead of weights");
}

int run(int argc, char** argv) {
  CLI::App app{"topomap: citation-based topic maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Overrides o;

  auto* ingest = app.add_subcommand("ingest", "read and filter publication records");
  add_common(ingest, o);
  add_corpus(ingest, o);

  auto* graph = app.add_subcommand("graph", "build the citation graph and its giant component");
  add_common(graph, o);
  add_corpus(graph, o);

  std::string nodes, edges;
  auto* cluster = app.add_subcommand("cluster", "CPM clustering of a graph");
  add_common(cluster, o);
  add_cpm(cluster, o);
  cluster->add_option("--nodes", nodes, "nodes.tsv")->required();
  cluster->add_option("--edges", edges, "edges.tsv")->required();

  auto* proj = app.add_subcommand("project", "project the corpus onto a global classification");
  add_common(proj, o);
  add_projection(proj, o);
  proj->add_option("--nodes", nodes, "nodes.tsv of the corpus")->required();

  std::string membership, mode = "term", universe = "giant_component";
  auto* label = app.add_subcommand("label", "NMI cluster labels");
  add_common(label, o);
  add_corpus(label, o);
  add_labels(label, o);
  label->add_option("--membership", membership, "pub_id<TAB>cluster_id")->required();
  label->add_option("--mode", mode)->check(CLI::IsMember({"term", "journal"}));
  label->add_option("--universe", universe)->check(CLI::IsMember({"giant_component", "solution_members"}));

  auto* aff = app.add_subcommand("affinity", "topic affinity network");
  add_common(aff, o);
  add_affinity(aff, o);
  aff->add_option("--nodes", nodes)->required();
  aff->add_option("--edges", edges)->required();
  aff->add_option("--membership", membership)->required();

  std::string a, b;
  auto* cmp = app.add_subcommand("compare", "flow matrix between two solutions");
  add_common(cmp, o);
  cmp->add_option("a", a, "membership TSV")->required();
  cmp->add_option("b", b, "membership TSV")->required();

  std::optional<std::int64_t> total;
  auto* cov = app.add_subcommand("coverage", "coverage curve of a solution");
  add_common(cov, o);
  cov->add_option("--membership", membership)->required();
  cov->add_option("--total", total, "corpus size (default: rows in membership)");
  cov->add_option("--target", o.coverage_target, "coverage share to reach");

  auto* pipe = app.add_subcommand("pipeline", "full run from publications to comparisons");
  add_common(pipe, o);
  add_corpus(pipe, o);
  add_cpm(pipe, o);
  add_labels(pipe, o);
  add_projection(pipe, o);
  add_affinity(pipe, o);
  pipe->add_option("--compare-top-k", o.compare_top_k, "projection clusters entering the comparison");
  pipe->add_option("--target", o.coverage_target, "coverage share to reach");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const RunConfig cfg = resolve_config(o);
  const fs::path out = out_dir_for(o, command);

  if (command == "ingest") {
    run_ingest(cfg, out);
  } else if (command == "graph") {
    run_graph(cfg, out);
  } else if (command == "cluster") {
    run_cluster(cfg, abs_path(nodes), abs_path(edges), out);
  } else if (command == "project") {
    run_project(cfg, abs_path(nodes), out);
  } else if (command == "label") {
    run_label(cfg, abs_path(membership), parse_label_mode(mode), parse_universe(universe), out);
  } else if (command == "affinity") {
    run_affinity(cfg, abs_path(nodes), abs_path(edges), abs_path(membership), out);
  } else if (command == "compare") {
    run_compare(cfg, abs_path(a), abs_path(b), out);
  } else if (command == "coverage") {
    run_coverage(cfg, abs_path(membership), total, out);
  } else if (command == "pipeline") {
    auto report = run_pipeline(cfg, out);
    std::cout << report.summary.dump(2) << '\n';
  }
  std::cerr << command << ": wrote " << out.string() << " (seed " << cfg.cpm.seed << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return 3;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
