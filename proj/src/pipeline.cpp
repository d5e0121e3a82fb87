#include "topomap/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "topomap/errors.hpp"
#include "topomap/io_util.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace topomap {

namespace {

std::string path_string(const fs::path& p) { return p.empty() ? std::string() : p.generic_string(); }

fs::path resolve(const std::string& value, const fs::path& base_dir) {
  if (value.empty()) return {};
  fs::path p(value);
  if (p.is_relative()) p = base_dir / p;
  return fs::absolute(p).lexically_normal();
}

std::string format_name(CorpusFormat f) { return f == CorpusFormat::jsonl ? "jsonl" : "tsv"; }

CorpusFormat parse_format(const std::string& s) {
  if (s == "jsonl") return CorpusFormat::jsonl;
  if (s == "tsv") return CorpusFormat::tsv;
  throw std::invalid_argument("unknown publications format '" + s + "' (expected jsonl|tsv)");
}

template <class T>
void read_if(const nlohmann::json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) out = it->get<T>();
}

ojson optional_json(const std::optional<std::size_t>& v) { return v ? ojson(*v) : ojson(nullptr); }

void write_json(const fs::path& path, const ojson& j) {
  auto out = io::open_output(path);
  out << j.dump(2) << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<double> wall(const RunConfig& cfg, std::chrono::steady_clock::time_point start) {
  if (!cfg.record_wall_time) return std::nullopt;
  return seconds_since(start);
}

}  // namespace

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  ojson j;
  j["inputs"] = {{"publications", path_string(c.publications)},
                 {"format", format_name(c.publications_format)},
                 {"classification", path_string(c.classification)},
                 {"microfields", path_string(c.microfields)},
                 {"terms", path_string(c.terms)},
                 {"stopwords", path_string(c.stopwords)},
                 {"exclusions", path_string(c.exclusions)}};
  auto types = ojson::array();
  for (const auto& t : c.filter.allowed_doc_types) types.push_back(t.to_string());
  j["corpus"] = {{"year_min", c.filter.year_min},
                 {"year_max", c.filter.year_max},
                 {"doc_types", types},
                 {"max_ngram", c.max_ngram},
                 {"exclusion_substring", c.exclusion_substring}};
  j["graph"] = {{"weighting", to_string(c.weighting)}};
  j["cluster"] = {{"gamma", c.cpm.gamma},
                  {"min_cluster_size", c.cpm.min_cluster_size},
                  {"iterations", c.cpm.iterations},
                  {"random_starts", c.cpm.random_starts},
                  {"theta", c.cpm.theta},
                  {"nesting", to_string(c.cpm.nesting)}};
  j["seed"] = c.cpm.seed;
  j["projection"] = {{"top_k", optional_json(c.projection_top_k)},
                     {"compare_top_k", optional_json(c.compare_top_k)},
                     {"core_threshold", c.thresholds.core},
                     {"boundary_threshold", c.thresholds.boundary}};
  j["labeling"] = {{"top_n", c.label_top_n},
                   {"min_doc_freq", c.min_doc_freq},
                   {"normalization", to_string(c.normalization)}};
  j["affinity"] = {{"threshold", c.affinity.threshold},
                   {"min_z", c.affinity.min_z ? ojson(*c.affinity.min_z) : ojson(nullptr)},
                   {"raw_counts", c.affinity.raw_counts}};
  j["coverage"] = {{"target", c.coverage_target}};
  j["record_wall_time"] = c.record_wall_time;
  return j;
}

RunConfig config_from_json(const nlohmann::json& input, RunConfig c, const fs::path& base_dir) {
  const nlohmann::json& j = input.contains("config") ? input.at("config") : input;
  if (!j.is_object()) throw SchemaError("config must be a JSON object");
  try {
    if (auto it = j.find("inputs"); it != j.end()) {
      auto path_field = [&](const char* key, fs::path& out) {
        if (auto f = it->find(key); f != it->end() && !f->is_null()) out = resolve(f->get<std::string>(), base_dir);
      };
      path_field("publications", c.publications);
      path_field("classification", c.classification);
      path_field("microfields", c.microfields);
      path_field("terms", c.terms);
      path_field("stopwords", c.stopwords);
      path_field("exclusions", c.exclusions);
      if (auto f = it->find("format"); f != it->end() && !f->is_null()) c.publications_format = parse_format(f->get<std::string>());
    }
    if (auto it = j.find("corpus"); it != j.end()) {
      read_if(*it, "year_min", c.filter.year_min);
      read_if(*it, "year_max", c.filter.year_max);
      read_if(*it, "max_ngram", c.max_ngram);
      read_if(*it, "exclusion_substring", c.exclusion_substring);
      if (auto f = it->find("doc_types"); f != it->end() && !f->is_null()) {
        c.filter.allowed_doc_types.clear();
        for (const auto& t : *f) c.filter.allowed_doc_types.insert(DocType::parse(t.get<std::string>()));
      }
    }
    if (auto it = j.find("graph"); it != j.end()) {
      if (auto f = it->find("weighting"); f != it->end()) c.weighting = parse_weighting(f->get<std::string>());
    }
    if (auto it = j.find("cluster"); it != j.end()) {
      if (auto f = it->find("preset"); f != it->end() && !f->is_null()) {
        const auto& p = find_cpm_preset(f->get<std::string>());
        c.cpm.gamma = p.gamma;
        c.cpm.min_cluster_size = p.min_cluster_size;
      }
      read_if(*it, "gamma", c.cpm.gamma);
      read_if(*it, "min_cluster_size", c.cpm.min_cluster_size);
      read_if(*it, "iterations", c.cpm.iterations);
      read_if(*it, "random_starts", c.cpm.random_starts);
      read_if(*it, "theta", c.cpm.theta);
      read_if(*it, "threads", c.cpm.threads);
      if (auto f = it->find("nesting"); f != it->end() && !f->is_null()) c.cpm.nesting = parse_start_nesting(f->get<std::string>());
    }
    if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
      if (it->is_string() && it->get<std::string>() == "random")
        c.cpm.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
      else
        c.cpm.seed = it->get<std::uint64_t>();
    }
    if (auto it = j.find("projection"); it != j.end()) {
      if (auto f = it->find("top_k"); f != it->end()) c.projection_top_k = f->is_null() ? std::nullopt : std::optional(f->get<std::size_t>());
      if (auto f = it->find("compare_top_k"); f != it->end())
        c.compare_top_k = f->is_null() ? std::nullopt : std::optional(f->get<std::size_t>());
      read_if(*it, "core_threshold", c.thresholds.core);
      read_if(*it, "boundary_threshold", c.thresholds.boundary);
    }
    if (auto it = j.find("labeling"); it != j.end()) {
      read_if(*it, "top_n", c.label_top_n);
      read_if(*it, "min_doc_freq", c.min_doc_freq);
      if (auto f = it->find("normalization"); f != it->end() && !f->is_null())
        c.normalization = parse_nmi_normalization(f->get<std::string>());
    }
    if (auto it = j.find("affinity"); it != j.end()) {
      read_if(*it, "threshold", c.affinity.threshold);
      read_if(*it, "raw_counts", c.affinity.raw_counts);
      if (auto f = it->find("min_z"); f != it->end()) c.affinity.min_z = f->is_null() ? std::nullopt : std::optional(f->get<double>());
    }
    if (auto it = j.find("coverage"); it != j.end()) read_if(*it, "target", c.coverage_target);
    read_if(j, "record_wall_time", c.record_wall_time);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid config: ") + e.what());
  }
  return c;
}

RunConfig load_config_file(const fs::path& path, RunConfig base) {
  auto in = io::open_input(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, std::move(base), fs::absolute(path).parent_path());
}

std::string config_hash(const RunConfig& config) { return io::sha256_hex(config_to_json(config).dump()); }

void validate_input_paths(const RunConfig& c, bool need_publications) {
  if (need_publications && c.publications.empty()) throw InputError("no publications file configured");
  for (const auto* p : {&c.publications, &c.classification, &c.microfields, &c.terms, &c.stopwords, &c.exclusions}) {
    if (!p->empty() && !fs::exists(*p)) throw InputError("input file not found: " + p->string());
  }
}

Manifest::Manifest(fs::path out_dir, std::string command) : out_dir_(std::move(out_dir)), command_(std::move(command)) {}

void Manifest::add_input(const fs::path& path) {
  if (!path.empty() && std::find(inputs_.begin(), inputs_.end(), path) == inputs_.end()) inputs_.push_back(path);
}

void Manifest::add_output(const fs::path& relative) { outputs_.push_back(relative); }

void Manifest::write(const RunConfig& config, std::optional<double> wall_seconds) const {
  ojson j;
  j["tool"] = "topomap";
  j["version"] = kToolVersion;
  j["command"] = command_;
  j["config_hash"] = config_hash(config);
  j["seed"] = config.cpm.seed;
  j["config"] = config_to_json(config);
  j["inputs"] = ojson::array();
  for (const auto& p : inputs_) j["inputs"].push_back({{"path", path_string(p)}, {"sha256", io::sha256_file(p)}});
  j["outputs"] = ojson::array();
  auto outputs = outputs_;
  std::sort(outputs.begin(), outputs.end());
  for (const auto& rel : outputs) {
    const auto full = out_dir_ / rel;
    j["outputs"].push_back(
        {{"path", rel.generic_string()}, {"bytes", fs::file_size(full)}, {"sha256", io::sha256_file(full)}});
  }
  j["wall_time_s"] = wall_seconds ? ojson(*wall_seconds) : ojson(nullptr);
  write_json(out_dir_ / "manifest.json", j);
}

namespace {

// Shared stage helpers -------------------------------------------------------

struct LoadedCorpus {
  IngestResult ingest;
  FilterResult filtered;
};

LoadedCorpus load_corpus(const RunConfig& cfg) {
  LoadedCorpus lc;
  auto in = io::open_input(cfg.publications);
  lc.ingest = ingest_corpus(in, cfg.publications_format);
  lc.filtered = filter_corpus(lc.ingest.records, cfg.filter);
  return lc;
}

ojson ingest_report_json(const LoadedCorpus& lc) {
  return {{"records_read", lc.ingest.lines_read},
          {"duplicate_ids", lc.ingest.duplicate_ids},
          {"records_unique", lc.ingest.records.size()},
          {"records_kept", lc.filtered.kept.size()},
          {"records_dropped", lc.filtered.dropped_count}};
}

void write_records_jsonl(const std::vector<PublicationRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    ojson j{{"id", r.id},
            {"year", r.year},
            {"doc_type", r.doc_type.to_string()},
            {"title", r.title},
            {"abstract", r.abstract_text},
            {"journal", r.journal},
            {"references", r.references}};
    out << j.dump() << '\n';
  }
}

void check_weighting(const CitationGraph& g, Weighting w) {
  if (w != Weighting::normalized_out) return;
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (g.out_targets(static_cast<int>(v)).empty()) continue;
    if (std::abs(g.out_weight_sum(static_cast<int>(v)) - 1.0) > 1e-12)
      throw InvariantError("out-weight of '" + g.id(static_cast<int>(v)) + "' does not sum to 1");
  }
}

struct BuiltGraph {
  CitationGraph full;
  BuildStats stats;
  CitationGraph giant;
  ComponentReport report;
};

BuiltGraph build_giant(const RunConfig& cfg, const std::vector<PublicationRecord>& records) {
  if (records.empty()) throw SchemaError("corpus is empty after filtering; nothing to build a graph from");
  BuiltGraph bg;
  bg.full = build_graph(records, cfg.weighting, &bg.stats);
  check_weighting(bg.full, cfg.weighting);
  auto [giant, report] = giant_component(bg.full);
  bg.giant = std::move(giant);
  bg.report = report;
  if (bg.giant.node_count() == 0) throw SchemaError("citation graph is empty");
  return bg;
}

ojson graph_summary_json(const BuiltGraph& bg, Weighting w) {
  return {{"weighting", to_string(w)},
          {"node_count", bg.full.node_count()},
          {"edge_count", bg.full.edge_count()},
          {"references_total", bg.stats.references_total},
          {"references_resolved", bg.stats.resolved},
          {"references_out_of_corpus", bg.stats.out_of_corpus},
          {"self_references", bg.stats.self_references},
          {"component_report",
           {{"component_count", bg.report.component_count},
            {"giant_size", bg.report.giant_size},
            {"giant_edge_count", bg.report.giant_edge_count},
            {"dropped_nodes", bg.report.dropped_nodes}}}};
}

void write_graph_files(const CitationGraph& g, const fs::path& dir, Manifest& m, const std::string& prefix) {
  {
    auto out = io::open_output(dir / prefix / "nodes.tsv");
    write_nodes_tsv(g, out);
  }
  {
    auto out = io::open_output(dir / prefix / "edges.tsv");
    write_edges_tsv(g, out);
  }
  m.add_output(fs::path(prefix) / "nodes.tsv");
  m.add_output(fs::path(prefix) / "edges.tsv");
}

CitationGraph read_graph_files(const fs::path& nodes, const fs::path& edges) {
  auto n = io::open_input(nodes);
  auto e = io::open_input(edges);
  return read_graph_tsv(n, e);
}

Membership solution_membership(const CitationGraph& g, const ClusterSolution& sol) {
  Membership m;
  m.reserve(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) m.emplace_back(g.id(static_cast<int>(v)), sol.retained_cluster_of(static_cast<int>(v)));
  return m;
}

void write_membership_tsv(const Membership& m, const fs::path& path) {
  auto out = io::open_output(path);
  out << "pub_id\tcluster_id\n";
  for (const auto& [id, c] : m) out << id << '\t' << c << '\n';
}

ClusterSolution cluster_checked(const CitationGraph& g, const CpmParams& params) {
  const SymmetricGraph view = undirected_view(g);
  ClusterSolution sol = cluster(view, params);
  auto conn = connectivity_check(view, sol.partition, sol.retained_clusters);
  if (!conn.connected) throw InvariantError("clustering produced a disconnected cluster");
  return sol;
}

ojson cluster_meta_json(const ClusterSolution& sol, std::optional<double> wall_seconds) {
  const auto& p = sol.params;
  ojson starts = ojson::array();
  for (std::size_t s = 0; s < sol.starts.size(); ++s) {
    const auto& r = sol.starts[s];
    starts.push_back({{"start", s}, {"seed", r.seed}, {"final_quality", r.final_quality}, {"iterations", r.iterations_run}});
  }
  ojson sizes = ojson::array();
  for (int c = 0; c < sol.retained_clusters; ++c) sizes.push_back(sol.partition.cluster_sizes[static_cast<std::size_t>(c)]);
  return {{"params",
           {{"quality_function", "cpm"},
            {"gamma", p.gamma},
            {"iterations", p.iterations},
            {"random_starts", p.random_starts},
            {"seed", p.seed},
            {"theta", p.theta},
            {"min_cluster_size", p.min_cluster_size},
            {"start_nesting", to_string(p.nesting)}}},
          {"quality", sol.partition.quality},
          {"best_start", sol.best_start},
          {"starts", starts},
          {"quality_trace", sol.run_log()},
          {"clusters_total", sol.partition.cluster_sizes.size()},
          {"clusters_retained", sol.retained_clusters},
          {"retained_cluster_sizes", sizes},
          {"discarded_nodes", sol.discarded_nodes.size()},
          {"discarded_share", sol.discarded_share},
          {"wall_time_s", wall_seconds ? ojson(*wall_seconds) : ojson(nullptr)}};
}

ClassificationMap load_classification(const RunConfig& cfg) {
  if (cfg.classification.empty()) throw InputError("no classification file configured");
  auto in = io::open_input(cfg.classification);
  ClassificationMap map = read_classification_tsv(in);
  if (!cfg.microfields.empty()) {
    auto meta = io::open_input(cfg.microfields);
    read_microfield_metadata_tsv(meta, map);
  }
  return map;
}

ojson projection_summary_json(const ProjectionResult& pr, std::size_t corpus_size) {
  std::map<std::string, std::size_t> per_category;
  for (const auto& c : pr.clusters) ++per_category[c.category ? to_string(*c.category) : "unknown"];
  ojson cats = ojson::object();
  for (const auto& [k, v] : per_category) cats[k] = v;
  return {{"corpus_size", corpus_size},
          {"clusters", pr.clusters.size()},
          {"unmapped", pr.unmapped.size()},
          {"truncated_clusters", pr.truncated_clusters},
          {"truncated_members", pr.truncated_members},
          {"categories", cats}};
}

Membership projection_membership(const ProjectionResult& pr, std::optional<std::size_t> top_k) {
  Membership m;
  for (const auto& c : pr.clusters) {
    if (top_k && static_cast<std::size_t>(c.cluster_id) >= *top_k) continue;
    for (const auto& id : c.members) m.emplace_back(id, c.cluster_id);
  }
  std::sort(m.begin(), m.end());
  return m;
}

ojson coverage_json(std::vector<std::int64_t> sizes, std::int64_t total, double target) {
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  auto curve = coverage_curve(sizes, total);
  auto k = smallest_k(sizes, total, target);
  ojson points = ojson::array();
  for (const auto& p : curve) points.push_back({{"k", p.k}, {"share", p.share}});
  ojson j{{"total", total}, {"target", target}, {"clusters", sizes.size()}};
  if (k) {
    j["smallest_k"] = *k;
    j["smallest_cluster_size_at_k"] = *k > 0 ? ojson(sizes[*k - 1]) : ojson(nullptr);
    j["share_at_k"] = *k > 0 ? curve[*k - 1].share : 0.0;
  } else {
    j["smallest_k"] = "unreachable";
  }
  j["curve"] = points;
  return j;
}

std::vector<std::int64_t> membership_sizes(const Membership& m) {
  std::map<int, std::int64_t> sizes;
  for (const auto& [id, c] : m)
    if (c >= 0) ++sizes[c];
  std::vector<std::int64_t> out;
  for (const auto& [c, s] : sizes) out.push_back(s);
  return out;
}

// Label sources: per-document term sets and journals.
struct LabelSources {
  std::unordered_map<std::string, std::vector<std::string>> terms;
  std::unordered_map<std::string, std::string> journals;
};

LabelSources load_label_sources(const RunConfig& cfg, const std::vector<PublicationRecord>& records) {
  LabelSources src;
  std::vector<std::string> excl = cfg.exclusions.empty() ? default_query_exclusions() : io::read_word_list(cfg.exclusions);
  ExclusionList exclusions(excl, cfg.exclusion_substring);
  for (const auto& r : records) src.journals[r.id] = r.journal;
  if (!cfg.terms.empty()) {
    auto in = io::open_input(cfg.terms);
    for (auto& tv : load_term_vectors(in, exclusions)) src.terms[tv.doc_id].assign(tv.terms.begin(), tv.terms.end());
    return src;
  }
  TermExtractionOptions opts;
  auto stop = cfg.stopwords.empty() ? default_stopwords() : io::read_word_list(cfg.stopwords);
  for (const auto& s : stop) opts.stopwords.insert(io::to_lower_ascii(s));
  opts.max_ngram = cfg.max_ngram;
  for (const auto& r : records) {
    auto tv = extract_terms(r, opts, exclusions);
    src.terms[r.id].assign(tv.terms.begin(), tv.terms.end());
  }
  return src;
}

std::vector<LabeledDoc> labeled_docs(const Membership& m, const LabelSources& src, LabelMode mode) {
  std::vector<LabeledDoc> docs;
  docs.reserve(m.size());
  for (const auto& [id, c] : m) {
    LabeledDoc d{id, c, {}};
    if (mode == LabelMode::term) {
      if (auto it = src.terms.find(id); it != src.terms.end()) d.labels = it->second;
    } else if (auto it = src.journals.find(id); it != src.journals.end() && !it->second.empty()) {
      d.labels.push_back(it->second);
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

void write_labels(const RunConfig& cfg, const Membership& m, const LabelSources& src, LabelMode mode, Universe universe,
                  const fs::path& path) {
  LabelOptions opts;
  opts.universe = universe;
  opts.top_n = cfg.label_top_n;
  opts.min_doc_freq = cfg.min_doc_freq;
  opts.normalization = cfg.normalization;
  auto docs = labeled_docs(m, src, mode);
  auto ranked = rank_labels(docs, opts);
  auto out = io::open_output(path);
  write_labels_tsv(ranked, mode, out);
}

std::vector<int> assignment_for_graph(const CitationGraph& g, const Membership& m) {
  std::vector<int> a(g.node_count(), -1);
  for (const auto& [id, c] : m) {
    if (auto v = g.find(id)) a[static_cast<std::size_t>(*v)] = c;
  }
  return a;
}

void write_affinity_files(const AffinityNetwork& net, const fs::path& dir, const std::string& prefix, Manifest& m) {
  {
    auto out = io::open_output(dir / prefix / "affinity.json");
    write_affinity_json(net, out);
  }
  {
    auto out = io::open_output(dir / prefix / "affinity.graphml");
    write_affinity_graphml(net, out);
  }
  {
    auto out = io::open_output(dir / prefix / "affinity.dot");
    write_affinity_dot(net, out);
  }
  for (const char* f : {"affinity.json", "affinity.graphml", "affinity.dot"}) m.add_output(fs::path(prefix) / f);
}

ojson similarity_json(const FlowMatrix& flow) {
  ojson j{{"shared_documents", flow.shared_total()}, {"rows", flow.rows()}, {"columns", flow.cols()}};
  if (flow.shared_total() > 0) {
    auto s = partition_similarity(flow);
    j["nmi"] = s.nmi;
    j["ari"] = s.ari;
  } else {
    j["nmi"] = nullptr;
    j["ari"] = nullptr;
  }
  return j;
}

void write_compare_files(const FlowMatrix& flow, const fs::path& dir, const std::string& prefix, Manifest& m,
                         const std::string& name_a, const std::string& name_b) {
  {
    auto out = io::open_output(dir / prefix / "flow.json");
    write_flow_json(flow, out, name_a, name_b);
  }
  write_json(dir / prefix / "similarity.json", similarity_json(flow));
  m.add_output(fs::path(prefix) / "flow.json");
  m.add_output(fs::path(prefix) / "similarity.json");
}

Membership read_membership_file(const fs::path& p) {
  auto in = io::open_input(p);
  return read_membership_tsv(in);
}

}  // namespace

void run_ingest(const RunConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  validate_input_paths(cfg, true);
  Manifest m(out_dir, "ingest");
  m.add_input(cfg.publications);
  auto lc = load_corpus(cfg);
  {
    auto out = io::open_output(out_dir / "publications.filtered.jsonl");
    write_records_jsonl(lc.filtered.kept, out);
  }
  write_json(out_dir / "ingest_report.json", ingest_report_json(lc));
  m.add_output("publications.filtered.jsonl");
  m.add_output("ingest_report.json");
  m.write(cfg, wall(cfg, start));
}

void run_graph(const RunConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  validate_input_paths(cfg, true);
  Manifest m(out_dir, "graph");
  m.add_input(cfg.publications);
  auto lc = load_corpus(cfg);
  auto bg = build_giant(cfg, lc.filtered.kept);
  write_graph_files(bg.giant, out_dir, m, "");
  write_json(out_dir / "graph_summary.json", graph_summary_json(bg, cfg.weighting));
  m.add_output("graph_summary.json");
  m.write(cfg, wall(cfg, start));
}

void run_cluster(const RunConfig& cfg, const fs::path& nodes, const fs::path& edges, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  Manifest m(out_dir, "cluster");
  m.add_input(nodes);
  m.add_input(edges);
  auto g = read_graph_files(nodes, edges);
  if (g.node_count() == 0) throw SchemaError("graph has no nodes");
  auto sol = cluster_checked(g, cfg.cpm);
  write_membership_tsv(solution_membership(g, sol), out_dir / "partition.tsv");
  write_json(out_dir / "cluster_meta.json", cluster_meta_json(sol, wall(cfg, start)));
  m.add_output("partition.tsv");
  m.add_output("cluster_meta.json");
  m.write(cfg, wall(cfg, start));
}

void run_project(const RunConfig& cfg, const fs::path& nodes, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  validate_input_paths(cfg, false);
  Manifest m(out_dir, "project");
  m.add_input(nodes);
  m.add_input(cfg.classification);
  m.add_input(cfg.microfields);
  std::vector<std::string> ids;
  {
    auto in = io::open_input(nodes);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || (row == 1 && line.rfind("id\t", 0) == 0)) continue;
      ids.emplace_back(io::trim(io::split(line, '\t')[0]));
    }
  }
  auto map = load_classification(cfg);
  auto pr = project(ids, map, cfg.projection_top_k, cfg.thresholds);
  {
    auto out = io::open_output(out_dir / "projection.tsv");
    write_projection_tsv(pr, out);
  }
  {
    auto out = io::open_output(out_dir / "projection_membership.tsv");
    write_projection_membership_tsv(pr, out);
  }
  write_json(out_dir / "projection_summary.json", projection_summary_json(pr, ids.size()));
  for (const char* f : {"projection.tsv", "projection_membership.tsv", "projection_summary.json"}) m.add_output(f);
  m.write(cfg, wall(cfg, start));
}

void run_label(const RunConfig& cfg, const fs::path& membership, LabelMode mode, Universe universe, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  validate_input_paths(cfg, true);
  Manifest m(out_dir, "label");
  m.add_input(membership);
  m.add_input(cfg.publications);
  m.add_input(cfg.terms);
  m.add_input(cfg.stopwords);
  m.add_input(cfg.exclusions);
  auto memb = read_membership_file(membership);
  auto lc = load_corpus(cfg);
  auto src = load_label_sources(cfg, lc.ingest.records);
  const std::string name = std::string("labels_") + (mode == LabelMode::term ? "terms" : "journals") + ".tsv";
  write_labels(cfg, memb, src, mode, universe, out_dir / name);
  m.add_output(name);
  m.write(cfg, wall(cfg, start));
}

void run_affinity(const RunConfig& cfg, const fs::path& nodes, const fs::path& edges, const fs::path& membership,
                  const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  Manifest m(out_dir, "affinity");
  m.add_input(nodes);
  m.add_input(edges);
  m.add_input(membership);
  auto g = read_graph_files(nodes, edges);
  auto memb = read_membership_file(membership);
  auto net = affinity_network(g, assignment_for_graph(g, memb), cfg.affinity);
  write_affinity_files(net, out_dir, "", m);
  m.write(cfg, wall(cfg, start));
}

void run_compare(const RunConfig& cfg, const fs::path& a, const fs::path& b, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  Manifest m(out_dir, "compare");
  m.add_input(a);
  m.add_input(b);
  auto flow = flow_matrix(read_membership_file(a), read_membership_file(b));
  write_compare_files(flow, out_dir, "", m, a.stem().string(), b.stem().string());
  m.write(cfg, wall(cfg, start));
}

void run_coverage(const RunConfig& cfg, const fs::path& membership, std::optional<std::int64_t> total,
                  const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  Manifest m(out_dir, "coverage");
  m.add_input(membership);
  auto memb = read_membership_file(membership);
  const std::int64_t n = total ? *total : static_cast<std::int64_t>(memb.size());
  write_json(out_dir / "coverage.json", coverage_json(membership_sizes(memb), n, cfg.coverage_target));
  m.add_output("coverage.json");
  m.write(cfg, wall(cfg, start));
}

PipelineReport run_pipeline(const RunConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  validate_input_paths(cfg, true);
  Manifest m(out_dir, "pipeline");
  for (const auto* p : {&cfg.publications, &cfg.classification, &cfg.microfields, &cfg.terms, &cfg.stopwords, &cfg.exclusions})
    m.add_input(*p);

  ojson report;
  report["seed"] = cfg.cpm.seed;

  // ingest + filter
  auto lc = load_corpus(cfg);
  write_json(out_dir / "corpus" / "ingest_report.json", ingest_report_json(lc));
  m.add_output("corpus/ingest_report.json");
  report["records_retrieved"] = lc.ingest.lines_read;
  report["duplicate_ids"] = lc.ingest.duplicate_ids;
  report["records_kept"] = lc.filtered.kept.size();
  report["records_dropped_by_filter"] = lc.filtered.dropped_count;

  // graph + giant component
  auto bg = build_giant(cfg, lc.filtered.kept);
  write_graph_files(bg.giant, out_dir, m, "graph");
  write_json(out_dir / "graph" / "graph_summary.json", graph_summary_json(bg, cfg.weighting));
  m.add_output("graph/graph_summary.json");
  report["graph_nodes"] = bg.full.node_count();
  report["graph_edges"] = bg.full.edge_count();
  report["giant_component_nodes"] = bg.giant.node_count();
  report["giant_component_edges"] = bg.giant.edge_count();
  const auto giant_size = static_cast<std::int64_t>(bg.giant.node_count());

  // internal map: clustering
  auto sol = cluster_checked(bg.giant, cfg.cpm);
  const Membership leiden = solution_membership(bg.giant, sol);
  write_membership_tsv(leiden, out_dir / "leiden" / "partition.tsv");
  write_json(out_dir / "leiden" / "cluster_meta.json", cluster_meta_json(sol, std::nullopt));
  m.add_output("leiden/partition.tsv");
  m.add_output("leiden/cluster_meta.json");
  report["leiden_clusters_retained"] = sol.retained_clusters;
  report["leiden_quality"] = sol.partition.quality;
  report["discarded_share"] = sol.discarded_share;

  auto sources = load_label_sources(cfg, lc.filtered.kept);
  write_labels(cfg, leiden, sources, LabelMode::term, Universe::giant_component, out_dir / "leiden" / "labels_terms.tsv");
  write_labels(cfg, leiden, sources, LabelMode::journal, Universe::giant_component, out_dir / "leiden" / "labels_journals.tsv");
  m.add_output("leiden/labels_terms.tsv");
  m.add_output("leiden/labels_journals.tsv");

  {
    std::vector<int> a(bg.giant.node_count());
    for (std::size_t v = 0; v < a.size(); ++v) a[v] = sol.retained_cluster_of(static_cast<int>(v));
    write_affinity_files(affinity_network(bg.giant, a, cfg.affinity), out_dir, "leiden", m);
  }
  write_json(out_dir / "leiden" / "coverage.json", coverage_json(membership_sizes(leiden), giant_size, cfg.coverage_target));
  m.add_output("leiden/coverage.json");

  // external map: projection (optional)
  if (!cfg.classification.empty()) {
    auto map = load_classification(cfg);
    auto pr = project(bg.giant.ids(), map, cfg.projection_top_k, cfg.thresholds);
    std::size_t mapped = 0;
    for (const auto& c : pr.clusters) mapped += c.members.size();
    if (mapped + pr.unmapped.size() + pr.truncated_members != bg.giant.node_count())
      throw InvariantError("projection does not account for every corpus document");
    {
      auto out = io::open_output(out_dir / "projection" / "projection.tsv");
      write_projection_tsv(pr, out);
    }
    {
      auto out = io::open_output(out_dir / "projection" / "projection_membership.tsv");
      write_projection_membership_tsv(pr, out);
    }
    write_json(out_dir / "projection" / "projection_summary.json", projection_summary_json(pr, bg.giant.node_count()));
    for (const char* f : {"projection.tsv", "projection_membership.tsv", "projection_summary.json"})
      m.add_output(fs::path("projection") / f);
    report["projection_clusters"] = pr.clusters.size();
    report["projection_unmapped"] = pr.unmapped.size();

    const Membership proj = projection_membership(pr, std::nullopt);
    write_labels(cfg, proj, sources, LabelMode::term, Universe::solution_members, out_dir / "projection" / "labels_terms.tsv");
    write_labels(cfg, proj, sources, LabelMode::journal, Universe::solution_members,
                 out_dir / "projection" / "labels_journals.tsv");
    m.add_output("projection/labels_terms.tsv");
    m.add_output("projection/labels_journals.tsv");
    write_affinity_files(affinity_network(bg.giant, assignment_for_graph(bg.giant, proj), cfg.affinity), out_dir,
                         "projection", m);

    const auto proj_sizes = membership_sizes(proj);
    auto cov = coverage_json(proj_sizes, giant_size, cfg.coverage_target);
    write_json(out_dir / "projection" / "coverage.json", cov);
    m.add_output("projection/coverage.json");
    report["projection_coverage_k"] = cov["smallest_k"];
    report["projection_coverage_min_size"] = cov.contains("smallest_cluster_size_at_k") ? cov["smallest_cluster_size_at_k"] : ojson(nullptr);

    // compare internal vs the largest projection clusters
    std::optional<std::size_t> k = cfg.compare_top_k;
    if (!k && cov["smallest_k"].is_number()) k = cov["smallest_k"].get<std::size_t>();
    const Membership proj_k = projection_membership(pr, k);
    auto flow = flow_matrix(leiden, proj_k);
    std::int64_t both = 0;
    {
      std::map<std::string, int> pk(proj_k.begin(), proj_k.end());
      for (const auto& [id, c] : leiden)
        if (c >= 0)
          if (auto it = pk.find(id); it != pk.end() && it->second >= 0) ++both;
    }
    if (flow.shared_total() != both) throw InvariantError("flow matrix total differs from shared assignments");
    write_compare_files(flow, out_dir, "compare", m, "leiden", "projection");
    report["compare_projection_top_k"] = k ? ojson(*k) : ojson(nullptr);
    report["compare_similarity"] = similarity_json(flow);
  }

  write_json(out_dir / "run_report.json", report);
  m.add_output("run_report.json");
  m.write(cfg, wall(cfg, start));
  return {report};
}

}  // namespace topomap
