#include "topomap/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "topomap/errors.hpp"
#include "topomap/io_util.hpp"

namespace topomap {

double AffinityNetwork::expected(int source, int target) const {
  if (total_weight <= 0.0) return 0.0;
  const AffinityNode* a = nullptr;
  const AffinityNode* b = nullptr;
  for (const auto& n : nodes) {
    if (n.cluster == source) a = &n;
    if (n.cluster == target) b = &n;
  }
  if (!a || !b) return 0.0;
  return a->out_weight * b->in_weight / total_weight;
}

AffinityNetwork affinity_from_flows(std::span<const double> observed, std::span<const std::int64_t> sizes,
                                    const AffinityOptions& options) {
  const std::size_t k = sizes.size();
  if (observed.size() != k * k) throw std::invalid_argument("observed matrix must be k x k");
  AffinityNetwork net;
  net.nodes.resize(k);
  for (std::size_t a = 0; a < k; ++a) {
    net.nodes[a].cluster = static_cast<int>(a);
    net.nodes[a].size = sizes[a];
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      const double w = observed[a * k + b];
      if (w < 0.0) throw std::invalid_argument("observed weights must be nonnegative");
      net.nodes[a].out_weight += w;
      net.nodes[b].in_weight += w;
      net.total_weight += w;
    }
  }
  if (net.total_weight <= 0.0) {
    net.no_inter_cluster_weight = true;
    return net;
  }
  const double total = net.total_weight;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      const double expected = net.nodes[a].out_weight * net.nodes[b].in_weight / total;
      if (!(expected > 0.0)) continue;
      const double obs = observed[a * k + b];
      const double affinity = obs / expected;
      const double var = expected * (1.0 - expected / total);
      const double z = var > 0.0 ? (obs - expected) / std::sqrt(var) : 0.0;
      if (affinity < options.threshold) continue;
      if (options.min_z && z < *options.min_z) continue;
      net.edges.push_back({static_cast<int>(a), static_cast<int>(b), obs, expected, affinity, z});
    }
  }
  return net;
}

AffinityNetwork affinity_network(const CitationGraph& graph, std::span<const int> assignment,
                                 const AffinityOptions& options) {
  if (assignment.size() != graph.node_count()) throw std::invalid_argument("assignment must cover every graph node");
  int max_id = -1;
  for (int c : assignment) max_id = std::max(max_id, c);
  const auto k = static_cast<std::size_t>(max_id + 1);
  std::vector<std::int64_t> sizes(k, 0);
  std::vector<double> observed(k * k, 0.0);
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const int a = assignment[v];
    if (a < 0) continue;
    sizes[static_cast<std::size_t>(a)] += graph.node_size(static_cast<int>(v));
    auto ts = graph.out_targets(static_cast<int>(v));
    auto ws = graph.out_weights(static_cast<int>(v));
    for (std::size_t e = 0; e < ts.size(); ++e) {
      const int b = assignment[static_cast<std::size_t>(ts[e])];
      if (b < 0 || b == a) continue;
      observed[static_cast<std::size_t>(a) * k + static_cast<std::size_t>(b)] += options.raw_counts ? 1.0 : ws[e];
    }
  }
  AffinityNetwork net = affinity_from_flows(observed, sizes, options);
  std::erase_if(net.nodes, [](const AffinityNode& n) { return n.size == 0; });
  return net;
}

void write_affinity_json(const AffinityNetwork& net, std::ostream& out) {
  nlohmann::ordered_json j;
  j["total_inter_cluster_weight"] = net.total_weight;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : net.nodes)
    j["nodes"].push_back({{"cluster_id", n.cluster}, {"size", n.size}, {"out_weight", n.out_weight}, {"in_weight", n.in_weight}});
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : net.edges)
    j["edges"].push_back({{"source", e.source},
                          {"target", e.target},
                          {"observed", e.observed},
                          {"expected", e.expected},
                          {"affinity", e.affinity},
                          {"z", e.z}});
  out << j.dump(2) << '\n';
}

void write_affinity_graphml(const AffinityNetwork& net, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"long\"/>\n"
      << "  <key id=\"observed\" for=\"edge\" attr.name=\"observed\" attr.type=\"double\"/>\n"
      << "  <key id=\"expected\" for=\"edge\" attr.name=\"expected\" attr.type=\"double\"/>\n"
      << "  <key id=\"affinity\" for=\"edge\" attr.name=\"affinity\" attr.type=\"double\"/>\n"
      << "  <graph id=\"affinity\" edgedefault=\"directed\">\n";
  for (const auto& n : net.nodes)
    out << "    <node id=\"c" << n.cluster << "\"><data key=\"size\">" << n.size << "</data></node>\n";
  for (const auto& e : net.edges)
    out << "    <edge source=\"c" << e.source << "\" target=\"c" << e.target << "\"><data key=\"observed\">"
        << io::format_double(e.observed) << "</data><data key=\"expected\">" << io::format_double(e.expected)
        << "</data><data key=\"affinity\">" << io::format_double(e.affinity) << "</data></edge>\n";
  out << "  </graph>\n</graphml>\n";
}

void write_affinity_dot(const AffinityNetwork& net, std::ostream& out) {
  out << "digraph affinity {\n";
  for (const auto& n : net.nodes) out << "  c" << n.cluster << " [size=" << n.size << "];\n";
  for (const auto& e : net.edges)
    out << "  c" << e.source << " -> c" << e.target << " [weight=" << io::format_double(e.affinity)
        << ", observed=" << io::format_double(e.observed) << ", expected=" << io::format_double(e.expected) << "];\n";
  out << "}\n";
}

Membership read_membership_tsv(std::istream& in) {
  Membership out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (row == 1 && line.rfind("pub_id\t", 0) == 0)) continue;
    auto f = io::split(line, '\t');
    if (f.size() != 2) throw ParseError(row, "membership row: expected pub_id, cluster_id");
    auto id = io::trim(f[0]);
    auto c = io::trim(f[1]);
    int cluster = 0;
    auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), cluster);
    if (id.empty() || ec != std::errc() || p != c.data() + c.size() || cluster < -1)
      throw ParseError(row, "membership row: cluster_id must be an integer >= -1");
    out.emplace_back(std::string(id), cluster);
  }
  return out;
}

std::vector<std::int64_t> FlowMatrix::row_totals() const {
  std::vector<std::int64_t> t(rows(), 0);
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) t[i] += cell(i, j);
  return t;
}

std::vector<std::int64_t> FlowMatrix::col_totals() const {
  std::vector<std::int64_t> t(cols(), 0);
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) t[j] += cell(i, j);
  return t;
}

std::int64_t FlowMatrix::shared_total() const {
  std::int64_t s = 0;
  for (auto t : row_totals()) s += t;
  return s;
}

FlowMatrix FlowMatrix::transposed() const {
  FlowMatrix t;
  t.row_clusters = col_clusters;
  t.col_clusters = row_clusters;
  t.cells.assign(cells.size(), 0);
  for (std::size_t i = 0; i <= rows(); ++i)
    for (std::size_t j = 0; j <= cols(); ++j) t.cells[j * (rows() + 1) + i] = cell(i, j);
  return t;
}

namespace {

std::map<std::string, int> index_membership(const Membership& m, const char* which) {
  std::map<std::string, int> out;
  for (const auto& [id, c] : m) {
    if (!out.emplace(id, c).second)
      throw SchemaError(std::string("solution ") + which + " lists document '" + id + "' twice");
  }
  return out;
}

std::vector<int> cluster_ids(const std::map<std::string, int>& m) {
  std::vector<int> ids;
  for (const auto& [id, c] : m)
    if (c >= 0) ids.push_back(c);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

FlowMatrix flow_matrix(const Membership& a, const Membership& b) {
  auto ma = index_membership(a, "A");
  auto mb = index_membership(b, "B");
  FlowMatrix f;
  f.row_clusters = cluster_ids(ma);
  f.col_clusters = cluster_ids(mb);
  const std::size_t R = f.rows(), C = f.cols();
  f.cells.assign((R + 1) * (C + 1), 0);

  auto slot = [](const std::vector<int>& ids, const std::map<std::string, int>& m, const std::string& doc) {
    auto it = m.find(doc);
    if (it == m.end() || it->second < 0) return ids.size();
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), it->second) - ids.begin());
  };
  auto add = [&](const std::string& doc) {
    std::size_t i = slot(f.row_clusters, ma, doc);
    std::size_t j = slot(f.col_clusters, mb, doc);
    ++f.cells[i * (C + 1) + j];
  };
  for (const auto& [doc, c] : ma) add(doc);
  for (const auto& [doc, c] : mb)
    if (!ma.contains(doc)) add(doc);
  return f;
}

PartitionSimilarity partition_similarity(const FlowMatrix& flow) {
  const auto n = flow.shared_total();
  if (n <= 0) throw std::invalid_argument("flow matrix shares no document");
  const double N = static_cast<double>(n);
  auto rows = flow.row_totals();
  auto cols = flow.col_totals();

  double mi = 0.0, hr = 0.0, hc = 0.0;
  for (auto r : rows)
    if (r > 0) hr -= (static_cast<double>(r) / N) * std::log(static_cast<double>(r) / N);
  for (auto c : cols)
    if (c > 0) hc -= (static_cast<double>(c) / N) * std::log(static_cast<double>(c) / N);
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0;
  for (std::size_t i = 0; i < flow.rows(); ++i) {
    for (std::size_t j = 0; j < flow.cols(); ++j) {
      const double nij = static_cast<double>(flow.cell(i, j));
      if (nij <= 0.0) continue;
      mi += (nij / N) * std::log(nij * N / (static_cast<double>(rows[i]) * static_cast<double>(cols[j])));
      index += comb2(nij);
    }
  }
  PartitionSimilarity s;
  s.nmi = (hr > 0.0 && hc > 0.0) ? std::clamp(mi / std::sqrt(hr * hc), 0.0, 1.0) : 0.0;

  double sum_r = 0.0, sum_c = 0.0;
  for (auto r : rows) sum_r += comb2(static_cast<double>(r));
  for (auto c : cols) sum_c += comb2(static_cast<double>(c));
  const double pairs = comb2(N);
  const double expected = pairs > 0.0 ? sum_r * sum_c / pairs : 0.0;
  const double max_index = 0.5 * (sum_r + sum_c);
  s.ari = max_index == expected ? 1.0 : (index - expected) / (max_index - expected);
  return s;
}

void write_flow_json(const FlowMatrix& flow, std::ostream& out, const std::string& name_a, const std::string& name_b) {
  nlohmann::ordered_json j;
  auto labels = [](const std::vector<int>& ids) {
    auto arr = nlohmann::ordered_json::array();
    for (int c : ids) arr.push_back(std::to_string(c));
    arr.push_back("unassigned");
    return arr;
  };
  j["solution_a"] = name_a;
  j["solution_b"] = name_b;
  j["rows"] = labels(flow.row_clusters);
  j["columns"] = labels(flow.col_clusters);
  auto cells = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i <= flow.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t j2 = 0; j2 <= flow.cols(); ++j2) row.push_back(flow.cell(i, j2));
    cells.push_back(std::move(row));
  }
  j["cells"] = std::move(cells);
  j["row_totals"] = flow.row_totals();
  j["column_totals"] = flow.col_totals();
  j["shared_documents"] = flow.shared_total();
  // Sankey-style link list over nonzero cells, including unassigned flows.
  auto links = nlohmann::ordered_json::array();
  const auto rl = j["rows"];
  const auto cl = j["columns"];
  for (std::size_t i = 0; i <= flow.rows(); ++i)
    for (std::size_t k = 0; k <= flow.cols(); ++k)
      if (flow.cell(i, k) > 0)
        links.push_back({{"source", name_a + ":" + rl[i].get<std::string>()},
                         {"target", name_b + ":" + cl[k].get<std::string>()},
                         {"value", flow.cell(i, k)}});
  j["links"] = std::move(links);
  out << j.dump(2) << '\n';
}

}  // namespace topomap
