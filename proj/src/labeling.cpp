#include "topomap/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "topomap/io_util.hpp"

namespace topomap {

Contingency contingency(const std::set<std::string>& cluster_docs, const std::set<std::string>& label_docs,
                        const std::set<std::string>& universe) {
  auto subset = [&](const std::set<std::string>& s) {
    return std::includes(universe.begin(), universe.end(), s.begin(), s.end());
  };
  if (!subset(cluster_docs)) throw std::invalid_argument("cluster documents are not a subset of the universe");
  if (!subset(label_docs)) throw std::invalid_argument("label documents are not a subset of the universe");

  Contingency t;
  for (const auto& d : label_docs) {
    if (cluster_docs.contains(d)) ++t.n11;
    else ++t.n10;
  }
  t.n01 = static_cast<std::int64_t>(cluster_docs.size()) - t.n11;
  t.n00 = static_cast<std::int64_t>(universe.size()) - t.n11 - t.n10 - t.n01;
  return t;
}

std::string to_string(Direction d) { return d == Direction::enriched ? "enriched" : "depleted"; }

NmiNormalization parse_nmi_normalization(std::string_view text) {
  if (text == "sqrt") return NmiNormalization::sqrt;
  if (text == "min") return NmiNormalization::min;
  throw std::invalid_argument("unknown NMI normalization '" + std::string(text) + "' (expected sqrt|min)");
}

std::string to_string(NmiNormalization n) { return n == NmiNormalization::sqrt ? "sqrt" : "min"; }

LabelMode parse_label_mode(std::string_view text) {
  if (text == "term") return LabelMode::term;
  if (text == "journal") return LabelMode::journal;
  throw std::invalid_argument("unknown label mode '" + std::string(text) + "' (expected term|journal)");
}

std::string to_string(LabelMode m) { return m == LabelMode::term ? "term" : "journal"; }

Universe parse_universe(std::string_view text) {
  if (text == "giant_component") return Universe::giant_component;
  if (text == "solution_members") return Universe::solution_members;
  throw std::invalid_argument("unknown universe '" + std::string(text) + "' (expected giant_component|solution_members)");
}

std::string to_string(Universe u) { return u == Universe::giant_component ? "giant_component" : "solution_members"; }

namespace {

double entropy2(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

}  // namespace

NmiResult nmi_score(const Contingency& table, NmiNormalization normalization) {
  const auto total = table.total();
  if (total <= 0) throw std::invalid_argument("contingency table is empty");
  const double n = static_cast<double>(total);
  const double label_docs = static_cast<double>(table.n11 + table.n10);
  const double cluster_docs = static_cast<double>(table.n11 + table.n01);

  NmiResult r;
  r.direction = cluster_docs > 0.0 && static_cast<double>(table.n11) / cluster_docs > label_docs / n
                    ? Direction::enriched
                    : Direction::depleted;

  const double h_label = entropy2(label_docs / n);
  const double h_cluster = entropy2(cluster_docs / n);
  if (h_label <= 0.0 || h_cluster <= 0.0) return r;

  // cell(label present?, in cluster?) with margins
  const double cells[4][3] = {
      {static_cast<double>(table.n11), label_docs, cluster_docs},
      {static_cast<double>(table.n10), label_docs, n - cluster_docs},
      {static_cast<double>(table.n01), n - label_docs, cluster_docs},
      {static_cast<double>(table.n00), n - label_docs, n - cluster_docs},
  };
  double mi = 0.0;
  for (const auto& c : cells) {
    if (c[0] <= 0.0) continue;
    mi += (c[0] / n) * std::log2(c[0] * n / (c[1] * c[2]));
  }
  const double norm = normalization == NmiNormalization::sqrt ? std::sqrt(h_label * h_cluster) : std::min(h_label, h_cluster);
  r.nmi = std::clamp(mi / norm, 0.0, 1.0);
  return r;
}

std::map<int, std::vector<LabelScore>> rank_labels(std::span<const LabeledDoc> docs, const LabelOptions& options) {
  // Universe documents with their (deduplicated) label indices.
  std::unordered_map<std::string, int> label_index;
  std::vector<std::string> label_names;
  std::vector<int> doc_cluster;
  std::vector<std::vector<int>> doc_labels;
  for (const auto& d : docs) {
    if (options.universe == Universe::solution_members && d.cluster < 0) continue;
    std::vector<int> ls;
    for (const auto& l : d.labels) {
      if (l.empty()) continue;
      auto [it, inserted] = label_index.try_emplace(l, static_cast<int>(label_names.size()));
      if (inserted) label_names.push_back(l);
      ls.push_back(it->second);
    }
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    doc_cluster.push_back(d.cluster);
    doc_labels.push_back(std::move(ls));
  }
  if (doc_cluster.empty()) throw std::invalid_argument("label universe is empty");

  const auto universe_size = static_cast<std::int64_t>(doc_cluster.size());
  std::vector<std::int64_t> doc_freq(label_names.size(), 0);
  std::map<int, std::int64_t> cluster_size;
  std::map<int, std::unordered_map<int, std::int64_t>> joint;
  for (std::size_t k = 0; k < doc_cluster.size(); ++k) {
    for (int l : doc_labels[k]) ++doc_freq[static_cast<std::size_t>(l)];
    if (doc_cluster[k] < 0) continue;
    ++cluster_size[doc_cluster[k]];
    auto& row = joint[doc_cluster[k]];
    for (int l : doc_labels[k]) ++row[l];
  }

  std::map<int, std::vector<LabelScore>> out;
  for (const auto& [c, size] : cluster_size) {
    std::vector<LabelScore> scores;
    for (const auto& [l, n11] : joint[c]) {
      const auto df = doc_freq[static_cast<std::size_t>(l)];
      if (df < options.min_doc_freq) continue;
      Contingency t{n11, df - n11, size - n11, universe_size - df - size + n11};
      auto r = nmi_score(t, options.normalization);
      if (r.direction != Direction::enriched) continue;
      scores.push_back({c, label_names[static_cast<std::size_t>(l)], r.nmi, r.direction, t});
    }
    std::sort(scores.begin(), scores.end(), [](const LabelScore& a, const LabelScore& b) {
      return a.nmi != b.nmi ? a.nmi > b.nmi : a.label < b.label;
    });
    if (scores.size() > options.top_n) scores.resize(options.top_n);
    out.emplace(c, std::move(scores));
  }
  return out;
}

void write_labels_tsv(const std::map<int, std::vector<LabelScore>>& ranked, LabelMode mode, std::ostream& out) {
  out << "cluster_id\trank\tlabel\tnmi\tn11\tn10\tn01\tn00\tmode\n";
  for (const auto& [c, scores] : ranked) {
    for (std::size_t r = 0; r < scores.size(); ++r) {
      const auto& s = scores[r];
      out << c << '\t' << r + 1 << '\t' << s.label << '\t' << io::format_double(s.nmi) << '\t' << s.counts.n11 << '\t'
          << s.counts.n10 << '\t' << s.counts.n01 << '\t' << s.counts.n00 << '\t' << to_string(mode) << '\n';
    }
  }
}

}  // namespace topomap
