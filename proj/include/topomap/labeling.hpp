#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace topomap {

// 2x2 table over the scored documents: n11 = in cluster with label,
// n10 = label outside cluster, n01 = cluster without label, n00 = neither.
struct Contingency {
  std::int64_t n11 = 0;
  std::int64_t n10 = 0;
  std::int64_t n01 = 0;
  std::int64_t n00 = 0;

  std::int64_t total() const { return n11 + n10 + n01 + n00; }
  friend bool operator==(const Contingency&, const Contingency&) = default;
};

// Throws std::invalid_argument when cluster or label docs are not subsets of universe.
Contingency contingency(const std::set<std::string>& cluster_docs, const std::set<std::string>& label_docs,
                        const std::set<std::string>& universe);

enum class Direction { enriched, depleted };
enum class NmiNormalization { sqrt, min };

std::string to_string(Direction d);
NmiNormalization parse_nmi_normalization(std::string_view text);
std::string to_string(NmiNormalization n);

struct NmiResult {
  double nmi = 0.0;
  Direction direction = Direction::depleted;
};

// Mutual information (base 2) of label presence and cluster membership,
// normalized by sqrt(H(T) H(C)) or min(H(T), H(C)); 0 when an entropy is 0.
// enriched iff P(label | cluster) > P(label). Requires total() > 0.
NmiResult nmi_score(const Contingency& table, NmiNormalization normalization = NmiNormalization::sqrt);

enum class LabelMode { term, journal };
enum class Universe { giant_component, solution_members };

LabelMode parse_label_mode(std::string_view text);
std::string to_string(LabelMode m);
Universe parse_universe(std::string_view text);
std::string to_string(Universe u);

struct LabelScore {
  int cluster = 0;
  std::string label;
  double nmi = 0.0;
  Direction direction = Direction::enriched;
  Contingency counts;
};

// A scored document: cluster -1 marks a document outside every cluster.
struct LabeledDoc {
  std::string id;
  int cluster = -1;
  std::vector<std::string> labels;
};

struct LabelOptions {
  Universe universe = Universe::giant_component;
  std::size_t top_n = 20;
  // Labels carried by fewer universe documents are not scored.
  std::int64_t min_doc_freq = 5;
  NmiNormalization normalization = NmiNormalization::sqrt;
};

// Per cluster: enriched labels sorted by nmi descending (ties: label
// ascending), truncated to top_n. Throws std::invalid_argument on an empty universe.
std::map<int, std::vector<LabelScore>> rank_labels(std::span<const LabeledDoc> docs, const LabelOptions& options);

void write_labels_tsv(const std::map<int, std::vector<LabelScore>>& ranked, LabelMode mode, std::ostream& out);

}  // namespace topomap
