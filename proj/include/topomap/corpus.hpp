#pragma once

#include <cstddef>
#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace topomap {

enum class DocKind { article, letter, review, other };

// Document type; `other` keeps the source label (e.g. "proceedings").
struct DocType {
  DocKind kind = DocKind::other;
  std::string other_label;

  static DocType parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const DocType&, const DocType&) = default;
  friend auto operator<=>(const DocType&, const DocType&) = default;
};

struct PublicationRecord {
  std::string id;
  int year = 0;
  DocType doc_type;
  std::string title;
  std::string abstract_text;
  std::string journal;
  std::vector<std::string> references;
};

struct CorpusFilter {
  int year_min = 2000;
  int year_max = 2017;
  std::set<DocType> allowed_doc_types = {{DocKind::article, {}}, {DocKind::letter, {}}, {DocKind::review, {}}};

  // Throws std::invalid_argument when year_min > year_max or no type is allowed.
  void validate() const;
  bool accepts(const PublicationRecord& record) const;
};

enum class CorpusFormat { jsonl, tsv };

struct IngestResult {
  std::vector<PublicationRecord> records;
  std::size_t duplicate_ids = 0;
  std::size_t lines_read = 0;
};

// Parses a record stream. Ids are trimmed, duplicates resolved first-wins,
// reference lists deduplicated in first-seen order. Malformed lines and
// missing id/year raise ParseError with the 1-based line number.
IngestResult ingest_corpus(std::istream& source, CorpusFormat format);

struct FilterResult {
  std::vector<PublicationRecord> kept;
  std::size_t dropped_count = 0;
};

FilterResult filter_corpus(std::vector<PublicationRecord> records, const CorpusFilter& filter);

struct TermVector {
  std::string doc_id;
  std::set<std::string> terms;
};

// Exclusion phrases matched case-insensitively against whole terms. An entry
// ending in '*' matches any term that extends its stem within the last word
// ("biological invasion*" matches "biological invasions").
class ExclusionList {
 public:
  ExclusionList() = default;
  explicit ExclusionList(const std::vector<std::string>& phrases, bool substring_match = false);

  bool excludes(std::string_view term) const;
  bool empty() const { return exact_.empty() && prefixes_.empty(); }

 private:
  std::set<std::string, std::less<>> exact_;
  std::vector<std::string> prefixes_;
  bool substring_ = false;
};

struct TermExtractionOptions {
  std::set<std::string, std::less<>> stopwords;
  std::size_t max_ngram = 3;
};

// All 1..max_ngram-grams over lowercase token runs of title and abstract.
// Stopwords and punctuation split runs; no n-gram spans title and abstract.
TermVector extract_terms(const PublicationRecord& record, const TermExtractionOptions& options,
                         const ExclusionList& exclusions);

// Same rule applied to free text (used for idempotence checks and tooling).
std::set<std::string> extract_terms_from_text(std::string_view text, const TermExtractionOptions& options,
                                              const ExclusionList& exclusions);

// Rows (doc_id, term) grouped into presence sets in first-seen doc order.
// Empty doc id or term raises ParseError with the row number.
std::vector<TermVector> load_term_vectors(std::istream& source, const ExclusionList& exclusions);

const std::vector<std::string>& default_stopwords();
// The field-delineating query phrases, used as the default exclusion list.
const std::vector<std::string>& default_query_exclusions();

}  // namespace topomap
