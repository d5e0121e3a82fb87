#include "topomap/corpus.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "topomap/errors.hpp"
#include "topomap/io_util.hpp"

namespace topomap {

DocType DocType::parse(std::string_view text) {
  std::string t = io::to_lower_ascii(io::trim(text));
  if (t == "article" || t == "articles") return {DocKind::article, {}};
  if (t == "letter" || t == "letters") return {DocKind::letter, {}};
  if (t == "review" || t == "reviews") return {DocKind::review, {}};
  return {DocKind::other, t};
}

std::string DocType::to_string() const {
  switch (kind) {
    case DocKind::article: return "article";
    case DocKind::letter: return "letter";
    case DocKind::review: return "review";
    case DocKind::other: break;
  }
  return other_label;
}

void CorpusFilter::validate() const {
  if (year_min > year_max) throw std::invalid_argument("corpus filter: year_min > year_max");
  if (allowed_doc_types.empty()) throw std::invalid_argument("corpus filter: no document type allowed");
}

bool CorpusFilter::accepts(const PublicationRecord& record) const {
  return record.year >= year_min && record.year <= year_max && allowed_doc_types.contains(record.doc_type);
}

namespace {

std::vector<std::string> dedup_references(const std::vector<std::string>& refs) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& r : refs) {
    std::string id(io::trim(r));
    if (id.empty()) continue;
    if (seen.insert(id).second) out.push_back(std::move(id));
  }
  return out;
}

int parse_year(std::string_view text, std::size_t line) {
  auto t = io::trim(text);
  int year = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), year);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ParseError(line, "year is not an integer: '" + std::string(t) + "'");
  if (year <= 0) throw ParseError(line, "year must be positive");
  return year;
}

PublicationRecord parse_json_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");

  auto text_field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw ParseError(line_no, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };

  PublicationRecord rec;
  auto id_it = j.find("id");
  if (id_it == j.end() || id_it->is_null()) throw ParseError(line_no, "missing mandatory field 'id'");
  if (id_it->is_string())
    rec.id = std::string(io::trim(id_it->get<std::string>()));
  else if (id_it->is_number_integer())
    rec.id = std::to_string(id_it->get<long long>());
  else
    throw ParseError(line_no, "field 'id' must be a string");
  if (rec.id.empty()) throw ParseError(line_no, "empty 'id'");

  auto year_it = j.find("year");
  if (year_it == j.end() || year_it->is_null()) throw ParseError(line_no, "missing mandatory field 'year'");
  if (year_it->is_number_integer()) {
    auto y = year_it->get<long long>();
    if (y <= 0 || y > 100000) throw ParseError(line_no, "year must be positive");
    rec.year = static_cast<int>(y);
  } else if (year_it->is_string()) {
    rec.year = parse_year(year_it->get<std::string>(), line_no);
  } else {
    throw ParseError(line_no, "field 'year' must be an integer");
  }

  rec.doc_type = DocType::parse(text_field("doc_type"));
  rec.title = text_field("title");
  rec.abstract_text = text_field("abstract");
  rec.journal = text_field("journal");

  if (auto it = j.find("references"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(line_no, "field 'references' must be an array");
    std::vector<std::string> refs;
    for (const auto& r : *it) {
      if (r.is_string())
        refs.push_back(r.get<std::string>());
      else if (r.is_number_integer())
        refs.push_back(std::to_string(r.get<long long>()));
      else
        throw ParseError(line_no, "reference entries must be strings");
    }
    rec.references = dedup_references(refs);
  }
  return rec;
}

PublicationRecord parse_tsv_line(std::string_view line, std::size_t line_no) {
  auto fields = io::split(line, '\t');
  if (fields.size() > 7) throw ParseError(line_no, "too many columns (expected 7)");
  if (fields.size() < 2) throw ParseError(line_no, "missing mandatory field 'year'");
  fields.resize(7);

  PublicationRecord rec;
  rec.id = std::string(io::trim(fields[0]));
  if (rec.id.empty()) throw ParseError(line_no, "missing mandatory field 'id'");
  if (io::trim(fields[1]).empty()) throw ParseError(line_no, "missing mandatory field 'year'");
  rec.year = parse_year(fields[1], line_no);
  rec.doc_type = DocType::parse(fields[2]);
  rec.title = std::string(fields[3]);
  rec.abstract_text = std::string(fields[4]);
  rec.journal = std::string(io::trim(fields[5]));
  std::vector<std::string> refs;
  if (!io::trim(fields[6]).empty()) {
    for (auto r : io::split(fields[6], ';')) refs.emplace_back(r);
  }
  rec.references = dedup_references(refs);
  return rec;
}

}  // namespace

IngestResult ingest_corpus(std::istream& source, CorpusFormat format) {
  IngestResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty()) continue;
    if (format == CorpusFormat::tsv && line_no == 1 && line.rfind("id\t", 0) == 0) continue;

    PublicationRecord rec =
        format == CorpusFormat::jsonl ? parse_json_line(line, line_no) : parse_tsv_line(line, line_no);
    ++result.lines_read;
    if (!seen.insert(rec.id).second) {
      ++result.duplicate_ids;
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

FilterResult filter_corpus(std::vector<PublicationRecord> records, const CorpusFilter& filter) {
  filter.validate();
  FilterResult result;
  result.kept.reserve(records.size());
  for (auto& rec : records) {
    if (filter.accepts(rec))
      result.kept.push_back(std::move(rec));
    else
      ++result.dropped_count;
  }
  return result;
}

ExclusionList::ExclusionList(const std::vector<std::string>& phrases, bool substring_match)
    : substring_(substring_match) {
  for (const auto& p : phrases) {
    std::string t = io::to_lower_ascii(io::trim(p));
    if (t.empty()) continue;
    if (t.back() == '*') {
      t.pop_back();
      t = std::string(io::trim(t));
      if (!t.empty()) prefixes_.push_back(std::move(t));
    } else {
      exact_.insert(std::move(t));
    }
  }
}

bool ExclusionList::excludes(std::string_view term) const {
  std::string t = io::to_lower_ascii(term);
  if (exact_.contains(t)) return true;
  for (const auto& p : prefixes_) {
    if (t.starts_with(p) && t.find(' ', p.size()) == std::string::npos) return true;
  }
  if (substring_) {
    for (const auto& e : exact_)
      if (t.find(e) != std::string::npos) return true;
    for (const auto& p : prefixes_)
      if (t.find(p) != std::string::npos) return true;
  }
  return false;
}

namespace {

bool is_token_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

// Splits text into runs of tokens. A run ends at punctuation or a stopword.
// '-' and '\'' between two token characters stay inside the token.
std::vector<std::vector<std::string>> token_runs(std::string_view text,
                                                 const std::set<std::string, std::less<>>& stopwords) {
  std::vector<std::vector<std::string>> runs(1);
  auto close_run = [&] {
    if (!runs.back().empty()) runs.emplace_back();
  };
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    auto c = static_cast<unsigned char>(text[i]);
    if (is_token_char(c)) {
      std::string token;
      while (i < n) {
        auto d = static_cast<unsigned char>(text[i]);
        if (is_token_char(d)) {
          token.push_back(static_cast<char>(d >= 'A' && d <= 'Z' ? d - 'A' + 'a' : d));
          ++i;
        } else if ((d == '-' || d == '\'') && i + 1 < n && is_token_char(static_cast<unsigned char>(text[i + 1]))) {
          token.push_back(static_cast<char>(d));
          ++i;
        } else {
          break;
        }
      }
      if (stopwords.contains(token))
        close_run();
      else
        runs.back().push_back(std::move(token));
    } else if (std::isspace(c)) {
      ++i;
    } else {
      close_run();
      ++i;
    }
  }
  if (runs.back().empty()) runs.pop_back();
  return runs;
}

void add_ngrams(std::string_view text, const TermExtractionOptions& options, const ExclusionList& exclusions,
                std::set<std::string>& out) {
  for (const auto& run : token_runs(text, options.stopwords)) {
    for (std::size_t start = 0; start < run.size(); ++start) {
      std::string term;
      for (std::size_t len = 1; len <= options.max_ngram && start + len <= run.size(); ++len) {
        if (len > 1) term.push_back(' ');
        term += run[start + len - 1];
        if (!exclusions.excludes(term)) out.insert(term);
      }
    }
  }
}

}  // namespace

std::set<std::string> extract_terms_from_text(std::string_view text, const TermExtractionOptions& options,
                                              const ExclusionList& exclusions) {
  if (options.max_ngram < 1) throw std::invalid_argument("max_ngram must be at least 1");
  std::set<std::string> out;
  add_ngrams(text, options, exclusions, out);
  return out;
}

TermVector extract_terms(const PublicationRecord& record, const TermExtractionOptions& options,
                         const ExclusionList& exclusions) {
  if (options.max_ngram < 1) throw std::invalid_argument("max_ngram must be at least 1");
  TermVector tv{record.id, {}};
  add_ngrams(record.title, options, exclusions, tv.terms);
  add_ngrams(record.abstract_text, options, exclusions, tv.terms);
  return tv;
}

std::vector<TermVector> load_term_vectors(std::istream& source, const ExclusionList& exclusions) {
  std::vector<TermVector> out;
  std::unordered_map<std::string, std::size_t> slot;
  std::string line;
  std::size_t row = 0;
  while (std::getline(source, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row == 1 && line == "doc_id\tterm") continue;
    auto fields = io::split(line, '\t');
    if (fields.size() != 2) throw ParseError(row, "expected 2 columns (doc_id, term)");
    auto doc = io::trim(fields[0]);
    auto term = io::trim(fields[1]);
    if (doc.empty()) throw ParseError(row, "empty doc_id");
    if (term.empty()) throw ParseError(row, "empty term");
    std::string key(doc);
    auto [it, inserted] = slot.try_emplace(key, out.size());
    if (inserted) out.push_back({key, {}});
    std::string t = io::to_lower_ascii(term);
    if (!exclusions.excludes(t)) out[it->second].terms.insert(std::move(t));
  }
  return out;
}

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a",     "about", "after", "all",   "also", "an",    "and",   "are",  "as",    "at",
      "be",    "been",  "between", "both", "but",  "by",    "can",   "during", "each", "for",
      "from",  "had",   "has",   "have",  "however", "in", "into",  "is",   "it",    "its",
      "may",   "more",  "most",  "not",   "of",   "on",    "or",    "other", "our",  "over",
      "such",  "than",  "that",  "the",   "their", "these", "this",  "those", "through", "to",
      "under", "was",   "we",    "were",  "which", "while", "with",  "within", "without"};
  return words;
}

const std::vector<std::string>& default_query_exclusions() {
  static const std::vector<std::string> phrases = {
      "Ecological invasion*", "Biological invasion*", "Invasion biology",       "Invasion ecology",
      "Invasive species",     "Alien species",        "Introduced species",     "Non-native species",
      "Nonnative species",    "Nonindigenous species", "Non-indigenous species", "Allochthonous species",
      "Exotic species"};
  return phrases;
}

}  // namespace topomap
