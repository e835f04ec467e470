#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpuskit/document.hpp"

namespace corpuskit {

// Lowercase, keep only alphanumerics (and combining marks) and spaces,
// collapse runs of whitespace to one space, trim.
std::string normalize_line(std::string_view line);

struct LineIndex {
  std::unordered_set<std::uint64_t> seen;
  // Filled only when track_counts is set; maps line hash to occurrences.
  std::unordered_map<std::uint64_t, std::uint64_t> occurrence_counts;
  bool track_counts = false;

  // True if the normalized line was already present.
  bool check_and_insert(std::string_view normalized);
};

enum class DedupAction { Kept, LineTrimmed, Dropped };
std::string_view to_string(DedupAction a);

struct DedupReport {
  std::string id;
  DedupAction action = DedupAction::Kept;
  double dup_ratio = 0.0;
};

struct LineDedupResult {
  std::optional<Document> doc;  // nullopt when nothing is left
  std::size_t removed_lines = 0;
  std::size_t total_lines = 0;
};

// Removes every line whose normalized form was seen earlier in the index.
// Lines that normalize to the empty string are never treated as duplicates.
LineDedupResult exact_line_dedup(const Document& doc, LineIndex& index);
std::vector<Document> exact_line_dedup(const std::vector<Document>& docs, LineIndex& index);

struct NGramState {
  std::unordered_set<std::uint64_t> seen;
  int n = 5;
  double dup_threshold = 0.5;
  double doc_threshold = 0.5;
  // Whether n-grams of dropped documents still enter the seen set.
  bool seed_dropped = true;

  void validate() const;
};

struct OnionResult {
  std::optional<Document> doc;  // nullopt when the document is dropped
  double dup_ratio = 0.0;
  std::size_t duplicate_paragraphs = 0;
  std::size_t total_paragraphs = 0;
};

// Word n-gram hashes of a paragraph text, in order (with repeats).
std::vector<std::uint64_t> paragraph_ngrams(std::string_view paragraph_text, int n);

OnionResult onion_paragraph_dedup(const Document& doc, NGramState& state);

enum class DedupMode { Corpus, Source, LinesOnly };
DedupMode dedup_mode_from_string(std::string_view s);
std::string_view to_string(DedupMode m);

struct DedupConfig {
  DedupMode default_mode = DedupMode::Corpus;
  std::map<std::string, DedupMode> per_language;
  int n = 5;
  double dup_threshold = 0.5;
  double doc_threshold = 0.5;
  bool seed_dropped = true;

  DedupMode mode_for(const std::string& lang) const;
  NGramState fresh_state() const;
};

struct DedupOutput {
  std::vector<Document> docs;
  std::vector<DedupReport> report;
};

// Each language gets its own state; in Source mode each (language, source)
// does. Processing follows input order.
DedupOutput run_exact_lines(const std::vector<Document>& docs, const DedupConfig& config);
DedupOutput run_onion(const std::vector<Document>& docs, const DedupConfig& config);

// Exact-line removal followed by Onion (skipped for LinesOnly languages).
DedupOutput dedup_pipeline(const std::vector<Document>& docs, const DedupConfig& config);

}  // namespace corpuskit
