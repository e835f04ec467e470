#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpuskit/document.hpp"

namespace corpuskit {

struct LanguageStats {
  std::uint64_t doc_count = 0;
  std::uint64_t token_count = 0;
  std::uint64_t byte_count = 0;
  std::uint64_t word_count = 0;
  std::uint64_t word_chars = 0;

  // Mean code-point length of words; 0 when no words were seen.
  double avg_word_length() const;

  LanguageStats& operator+=(const LanguageStats& o);
  friend bool operator==(const LanguageStats&, const LanguageStats&) = default;
};

// Sums of integers only, so accumulation order never changes the result.
struct CorpusStats {
  std::map<std::string, LanguageStats> per_language;

  void add(const Document& doc);
  void merge(const CorpusStats& other);
  const LanguageStats* find(const std::string& lang) const;

  // `stage` labels the pipeline point the numbers were taken at.
  nlohmann::json to_json(const std::string& stage = {}) const;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats compute_stats(const std::vector<Document>& docs);

}  // namespace corpuskit
