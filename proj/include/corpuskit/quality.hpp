#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "corpuskit/document.hpp"
#include "corpuskit/stats.hpp"

namespace corpuskit {

struct HeuristicThresholds {
  double punct_min = 0.012;
  double punct_max = 0.08;
  double upper_max = 0.23;
  double digit_max = 0.11;
  double one_letter_max = 0.22;
  double stopword_min = 0.08;
  long min_words = 50;
  double word_len_factor = 1.44;

  void validate() const;
  // Sets the field named `key`; throws ValidationError for unknown names.
  void set(std::string_view key, double value);
  // `key=value` lines overriding the defaults; `#` starts a comment.
  static HeuristicThresholds load(const std::filesystem::path& path);
};

class StopwordTable {
 public:
  void add(const std::string& lang, std::string_view word);
  bool has(const std::string& lang) const;
  bool contains(const std::string& lang, std::string_view lowercase_word) const;

  // One `<lang>.txt` file per language, one word per line.
  static StopwordTable load_dir(const std::filesystem::path& dir);

 private:
  std::map<std::string, std::set<std::string, std::less<>>, std::less<>> per_language_;
};

struct QualityMetrics {
  double punct_ratio = 0.0;
  double upper_ratio = 0.0;
  double digit_ratio = 0.0;
  double one_letter_ratio = 0.0;
  // Absent when the language has no stop-word list.
  std::optional<double> stopword_ratio;
  long word_count = 0;
  double avg_word_len = 0.0;
};

QualityMetrics score_text(std::string_view text, const std::string& lang, const StopwordTable& stops);

// Throws ValidationError when `require_stopwords` is set and the language
// has no list.
QualityMetrics score_document(const Document& doc, const StopwordTable& stops, bool require_stopwords = false);

enum class QualityRule {
  Pass,
  PunctuationRatio,
  UppercaseRatio,
  DigitRatio,
  OneLetterWordRatio,
  StopwordRatio,
  TooFewWords,
  LongAverageWordLength,
};

std::string_view to_string(QualityRule r);

struct QualityVerdict {
  bool keep = true;
  QualityRule rule = QualityRule::Pass;
};

// The first firing criterion wins, in the order the fields are declared in
// HeuristicThresholds. Every comparison is strict.
QualityVerdict apply_heuristics(const QualityMetrics& m, const HeuristicThresholds& th, double lang_avg_word_len);

}  // namespace corpuskit
