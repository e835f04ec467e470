#include "corpuskit/quality.hpp"

#include <cmath>

#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

void HeuristicThresholds::validate() const {
  auto ratio = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw ValidationError(std::string(name) + " must be in (0, 1)");
  };
  ratio(punct_min, "punct_min");
  ratio(punct_max, "punct_max");
  ratio(upper_max, "upper_max");
  ratio(digit_max, "digit_max");
  ratio(one_letter_max, "one_letter_max");
  ratio(stopword_min, "stopword_min");
  if (!(punct_min < punct_max)) throw ValidationError("punct_min must be below punct_max");
  if (min_words < 1) throw ValidationError("min_words must be >= 1");
  if (!(word_len_factor > 1.0)) throw ValidationError("word_len_factor must be > 1");
}

void HeuristicThresholds::set(std::string_view key, double v) {
  if (key == "punct_min") {
    punct_min = v;
  } else if (key == "punct_max") {
    punct_max = v;
  } else if (key == "upper_max") {
    upper_max = v;
  } else if (key == "digit_max") {
    digit_max = v;
  } else if (key == "one_letter_max") {
    one_letter_max = v;
  } else if (key == "stopword_min") {
    stopword_min = v;
  } else if (key == "min_words") {
    min_words = std::lround(v);
  } else if (key == "word_len_factor") {
    word_len_factor = v;
  } else {
    throw ValidationError("unknown threshold '" + std::string(key) + "'");
  }
}

HeuristicThresholds HeuristicThresholds::load(const std::filesystem::path& path) {
  HeuristicThresholds th;
  for (const auto& line : read_list_file(path)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("threshold line without '=': " + line);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (value.empty() || used != value.size()) {
      throw ValidationError("threshold '" + key + "' has non-numeric value '" + value + "'");
    }
    th.set(key, v);
  }
  th.validate();
  return th;
}

void StopwordTable::add(const std::string& lang, std::string_view word) {
  auto w = to_lower(trim(word));
  if (!w.empty()) per_language_[lang].insert(std::move(w));
}

bool StopwordTable::has(const std::string& lang) const {
  const auto it = per_language_.find(lang);
  return it != per_language_.end() && !it->second.empty();
}

bool StopwordTable::contains(const std::string& lang, std::string_view lowercase_word) const {
  const auto it = per_language_.find(lang);
  return it != per_language_.end() && it->second.count(lowercase_word) != 0;
}

StopwordTable StopwordTable::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("stop-word directory not found: " + dir.string());
  StopwordTable table;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const auto lang = to_lower(entry.path().stem().string());
    for (const auto& w : read_list_file(entry.path())) table.add(lang, w);
  }
  return table;
}

QualityMetrics score_text(std::string_view text, const std::string& lang, const StopwordTable& stops) {
  QualityMetrics m;
  std::size_t chars = 0, punct = 0, upper = 0, digits = 0;
  for (std::size_t i = 0; i < text.size();) {
    const auto d = utf8::decode(text, i);
    i += d.len;
    ++chars;
    if (!d.valid) continue;
    if (uchar::is_punct(d.cp)) ++punct;
    if (uchar::is_upper(d.cp)) ++upper;
    if (uchar::is_digit(d.cp)) ++digits;
  }
  if (chars != 0) {
    const auto n = static_cast<double>(chars);
    m.punct_ratio = static_cast<double>(punct) / n;
    m.upper_ratio = static_cast<double>(upper) / n;
    m.digit_ratio = static_cast<double>(digits) / n;
  }

  const auto words = split_words(text);
  m.word_count = static_cast<long>(words.size());
  const bool have_stops = stops.has(lang);
  std::size_t one_letter = 0, stop_hits = 0, word_chars = 0;
  for (const auto& w : words) {
    const auto len = utf8::length(w);
    word_chars += len;
    if (len == 1) ++one_letter;
    if (have_stops && stops.contains(lang, to_lower(w))) ++stop_hits;
  }
  if (!words.empty()) {
    const auto n = static_cast<double>(words.size());
    m.one_letter_ratio = static_cast<double>(one_letter) / n;
    m.avg_word_len = static_cast<double>(word_chars) / n;
  }
  if (have_stops) {
    m.stopword_ratio = words.empty() ? 0.0 : static_cast<double>(stop_hits) / static_cast<double>(words.size());
  }
  return m;
}

QualityMetrics score_document(const Document& doc, const StopwordTable& stops, bool require_stopwords) {
  if (require_stopwords && !stops.has(doc.lang.code)) {
    throw ValidationError("no stop-word list for language '" + doc.lang.code + "'");
  }
  return score_text(doc.text, doc.lang.code, stops);
}

std::string_view to_string(QualityRule r) {
  switch (r) {
    case QualityRule::Pass:
      return "Pass";
    case QualityRule::PunctuationRatio:
      return "PunctuationRatio";
    case QualityRule::UppercaseRatio:
      return "UppercaseRatio";
    case QualityRule::DigitRatio:
      return "DigitRatio";
    case QualityRule::OneLetterWordRatio:
      return "OneLetterWordRatio";
    case QualityRule::StopwordRatio:
      return "StopwordRatio";
    case QualityRule::TooFewWords:
      return "TooFewWords";
    case QualityRule::LongAverageWordLength:
      return "LongAverageWordLength";
  }
  return "Pass";
}

QualityVerdict apply_heuristics(const QualityMetrics& m, const HeuristicThresholds& th, double lang_avg_word_len) {
  auto drop = [](QualityRule r) { return QualityVerdict{false, r}; };
  if (m.punct_ratio < th.punct_min || m.punct_ratio > th.punct_max) return drop(QualityRule::PunctuationRatio);
  if (m.upper_ratio > th.upper_max) return drop(QualityRule::UppercaseRatio);
  if (m.digit_ratio > th.digit_max) return drop(QualityRule::DigitRatio);
  if (m.one_letter_ratio > th.one_letter_max) return drop(QualityRule::OneLetterWordRatio);
  if (m.stopword_ratio && *m.stopword_ratio < th.stopword_min) return drop(QualityRule::StopwordRatio);
  if (m.word_count < th.min_words) return drop(QualityRule::TooFewWords);
  if (lang_avg_word_len > 0.0 && m.avg_word_len > th.word_len_factor * lang_avg_word_len) {
    return drop(QualityRule::LongAverageWordLength);
  }
  return {};
}

}  // namespace corpuskit
