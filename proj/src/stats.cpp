#include "corpuskit/stats.hpp"

#include "corpuskit/unicode.hpp"

namespace corpuskit {

double LanguageStats::avg_word_length() const {
  return word_count == 0 ? 0.0 : static_cast<double>(word_chars) / static_cast<double>(word_count);
}

LanguageStats& LanguageStats::operator+=(const LanguageStats& o) {
  doc_count += o.doc_count;
  token_count += o.token_count;
  byte_count += o.byte_count;
  word_count += o.word_count;
  word_chars += o.word_chars;
  return *this;
}

void CorpusStats::add(const Document& doc) {
  auto& s = per_language[doc.lang.code];
  s.doc_count += 1;
  s.byte_count += doc.text.size();
  if (doc.token_count) s.token_count += *doc.token_count;
  for (const auto& w : split_words(doc.text)) {
    s.word_count += 1;
    s.word_chars += utf8::length(w);
  }
}

void CorpusStats::merge(const CorpusStats& other) {
  for (const auto& [lang, s] : other.per_language) per_language[lang] += s;
}

const LanguageStats* CorpusStats::find(const std::string& lang) const {
  const auto it = per_language.find(lang);
  return it == per_language.end() ? nullptr : &it->second;
}

nlohmann::json CorpusStats::to_json(const std::string& stage) const {
  nlohmann::json langs = nlohmann::json::object();
  for (const auto& [lang, s] : per_language) {
    langs[lang] = {{"doc_count", s.doc_count},   {"token_count", s.token_count},
                   {"byte_count", s.byte_count}, {"word_count", s.word_count},
                   {"avg_word_length", s.avg_word_length()}};
  }
  if (stage.empty()) return langs;
  return {{"stage", stage}, {"languages", langs}};
}

CorpusStats compute_stats(const std::vector<Document>& docs) {
  CorpusStats stats;
  for (const auto& d : docs) stats.add(d);
  return stats;
}

}  // namespace corpuskit
