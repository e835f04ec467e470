#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "corpuskit/document.hpp"
#include "corpuskit/hash.hpp"
#include "corpuskit/metrics.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/quality.hpp"
#include "corpuskit/sampler.hpp"
#include "corpuskit/unicode.hpp"

namespace fixture {

namespace fs = std::filesystem;
using corpuskit::Document;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "corpuskit-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline Document doc(std::string id, std::string lang, std::string text, std::string source = "web") {
  Document d;
  d.id = std::move(id);
  d.lang = corpuskit::language(lang);
  d.source = std::move(source);
  d.text = std::move(text);
  return d;
}

// Pronounceable lowercase word from a seeded generator.
inline std::string word(corpuskit::Rng& rng, int syllables) {
  static const char* onsets[] = {"b", "d", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "kl"};
  static const char* vowels[] = {"a", "e", "i", "o", "u"};
  std::string w;
  for (int i = 0; i < syllables; ++i) {
    w += onsets[rng.below(15)];
    w += vowels[rng.below(5)];
  }
  return w;
}

inline std::string sentence(corpuskit::Rng& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += word(rng, 1 + static_cast<int>(rng.below(3)));
  }
  return s + '.';
}

// Random valid UTF-8 drawn from ASCII, Latin-1, Cyrillic, Greek, CJK,
// combining marks, emoji and a few control and space characters.
inline std::string random_utf8(corpuskit::Rng& rng, std::size_t max_chars) {
  static const std::pair<char32_t, char32_t> ranges[] = {
      {0x20, 0x7E},     {0x09, 0x0A},     {0xA0, 0xFF},       {0x400, 0x44F},   {0x391, 0x3C9},
      {0x300, 0x36F},   {0x4E00, 0x4E80}, {0x1F600, 0x1F64F}, {0x30, 0x39},     {0x10000, 0x1000F},
  };
  const auto n = rng.below(max_chars + 1);
  std::string out;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto& r = ranges[rng.below(std::size(ranges))];
    corpuskit::utf8::append(out, static_cast<char32_t>(rng.between(r.first, r.second)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Heuristic filter boundaries.

inline constexpr double kGlobalAvgWordLen = 6.25;  // 1.44 x 6.25 == 9.0

inline corpuskit::StopwordTable heuristic_stopwords() {
  corpuskit::StopwordTable t;
  t.add("en", "the");
  return t;
}

// Exact character accounting for one synthetic document. Content words use
// consonants only so they never collide with the stop word "the".
struct DocShape {
  int words = 100;
  int stop = 20;       // "the"
  int one_letter = 10; // "y"
  int upper = 100;     // upper-cased content letters
  int digits = 20;     // appended to content words
  int punct = 30;      // ',' appended to content words
  int chars = 1000;    // total code points including spaces
};

inline std::string build_text(const DocShape& s) {
  static const std::string letters = "bcdfghjklmnpqrstvwxz";
  const int content = s.words - s.stop - s.one_letter;
  const int content_chars = s.chars - (s.words - 1) - s.digits - s.punct - s.one_letter - 3 * s.stop;
  std::vector<std::string> words;
  int upper_left = s.upper;
  for (int i = 0; i < content; ++i) {
    const int len = content_chars / content + (i < content_chars % content ? 1 : 0);
    std::string w;
    for (int k = 0; k < len; ++k) {
      char c = letters[static_cast<std::size_t>(i + k) % letters.size()];
      if (upper_left > 0) {
        c = static_cast<char>(c - 'a' + 'A');
        --upper_left;
      }
      w.push_back(c);
    }
    words.push_back(std::move(w));
  }
  for (int i = 0; i < s.digits; ++i) words[static_cast<std::size_t>(i % content)].push_back('7');
  for (int i = 0; i < s.punct; ++i) words[static_cast<std::size_t>(i % content)].push_back(',');
  for (int i = 0; i < s.stop; ++i) words.insert(words.begin() + 2 * i, "the");
  for (int i = 0; i < s.one_letter; ++i) words.insert(words.begin() + 3 * i + 1, "y");
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text.push_back(' ');
    text += w;
  }
  return text;
}

struct HeuristicCase {
  std::string name;
  DocShape shape;
  bool keep = true;
  corpuskit::QualityRule rule = corpuskit::QualityRule::Pass;
};

// Seven criteria, each exactly at its threshold (kept) and one unit past it
// (dropped with that criterion's reason).
inline std::vector<HeuristicCase> heuristic_cases() {
  using R = corpuskit::QualityRule;
  std::vector<HeuristicCase> cases;
  auto add = [&](std::string name, auto tweak, R rule) {
    DocShape at;
    DocShape past;
    tweak(at, past);
    cases.push_back({name + "/at", at, true, R::Pass});
    cases.push_back({name + "/past", past, false, rule});
  };
  add("punct_min", [](DocShape& a, DocShape& p) { a.punct = 12, p.punct = 11; }, R::PunctuationRatio);
  add("upper_max", [](DocShape& a, DocShape& p) { a.upper = 230, p.upper = 231; }, R::UppercaseRatio);
  add("digit_max", [](DocShape& a, DocShape& p) { a.digits = 110, p.digits = 111; }, R::DigitRatio);
  add("one_letter_max", [](DocShape& a, DocShape& p) { a.one_letter = 22, p.one_letter = 23; },
      R::OneLetterWordRatio);
  add("stopword_min", [](DocShape& a, DocShape& p) { a.stop = 8, p.stop = 7; }, R::StopwordRatio);
  add(
      "min_words",
      [](DocShape& a, DocShape& p) {
        a = {50, 10, 5, 50, 10, 15, 500};
        p = {49, 10, 5, 50, 10, 15, 500};
      },
      R::TooFewWords);
  add("word_len_factor", [](DocShape& a, DocShape& p) { a.chars = 1049, p.chars = 1050; },
      R::LongAverageWordLength);
  return cases;
}

// ---------------------------------------------------------------------------
// Upsampling table and benchmark table.

struct UpsamplingRow {
  std::string lang;
  double unique_b;
  double ratio;
  double total_b;
};

inline constexpr double kUpsamplingTarget = 26.1;

inline std::vector<UpsamplingRow> upsampling_rows() {
  return {
      {"ltg", 0.01, 2.34, 0.03},  {"ga", 0.3, 2.30, 0.6},     {"cnr", 0.5, 2.38, 1.2},    {"mt", 0.5, 2.16, 1.1},
      {"is", 1.7, 2.24, 3.9},     {"mk", 3.6, 2.33, 8.4},     {"sq", 6.7, 2.29, 15.3},    {"sr", 7.2, 2.17, 15.6},
      {"lv", 9.8, 2.35, 22.9},    {"no", 10.8, 2.41, 25.9},   {"da", 14.2, 1.84, 26.1},   {"bs", 14.5, 1.80, 26.1},
      {"et", 15.4, 1.70, 26.1},   {"sl", 16.7, 1.56, 26.1},   {"lt", 18.0, 1.45, 26.1},   {"sk", 21.9, 1.19, 26.1},
      {"hr", 22.9, 1.14, 26.1},   {"ro", 23.1, 1.13, 26.1},   {"sv", 26.1, 1.0, 26.1},    {"uk", 26.6, 1.0, 26.6},
      {"bg", 26.9, 1.0, 26.9},    {"hu", 33.6, 1.0, 33.6},    {"tr", 35.6, 1.0, 35.6},    {"fi", 38.0, 1.0, 38.0},
      {"es", 40.6, 1.0, 40.6},    {"nl", 41.6, 1.0, 41.6},    {"cs", 44.6, 1.0, 44.6},    {"pt", 47.6, 1.0, 47.6},
      {"it", 47.8, 1.0, 47.8},    {"math", 62.9, 1.0, 62.9},  {"parallel", 71.0, 1.0, 71.0}, {"ru", 77.5, 1.0, 77.5},
      {"pl", 99.1, 1.0, 99.1},    {"fr", 176.6, 1.0, 176.6},  {"de", 176.6, 1.0, 176.6},  {"code", 226.1, 1.0, 226.1},
      {"en", 397.4, 1.0, 397.4},
  };
}

inline const std::vector<std::string>& upsampling_subcap() {
  static const std::vector<std::string> v = {"ltg", "ga", "cnr", "mt", "is", "mk", "sq", "sr", "lv", "no"};
  return v;
}

inline const std::vector<std::string>& upsampling_capped() {
  static const std::vector<std::string> v = {"da", "bs", "et", "sl", "lt", "sk", "hr", "ro"};
  return v;
}

inline std::vector<corpuskit::BudgetInput> upsampling_inputs(bool with_overrides) {
  std::vector<corpuskit::BudgetInput> in;
  std::vector<std::string> sub = upsampling_subcap();
  for (const auto& r : upsampling_rows()) {
    corpuskit::BudgetInput b{r.lang, static_cast<std::uint64_t>(std::llround(r.unique_b * 1e9)), std::nullopt};
    if (with_overrides && std::find(sub.begin(), sub.end(), r.lang) != sub.end()) b.ratio_override = r.ratio;
    in.push_back(b);
  }
  return in;
}

inline corpuskit::BenchmarkTable benchmark_scores() {
  corpuskit::BenchmarkTable t;
  t.tasks = {"MultiBLiMP", "Belebele", "ARCx", "MMLUx", "Exams"};
  t.models = {"EuroLLM", "Gemma 2", "ALIA", "This work"};
  const double s[4][5] = {
      {96.4, 82.5, 65.6, 59.3, 62.5},
      {95.7, 79.5, 72.4, 69.3, 71.2},
      {96.7, 76.8, 65.9, 60.7, 62.7},
      {99.0, 84.7, 65.3, 59.9, 66.6},
  };
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t k = 0; k < 5; ++k) t.set(t.models[m], t.tasks[k], s[m][k]);
  return t;
}

// ---------------------------------------------------------------------------
// Topic model: three planted topics with disjoint vocabularies.

struct PlantedCorpus {
  std::vector<Document> docs;
  std::vector<int> topic_of_doc;
  std::vector<std::vector<std::string>> vocab;  // per planted topic
};

inline PlantedCorpus planted_topics(std::size_t docs = 300, std::size_t words_per_topic = 20,
                                    std::size_t doc_len = 40, std::uint64_t seed = 11) {
  static const char* stems[3] = {"propag", "garden", "orbit"};
  PlantedCorpus pc;
  pc.vocab.resize(3);
  for (int t = 0; t < 3; ++t)
    for (std::size_t w = 0; w < words_per_topic; ++w)
      pc.vocab[static_cast<std::size_t>(t)].push_back(std::string(stems[t]) + static_cast<char>('a' + w % 26) +
                                                      static_cast<char>('a' + w / 26));
  corpuskit::Rng rng(seed);
  for (std::size_t d = 0; d < docs; ++d) {
    const int t = static_cast<int>(d % 3);
    const auto& v = pc.vocab[static_cast<std::size_t>(t)];
    std::string text;
    for (std::size_t i = 0; i < doc_len; ++i) {
      if (i) text += ' ';
      text += v[rng.below(v.size())];
    }
    pc.docs.push_back(doc("planted-" + std::to_string(d), "en", text));
    pc.topic_of_doc.push_back(t);
  }
  return pc;
}

// ---------------------------------------------------------------------------
// Tokenizer equity: the same text, and a copy with every letter doubled.

struct EquityFixture {
  std::map<std::string, std::string> samples;
  std::map<std::string, std::vector<std::string>> parallel;
};

inline std::string doubled(std::string_view s) {
  std::string out;
  for (const char c : s) {
    out.push_back(c);
    if (c != ' ' && c != '.') out.push_back(c);
  }
  return out;
}

inline EquityFixture equity_fixture(std::size_t sample_sentences = 600, std::size_t eval_sentences = 60) {
  EquityFixture f;
  corpuskit::Rng rng(5);
  std::vector<std::string> lex;
  for (int i = 0; i < 120; ++i) lex.push_back(word(rng, 1 + static_cast<int>(rng.below(3))));
  auto make = [&](std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
      std::string s;
      const auto len = 6 + rng.below(6);
      for (std::uint64_t k = 0; k < len; ++k) {
        if (k) s += ' ';
        s += lex[rng.below(lex.size())];
      }
      out.push_back(s + '.');
    }
    return out;
  };
  std::string plain, twice;
  for (const auto& s : make(sample_sentences)) {
    plain += s + '\n';
    twice += doubled(s) + '\n';
  }
  f.samples = {{"aa", plain}, {"bb", twice}};
  for (const auto& s : make(eval_sentences)) {
    f.parallel["aa"].push_back(s);
    f.parallel["bb"].push_back(doubled(s));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Parallel data: 500 pairs over five directions and two origins, with
// sentences shared between pairs so the usage constraint has work to do.

inline std::vector<corpuskit::SentencePair> parallel_pairs(std::size_t n = 500, std::uint64_t seed = 3) {
  static const std::pair<const char*, const char*> dirs[] = {
      {"sl", "hr"}, {"hr", "sl"}, {"en", "de"}, {"de", "fr"}, {"en", "fr"}};
  static const char* origins[] = {"corpus-a", "corpus-b"};
  corpuskit::Rng rng(seed);
  std::map<std::string, std::vector<std::string>> pool;
  for (const char* l : {"sl", "hr", "en", "de", "fr"})
    for (int i = 0; i < 140; ++i) pool[l].push_back(sentence(rng, 4 + static_cast<int>(rng.below(12))) + " <" + l + ">");
  std::vector<corpuskit::SentencePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = dirs[rng.below(std::size(dirs))];
    corpuskit::SentencePair p;
    p.src_lang = d.first;
    p.tgt_lang = d.second;
    p.src_text = pool[p.src_lang][rng.below(pool[p.src_lang].size())];
    p.tgt_text = pool[p.tgt_lang][rng.below(pool[p.tgt_lang].size())];
    if (i % 7 == 0) p.src_text += " & \"quoted\"";
    p.origin = origins[rng.below(2)];
    pairs.push_back(std::move(p));
  }
  return pairs;
}

inline std::size_t whitespace_tokens(std::string_view s) { return corpuskit::split_whitespace(s).size(); }

}  // namespace fixture
