#include "corpuskit/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_set>

#include "corpuskit/dedup.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/hash.hpp"
#include "corpuskit/metrics.hpp"
#include "corpuskit/process.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

std::string to_string(const LangPair& p) { return p.first + "-" + p.second; }

LangPair lang_pair_from_string(std::string_view s) {
  const auto t = trim(s);
  const auto dash = t.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == t.size() || t.find('-', dash + 1) != std::string::npos) {
    throw ValidationError("language pair must look like 'src-tgt': '" + t + "'");
  }
  return {to_lower(t.substr(0, dash)), to_lower(t.substr(dash + 1))};
}

void SentencePair::validate() const {
  if (src_lang.empty() || tgt_lang.empty()) throw ValidationError("sentence pair has an empty language");
  if (src_lang == tgt_lang) throw ValidationError("sentence pair has the same source and target language");
  if (src_text.empty() || tgt_text.empty()) throw ValidationError("sentence pair has an empty side");
}

namespace {

double parse_double(std::string_view s, const std::string& what) {
  const auto t = trim(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) throw ValidationError("bad number for " + what + ": '" + t + "'");
  return v;
}

}  // namespace

std::vector<SentencePair> parse_pairs_tsv(std::string_view text) {
  std::vector<SentencePair> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 5 && cols.size() != 6) {
      throw ValidationError("pairs line " + std::to_string(line_no) + ": expected 5 or 6 tab-separated columns");
    }
    SentencePair p;
    p.src_lang = to_lower(trim(cols[0]));
    p.tgt_lang = to_lower(trim(cols[1]));
    p.origin = trim(cols[2]);
    p.src_text = cols[3];
    p.tgt_text = cols[4];
    if (cols.size() == 6 && !trim(cols[5]).empty()) {
      p.score = parse_double(cols[5], "score on pairs line " + std::to_string(line_no));
    }
    try {
      p.validate();
    } catch (const ValidationError& e) {
      throw ValidationError("pairs line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SentencePair> read_pairs_tsv(const std::filesystem::path& path) { return parse_pairs_tsv(read_file(path)); }

std::string format_pairs_tsv(const std::vector<SentencePair>& pairs) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& p : pairs) {
    out << p.src_lang << '\t' << p.tgt_lang << '\t' << p.origin << '\t' << p.src_text << '\t' << p.tgt_text;
    if (p.score) out << '\t' << *p.score;
    out << '\n';
  }
  return out.str();
}

std::vector<double> ConstantScorer::score_batch(const std::vector<SentencePair>& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto it = per_pair_.find(p.pair());
    out.push_back(it == per_pair_.end() ? value_ : it->second);
  }
  return out;
}

double StubScorer::score(const SentencePair& p) {
  const auto ls = static_cast<double>(utf8::length(p.src_text));
  const auto lt = static_cast<double>(utf8::length(p.tgt_text));
  const double ratio = std::max(ls, lt) > 0.0 ? std::min(ls, lt) / std::max(ls, lt) : 0.0;
  std::set<std::string> a, b;
  for (auto& w : chrf_words(to_lower(p.src_text))) a.insert(std::move(w));
  for (auto& w : chrf_words(to_lower(p.tgt_text))) b.insert(std::move(w));
  std::size_t common = 0;
  for (const auto& w : a) common += b.count(w);
  const auto uni = a.size() + b.size() - common;
  const double overlap = uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
  return 0.5 * ratio + 0.5 * overlap;
}

std::vector<double> StubScorer::score_batch(const std::vector<SentencePair>& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(score(p));
  return out;
}

std::vector<double> CommandScorer::score_batch(const std::vector<SentencePair>& pairs) {
  if (pairs.empty()) return {};
  std::vector<SentencePair> unscored = pairs;
  for (auto& p : unscored) p.score.reset();
  const auto output = run_command(command_, format_pairs_tsv(unscored));
  std::vector<double> out;
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out.push_back(parse_double(line, "scorer output line " + std::to_string(out.size() + 1)));
  }
  if (out.size() != pairs.size()) {
    throw Error("scorer returned " + std::to_string(out.size()) + " scores for " + std::to_string(pairs.size()) +
                " pairs");
  }
  return out;
}

double ThresholdTable::at(const LangPair& p) const {
  const auto it = thresholds.find(p);
  if (it == thresholds.end()) throw ValidationError("no threshold for language pair " + to_string(p));
  return it->second;
}

std::string ThresholdTable::to_tsv() const {
  std::ostringstream out;
  out.precision(17);
  out << "src\ttgt\tthreshold\tcalibration_mean\n";
  for (const auto& [p, t] : thresholds) {
    const auto m = calibration_means.find(p);
    out << p.first << '\t' << p.second << '\t' << t << '\t';
    if (m != calibration_means.end()) out << m->second;
    out << '\n';
  }
  return out.str();
}

ThresholdTable ThresholdTable::parse_tsv(std::string_view text) {
  ThresholdTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && line.rfind("src\t", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    if (trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 3) throw ValidationError("threshold line needs src, tgt and threshold");
    const LangPair p{to_lower(trim(cols[0])), to_lower(trim(cols[1]))};
    t.thresholds[p] = parse_double(cols[2], "threshold " + to_string(p));
    if (cols.size() > 3 && !trim(cols[3]).empty()) t.calibration_means[p] = parse_double(cols[3], "mean");
  }
  return t;
}

ThresholdTable calibrate_thresholds(QualityScorer& scorer, const std::map<LangPair, std::vector<SentencePair>>& dev) {
  ThresholdTable table;
  for (const auto& [pair, sents] : dev) {
    if (sents.empty()) throw ValidationError("empty calibration set for " + to_string(pair));
    const auto scores = scorer.score_batch(sents);
    if (scores.size() != sents.size()) throw Error("scorer returned the wrong number of scores");
    // Running mean: exact when every score is equal.
    double mean = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) mean += (scores[i] - mean) / static_cast<double>(i + 1);
    table.calibration_means[pair] = mean;
    table.thresholds[pair] = kThresholdFactor * mean;
  }
  return table;
}

std::vector<SentencePair> filter_pairs(const std::vector<SentencePair>& pairs, const ThresholdTable& table,
                                       QualityScorer* scorer) {
  std::vector<SentencePair> need;
  std::vector<std::size_t> need_idx;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    table.at(pairs[i].pair());
    if (!pairs[i].score) {
      need.push_back(pairs[i]);
      need_idx.push_back(i);
    }
  }
  std::vector<double> scores(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) scores[i] = pairs[i].score.value_or(0.0);
  if (!need.empty()) {
    if (scorer == nullptr) throw ValidationError("pair without a score and no scorer configured");
    const auto got = scorer->score_batch(need);
    if (got.size() != need.size()) throw Error("scorer returned the wrong number of scores");
    for (std::size_t k = 0; k < need.size(); ++k) scores[need_idx[k]] = got[k];
  }
  std::vector<SentencePair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (scores[i] >= table.at(pairs[i].pair())) {
      out.push_back(pairs[i]);
      out.back().score = scores[i];
    }
  }
  return out;
}

std::vector<LangPair> load_priorities(const std::filesystem::path& path) {
  std::vector<LangPair> out;
  for (const auto& line : read_list_file(path)) out.push_back(lang_pair_from_string(line));
  return out;
}

std::vector<SentencePair> allocate_sentences(const std::vector<SentencePair>& pairs, const AllocationOptions& options) {
  std::map<LangPair, std::size_t> rank;
  for (const auto& p : options.priorities) rank.emplace(p, rank.size());
  const auto last = rank.size();

  std::vector<std::vector<std::size_t>> classes(last + 1);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto it = rank.find(pairs[i].pair());
    classes[it == rank.end() ? last : it->second].push_back(i);
  }

  Rng rng(hash_combine(options.seed, fnv1a64("allocate")));
  std::unordered_set<std::string> used_src, used_tgt;
  std::vector<std::size_t> accepted;
  for (auto& cls : classes) {
    rng.shuffle(cls);
    for (const auto i : cls) {
      auto s = normalize_line(pairs[i].src_text);
      auto t = normalize_line(pairs[i].tgt_text);
      if (used_src.count(s) != 0 || used_tgt.count(t) != 0) continue;
      used_src.insert(std::move(s));
      used_tgt.insert(std::move(t));
      accepted.push_back(i);
    }
  }
  std::vector<SentencePair> out;
  out.reserve(accepted.size());
  for (const auto i : accepted) out.push_back(pairs[i]);
  return out;
}

nlohmann::json ParallelDocument::to_json() const {
  return {{"id", id},
          {"lang", "parallel"},
          {"source", origin},
          {"src", lang_pair.first},
          {"tgt", lang_pair.second},
          {"pair_count", pair_count},
          {"token_count", token_count},
          {"target_tokens", target_tokens},
          {"text", xml_text}};
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

namespace {

std::string open_tag(const LangPair& lp, const std::string& origin) {
  return "<bitext src=\"" + xml_escape(lp.first) + "\" tgt=\"" + xml_escape(lp.second) + "\" origin=\"" +
         xml_escape(origin) + "\">";
}

constexpr std::string_view kCloseTag = "\n</bitext>";

std::string element(char tag, std::size_t index, std::string_view text) {
  return std::string("\n<") + tag + " i=\"" + std::to_string(index) + "\">" + xml_escape(text) + "</" + tag + ">";
}

}  // namespace

std::string render_bitext(const LangPair& lp, const std::string& origin, const std::vector<const SentencePair*>& pairs) {
  std::string out = open_tag(lp, origin);
  for (std::size_t k = 0; k < pairs.size(); ++k) out += element('s', k + 1, pairs[k]->src_text);
  for (std::size_t k = 0; k < pairs.size(); ++k) out += element('t', k + 1, pairs[k]->tgt_text);
  out += kCloseTag;
  return out;
}

BuildResult build_documents(const std::vector<SentencePair>& pairs, const TokenCounter& count,
                            const BuildOptions& options) {
  if (options.max_tokens == 0) throw ValidationError("max_tokens must be positive");
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    groups[{pairs[i].src_lang, pairs[i].tgt_lang, pairs[i].origin}].push_back(i);
  }

  BuildResult result;
  for (const auto& [key, idx] : groups) {
    const auto& [src, tgt, origin] = key;
    const LangPair lp{src, tgt};
    Rng rng(hash_combine(options.seed, fnv1a64(src + '\0' + tgt + '\0' + origin)));
    const auto draw = [&]() -> std::uint64_t {
      if (options.max_tokens <= options.min_target) return options.max_tokens;
      return rng.between(options.min_target, options.max_tokens);
    };
    const std::uint64_t base = count(open_tag(lp, origin) + std::string(kCloseTag));
    std::size_t doc_no = 0;

    std::vector<const SentencePair*> cur;
    std::uint64_t est = base;
    std::uint64_t target = draw();

    const auto estimate = [&](const std::vector<const SentencePair*>& ps) {
      std::uint64_t e = base;
      for (std::size_t k = 0; k < ps.size(); ++k) {
        e += count(element('s', k + 1, ps[k]->src_text)) + count(element('t', k + 1, ps[k]->tgt_text));
      }
      return e;
    };

    // Emits the open document. Pairs that only fit by estimate are carried
    // into the next one.
    const auto flush = [&]() {
      if (cur.empty()) return;
      auto xml = render_bitext(lp, origin, cur);
      auto tokens = count(xml);
      std::vector<const SentencePair*> carry;
      while (tokens > options.max_tokens && cur.size() > 1) {
        carry.insert(carry.begin(), cur.back());
        cur.pop_back();
        xml = render_bitext(lp, origin, cur);
        tokens = count(xml);
      }
      ParallelDocument d;
      d.id = origin + ":" + to_string(lp) + ":" + std::to_string(doc_no++);
      d.lang_pair = lp;
      d.origin = origin;
      d.xml_text = std::move(xml);
      d.pair_count = cur.size();
      d.token_count = tokens;
      d.target_tokens = target;
      result.documents.push_back(std::move(d));
      cur = std::move(carry);
      est = estimate(cur);
      target = draw();
    };

    for (const auto i : idx) {
      const auto& p = pairs[i];
      const std::uint64_t alone = count(render_bitext(lp, origin, {&p}));
      if (alone > options.max_tokens) {
        result.skipped.push_back({i, alone});
        continue;
      }
      const auto cost_at = [&](std::size_t k) {
        return count(element('s', k, p.src_text)) + count(element('t', k, p.tgt_text));
      };
      auto cost = cost_at(cur.size() + 1);
      if (!cur.empty() && (est + cost > target || est + cost > options.max_tokens)) {
        flush();
        while (!cur.empty() && est > target) flush();
        cost = cost_at(cur.size() + 1);
      }
      cur.push_back(&p);
      est += cost;
    }
    while (!cur.empty()) flush();
  }
  return result;
}

}  // namespace corpuskit
