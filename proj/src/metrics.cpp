#include "corpuskit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "corpuskit/error.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

ScoredText ScoredText::from_text(std::string text, double total_log_prob, std::uint64_t token_count) {
  ScoredText s;
  s.char_count = utf8::length(text);
  s.text = std::move(text);
  s.total_log_prob = total_log_prob;
  s.token_count = token_count;
  return s;
}

double per_char_perplexity(const ScoredText& s) {
  if (s.char_count == 0) throw ValidationError("per-character perplexity of empty text");
  return std::exp(-s.total_log_prob / static_cast<double>(s.char_count));
}

double relative_improvement(double ours, double baseline) {
  if (!(ours > 0.0) || !(baseline > 0.0)) throw ValidationError("relative improvement needs positive values");
  return (baseline - ours) / baseline * 100.0;
}

void BenchmarkTable::set(const std::string& model, const std::string& task, double score) {
  if (std::find(models.begin(), models.end(), model) == models.end()) models.push_back(model);
  if (std::find(tasks.begin(), tasks.end(), task) == tasks.end()) tasks.push_back(task);
  scores[model][task] = score;
}

std::map<std::string, double> borda(const BenchmarkTable& table) {
  if (table.tasks.empty()) throw ValidationError("benchmark table has no tasks");
  if (table.models.empty()) throw ValidationError("benchmark table has no models");
  std::map<std::string, double> total;
  for (const auto& m : table.models) total[m] = 0.0;

  for (const auto& task : table.tasks) {
    std::vector<std::pair<double, std::string>> col;
    for (const auto& m : table.models) {
      const auto mi = table.scores.find(m);
      if (mi == table.scores.end() || mi->second.count(task) == 0) {
        throw ValidationError("missing score for model '" + m + "' on task '" + task + "'");
      }
      col.emplace_back(mi->second.at(task), m);
    }
    std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < col.size();) {
      std::size_t j = i;
      while (j < col.size() && col[j].first == col[i].first) ++j;
      double points = 0.0;
      for (std::size_t p = i; p < j; ++p) points += p < 3 ? static_cast<double>(3 - p) : 0.0;
      points /= static_cast<double>(j - i);
      for (std::size_t p = i; p < j; ++p) total[col[p].second] += points;
      i = j;
    }
  }
  for (auto& [m, v] : total) v /= static_cast<double>(table.tasks.size());
  return total;
}

namespace {

using Counts = std::unordered_map<std::string, std::int64_t>;

Counts char_ngrams(const std::vector<std::string>& chars, int n) {
  Counts c;
  if (static_cast<int>(chars.size()) < n) return c;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= chars.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) key += chars[i + static_cast<std::size_t>(k)];
    ++c[key];
  }
  return c;
}

Counts word_ngrams(const std::vector<std::string>& words, int n) {
  Counts c;
  if (static_cast<int>(words.size()) < n) return c;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= words.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k != 0) key.push_back(' ');
      key += words[i + static_cast<std::size_t>(k)];
    }
    ++c[key];
  }
  return c;
}

std::vector<std::string> non_space_chars(std::string_view s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto d = utf8::decode(s, i);
    if (!(d.valid && uchar::is_space(d.cp))) out.emplace_back(s.substr(i, d.len));
    i += d.len;
  }
  return out;
}

struct OrderStat {
  std::int64_t hyp = 0, ref = 0, match = 0;
};

OrderStat compare(const Counts& h, const Counts& r) {
  OrderStat s;
  for (const auto& [k, v] : h) {
    s.hyp += v;
    const auto it = r.find(k);
    if (it != r.end()) s.match += std::min(v, it->second);
  }
  for (const auto& [k, v] : r) s.ref += v;
  return s;
}

}  // namespace

std::vector<std::string> chrf_words(std::string_view text) {
  std::vector<std::string> out;
  for (const auto w : split_whitespace(text)) {
    const auto cps = utf8::code_points(w);
    std::size_t b = 0, e = cps.size();
    while (b < e && uchar::is_punct(cps[b])) ++b;
    while (e > b && uchar::is_punct(cps[e - 1])) --e;
    if (b == e) continue;
    std::string word;
    for (std::size_t i = b; i < e; ++i) utf8::append(word, cps[i]);
    out.push_back(std::move(word));
  }
  return out;
}

double chrf_pp(std::string_view hypothesis, std::string_view reference, const ChrfOptions& options) {
  const auto hc = non_space_chars(hypothesis);
  const auto rc = non_space_chars(reference);
  const auto hw = chrf_words(hypothesis);
  const auto rw = chrf_words(reference);

  std::vector<OrderStat> stats;
  for (int n = 1; n <= options.char_order; ++n) stats.push_back(compare(char_ngrams(hc, n), char_ngrams(rc, n)));
  for (int n = 1; n <= options.word_order; ++n) stats.push_back(compare(word_ngrams(hw, n), word_ngrams(rw, n)));

  const double b2 = options.beta * options.beta;
  double sum = 0.0;
  int orders = 0;
  for (const auto& s : stats) {
    if (s.hyp == 0 && s.ref == 0) continue;
    ++orders;
    if (s.match == 0) continue;
    const double p = static_cast<double>(s.match) / static_cast<double>(s.hyp);
    const double r = static_cast<double>(s.match) / static_cast<double>(s.ref);
    sum += (1.0 + b2) * p * r / (b2 * p + r);
  }
  if (orders == 0) return 100.0;
  return 100.0 * sum / orders;
}

std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double word_edit_distance(std::string_view hypothesis, std::string_view reference) {
  std::vector<std::string> h, r;
  for (const auto w : split_whitespace(hypothesis)) h.emplace_back(w);
  for (const auto w : split_whitespace(reference)) r.emplace_back(w);
  const auto longest = std::max(h.size(), r.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(h, r)) / static_cast<double>(longest);
}

}  // namespace corpuskit
