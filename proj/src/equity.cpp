#include "corpuskit/equity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corpuskit/error.hpp"

namespace corpuskit {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

nlohmann::json EquityReport::to_json() const {
  nlohmann::json langs = nlohmann::json::object();
  for (const auto& [lang, e] : per_language) {
    langs[lang] = {{"token_count", e.token_count}, {"mean", e.mean},     {"min", e.min}, {"q1", e.q1},
                   {"median", e.median},           {"q3", e.q3},         {"max", e.max}};
  }
  return {{"dispersion", dispersion}, {"focus", focus}, {"languages", langs}};
}

EquityReport measure_equity(const BpeVocab& vocab, const ParallelSet& parallel, const std::set<std::string>& focus) {
  if (parallel.empty()) throw ValidationError("parallel evaluation set is empty");
  const auto n = parallel.begin()->second.size();
  for (const auto& [lang, sents] : parallel) {
    if (sents.size() != n) {
      throw ValidationError("parallel set is misaligned: '" + lang + "' has " + std::to_string(sents.size()) +
                            " sentences, expected " + std::to_string(n));
    }
  }
  if (n == 0) throw ValidationError("parallel evaluation set has no sentences");

  EquityReport report;
  for (const auto& [lang, sents] : parallel) {
    LanguageEquity e;
    e.per_sentence.reserve(n);
    for (const auto& s : sents) e.per_sentence.push_back(vocab.count(s));
    e.token_count = std::accumulate(e.per_sentence.begin(), e.per_sentence.end(), std::uint64_t{0});
    std::vector<double> sorted(e.per_sentence.begin(), e.per_sentence.end());
    std::sort(sorted.begin(), sorted.end());
    e.mean = static_cast<double>(e.token_count) / static_cast<double>(n);
    e.min = sorted.front();
    e.q1 = quantile_sorted(sorted, 0.25);
    e.median = quantile_sorted(sorted, 0.5);
    e.q3 = quantile_sorted(sorted, 0.75);
    e.max = sorted.back();
    report.per_language.emplace(lang, std::move(e));
  }

  for (const auto& [lang, e] : report.per_language) {
    if (focus.empty() || focus.count(lang) != 0) report.focus.push_back(lang);
  }
  for (const auto& f : focus) {
    if (report.per_language.count(f) == 0) throw ValidationError("focus language '" + f + "' missing from parallel set");
  }
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < report.focus.size(); ++i) {
    const double m = report.per_language.at(report.focus[i]).mean;
    lo = i == 0 ? m : std::min(lo, m);
    hi = i == 0 ? m : std::max(hi, m);
  }
  report.dispersion = lo > 0.0 ? hi / lo : 1.0;
  return report;
}

void RebalanceOptions::validate() const {
  if (!(tolerance >= 1.0)) throw ValidationError("tolerance must be >= 1");
  if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be a non-negative number");
}

ByteBudget rebalance_step(const ByteBudget& budget, const EquityReport& report, double gamma,
                          const std::set<std::string>& focus) {
  std::vector<std::string> pool;
  for (const auto& lang : report.focus) {
    if (budget.count(lang) != 0 && (focus.empty() || focus.count(lang) != 0)) pool.push_back(lang);
  }
  if (pool.empty()) return budget;

  double mean_of_means = 0.0;
  for (const auto& lang : pool) mean_of_means += report.per_language.at(lang).mean;
  mean_of_means /= static_cast<double>(pool.size());

  std::uint64_t total = 0;
  double weight_sum = 0.0;
  std::vector<double> weights;
  for (const auto& lang : pool) {
    const auto bytes = budget.at(lang);
    total += bytes;
    const double f = mean_of_means > 0.0 ? report.per_language.at(lang).mean / mean_of_means : 1.0;
    weights.push_back(static_cast<double>(bytes) * std::pow(f, gamma));
    weight_sum += weights.back();
  }
  ByteBudget out = budget;
  if (weight_sum <= 0.0) return out;

  // Largest-remainder rounding keeps the pool total exact.
  std::vector<std::pair<double, std::size_t>> remainders;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / weight_sum;
    const auto floor_v = static_cast<std::uint64_t>(std::floor(exact));
    out[pool[i]] = floor_v;
    assigned += floor_v;
    remainders.emplace_back(exact - static_cast<double>(floor_v), i);
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[pool[remainders[k % remainders.size()].second]];
  return out;
}

nlohmann::json RebalanceResult::to_json() const {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : trace) steps.push_back({{"budget", s.budget}, {"report", s.report.to_json()}});
  return {{"converged", converged}, {"final_budget", final_budget}, {"trace", steps}};
}

RebalanceResult rebalance_loop(const ByteBudget& initial, const std::map<std::string, std::string>& samples,
                               const ParallelSet& parallel, const RebalanceOptions& options) {
  options.validate();
  RebalanceResult result;
  ByteBudget budget = initial;
  for (int iter = 0; iter < options.max_iters; ++iter) {
    const auto vocab = train_bpe(samples, budget, options.bpe);
    auto report = measure_equity(vocab, parallel, options.focus);
    const bool done = report.dispersion <= options.tolerance;
    result.trace.push_back({budget, std::move(report)});
    result.final_budget = budget;
    if (done) {
      result.converged = true;
      break;
    }
    if (iter + 1 < options.max_iters) budget = rebalance_step(budget, result.trace.back().report, options.gamma, options.focus);
  }
  return result;
}

}  // namespace corpuskit
