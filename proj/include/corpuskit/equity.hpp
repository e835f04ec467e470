#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpuskit/bpe.hpp"

namespace corpuskit {

// Sentence-aligned evaluation text: every list has the same length and
// entry k of each list is a translation of entry k of the others.
using ParallelSet = std::map<std::string, std::vector<std::string>>;

struct LanguageEquity {
  std::uint64_t token_count = 0;
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::vector<std::uint64_t> per_sentence;
};

struct EquityReport {
  std::map<std::string, LanguageEquity> per_language;
  // max/min of mean tokens per sentence over `focus`.
  double dispersion = 1.0;
  std::vector<std::string> focus;

  nlohmann::json to_json() const;
};

// Linear-interpolation quantile (R type 7) of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p);

// An empty focus set means every language in `parallel`.
EquityReport measure_equity(const BpeVocab& vocab, const ParallelSet& parallel,
                            const std::set<std::string>& focus = {});

struct RebalanceOptions {
  BpeOptions bpe;
  double tolerance = 1.10;
  int max_iters = 10;
  double gamma = 1.0;
  std::set<std::string> focus;

  void validate() const;
};

struct RebalanceStep {
  ByteBudget budget;
  EquityReport report;
};

struct RebalanceResult {
  ByteBudget final_budget;
  std::vector<RebalanceStep> trace;
  bool converged = false;

  nlohmann::json to_json() const;
};

// Scales each focus budget by (mean_l / focus mean)^gamma and rescales the
// focus pool back to its original total. Other budgets stay as they are.
ByteBudget rebalance_step(const ByteBudget& budget, const EquityReport& report, double gamma,
                          const std::set<std::string>& focus);

RebalanceResult rebalance_loop(const ByteBudget& initial, const std::map<std::string, std::string>& samples,
                               const ParallelSet& parallel, const RebalanceOptions& options);

}  // namespace corpuskit
