#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace corpuskit {

struct BudgetInput {
  std::string lang;
  std::uint64_t unique_tokens = 0;
  std::optional<double> ratio_override;
};

// `lang,unique_tokens[,ratio_override]`; a header row starting with
// `lang` is skipped. Unique counts may be written in scientific notation.
std::vector<BudgetInput> load_budgets_csv(const std::filesystem::path& path);

struct LanguageBudget {
  std::string lang;
  std::uint64_t unique_tokens = 0;
  double upsample_cap = 2.5;
  std::uint64_t total_tokens = 0;
  // What min(round(cap * unique), target), floored at unique, yields; equals
  // total_tokens unless an override was applied.
  std::uint64_t formula_total = 0;
  std::optional<double> ratio_override;

  double ratio() const;
  double formula_ratio() const;
  bool upsampled() const { return total_tokens > unique_tokens; }
};

std::vector<LanguageBudget> compute_budgets(const std::vector<BudgetInput>& uniques, double cap, std::uint64_t target);

struct BudgetMismatch {
  std::string lang;
  double formula_ratio = 0.0;
  double override_ratio = 0.0;
};

// Rows whose override disagrees with the cap/target rule by more than
// `tolerance` in ratio.
std::vector<BudgetMismatch> override_mismatches(const std::vector<LanguageBudget>& budgets, double tolerance = 0.02);

enum class Phase { Initial, Intermediate, Final };
std::string_view to_string(Phase p);

struct PhasePlan {
  Phase phase = Phase::Initial;
  std::uint64_t token_budget = 0;
  std::vector<std::pair<std::string, double>> distribution;

  double share(const std::string& lang) const;
};

struct CurriculumSchedule {
  std::vector<PhasePlan> phases;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

inline constexpr std::array<double, 3> kDefaultPhaseFractions = {0.075, 0.675, 0.25};

// Initial and Final are uniform over languages with data; Intermediate is
// proportional to the upsampled totals. The Final budget absorbs rounding
// so the three budgets sum to total_budget exactly.
CurriculumSchedule build_schedule(const std::vector<LanguageBudget>& budgets, const std::array<double, 3>& fractions,
                                  std::uint64_t total_budget, std::uint64_t seed);

struct DocTokens {
  std::string id;
  std::string lang;
  std::uint64_t tokens = 0;
};

struct Shard {
  std::uint64_t shard_id = 0;
  Phase phase = Phase::Initial;
  std::string lang;
  std::vector<std::string> doc_ids;
  std::uint64_t token_count = 0;
};

struct ShardManifest {
  std::vector<Shard> shards;
  std::map<std::string, std::uint32_t> presentations;

  std::uint64_t phase_tokens(Phase p) const;
  std::map<std::string, std::uint64_t> phase_language_tokens(Phase p) const;
  std::uint32_t max_presentations(const std::string& lang, const std::vector<DocTokens>& docs) const;
  std::string to_jsonl() const;
};

// Each shard holds one language. The language is drawn with probability
// proportional to its remaining share of the phase budget; documents come
// from a seeded permutation of that language's pool, and a new permutation
// starts only when the previous one is used up and the language's
// ceil(ratio) presentation cap allows it. Throws Error when a language
// would need more presentations than its cap.
ShardManifest emit_manifest(const CurriculumSchedule& schedule, const std::vector<LanguageBudget>& budgets,
                            const std::vector<DocTokens>& docs, std::uint64_t shard_size, std::uint64_t seed);

}  // namespace corpuskit
