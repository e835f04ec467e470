#include "corpuskit/sampler.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/hash.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

std::vector<BudgetInput> load_budgets_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open budgets file " + path.string());
  std::vector<BudgetInput> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = split(t, ',');
    if (line_no == 1 && to_lower(trim(fields[0])) == "lang") continue;
    if (fields.size() < 2 || fields.size() > 3) {
      throw ValidationError("budgets line " + std::to_string(line_no) + ": expected lang,unique_tokens[,ratio_override]");
    }
    BudgetInput b;
    b.lang = to_lower(trim(fields[0]));
    try {
      const double unique = std::stod(trim(fields[1]));
      if (unique < 0) throw std::invalid_argument("negative");
      b.unique_tokens = static_cast<std::uint64_t>(std::llround(unique));
      if (fields.size() == 3 && !trim(fields[2]).empty() && trim(fields[2]) != "-" && trim(fields[2]) != "--") {
        b.ratio_override = std::stod(trim(fields[2]));
      }
    } catch (const std::exception&) {
      throw ValidationError("budgets line " + std::to_string(line_no) + ": bad number");
    }
    out.push_back(std::move(b));
  }
  return out;
}

double LanguageBudget::ratio() const {
  return unique_tokens == 0 ? 1.0 : static_cast<double>(total_tokens) / static_cast<double>(unique_tokens);
}

double LanguageBudget::formula_ratio() const {
  return unique_tokens == 0 ? 1.0 : static_cast<double>(formula_total) / static_cast<double>(unique_tokens);
}

std::vector<LanguageBudget> compute_budgets(const std::vector<BudgetInput>& uniques, double cap, std::uint64_t target) {
  if (uniques.empty()) throw ValidationError("no languages to budget");
  if (!(cap > 1.0)) throw ValidationError("upsampling cap must be > 1");
  if (target == 0) throw ValidationError("upsampling target must be > 0");

  std::vector<LanguageBudget> out;
  for (const auto& in : uniques) {
    LanguageBudget b;
    b.lang = in.lang;
    b.unique_tokens = in.unique_tokens;
    b.upsample_cap = cap;
    const auto capped = static_cast<std::uint64_t>(std::llround(cap * static_cast<double>(in.unique_tokens)));
    b.formula_total = std::max(std::min(capped, target), in.unique_tokens);
    b.total_tokens = b.formula_total;
    if (in.ratio_override) {
      const double r = *in.ratio_override;
      if (r < 1.0 || r > cap) {
        throw ValidationError("ratio override for '" + in.lang + "' must be within [1, cap]");
      }
      b.ratio_override = r;
      b.total_tokens = static_cast<std::uint64_t>(std::llround(r * static_cast<double>(in.unique_tokens)));
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<BudgetMismatch> override_mismatches(const std::vector<LanguageBudget>& budgets, double tolerance) {
  std::vector<BudgetMismatch> out;
  for (const auto& b : budgets) {
    if (!b.ratio_override) continue;
    if (std::abs(b.formula_ratio() - *b.ratio_override) > tolerance) {
      out.push_back({b.lang, b.formula_ratio(), *b.ratio_override});
    }
  }
  return out;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Initial:
      return "Initial";
    case Phase::Intermediate:
      return "Intermediate";
    case Phase::Final:
      return "Final";
  }
  return "Initial";
}

double PhasePlan::share(const std::string& lang) const {
  for (const auto& [l, p] : distribution) {
    if (l == lang) return p;
  }
  return 0.0;
}

nlohmann::json CurriculumSchedule::to_json() const {
  nlohmann::json phases_json = nlohmann::json::array();
  for (const auto& p : phases) {
    nlohmann::json dist = nlohmann::json::object();
    for (const auto& [l, v] : p.distribution) dist[l] = v;
    phases_json.push_back({{"name", to_string(p.phase)}, {"token_budget", p.token_budget}, {"distribution", dist}});
  }
  return {{"seed", seed}, {"phases", phases_json}};
}

CurriculumSchedule build_schedule(const std::vector<LanguageBudget>& budgets, const std::array<double, 3>& fractions,
                                  std::uint64_t total_budget, std::uint64_t seed) {
  for (const double f : fractions) {
    if (f < 0.0) throw ValidationError("phase fractions must be non-negative");
  }
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("phase fractions must sum to 1");

  std::vector<const LanguageBudget*> present;
  double total_tokens = 0.0;
  for (const auto& b : budgets) {
    if (b.total_tokens == 0) continue;
    present.push_back(&b);
    total_tokens += static_cast<double>(b.total_tokens);
  }
  if (present.empty()) throw ValidationError("no language has data to schedule");

  std::vector<std::pair<std::string, double>> uniform, natural;
  for (const auto* b : present) {
    uniform.emplace_back(b->lang, 1.0 / static_cast<double>(present.size()));
    natural.emplace_back(b->lang, static_cast<double>(b->total_tokens) / total_tokens);
  }

  CurriculumSchedule s;
  s.seed = seed;
  const auto initial = static_cast<std::uint64_t>(std::llround(fractions[0] * static_cast<double>(total_budget)));
  const auto middle = static_cast<std::uint64_t>(std::llround(fractions[1] * static_cast<double>(total_budget)));
  if (initial + middle > total_budget) throw ValidationError("phase fractions overflow the total budget");
  s.phases.push_back({Phase::Initial, initial, uniform});
  s.phases.push_back({Phase::Intermediate, middle, natural});
  s.phases.push_back({Phase::Final, total_budget - initial - middle, uniform});
  return s;
}

std::uint64_t ShardManifest::phase_tokens(Phase p) const {
  std::uint64_t n = 0;
  for (const auto& s : shards) {
    if (s.phase == p) n += s.token_count;
  }
  return n;
}

std::map<std::string, std::uint64_t> ShardManifest::phase_language_tokens(Phase p) const {
  std::map<std::string, std::uint64_t> out;
  for (const auto& s : shards) {
    if (s.phase == p) out[s.lang] += s.token_count;
  }
  return out;
}

std::uint32_t ShardManifest::max_presentations(const std::string& lang, const std::vector<DocTokens>& docs) const {
  std::uint32_t best = 0;
  for (const auto& d : docs) {
    if (d.lang != lang) continue;
    if (const auto it = presentations.find(d.id); it != presentations.end()) best = std::max(best, it->second);
  }
  return best;
}

std::string ShardManifest::to_jsonl() const {
  std::ostringstream out;
  for (const auto& s : shards) {
    nlohmann::json j = {{"shard_id", s.shard_id},
                        {"phase", to_string(s.phase)},
                        {"lang", s.lang},
                        {"token_count", s.token_count},
                        {"doc_ids", s.doc_ids}};
    out << j.dump() << '\n';
  }
  return out.str();
}

namespace {

class LanguagePool {
 public:
  LanguagePool(std::string lang, std::vector<const DocTokens*> docs, std::uint32_t max_epochs, std::uint64_t seed)
      : lang_(std::move(lang)), docs_(std::move(docs)), max_epochs_(max_epochs), seed_(seed) {
    reshuffle();
  }

  bool empty() const { return docs_.empty(); }
  std::uint32_t max_epochs() const { return max_epochs_; }

  // Next document without consuming it; starts a new epoch when needed.
  // Returns nullptr when the cap forbids another epoch.
  const DocTokens* peek() {
    if (docs_.empty()) return nullptr;
    if (cursor_ == order_.size()) {
      if (epoch_ >= max_epochs_) return nullptr;
      reshuffle();
    }
    return docs_[order_[cursor_]];
  }
  void advance() { ++cursor_; }

 private:
  void reshuffle() {
    ++epoch_;
    order_.resize(docs_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng(hash_combine(hash_combine(seed_, fnv1a64(lang_)), epoch_));
    rng.shuffle(order_);
    cursor_ = 0;
  }

  std::string lang_;
  std::vector<const DocTokens*> docs_;
  std::uint32_t max_epochs_;
  std::uint64_t seed_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::uint32_t epoch_ = 0;
};

}  // namespace

ShardManifest emit_manifest(const CurriculumSchedule& schedule, const std::vector<LanguageBudget>& budgets,
                            const std::vector<DocTokens>& docs, std::uint64_t shard_size, std::uint64_t seed) {
  if (shard_size == 0) throw ValidationError("shard size must be > 0");

  std::map<std::string, std::vector<const DocTokens*>> by_lang;
  for (const auto& d : docs) {
    if (d.tokens > 0) by_lang[d.lang].push_back(&d);
  }
  std::map<std::string, LanguagePool> pools;
  for (auto& [lang, list] : by_lang) {
    std::uint32_t cap = 1;
    for (const auto& b : budgets) {
      if (b.lang == lang) cap = static_cast<std::uint32_t>(std::max(1.0, std::ceil(b.ratio() - 1e-9)));
    }
    pools.emplace(lang, LanguagePool(lang, std::move(list), cap, seed));
  }

  ShardManifest manifest;
  std::uint64_t next_id = 0;
  for (std::size_t pi = 0; pi < schedule.phases.size(); ++pi) {
    const auto& plan = schedule.phases[pi];
    Rng rng(hash_combine(seed, pi + 1));
    const auto n = plan.distribution.size();
    std::vector<double> need(n), realized(n, 0.0);
    std::vector<bool> blocked(n, false);
    for (std::size_t i = 0; i < n; ++i) need[i] = plan.distribution[i].second * static_cast<double>(plan.token_budget);
    std::uint64_t phase_total = 0;

    while (true) {
      std::vector<double> weights(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!blocked[i]) weights[i] = need[i] - realized[i];
      }
      const long pick = rng.weighted(weights);
      if (pick < 0) break;
      const auto li = static_cast<std::size_t>(pick);
      const auto& lang = plan.distribution[li].first;

      auto pit = pools.find(lang);
      if (pit == pools.end()) {
        throw Error("language '" + lang + "' has no documents but is scheduled for " +
                    std::to_string(static_cast<std::uint64_t>(need[li])) + " tokens in phase " +
                    std::string(to_string(plan.phase)));
      }
      auto& pool = pit->second;

      Shard shard{next_id, plan.phase, lang, {}, 0};
      while (true) {
        const DocTokens* d = pool.peek();
        if (d == nullptr) {
          throw Error("language '" + lang + "' pool exhausted beyond its cap of " + std::to_string(pool.max_epochs()) +
                      " presentations: " + std::to_string(static_cast<std::uint64_t>(std::ceil(need[li] - realized[li]))) +
                      " more tokens requested in phase " + std::string(to_string(plan.phase)));
        }
        if (phase_total + d->tokens > plan.token_budget) {
          blocked[li] = true;
          break;
        }
        if (shard.token_count > 0 && shard.token_count + d->tokens > shard_size) break;
        pool.advance();
        shard.doc_ids.push_back(d->id);
        shard.token_count += d->tokens;
        phase_total += d->tokens;
        realized[li] += static_cast<double>(d->tokens);
        ++manifest.presentations[d->id];
      }
      if (!shard.doc_ids.empty()) {
        manifest.shards.push_back(std::move(shard));
        ++next_id;
      }
    }
  }
  return manifest;
}

}  // namespace corpuskit
