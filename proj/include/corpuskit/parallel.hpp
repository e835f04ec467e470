#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace corpuskit {

using LangPair = std::pair<std::string, std::string>;

std::string to_string(const LangPair& p);
// Parses "src-tgt".
LangPair lang_pair_from_string(std::string_view s);

struct SentencePair {
  std::string src_lang;
  std::string tgt_lang;
  std::string src_text;
  std::string tgt_text;
  std::optional<double> score;
  std::string origin;

  LangPair pair() const { return {src_lang, tgt_lang}; }
  void validate() const;
  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

// TSV columns: src_lang, tgt_lang, origin, src_text, tgt_text[, score].
std::vector<SentencePair> read_pairs_tsv(const std::filesystem::path& path);
std::vector<SentencePair> parse_pairs_tsv(std::string_view text);
std::string format_pairs_tsv(const std::vector<SentencePair>& pairs);

class QualityScorer {
 public:
  virtual ~QualityScorer() = default;
  virtual std::vector<double> score_batch(const std::vector<SentencePair>& pairs) = 0;
};

class ConstantScorer : public QualityScorer {
 public:
  explicit ConstantScorer(double value, std::map<LangPair, double> per_pair = {})
      : value_(value), per_pair_(std::move(per_pair)) {}
  std::vector<double> score_batch(const std::vector<SentencePair>& pairs) override;

 private:
  double value_;
  std::map<LangPair, double> per_pair_;
};

// Half character-length ratio, half overlap of the word sets (numbers,
// names and other tokens shared across languages).
class StubScorer : public QualityScorer {
 public:
  static double score(const SentencePair& p);
  std::vector<double> score_batch(const std::vector<SentencePair>& pairs) override;
};

// Feeds the pairs as TSV on stdin; expects one score per line on stdout.
class CommandScorer : public QualityScorer {
 public:
  explicit CommandScorer(std::string command) : command_(std::move(command)) {}
  std::vector<double> score_batch(const std::vector<SentencePair>& pairs) override;

 private:
  std::string command_;
};

inline constexpr double kThresholdFactor = 1.25;

struct ThresholdTable {
  std::map<LangPair, double> thresholds;
  std::map<LangPair, double> calibration_means;

  double at(const LangPair& p) const;
  std::string to_tsv() const;
  static ThresholdTable parse_tsv(std::string_view text);
};

ThresholdTable calibrate_thresholds(QualityScorer& scorer, const std::map<LangPair, std::vector<SentencePair>>& dev);

// Keeps pairs with score >= threshold. Missing scores come from `scorer`;
// without one, an unscored pair is an error.
std::vector<SentencePair> filter_pairs(const std::vector<SentencePair>& pairs, const ThresholdTable& table,
                                       QualityScorer* scorer = nullptr);

struct AllocationOptions {
  std::vector<LangPair> priorities;
  std::uint64_t seed = 1;
};

// One priority class per listed language pair, in list order; unlisted
// pairs form a final class. Pair order inside a class is a seeded
// shuffle. A normalized sentence is accepted at most once as a source and
// at most once as a target.
std::vector<SentencePair> allocate_sentences(const std::vector<SentencePair>& pairs, const AllocationOptions& options);

// Priority file: one `src-tgt` per line, `#` comments allowed.
std::vector<LangPair> load_priorities(const std::filesystem::path& path);

struct ParallelDocument {
  std::string id;
  LangPair lang_pair;
  std::string origin;
  std::string xml_text;
  std::size_t pair_count = 0;
  std::uint64_t token_count = 0;
  std::uint64_t target_tokens = 0;

  nlohmann::json to_json() const;
};

struct SkippedPair {
  std::size_t index = 0;
  std::uint64_t tokens = 0;
};

struct BuildResult {
  std::vector<ParallelDocument> documents;
  std::vector<SkippedPair> skipped;
};

using TokenCounter = std::function<std::size_t(std::string_view)>;

struct BuildOptions {
  std::size_t max_tokens = 8192;
  std::size_t min_target = 256;
  std::uint64_t seed = 1;
};

std::string xml_escape(std::string_view s);
std::string render_bitext(const LangPair& lp, const std::string& origin, const std::vector<const SentencePair*>& pairs);

// Groups by (language pair, origin) and packs each group in input order.
// Each document draws a target size uniformly from
// [min_target, max_tokens] and closes when the next pair would pass it.
BuildResult build_documents(const std::vector<SentencePair>& pairs, const TokenCounter& count,
                            const BuildOptions& options = {});

}  // namespace corpuskit
