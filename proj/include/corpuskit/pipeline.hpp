#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpuskit/bpe.hpp"
#include "corpuskit/dedup.hpp"
#include "corpuskit/document.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/lda.hpp"
#include "corpuskit/pii.hpp"
#include "corpuskit/quality.hpp"
#include "corpuskit/sampler.hpp"
#include "corpuskit/url_filter.hpp"

namespace corpuskit {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Canonical order; a configured stage list must follow it.
enum class Stage { Url, ExactLines, Onion, Heuristics, Pii, Topic, Sample };
inline constexpr std::array<Stage, 7> kAllStages = {Stage::Url,        Stage::ExactLines, Stage::Onion, Stage::Heuristics,
                                                    Stage::Pii,        Stage::Topic,      Stage::Sample};

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

// Raised for failures while a stage runs, as opposed to bad configuration.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct LanguageOverrides {
  std::optional<bool> url;
  std::optional<bool> heuristics;
  std::optional<bool> pii;
  std::optional<bool> topic;
};

struct UrlStageConfig {
  UrlRuleSet rules;
  PublicSuffixList psl = PublicSuffixList::builtin();
};

struct HeuristicStageConfig {
  HeuristicThresholds thresholds;
  StopwordTable stopwords;
  bool require_stopwords = false;
};

struct TopicStageConfig {
  std::set<std::string> languages;  // empty: every language
  LdaOptions lda;
  ClusterFlagRule rule;
  TopicFilterOptions filter;
};

struct SampleStageConfig {
  double cap = 2.5;
  std::optional<std::uint64_t> target;
  std::optional<std::uint64_t> total_budget;
  std::array<double, 3> fractions = kDefaultPhaseFractions;
  std::uint64_t shard_size = 4096;
  std::map<std::string, double> ratio_overrides;
};

// INI-style file: a [pipeline] section, one section per stage, and
// [lang.<code>] sections with per-language switches. Relative paths are
// resolved against the config file's directory.
struct PipelineConfig {
  std::filesystem::path base_dir;
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path output_dir;
  std::vector<Stage> stages{kAllStages.begin(), kAllStages.end()};
  std::uint64_t seed = 1;
  std::string default_lang;
  std::optional<BpeVocab> vocab;

  UrlStageConfig url;
  DedupConfig dedup;
  HeuristicStageConfig heuristics;
  PiiRules pii;
  TopicStageConfig topic;
  SampleStageConfig sample;
  std::map<std::string, LanguageOverrides> languages;

  std::string text;  // raw bytes the config was parsed from
  std::string hash;  // hex digest of `text`

  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig parse(std::string_view text, const std::filesystem::path& base_dir);

  // Re-seeds every stage from one value.
  void set_seed(std::uint64_t s);
  void validate() const;
  bool enabled(Stage s) const;
  bool applies_to(Stage s, const std::string& lang) const;
  std::size_t count_tokens(const Document& doc) const;
};

std::string hex64(std::uint64_t v);

struct StageOutput {
  std::vector<Document> docs;
  std::string report;                            // JSONL, one line per input document
  std::map<std::string, std::string> artifacts;  // file name -> content
  nlohmann::json summary = nlohmann::json::object();
};

// Runs one stage in memory.
StageOutput execute_stage(Stage stage, const std::vector<Document>& docs, const PipelineConfig& config, int jobs = 1);

struct StageEntry {
  std::string name;
  std::string key;
  std::string output;
  std::string output_hash;
  std::uint64_t input_docs = 0;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_docs = 0;
  std::uint64_t output_tokens = 0;
  nlohmann::json summary = nlohmann::json::object();
  bool skipped = false;  // reused from an earlier run; not written to the manifest

  nlohmann::json to_json() const;
  static StageEntry from_json(const nlohmann::json& j);
};

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string config_hash;
  std::uint64_t input_docs = 0;
  std::uint64_t input_errors = 0;
  std::vector<StageEntry> stages;

  const StageEntry* find(const std::string& name) const;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, int jobs = 1);

  // Runs every enabled stage in order, reusing stages whose key and output
  // hash match the existing manifest.
  RunManifest run_all();
  // Runs one stage; its predecessor's output must already exist.
  StageEntry run_stage(Stage stage);

  const PipelineConfig& config() const { return config_; }
  // Human-readable progress lines, including wall times.
  void set_logger(std::function<void(const std::string&)> log) { log_ = std::move(log); }

 private:
  std::vector<Document> load_inputs(RunManifest& manifest) const;
  std::vector<Document> load_stage_output(const StageEntry& entry) const;
  StageEntry run_one(Stage stage, const std::vector<Document>& input, const std::string& input_hash,
                     RunManifest& manifest, std::vector<Document>* output);
  RunManifest read_manifest() const;
  void write_manifest(const RunManifest& manifest) const;
  void log(const std::string& line) const;

  PipelineConfig config_;
  int jobs_;
  RunManifest previous_;
  std::function<void(const std::string&)> log_;
};

// Exclusive ownership of an output directory for one run.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace corpuskit
