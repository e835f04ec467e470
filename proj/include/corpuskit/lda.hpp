#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpuskit/document.hpp"
#include "corpuskit/hash.hpp"

namespace corpuskit {

struct VocabularyOptions {
  double max_df_fraction = 0.5;  // drop words in more than this share of documents
  std::size_t min_df = 5;        // drop words in fewer documents
};

struct LdaOptions {
  int topics = 20;
  double alpha = 0.0;  // <= 0 selects 50 / topics
  double beta = 0.01;
  int iterations = 200;
  std::uint64_t seed = 1;
  VocabularyOptions vocab;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 50.0 / topics; }
};

// Lowercased words of a document as seen by the topic model.
std::vector<std::string> lda_words(const Document& doc);

struct LdaModel {
  int topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, int> index;
  std::vector<std::int64_t> topic_word_counts;  // topics x vocabulary, row-major
  std::vector<std::int64_t> topic_totals;

  int vocab_size() const { return static_cast<int>(vocabulary.size()); }
  std::int64_t count(int topic, int word) const {
    return topic_word_counts[static_cast<std::size_t>(topic) * vocabulary.size() + static_cast<std::size_t>(word)];
  }
  std::int64_t total_tokens() const;

  // Smoothed p(word | topic) = (n_kw + beta) / (n_k + V beta).
  double word_probability(int topic, int word) const;
  std::vector<double> topic_word_distribution(int topic) const;

  // Highest-count words, ties broken by vocabulary index.
  std::vector<std::string> top_words(int topic, std::size_t m) const;
  nlohmann::json top_words_json(std::size_t m = 30) const;

  void rebuild_index();

  // Binary layout: "CKLDA\0\0\0", u32 version, u32 K, u32 V, f64 alpha,
  // f64 beta, u64 seed, V length-prefixed words, K*V i64 counts; all
  // little-endian.
  void save(const std::filesystem::path& path) const;
  static LdaModel load(const std::filesystem::path& path);
};

// Collapsed Gibbs sampler. Exposed as a class so callers can observe the
// state between sweeps.
class LdaTrainer {
 public:
  LdaTrainer(const std::vector<Document>& docs, const LdaOptions& options);

  void sweep();
  void run() {
    for (int i = 0; i < options_.iterations; ++i) sweep();
  }

  const LdaModel& model() const { return model_; }
  std::int64_t corpus_tokens() const { return corpus_tokens_; }
  std::size_t document_count() const { return docs_.size(); }
  // Smoothed topic proportions of training document d.
  std::vector<double> document_topics(std::size_t d) const;
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  LdaOptions options_;
  LdaModel model_;
  std::vector<std::vector<int>> docs_;
  std::vector<std::vector<int>> assignments_;
  std::vector<std::vector<std::int64_t>> doc_topic_;
  std::int64_t corpus_tokens_ = 0;
  std::vector<std::string> warnings_;
  Rng rng_;
};

LdaModel train_lda(const std::vector<Document>& docs, const LdaOptions& options,
                   std::vector<std::string>* warnings = nullptr);

struct TopicAssignment {
  std::optional<int> topic;  // nullopt when no word is in the vocabulary
  double weight = 0.0;
  std::vector<double> distribution;
};

struct InferenceOptions {
  int sweeps = 50;
  std::uint64_t seed = 7;
};

// Held-out Gibbs sampling against frozen topic-word counts; the returned
// distribution averages the smoothed proportions over the second half of
// the sweeps. Seeded by the document text, so identical texts agree.
TopicAssignment assign_dominant_topic(const Document& doc, const LdaModel& model, const InferenceOptions& opt = {});

struct ClusterFlagRule {
  std::set<std::string> keywords;
  std::size_t top_m = 30;
  std::size_t min_hits = 1;

  void validate() const;
  static ClusterFlagRule load_keywords(const std::filesystem::path& path);
};

// A topic is flagged when at least min_hits of its top_m words contain a
// keyword as a substring.
std::vector<int> flagged_topics(const LdaModel& model, const ClusterFlagRule& rule);

struct TopicFilterOptions {
  InferenceOptions inference;
  // When set, a document is removed if any flagged topic reaches this
  // proportion, instead of the dominant-topic rule.
  std::optional<double> any_topic_threshold;
};

struct TopicFilterResult {
  std::vector<Document> kept;
  std::vector<Document> removed;
  std::vector<int> flagged;
  double removed_fraction = 0.0;
};

bool topic_filter_removes(const TopicAssignment& a, const std::set<int>& flagged, const TopicFilterOptions& opt);

TopicFilterResult flag_and_filter(const std::vector<Document>& docs, const LdaModel& model,
                                  const ClusterFlagRule& rule, const TopicFilterOptions& opt = {});

}  // namespace corpuskit
