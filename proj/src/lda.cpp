#include "corpuskit/lda.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

namespace {

constexpr char kMagic[8] = {'C', 'K', 'L', 'D', 'A', 0, 0, 0};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& in) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == EOF) throw IoError("truncated topic model file");
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

int sample_topic(Rng& rng, std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

}  // namespace

std::vector<std::string> lda_words(const Document& doc) {
  auto words = split_words(doc.text);
  for (auto& w : words) w = to_lower(w);
  return words;
}

std::int64_t LdaModel::total_tokens() const {
  return std::accumulate(topic_word_counts.begin(), topic_word_counts.end(), std::int64_t{0});
}

double LdaModel::word_probability(int topic, int word) const {
  const double v = static_cast<double>(vocabulary.size());
  return (static_cast<double>(count(topic, word)) + beta) /
         (static_cast<double>(topic_totals[static_cast<std::size_t>(topic)]) + v * beta);
}

std::vector<double> LdaModel::topic_word_distribution(int topic) const {
  std::vector<double> out(vocabulary.size());
  for (int w = 0; w < vocab_size(); ++w) out[static_cast<std::size_t>(w)] = word_probability(topic, w);
  return out;
}

std::vector<std::string> LdaModel::top_words(int topic, std::size_t m) const {
  std::vector<int> order(vocabulary.size());
  std::iota(order.begin(), order.end(), 0);
  const auto k = std::min(m, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), [&](int a, int b) {
    const auto ca = count(topic, a), cb = count(topic, b);
    return ca != cb ? ca > cb : a < b;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(vocabulary[static_cast<std::size_t>(order[i])]);
  return out;
}

nlohmann::json LdaModel::top_words_json(std::size_t m) const {
  nlohmann::json topics_json = nlohmann::json::array();
  for (int k = 0; k < topics; ++k) {
    topics_json.push_back({{"topic", k}, {"tokens", topic_totals[static_cast<std::size_t>(k)]}, {"top_words", top_words(k, m)}});
  }
  return {{"topics", topics},
          {"alpha", alpha},
          {"beta", beta},
          {"seed", seed},
          {"vocab_size", vocabulary.size()},
          {"top_words", topics_json}};
}

void LdaModel::rebuild_index() {
  index.clear();
  for (std::size_t i = 0; i < vocabulary.size(); ++i) index.emplace(vocabulary[i], static_cast<int>(i));
}

void LdaModel::save(const std::filesystem::path& path) const {
  AtomicWriter w(path);
  auto& out = w.stream();
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(topics));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vocabulary.size()));
  put_le<double>(out, alpha);
  put_le<double>(out, beta);
  put_le<std::uint64_t>(out, seed);
  for (const auto& word : vocabulary) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(word.size()));
    out.write(word.data(), static_cast<std::streamsize>(word.size()));
  }
  for (const auto c : topic_word_counts) put_le<std::int64_t>(out, c);
  w.commit();
}

LdaModel LdaModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open topic model " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw IoError(path.string() + " is not a topic model file");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw IoError("unsupported topic model version " + std::to_string(version));
  LdaModel m;
  m.topics = static_cast<int>(get_le<std::uint32_t>(in));
  const auto v = get_le<std::uint32_t>(in);
  m.alpha = get_le<double>(in);
  m.beta = get_le<double>(in);
  m.seed = get_le<std::uint64_t>(in);
  m.vocabulary.resize(v);
  for (auto& word : m.vocabulary) {
    const auto len = get_le<std::uint32_t>(in);
    word.resize(len);
    in.read(word.data(), len);
    if (!in) throw IoError("truncated topic model file");
  }
  m.topic_word_counts.resize(static_cast<std::size_t>(m.topics) * v);
  for (auto& c : m.topic_word_counts) c = get_le<std::int64_t>(in);
  m.topic_totals.assign(static_cast<std::size_t>(m.topics), 0);
  for (int k = 0; k < m.topics; ++k) {
    for (std::uint32_t w = 0; w < v; ++w) m.topic_totals[static_cast<std::size_t>(k)] += m.count(k, static_cast<int>(w));
  }
  m.rebuild_index();
  return m;
}

LdaTrainer::LdaTrainer(const std::vector<Document>& docs, const LdaOptions& options)
    : options_(options), rng_(options.seed) {
  if (docs.empty()) throw ValidationError("topic model needs a non-empty corpus");
  if (options.topics < 2) throw ValidationError("topic count must be >= 2");
  if (options.iterations < 0) throw ValidationError("iterations must be >= 0");
  if (!(options.beta > 0.0)) throw ValidationError("beta must be > 0");
  if (static_cast<std::size_t>(options.topics) > docs.size()) {
    warnings_.push_back("topic count " + std::to_string(options.topics) + " exceeds document count " +
                        std::to_string(docs.size()));
  }

  std::vector<std::vector<std::string>> words;
  words.reserve(docs.size());
  std::map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    words.push_back(lda_words(d));
    std::set<std::string_view> uniq(words.back().begin(), words.back().end());
    for (const auto w : uniq) ++df[std::string(w)];
  }
  const double max_df = options.vocab.max_df_fraction * static_cast<double>(docs.size());
  for (const auto& [w, n] : df) {
    if (n < options.vocab.min_df || static_cast<double>(n) > max_df) continue;
    model_.vocabulary.push_back(w);
  }
  if (model_.vocabulary.empty()) throw ValidationError("topic-model vocabulary is empty after document-frequency pruning");
  model_.rebuild_index();

  model_.topics = options.topics;
  model_.alpha = options.effective_alpha();
  model_.beta = options.beta;
  model_.seed = options.seed;
  const auto K = static_cast<std::size_t>(options.topics);
  model_.topic_word_counts.assign(K * model_.vocabulary.size(), 0);
  model_.topic_totals.assign(K, 0);

  docs_.resize(docs.size());
  assignments_.resize(docs.size());
  doc_topic_.assign(docs.size(), std::vector<std::int64_t>(K, 0));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& w : words[d]) {
      const auto it = model_.index.find(w);
      if (it != model_.index.end()) docs_[d].push_back(it->second);
    }
    for (const int w : docs_[d]) {
      const auto k = static_cast<std::size_t>(rng_.below(K));
      assignments_[d].push_back(static_cast<int>(k));
      ++doc_topic_[d][k];
      ++model_.topic_word_counts[k * model_.vocabulary.size() + static_cast<std::size_t>(w)];
      ++model_.topic_totals[k];
      ++corpus_tokens_;
    }
  }
}

void LdaTrainer::sweep() {
  const auto K = static_cast<std::size_t>(model_.topics);
  const auto V = model_.vocabulary.size();
  const double vbeta = static_cast<double>(V) * model_.beta;
  std::vector<double> cumulative(K);
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    auto& nd = doc_topic_[d];
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const auto w = static_cast<std::size_t>(docs_[d][i]);
      auto k = static_cast<std::size_t>(assignments_[d][i]);
      --nd[k];
      --model_.topic_word_counts[k * V + w];
      --model_.topic_totals[k];

      double acc = 0.0;
      for (std::size_t t = 0; t < K; ++t) {
        acc += (static_cast<double>(nd[t]) + model_.alpha) *
               (static_cast<double>(model_.topic_word_counts[t * V + w]) + model_.beta) /
               (static_cast<double>(model_.topic_totals[t]) + vbeta);
        cumulative[t] = acc;
      }
      k = static_cast<std::size_t>(sample_topic(rng_, cumulative));

      assignments_[d][i] = static_cast<int>(k);
      ++nd[k];
      ++model_.topic_word_counts[k * V + w];
      ++model_.topic_totals[k];
    }
  }
}

std::vector<double> LdaTrainer::document_topics(std::size_t d) const {
  const auto K = static_cast<std::size_t>(model_.topics);
  const double denom = static_cast<double>(docs_[d].size()) + static_cast<double>(K) * model_.alpha;
  std::vector<double> theta(K);
  for (std::size_t k = 0; k < K; ++k) theta[k] = (static_cast<double>(doc_topic_[d][k]) + model_.alpha) / denom;
  return theta;
}

LdaModel train_lda(const std::vector<Document>& docs, const LdaOptions& options, std::vector<std::string>* warnings) {
  LdaTrainer trainer(docs, options);
  trainer.run();
  if (warnings) *warnings = trainer.warnings();
  return trainer.model();
}

TopicAssignment assign_dominant_topic(const Document& doc, const LdaModel& model, const InferenceOptions& opt) {
  TopicAssignment result;
  std::vector<int> tokens;
  for (const auto& w : lda_words(doc)) {
    const auto it = model.index.find(w);
    if (it != model.index.end()) tokens.push_back(it->second);
  }
  if (tokens.empty()) return result;

  const auto K = static_cast<std::size_t>(model.topics);
  Rng rng(hash_combine(hash_combine(model.seed, opt.seed), fnv1a64(doc.text)));
  std::vector<std::int64_t> nd(K, 0);
  std::vector<int> z(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    z[i] = static_cast<int>(rng.below(K));
    ++nd[static_cast<std::size_t>(z[i])];
  }

  const int sweeps = std::max(opt.sweeps, 2);
  const int burn_in = sweeps / 2;
  std::vector<double> cumulative(K);
  std::vector<double> theta_sum(K, 0.0);
  const double denom = static_cast<double>(tokens.size()) + static_cast<double>(K) * model.alpha;
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      --nd[static_cast<std::size_t>(z[i])];
      double acc = 0.0;
      for (std::size_t t = 0; t < K; ++t) {
        acc += (static_cast<double>(nd[t]) + model.alpha) * model.word_probability(static_cast<int>(t), tokens[i]);
        cumulative[t] = acc;
      }
      z[i] = sample_topic(rng, cumulative);
      ++nd[static_cast<std::size_t>(z[i])];
    }
    if (s >= burn_in) {
      for (std::size_t t = 0; t < K; ++t) theta_sum[t] += (static_cast<double>(nd[t]) + model.alpha) / denom;
    }
  }
  const double samples = static_cast<double>(sweeps - burn_in);
  result.distribution.resize(K);
  for (std::size_t t = 0; t < K; ++t) result.distribution[t] = theta_sum[t] / samples;
  // max_element returns the first maximum, i.e. the lowest index on ties.
  const auto best = std::max_element(result.distribution.begin(), result.distribution.end());
  result.topic = static_cast<int>(best - result.distribution.begin());
  result.weight = *best;
  return result;
}

void ClusterFlagRule::validate() const {
  if (keywords.empty()) throw ValidationError("cluster flag rule needs at least one keyword");
  if (top_m < 1) throw ValidationError("top_m must be >= 1");
  if (min_hits < 1) throw ValidationError("min_hits must be >= 1");
}

ClusterFlagRule ClusterFlagRule::load_keywords(const std::filesystem::path& path) {
  ClusterFlagRule rule;
  for (const auto& k : read_list_file(path)) rule.keywords.insert(to_lower(k));
  return rule;
}

std::vector<int> flagged_topics(const LdaModel& model, const ClusterFlagRule& rule) {
  rule.validate();
  std::vector<int> flagged;
  for (int k = 0; k < model.topics; ++k) {
    std::size_t hits = 0;
    for (const auto& word : model.top_words(k, rule.top_m)) {
      const bool hit = std::any_of(rule.keywords.begin(), rule.keywords.end(),
                                   [&](const std::string& kw) { return word.find(kw) != std::string::npos; });
      if (hit) ++hits;
    }
    if (hits >= rule.min_hits) flagged.push_back(k);
  }
  return flagged;
}

bool topic_filter_removes(const TopicAssignment& a, const std::set<int>& flagged, const TopicFilterOptions& opt) {
  if (!a.topic) return false;
  if (!opt.any_topic_threshold) return flagged.count(*a.topic) != 0;
  for (const int k : flagged) {
    if (a.distribution[static_cast<std::size_t>(k)] >= *opt.any_topic_threshold) return true;
  }
  return false;
}

TopicFilterResult flag_and_filter(const std::vector<Document>& docs, const LdaModel& model,
                                  const ClusterFlagRule& rule, const TopicFilterOptions& opt) {
  TopicFilterResult result;
  result.flagged = flagged_topics(model, rule);
  const std::set<int> flagged(result.flagged.begin(), result.flagged.end());
  for (const auto& d : docs) {
    const bool remove = !flagged.empty() && topic_filter_removes(assign_dominant_topic(d, model, opt.inference), flagged, opt);
    (remove ? result.removed : result.kept).push_back(d);
  }
  if (!docs.empty()) result.removed_fraction = static_cast<double>(result.removed.size()) / static_cast<double>(docs.size());
  return result;
}

}  // namespace corpuskit
