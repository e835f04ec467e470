#include "corpuskit/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "corpuskit/corpus_io.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/hash.hpp"
#include "corpuskit/stats.hpp"
#include "corpuskit/threads.hpp"
#include "corpuskit/unicode.hpp"

namespace corpuskit {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Url: return "url";
    case Stage::ExactLines: return "exact-lines";
    case Stage::Onion: return "onion";
    case Stage::Heuristics: return "heuristics";
    case Stage::Pii: return "pii";
    case Stage::Topic: return "topic";
    case Stage::Sample: return "sample";
  }
  return "?";
}

Stage stage_from_string(std::string_view s) {
  const auto t = to_lower(trim(s));
  for (const auto st : kAllStages) {
    if (to_string(st) == t) return st;
  }
  if (t == "url-filter") return Stage::Url;
  if (t == "quality" || t == "filter-quality") return Stage::Heuristics;
  if (t == "topic-filter") return Stage::Topic;
  if (t == "sampler") return Stage::Sample;
  throw ValidationError("unknown stage '" + std::string(s) + "'");
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  const auto t = to_lower(trim(v));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ValidationError("'" + key + "' must be true or false, got '" + v + "'");
}

double parse_real(const std::string& v, const std::string& key) {
  const auto t = trim(v);
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(d)) {
    throw ValidationError("'" + key + "' must be a number, got '" + v + "'");
  }
  return d;
}

std::uint64_t parse_count(const std::string& v, const std::string& key) {
  const double d = parse_real(v, key);
  if (d < 0.0 || d != std::floor(d) || d > 1.8e19) {
    throw ValidationError("'" + key + "' must be a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::uint64_t>(d);
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& item : split(v, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

class Section {
 public:
  Section(std::string name, const pt::ptree& tree, fs::path base) : name_(std::move(name)), base_(std::move(base)) {
    for (const auto& [k, v] : tree) {
      if (!v.empty()) throw ValidationError("nested key '" + k + "' in section [" + name_ + "]");
      values_[k] = v.data();
    }
  }

  std::optional<std::string> take(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    auto v = trim(it->second);
    values_.erase(it);
    return v;
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  template <class F>
  void with(const std::string& key, F&& f) {
    if (auto v = take(key)) f(*v, qualified(key));
  }

  fs::path path(const std::string& v, bool directory = false) const {
    fs::path p(v);
    if (p.is_relative()) p = base_ / p;
    p = p.lexically_normal();
    if (directory ? !fs::is_directory(p) : !fs::is_regular_file(p)) {
      throw ValidationError("[" + name_ + "] references a missing " + std::string(directory ? "directory" : "file") +
                            ": " + p.string());
    }
    return p;
  }

  fs::path output_path(const std::string& v) const {
    fs::path p(v);
    if (p.is_relative()) p = base_ / p;
    return p.lexically_normal();
  }

  void finish() const {
    if (!values_.empty()) {
      throw ValidationError("unknown key '" + values_.begin()->first + "' in section [" + name_ + "]");
    }
  }

 private:
  std::string name_;
  fs::path base_;
  std::map<std::string, std::string> values_;
};

}  // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ValidationError("config file not found: " + path.string());
  return parse(read_file(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

PipelineConfig PipelineConfig::parse(std::string_view text, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config syntax error: ") + e.what());
  }

  PipelineConfig c;
  c.base_dir = base_dir;
  c.text.assign(text);
  c.hash = hex64(fnv1a64(text));
  std::optional<std::uint64_t> pii_seed, lda_seed, inference_seed;

  for (const auto& [name, sub] : tree) {
    if (sub.empty() && !sub.data().empty()) throw ValidationError("key '" + name + "' outside any section");
    Section s(name, sub, base_dir);
    if (name == "pipeline") {
      s.with("inputs", [&](const std::string& v, const std::string&) {
        for (const auto& p : parse_list(v)) c.inputs.push_back(s.path(p));
      });
      s.with("output", [&](const std::string& v, const std::string&) { c.output_dir = s.output_path(v); });
      s.with("stages", [&](const std::string& v, const std::string&) {
        c.stages.clear();
        for (const auto& st : parse_list(v)) c.stages.push_back(stage_from_string(st));
      });
      s.with("seed", [&](const std::string& v, const std::string& k) { c.seed = parse_count(v, k); });
      s.with("default_lang", [&](const std::string& v, const std::string&) { c.default_lang = to_lower(v); });
      s.with("vocab", [&](const std::string& v, const std::string&) { c.vocab = BpeVocab::load(s.path(v)); });
    } else if (name == "url") {
      s.with("blacklist", [&](const std::string& v, const std::string&) { c.url.rules.load_blacklist(s.path(v)); });
      s.with("keywords", [&](const std::string& v, const std::string&) { c.url.rules.load_keywords(s.path(v)); });
      s.with("public_suffix_list",
             [&](const std::string& v, const std::string&) { c.url.psl = PublicSuffixList::load(s.path(v)); });
      s.with("max_subdomains", [&](const std::string& v, const std::string& k) {
        c.url.rules.max_subdomains = static_cast<int>(parse_count(v, k));
      });
    } else if (name == "dedup") {
      s.with("mode", [&](const std::string& v, const std::string&) { c.dedup.default_mode = dedup_mode_from_string(v); });
      s.with("ngram", [&](const std::string& v, const std::string& k) { c.dedup.n = static_cast<int>(parse_count(v, k)); });
      s.with("paragraph_threshold",
             [&](const std::string& v, const std::string& k) { c.dedup.dup_threshold = parse_real(v, k); });
      s.with("document_threshold",
             [&](const std::string& v, const std::string& k) { c.dedup.doc_threshold = parse_real(v, k); });
      s.with("seed_dropped", [&](const std::string& v, const std::string& k) { c.dedup.seed_dropped = parse_bool(v, k); });
    } else if (name == "heuristics") {
      // The file is read first so inline keys override it.
      s.with("thresholds", [&](const std::string& v, const std::string&) {
        c.heuristics.thresholds = HeuristicThresholds::load(s.path(v));
      });
      s.with("stopwords", [&](const std::string& v, const std::string&) {
        c.heuristics.stopwords = StopwordTable::load_dir(s.path(v, true));
      });
      s.with("require_stopwords",
             [&](const std::string& v, const std::string& k) { c.heuristics.require_stopwords = parse_bool(v, k); });
      for (const auto* key : {"punct_min", "punct_max", "upper_max", "digit_max", "one_letter_max", "stopword_min",
                              "min_words", "word_len_factor"}) {
        s.with(key, [&](const std::string& v, const std::string& k) { c.heuristics.thresholds.set(key, parse_real(v, k)); });
      }
    } else if (name == "pii") {
      s.with("seed", [&](const std::string& v, const std::string& k) { pii_seed = parse_count(v, k); });
      s.with("national_ids", [&](const std::string& v, const std::string&) { c.pii.load_national_ids(s.path(v)); });
      s.with("emails", [&](const std::string& v, const std::string& k) { c.pii.emails = parse_bool(v, k); });
      s.with("phones", [&](const std::string& v, const std::string& k) { c.pii.phones = parse_bool(v, k); });
      s.with("ibans", [&](const std::string& v, const std::string& k) { c.pii.ibans = parse_bool(v, k); });
      s.with("credit_cards", [&](const std::string& v, const std::string& k) { c.pii.credit_cards = parse_bool(v, k); });
    } else if (name == "topic") {
      auto& t = c.topic;
      s.with("languages", [&](const std::string& v, const std::string&) {
        for (const auto& l : parse_list(v)) t.languages.insert(to_lower(l));
      });
      s.with("topics", [&](const std::string& v, const std::string& k) { t.lda.topics = static_cast<int>(parse_count(v, k)); });
      s.with("alpha", [&](const std::string& v, const std::string& k) { t.lda.alpha = parse_real(v, k); });
      s.with("beta", [&](const std::string& v, const std::string& k) { t.lda.beta = parse_real(v, k); });
      s.with("iterations",
             [&](const std::string& v, const std::string& k) { t.lda.iterations = static_cast<int>(parse_count(v, k)); });
      s.with("seed", [&](const std::string& v, const std::string& k) { lda_seed = parse_count(v, k); });
      s.with("min_df", [&](const std::string& v, const std::string& k) {
        t.lda.vocab.min_df = static_cast<int>(parse_count(v, k));
      });
      s.with("max_df", [&](const std::string& v, const std::string& k) { t.lda.vocab.max_df_fraction = parse_real(v, k); });
      s.with("keywords", [&](const std::string& v, const std::string&) {
        const auto loaded = ClusterFlagRule::load_keywords(s.path(v));
        t.rule.keywords = loaded.keywords;
      });
      s.with("top_m", [&](const std::string& v, const std::string& k) { t.rule.top_m = parse_count(v, k); });
      s.with("min_hits", [&](const std::string& v, const std::string& k) { t.rule.min_hits = parse_count(v, k); });
      s.with("sweeps", [&](const std::string& v, const std::string& k) {
        t.filter.inference.sweeps = static_cast<int>(parse_count(v, k));
      });
      s.with("inference_seed", [&](const std::string& v, const std::string& k) { inference_seed = parse_count(v, k); });
      s.with("any_topic_threshold",
             [&](const std::string& v, const std::string& k) { t.filter.any_topic_threshold = parse_real(v, k); });
    } else if (name == "sample") {
      auto& sm = c.sample;
      s.with("cap", [&](const std::string& v, const std::string& k) { sm.cap = parse_real(v, k); });
      s.with("target", [&](const std::string& v, const std::string& k) { sm.target = parse_count(v, k); });
      s.with("total_budget", [&](const std::string& v, const std::string& k) { sm.total_budget = parse_count(v, k); });
      s.with("shard_size", [&](const std::string& v, const std::string& k) { sm.shard_size = parse_count(v, k); });
      s.with("phase_fractions", [&](const std::string& v, const std::string& k) {
        const auto parts = parse_list(v);
        if (parts.size() != 3) throw ValidationError("'" + k + "' needs three comma-separated values");
        for (std::size_t i = 0; i < 3; ++i) sm.fractions[i] = parse_real(parts[i], k);
      });
    } else if (name.rfind("lang.", 0) == 0 && name.size() > 5) {
      const auto lang = to_lower(name.substr(5));
      auto& o = c.languages[lang];
      s.with("url", [&](const std::string& v, const std::string& k) { o.url = parse_bool(v, k); });
      s.with("heuristics", [&](const std::string& v, const std::string& k) { o.heuristics = parse_bool(v, k); });
      s.with("pii", [&](const std::string& v, const std::string& k) { o.pii = parse_bool(v, k); });
      s.with("topic", [&](const std::string& v, const std::string& k) { o.topic = parse_bool(v, k); });
      s.with("dedup_mode",
             [&](const std::string& v, const std::string&) { c.dedup.per_language[lang] = dedup_mode_from_string(v); });
      s.with("upsample_ratio",
             [&](const std::string& v, const std::string& k) { c.sample.ratio_overrides[lang] = parse_real(v, k); });
    } else {
      throw ValidationError("unknown config section [" + name + "]");
    }
    s.finish();
  }

  c.pii.seed = pii_seed.value_or(c.seed);
  c.topic.lda.seed = lda_seed.value_or(c.seed);
  c.topic.filter.inference.seed = inference_seed.value_or(c.seed);
  return c;
}

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  pii.seed = s;
  topic.lda.seed = s;
  topic.filter.inference.seed = s;
  hash = hex64(fnv1a64("\nseed=" + std::to_string(s), fnv1a64(text)));
}

void PipelineConfig::validate() const {
  if (inputs.empty()) throw ValidationError("[pipeline] inputs is empty");
  if (output_dir.empty()) throw ValidationError("[pipeline] output is not set");
  for (const auto& p : inputs) {
    if (!fs::is_regular_file(p)) throw ValidationError("input file not found: " + p.string());
  }
  for (std::size_t i = 1; i < stages.size(); ++i) {
    const auto a = std::find(kAllStages.begin(), kAllStages.end(), stages[i - 1]);
    const auto b = std::find(kAllStages.begin(), kAllStages.end(), stages[i]);
    if (!(a < b)) {
      throw ValidationError("stage '" + std::string(to_string(stages[i])) + "' cannot run after '" +
                            std::string(to_string(stages[i - 1])) + "'");
    }
  }
  url.rules.validate();
  heuristics.thresholds.validate();
  if (dedup.n < 1) throw ValidationError("[dedup] ngram must be >= 1");
  for (const double t : {dedup.dup_threshold, dedup.doc_threshold}) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("[dedup] thresholds must lie in [0, 1]");
  }
  if (enabled(Stage::Topic)) {
    if (topic.rule.keywords.empty()) throw ValidationError("[topic] needs a keywords file");
    topic.rule.validate();
    if (topic.lda.topics < 2) throw ValidationError("[topic] topics must be >= 2");
    if (topic.lda.iterations < 1) throw ValidationError("[topic] iterations must be >= 1");
  }
  if (enabled(Stage::Sample)) {
    if (!(sample.cap >= 1.0)) throw ValidationError("[sample] cap must be >= 1");
    if (sample.shard_size == 0) throw ValidationError("[sample] shard_size must be positive");
    double sum = 0.0;
    for (const double f : sample.fractions) {
      if (!(f >= 0.0)) throw ValidationError("[sample] phase fractions must be non-negative");
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("[sample] phase fractions must sum to 1");
  }
}

bool PipelineConfig::enabled(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }

bool PipelineConfig::applies_to(Stage s, const std::string& lang) const {
  const auto it = languages.find(lang);
  if (it == languages.end()) return true;
  const auto& o = it->second;
  switch (s) {
    case Stage::Url: return o.url.value_or(true);
    case Stage::Heuristics: return o.heuristics.value_or(true);
    case Stage::Pii: return o.pii.value_or(true);
    case Stage::Topic: return o.topic.value_or(true);
    default: return true;
  }
}

std::size_t PipelineConfig::count_tokens(const Document& doc) const {
  if (doc.token_count) return static_cast<std::size_t>(*doc.token_count);
  if (vocab) return vocab->count(doc.text);
  return split_whitespace(doc.text).size();
}

namespace {

std::string jsonl(const std::vector<nlohmann::json>& lines) {
  std::string out;
  for (const auto& j : lines) {
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

StageOutput url_stage(const std::vector<Document>& docs, const PipelineConfig& c, int jobs) {
  std::vector<FilterVerdict> verdicts(docs.size());
  std::vector<char> applied(docs.size(), 0);
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    if (!c.applies_to(Stage::Url, docs[i].lang.code)) return;
    applied[i] = 1;
    verdicts[i] = apply_url_filter(docs[i], c.url.rules, c.url.psl);
  });
  StageOutput out;
  std::vector<nlohmann::json> report;
  std::map<std::string, std::uint64_t> rules;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto rule = applied[i] ? std::string(to_string(verdicts[i].rule)) : std::string("not-applied");
    ++rules[rule];
    report.push_back({{"id", docs[i].id}, {"keep", verdicts[i].keep}, {"rule", rule}});
    if (verdicts[i].keep) out.docs.push_back(docs[i]);
  }
  out.report = jsonl(report);
  out.summary["rules"] = rules;
  return out;
}

StageOutput dedup_stage(Stage stage, const std::vector<Document>& docs, const PipelineConfig& c) {
  const auto res = stage == Stage::ExactLines ? run_exact_lines(docs, c.dedup) : run_onion(docs, c.dedup);
  StageOutput out;
  std::vector<nlohmann::json> report;
  std::map<std::string, std::uint64_t> actions;
  for (const auto& r : res.report) {
    ++actions[std::string(to_string(r.action))];
    report.push_back({{"id", r.id}, {"action", to_string(r.action)}, {"dup_ratio", r.dup_ratio}});
  }
  out.docs = res.docs;
  out.report = jsonl(report);
  out.summary["actions"] = actions;
  return out;
}

StageOutput heuristic_stage(const std::vector<Document>& docs, const PipelineConfig& c, int jobs) {
  const auto stats = compute_stats(docs);
  std::vector<QualityMetrics> metrics(docs.size());
  std::vector<QualityVerdict> verdicts(docs.size());
  std::vector<char> applied(docs.size(), 0);
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    const auto& lang = docs[i].lang.code;
    if (!c.applies_to(Stage::Heuristics, lang)) return;
    applied[i] = 1;
    metrics[i] = score_document(docs[i], c.heuristics.stopwords, c.heuristics.require_stopwords);
    const auto* ls = stats.find(lang);
    verdicts[i] = apply_heuristics(metrics[i], c.heuristics.thresholds, ls ? ls->avg_word_length() : 0.0);
  });
  StageOutput out;
  std::vector<nlohmann::json> report;
  std::map<std::string, std::uint64_t> rules;
  std::set<std::string> missing_stopwords;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    nlohmann::json line = {{"id", docs[i].id}, {"keep", verdicts[i].keep}};
    if (applied[i]) {
      const auto& m = metrics[i];
      line["rule"] = to_string(verdicts[i].rule);
      line["metrics"] = {{"punct_ratio", m.punct_ratio},
                         {"upper_ratio", m.upper_ratio},
                         {"digit_ratio", m.digit_ratio},
                         {"one_letter_ratio", m.one_letter_ratio},
                         {"stopword_ratio", m.stopword_ratio ? nlohmann::json(*m.stopword_ratio) : nlohmann::json()},
                         {"word_count", m.word_count},
                         {"avg_word_len", m.avg_word_len}};
      if (!m.stopword_ratio) missing_stopwords.insert(docs[i].lang.code);
    } else {
      line["rule"] = "not-applied";
    }
    ++rules[line["rule"].get<std::string>()];
    report.push_back(std::move(line));
    if (verdicts[i].keep) out.docs.push_back(docs[i]);
  }
  out.report = jsonl(report);
  out.summary["rules"] = rules;
  if (!missing_stopwords.empty()) out.summary["no_stopword_list"] = missing_stopwords;
  return out;
}

StageOutput pii_stage(const std::vector<Document>& docs, const PipelineConfig& c, int jobs) {
  const PiiAnonymizer anon(c.pii);
  std::vector<PiiResult> results(docs.size());
  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    if (c.applies_to(Stage::Pii, docs[i].lang.code)) {
      results[i] = anon.anonymize(docs[i]);
    } else {
      results[i].doc = docs[i];
    }
  });
  StageOutput out;
  std::vector<nlohmann::json> report;
  std::map<std::string, std::uint64_t> kinds;
  for (auto& r : results) {
    nlohmann::json spans = nlohmann::json::array();
    for (const auto& rep : r.replacements) {
      ++kinds[std::string(to_string(rep.kind))];
      spans.push_back({{"kind", to_string(rep.kind)}, {"begin", rep.begin}, {"end", rep.end}});
    }
    report.push_back({{"id", r.doc.id}, {"replacements", spans}});
    out.docs.push_back(std::move(r.doc));
  }
  out.report = jsonl(report);
  out.summary["replacements"] = kinds;
  return out;
}

StageOutput topic_stage(const std::vector<Document>& docs, const PipelineConfig& c, int jobs) {
  const auto& t = c.topic;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& lang = docs[i].lang.code;
    if ((t.languages.empty() || t.languages.count(lang) != 0) && c.applies_to(Stage::Topic, lang)) candidates.push_back(i);
  }
  StageOutput out;
  std::vector<char> removed(docs.size(), 0);
  std::vector<TopicAssignment> assignments(docs.size());
  if (!candidates.empty()) {
    std::vector<Document> train;
    train.reserve(candidates.size());
    for (const auto i : candidates) train.push_back(docs[i]);
    std::vector<std::string> warnings;
    const auto model = train_lda(train, t.lda, &warnings);
    const auto flagged_list = flagged_topics(model, t.rule);
    const std::set<int> flagged(flagged_list.begin(), flagged_list.end());
    parallel_for(candidates.size(), jobs, [&](std::size_t k) {
      const auto i = candidates[k];
      assignments[i] = assign_dominant_topic(docs[i], model, t.filter.inference);
      removed[i] = !flagged.empty() && topic_filter_removes(assignments[i], flagged, t.filter);
    });
    nlohmann::json info = {{"topics", model.topics},
                           {"vocabulary", model.vocab_size()},
                           {"flagged", flagged_list},
                           {"top_words", model.top_words_json(t.rule.top_m)},
                           {"warnings", warnings}};
    out.artifacts["topic-model.json"] = info.dump(2) + "\n";
    out.summary["flagged"] = flagged_list;
    out.summary["warnings"] = warnings;
  } else {
    out.summary["note"] = "no documents in the configured languages";
  }
  std::vector<nlohmann::json> report;
  std::uint64_t removed_count = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    nlohmann::json line = {{"id", docs[i].id}, {"removed", removed[i] != 0}};
    if (assignments[i].topic) {
      line["topic"] = *assignments[i].topic;
      line["weight"] = assignments[i].weight;
    }
    report.push_back(std::move(line));
    if (removed[i]) {
      ++removed_count;
    } else {
      out.docs.push_back(docs[i]);
    }
  }
  out.report = jsonl(report);
  out.summary["candidates"] = candidates.size();
  out.summary["removed"] = removed_count;
  out.summary["removed_fraction"] =
      candidates.empty() ? 0.0 : static_cast<double>(removed_count) / static_cast<double>(candidates.size());
  return out;
}

StageOutput sample_stage(const std::vector<Document>& docs, const PipelineConfig& c) {
  const auto& sm = c.sample;
  std::map<std::string, std::uint64_t> uniques;
  std::vector<DocTokens> doc_tokens;
  doc_tokens.reserve(docs.size());
  for (const auto& d : docs) {
    const auto n = static_cast<std::uint64_t>(c.count_tokens(d));
    uniques[d.lang.code] += n;
    doc_tokens.push_back({d.id, d.lang.code, n});
  }
  StageOutput out;
  out.docs = docs;
  std::vector<nlohmann::json> report;
  for (const auto& d : doc_tokens) report.push_back({{"id", d.id}, {"lang", d.lang}, {"tokens", d.tokens}});
  out.report = jsonl(report);
  if (uniques.empty()) {
    out.summary["note"] = "no documents to sample";
    return out;
  }

  std::vector<BudgetInput> inputs;
  for (const auto& [lang, n] : uniques) {
    BudgetInput b{lang, n, std::nullopt};
    if (const auto it = sm.ratio_overrides.find(lang); it != sm.ratio_overrides.end()) b.ratio_override = it->second;
    inputs.push_back(b);
  }
  const auto budgets = compute_budgets(inputs, sm.cap, sm.target.value_or(std::numeric_limits<std::uint64_t>::max()));
  std::uint64_t natural_total = 0;
  for (const auto& b : budgets) natural_total += b.total_tokens;
  const auto total = sm.total_budget.value_or(natural_total);
  const auto schedule = build_schedule(budgets, sm.fractions, total, c.seed);
  const auto manifest = emit_manifest(schedule, budgets, doc_tokens, sm.shard_size, c.seed);

  nlohmann::json bj = nlohmann::json::array();
  for (const auto& b : budgets) {
    bj.push_back({{"lang", b.lang},
                  {"unique_tokens", b.unique_tokens},
                  {"total_tokens", b.total_tokens},
                  {"ratio", b.ratio()},
                  {"upsampled", b.upsampled()}});
  }
  out.artifacts["sample-budgets.json"] = bj.dump(2) + "\n";
  out.artifacts["sample-schedule.json"] = schedule.to_json().dump(2) + "\n";
  out.artifacts["sample-shards.jsonl"] = manifest.to_jsonl();
  out.summary["total_budget"] = total;
  out.summary["shards"] = manifest.shards.size();
  nlohmann::json phases = nlohmann::json::object();
  for (const auto& p : schedule.phases) phases[std::string(to_string(p.phase))] = manifest.phase_tokens(p.phase);
  out.summary["phase_tokens"] = phases;
  return out;
}

}  // namespace

StageOutput execute_stage(Stage stage, const std::vector<Document>& docs, const PipelineConfig& config, int jobs) {
  switch (stage) {
    case Stage::Url: return url_stage(docs, config, jobs);
    case Stage::ExactLines:
    case Stage::Onion: return dedup_stage(stage, docs, config);
    case Stage::Heuristics: return heuristic_stage(docs, config, jobs);
    case Stage::Pii: return pii_stage(docs, config, jobs);
    case Stage::Topic: return topic_stage(docs, config, jobs);
    case Stage::Sample: return sample_stage(docs, config);
  }
  throw Error("unhandled stage");
}

nlohmann::json StageEntry::to_json() const {
  return {{"name", name},
          {"key", key},
          {"output", output},
          {"output_hash", output_hash},
          {"input_docs", input_docs},
          {"input_tokens", input_tokens},
          {"output_docs", output_docs},
          {"output_tokens", output_tokens},
          {"summary", summary}};
}

StageEntry StageEntry::from_json(const nlohmann::json& j) {
  StageEntry e;
  e.name = j.at("name").get<std::string>();
  e.key = j.at("key").get<std::string>();
  e.output = j.at("output").get<std::string>();
  e.output_hash = j.at("output_hash").get<std::string>();
  e.input_docs = j.at("input_docs").get<std::uint64_t>();
  e.input_tokens = j.at("input_tokens").get<std::uint64_t>();
  e.output_docs = j.at("output_docs").get<std::uint64_t>();
  e.output_tokens = j.at("output_tokens").get<std::uint64_t>();
  if (j.contains("summary")) e.summary = j.at("summary");
  return e;
}

const StageEntry* RunManifest::find(const std::string& name) const {
  for (const auto& s : stages) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : stages) st.push_back(s.to_json());
  return {{"tool", "corpuskit"},
          {"version", tool_version},
          {"config_hash", config_hash},
          {"input_docs", input_docs},
          {"input_errors", input_errors},
          {"stages", st}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.tool_version = j.value("version", std::string(kToolVersion));
  m.config_hash = j.at("config_hash").get<std::string>();
  m.input_docs = j.value("input_docs", std::uint64_t{0});
  m.input_errors = j.value("input_errors", std::uint64_t{0});
  for (const auto& s : j.at("stages")) m.stages.push_back(StageEntry::from_json(s));
  return m;
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".lock") {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    const int err = errno;
    if (err == EEXIST) {
      throw Error("output directory " + dir.string() + " is locked by another run (remove " + path_.string() +
                  " if no run is active)");
    }
    throw IoError("cannot create lock file " + path_.string() + ": " + std::strerror(err));
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

Pipeline::Pipeline(PipelineConfig config, int jobs) : config_(std::move(config)), jobs_(std::max(1, jobs)) {}

void Pipeline::log(const std::string& line) const {
  if (log_) log_(line);
}

namespace {

std::string file_hash(const fs::path& p) { return hex64(fnv1a64(read_file(p))); }

std::string stage_file(std::size_t position, Stage s) {
  std::ostringstream out;
  out << "stages/" << std::setw(2) << std::setfill('0') << position + 1 << '-' << to_string(s) << ".jsonl";
  return out.str();
}

std::uint64_t total_tokens(const std::vector<Document>& docs, const PipelineConfig& c) {
  std::uint64_t n = 0;
  for (const auto& d : docs) n += c.count_tokens(d);
  return n;
}

std::string serialize_docs(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += to_json(d).dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace

std::vector<Document> Pipeline::load_inputs(RunManifest& manifest) const {
  std::vector<Document> docs;
  std::vector<nlohmann::json> errors;
  const LanguageTag fallback = config_.default_lang.empty() ? LanguageTag{} : language(config_.default_lang);
  for (const auto& p : config_.inputs) {
    auto r = read_corpus(p, fallback);
    for (const auto& e : r.errors) {
      errors.push_back({{"file", p.filename().string()}, {"line", e.line}, {"error", e.message}});
    }
    for (auto& d : r.docs) docs.push_back(std::move(d));
  }
  std::set<std::string> ids;
  for (const auto& d : docs) {
    if (!ids.insert(d.id).second) throw ValidationError("duplicate document id '" + d.id + "' in inputs");
  }
  manifest.input_docs = docs.size();
  manifest.input_errors = errors.size();
  write_file_atomic(config_.output_dir / "reports" / "input-errors.jsonl", jsonl(errors));
  for (const auto& e : errors) log("input error: " + e.dump());
  return docs;
}

std::vector<Document> Pipeline::load_stage_output(const StageEntry& entry) const {
  auto r = read_corpus(config_.output_dir / entry.output);
  if (!r.errors.empty()) throw StageError(entry.name, "stored output is unreadable: " + r.errors.front().message);
  return std::move(r.docs);
}

RunManifest Pipeline::read_manifest() const {
  const auto path = config_.output_dir / "manifest.json";
  if (!fs::is_regular_file(path)) return {};
  try {
    return RunManifest::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const std::exception&) {
    return {};
  }
}

void Pipeline::write_manifest(const RunManifest& manifest) const {
  write_file_atomic(config_.output_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

StageEntry Pipeline::run_one(Stage stage, const std::vector<Document>& input, const std::string& input_hash,
                             RunManifest& manifest, std::vector<Document>* output) {
  const auto pos = static_cast<std::size_t>(std::find(config_.stages.begin(), config_.stages.end(), stage) -
                                            config_.stages.begin());
  const std::string name(to_string(stage));
  StageEntry entry;
  entry.name = name;
  entry.key = hex64(hash_combine(hash_combine(fnv1a64(config_.hash), fnv1a64(name)), fnv1a64(input_hash)));
  entry.output = stage_file(pos, stage);
  entry.input_docs = input.size();
  entry.input_tokens = total_tokens(input, config_);

  const auto start = std::chrono::steady_clock::now();
  const auto* old = previous_.find(name);
  const auto out_path = config_.output_dir / entry.output;
  if (old != nullptr && old->key == entry.key && fs::is_regular_file(out_path) &&
      file_hash(out_path) == old->output_hash) {
    entry = *old;
    entry.skipped = true;
    *output = load_stage_output(entry);
    log(name + ": unchanged, reusing " + entry.output);
  } else {
    StageOutput res;
    try {
      res = execute_stage(stage, input, config_, jobs_);
    } catch (const ValidationError&) {
      throw;
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
    const auto body = serialize_docs(res.docs);
    for (const auto& [file, content] : res.artifacts) write_file_atomic(config_.output_dir / "reports" / file, content);
    write_file_atomic(config_.output_dir / "reports" / (name + ".jsonl"), res.report);
    write_file_atomic(out_path, body);
    entry.output_hash = hex64(fnv1a64(body));
    entry.output_docs = res.docs.size();
    entry.output_tokens = total_tokens(res.docs, config_);
    entry.summary = std::move(res.summary);
    *output = std::move(res.docs);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    log(name + ": " + std::to_string(entry.input_docs) + " -> " + std::to_string(entry.output_docs) + " docs in " +
        std::to_string(ms) + " ms");
  }

  auto& stages = manifest.stages;
  stages.erase(std::remove_if(stages.begin(), stages.end(), [&](const StageEntry& s) { return s.name == name; }),
               stages.end());
  stages.push_back(entry);
  write_manifest(manifest);
  return entry;
}

RunManifest Pipeline::run_all() {
  config_.validate();
  const DirectoryLock lock(config_.output_dir);
  const auto start = std::chrono::steady_clock::now();
  previous_ = read_manifest();
  RunManifest manifest;
  manifest.config_hash = config_.hash;
  auto docs = load_inputs(manifest);
  auto hash = hex64(fnv1a64(serialize_docs(docs)));
  for (const auto stage : config_.stages) {
    std::vector<Document> next;
    const auto entry = run_one(stage, docs, hash, manifest, &next);
    docs = std::move(next);
    hash = entry.output_hash;
  }
  write_manifest(manifest);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  log("run finished in " + std::to_string(ms) + " ms");
  return manifest;
}

StageEntry Pipeline::run_stage(Stage stage) {
  config_.validate();
  if (!config_.enabled(stage)) throw ValidationError("stage '" + std::string(to_string(stage)) + "' is not enabled");
  const DirectoryLock lock(config_.output_dir);
  const auto it = std::find(config_.stages.begin(), config_.stages.end(), stage);
  previous_ = read_manifest();
  auto manifest = previous_;
  std::vector<Document> input;
  std::string hash;
  if (it == config_.stages.begin()) {
    manifest = RunManifest{};
    manifest.config_hash = config_.hash;
    input = load_inputs(manifest);
    hash = hex64(fnv1a64(serialize_docs(input)));
  } else {
    const std::string prev(to_string(*(it - 1)));
    const auto* entry = manifest.find(prev);
    const auto path = entry ? config_.output_dir / entry->output : fs::path();
    if (manifest.config_hash != config_.hash || entry == nullptr || !fs::is_regular_file(path) ||
        file_hash(path) != entry->output_hash) {
      throw StageError(std::string(to_string(stage)), "missing output of prerequisite stage '" + prev + "'");
    }
    input = load_stage_output(*entry);
    hash = entry->output_hash;
  }
  // Later stages depend on this one and become stale.
  std::set<std::string> later;
  for (auto j = it + 1; j != config_.stages.end(); ++j) later.insert(std::string(to_string(*j)));
  auto& st = manifest.stages;
  st.erase(std::remove_if(st.begin(), st.end(), [&](const StageEntry& s) { return later.count(s.name) != 0; }), st.end());
  std::vector<Document> out;
  return run_one(stage, input, hash, manifest, &out);
}

}  // namespace corpuskit
