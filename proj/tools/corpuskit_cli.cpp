#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corpuskit/audit.hpp"
#include "corpuskit/bpe.hpp"
#include "corpuskit/corpus_io.hpp"
#include "corpuskit/equity.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/metrics.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/pipeline.hpp"
#include "corpuskit/sampler.hpp"
#include "corpuskit/stats.hpp"
#include "corpuskit/unicode.hpp"

namespace fs = std::filesystem;
using namespace corpuskit;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

struct StageIo {
  std::string in;
  std::string out;
  std::string report;
  std::string lang;
};

void add_io(CLI::App* app, StageIo& io) {
  app->add_option("--in", io.in, "Input JSONL corpus")->required();
  app->add_option("--out", io.out, "Output JSONL corpus")->required();
  app->add_option("--report", io.report, "Per-document report (JSONL)");
  app->add_option("--lang", io.lang, "Language for records without one");
}

PipelineConfig base_config(const Globals& g) {
  auto c = g.config.empty() ? PipelineConfig::parse("", fs::current_path()) : PipelineConfig::load(g.config);
  if (g.seed) c.set_seed(*g.seed);
  return c;
}

std::vector<Document> read_input(const StageIo& io) {
  auto r = read_corpus(io.in, io.lang.empty() ? LanguageTag{} : language(io.lang));
  for (const auto& e : r.errors) std::cerr << io.in << ":" << e.line << ": " << e.message << "\n";
  return std::move(r.docs);
}

void finish_stage(const StageIo& io, const std::vector<Document>& input, const StageOutput& res) {
  write_corpus(res.docs, io.out);
  if (!io.report.empty()) write_file_atomic(io.report, res.report);
  for (const auto& [name, content] : res.artifacts) {
    const auto dir = fs::path(io.out).parent_path();
    write_file_atomic(dir / name, content);
  }
  nlohmann::json j = {{"input_docs", input.size()}, {"output_docs", res.docs.size()}, {"summary", res.summary}};
  std::cout << j.dump() << "\n";
}

std::map<std::string, std::string> read_lang_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") out[to_lower(e.path().stem().string())] = read_file(e.path());
  }
  if (out.empty()) throw ValidationError("no <lang>.txt files in " + dir.string());
  return out;
}

ParallelSet read_parallel_dir(const fs::path& dir) {
  ParallelSet set;
  for (const auto& [lang, text] : read_lang_dir(dir)) {
    auto& lines = set[lang];
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  return set;
}

ByteBudget read_byte_budget(const fs::path& path) {
  ByteBudget b;
  for (const auto& line : read_list_file(path)) {
    const auto cols = split(line, ',');
    if (cols.size() != 2) throw ValidationError("budget line must be 'lang,bytes': " + line);
    const auto lang = to_lower(trim(cols[0]));
    if (lang == "lang") continue;
    b[lang] = static_cast<std::uint64_t>(std::stod(trim(cols[1])));
  }
  return b;
}

std::set<std::string> parse_set(const std::string& v) {
  std::set<std::string> out;
  for (const auto& s : split(v, ',')) {
    if (!trim(s).empty()) out.insert(to_lower(trim(s)));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual corpus curation and evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Pipeline configuration file");
  app.add_option("--seed", g.seed, "Seed overriding every configured seed");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", std::string(kToolVersion));

  // stats
  StageIo stats_io;
  auto* stats_cmd = app.add_subcommand("stats", "Per-language corpus statistics");
  stats_cmd->add_option("--in", stats_io.in)->required();
  stats_cmd->add_option("--lang", stats_io.lang);

  // filter-url
  StageIo url_io;
  std::string blacklist, keywords, psl;
  std::optional<int> max_sub;
  auto* url_cmd = app.add_subcommand("filter-url", "URL blacklist, keyword and subdomain filter");
  add_io(url_cmd, url_io);
  url_cmd->add_option("--blacklist", blacklist);
  url_cmd->add_option("--keywords", keywords);
  url_cmd->add_option("--public-suffix-list", psl);
  url_cmd->add_option("--max-subdomains", max_sub);

  // dedup
  StageIo dedup_io;
  std::string dedup_mode, dedup_steps = "both";
  std::optional<int> ngram;
  std::optional<double> para_th, doc_th;
  auto* dedup_cmd = app.add_subcommand("dedup", "Exact-line and Onion paragraph deduplication");
  add_io(dedup_cmd, dedup_io);
  dedup_cmd->add_option("--mode", dedup_mode, "corpus | source | lines-only");
  dedup_cmd->add_option("--steps", dedup_steps, "both | exact-lines | onion")
      ->check(CLI::IsMember({"both", "exact-lines", "onion"}));
  dedup_cmd->add_option("--ngram", ngram);
  dedup_cmd->add_option("--paragraph-threshold", para_th);
  dedup_cmd->add_option("--document-threshold", doc_th);

  // filter-quality
  StageIo q_io;
  std::string thresholds, stopwords;
  bool require_stop = false;
  auto* q_cmd = app.add_subcommand("filter-quality", "Heuristic quality filter");
  add_io(q_cmd, q_io);
  q_cmd->add_option("--thresholds", thresholds);
  q_cmd->add_option("--stopwords", stopwords, "Directory of <lang>.txt stop-word lists");
  q_cmd->add_flag("--require-stopwords", require_stop);

  // pii
  StageIo pii_io;
  std::string national_ids;
  auto* pii_cmd = app.add_subcommand("pii", "Replace personal data with synthetic values");
  add_io(pii_cmd, pii_io);
  pii_cmd->add_option("--national-ids", national_ids);

  // topic-filter
  StageIo topic_io;
  std::string topic_keywords, topic_langs, model_out;
  std::optional<int> topics, iterations, min_df;
  std::optional<double> alpha, beta, max_df;
  std::optional<std::size_t> top_m, min_hits;
  auto* topic_cmd = app.add_subcommand("topic-filter", "LDA topic model with keyword-flagged cluster removal");
  add_io(topic_cmd, topic_io);
  topic_cmd->add_option("--keywords", topic_keywords);
  topic_cmd->add_option("--languages", topic_langs, "Comma-separated languages to model");
  topic_cmd->add_option("--topics", topics);
  topic_cmd->add_option("--iterations", iterations);
  topic_cmd->add_option("--alpha", alpha);
  topic_cmd->add_option("--beta", beta);
  topic_cmd->add_option("--min-df", min_df);
  topic_cmd->add_option("--max-df", max_df);
  topic_cmd->add_option("--top-m", top_m);
  topic_cmd->add_option("--min-hits", min_hits);
  topic_cmd->add_option("--model-out", model_out, "Save the trained model");

  // sample
  std::string sample_in, sample_out, sample_budgets, sample_lang, fractions;
  std::optional<double> cap;
  std::optional<std::uint64_t> target, total_budget, shard_size;
  auto* sample_cmd = app.add_subcommand("sample", "Upsampling budgets, curriculum schedule and shard manifest");
  sample_cmd->add_option("--in", sample_in, "Input corpus (for the shard manifest)");
  sample_cmd->add_option("--budgets", sample_budgets, "CSV lang,unique_tokens[,ratio_override]");
  sample_cmd->add_option("--out", sample_out, "Output directory")->required();
  sample_cmd->add_option("--lang", sample_lang);
  sample_cmd->add_option("--cap", cap);
  sample_cmd->add_option("--target", target);
  sample_cmd->add_option("--total-budget", total_budget);
  sample_cmd->add_option("--shard-size", shard_size);
  sample_cmd->add_option("--phase-fractions", fractions, "Three comma-separated fractions");

  // bpe-train
  std::string bpe_samples, bpe_budget, bpe_out;
  BpeOptions bpe_opts;
  auto* bpe_cmd = app.add_subcommand("bpe-train", "Train a byte-fallback BPE vocabulary");
  bpe_cmd->add_option("--samples", bpe_samples, "Directory of <lang>.txt training samples")->required();
  bpe_cmd->add_option("--budget", bpe_budget, "CSV lang,bytes")->required();
  bpe_cmd->add_option("--vocab-size", bpe_opts.vocab_size);
  bpe_cmd->add_option("--coverage", bpe_opts.coverage);
  bpe_cmd->add_option("--out", bpe_out)->required();

  // equity
  std::string eq_samples, eq_parallel, eq_budget, eq_out, eq_focus, eq_vocab_out;
  RebalanceOptions eq_opts;
  auto* eq_cmd = app.add_subcommand("equity", "Tokenizer equity measurement and budget rebalancing");
  eq_cmd->add_option("--samples", eq_samples, "Directory of <lang>.txt training samples")->required();
  eq_cmd->add_option("--parallel", eq_parallel, "Directory of line-aligned <lang>.txt files")->required();
  eq_cmd->add_option("--budget", eq_budget, "CSV lang,bytes")->required();
  eq_cmd->add_option("--vocab-size", eq_opts.bpe.vocab_size);
  eq_cmd->add_option("--coverage", eq_opts.bpe.coverage);
  eq_cmd->add_option("--tolerance", eq_opts.tolerance);
  eq_cmd->add_option("--max-iters", eq_opts.max_iters);
  eq_cmd->add_option("--gamma", eq_opts.gamma);
  eq_cmd->add_option("--focus", eq_focus, "Comma-separated focus languages");
  eq_cmd->add_option("--out", eq_out, "Report JSON")->required();
  eq_cmd->add_option("--vocab-out", eq_vocab_out, "Save the vocabulary of the final budget");

  // parallel
  std::string par_pairs, par_out, par_dev, par_thresholds, par_thresholds_out, par_priorities, par_scorer = "stub",
                                                                                             par_scorer_cmd, par_vocab;
  std::size_t par_max_tokens = 8192;
  auto* par_cmd = app.add_subcommand("parallel", "Filter sentence pairs and build synthetic bitext documents");
  par_cmd->add_option("--pairs", par_pairs, "TSV src_lang, tgt_lang, origin, src_text, tgt_text[, score]")->required();
  par_cmd->add_option("--out", par_out, "Output JSONL documents")->required();
  par_cmd->add_option("--dev", par_dev, "Calibration pairs (same TSV format)");
  par_cmd->add_option("--thresholds", par_thresholds, "Threshold table TSV");
  par_cmd->add_option("--thresholds-out", par_thresholds_out);
  par_cmd->add_option("--priorities", par_priorities, "One src-tgt pair per line");
  par_cmd->add_option("--max-doc-tokens", par_max_tokens);
  par_cmd->add_option("--scorer", par_scorer)->check(CLI::IsMember({"stub", "external-command"}));
  par_cmd->add_option("--scorer-cmd", par_scorer_cmd);
  par_cmd->add_option("--vocab", par_vocab, "BPE vocabulary for token counts");

  // audit
  std::string audit_in, audit_vocab, audit_out, audit_summary, gen_cmd, audit_lang;
  bool echo = false;
  auto* audit_cmd = app.add_subcommand("audit", "Memorization audit with ChrF++ and edit distance");
  audit_cmd->add_option("--in", audit_in)->required();
  audit_cmd->add_option("--lang", audit_lang);
  audit_cmd->add_option("--vocab", audit_vocab)->required();
  audit_cmd->add_option("--out", audit_out, "Per-document records (JSONL)")->required();
  audit_cmd->add_option("--summary", audit_summary, "Per-language summary (TSV)");
  auto* gen_opt = audit_cmd->add_option("--gen-cmd", gen_cmd, "Command reading a prompt on stdin");
  audit_cmd->add_flag("--echo", echo, "Return the true continuation (harness check)")->excludes(gen_opt);

  // score
  std::string score_in, borda_in;
  std::optional<double> baseline;
  auto* score_cmd = app.add_subcommand("score", "Per-character perplexity or Borda aggregation");
  auto* score_in_opt = score_cmd->add_option("--in", score_in, "JSONL {text, total_log_prob, token_count}");
  score_cmd->add_option("--baseline", baseline, "Baseline per-character perplexity");
  score_cmd->add_option("--borda", borda_in, "TSV: header model<TAB>task..., one row per model")->excludes(score_in_opt);

  // run
  std::string run_stage_name;
  auto* run_cmd = app.add_subcommand("run", "Run the configured pipeline");
  run_cmd->add_option("--stage", run_stage_name, "Run only this stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*stats_cmd) {
      const auto docs = read_input(stats_io);
      std::cout << compute_stats(docs).to_json().dump(2) << "\n";
    } else if (*url_cmd) {
      auto c = base_config(g);
      if (!blacklist.empty()) c.url.rules.load_blacklist(blacklist);
      if (!keywords.empty()) c.url.rules.load_keywords(keywords);
      if (!psl.empty()) c.url.psl = PublicSuffixList::load(psl);
      if (max_sub) c.url.rules.max_subdomains = *max_sub;
      c.url.rules.validate();
      const auto docs = read_input(url_io);
      finish_stage(url_io, docs, execute_stage(Stage::Url, docs, c, g.jobs));
    } else if (*dedup_cmd) {
      auto c = base_config(g);
      if (!dedup_mode.empty()) c.dedup.default_mode = dedup_mode_from_string(dedup_mode);
      if (ngram) c.dedup.n = *ngram;
      if (para_th) c.dedup.dup_threshold = *para_th;
      if (doc_th) c.dedup.doc_threshold = *doc_th;
      const auto docs = read_input(dedup_io);
      StageOutput res;
      if (dedup_steps == "both") {
        const auto d = dedup_pipeline(docs, c.dedup);
        res.docs = d.docs;
        for (const auto& r : d.report) {
          res.report += nlohmann::json{{"id", r.id}, {"action", to_string(r.action)}, {"dup_ratio", r.dup_ratio}}.dump() + "\n";
        }
      } else {
        res = execute_stage(dedup_steps == "onion" ? Stage::Onion : Stage::ExactLines, docs, c, g.jobs);
      }
      finish_stage(dedup_io, docs, res);
    } else if (*q_cmd) {
      auto c = base_config(g);
      if (!thresholds.empty()) c.heuristics.thresholds = HeuristicThresholds::load(thresholds);
      if (!stopwords.empty()) c.heuristics.stopwords = StopwordTable::load_dir(stopwords);
      if (require_stop) c.heuristics.require_stopwords = true;
      c.heuristics.thresholds.validate();
      const auto docs = read_input(q_io);
      finish_stage(q_io, docs, execute_stage(Stage::Heuristics, docs, c, g.jobs));
    } else if (*pii_cmd) {
      auto c = base_config(g);
      if (!national_ids.empty()) c.pii.load_national_ids(national_ids);
      const auto docs = read_input(pii_io);
      finish_stage(pii_io, docs, execute_stage(Stage::Pii, docs, c, g.jobs));
    } else if (*topic_cmd) {
      auto c = base_config(g);
      auto& t = c.topic;
      if (!topic_keywords.empty()) t.rule.keywords = ClusterFlagRule::load_keywords(topic_keywords).keywords;
      if (!topic_langs.empty()) t.languages = parse_set(topic_langs);
      if (topics) t.lda.topics = *topics;
      if (iterations) t.lda.iterations = *iterations;
      if (alpha) t.lda.alpha = *alpha;
      if (beta) t.lda.beta = *beta;
      if (min_df) t.lda.vocab.min_df = *min_df;
      if (max_df) t.lda.vocab.max_df_fraction = *max_df;
      if (top_m) t.rule.top_m = *top_m;
      if (min_hits) t.rule.min_hits = *min_hits;
      if (t.rule.keywords.empty()) throw ValidationError("topic-filter needs --keywords");
      t.rule.validate();
      const auto docs = read_input(topic_io);
      auto res = execute_stage(Stage::Topic, docs, c, g.jobs);
      if (!model_out.empty()) {
        std::vector<Document> train;
        for (const auto& d : docs) {
          if (t.languages.empty() || t.languages.count(d.lang.code) != 0) train.push_back(d);
        }
        train_lda(train, t.lda).save(model_out);
      }
      finish_stage(topic_io, docs, res);
    } else if (*sample_cmd) {
      auto c = base_config(g);
      auto& sm = c.sample;
      if (cap) sm.cap = *cap;
      if (target) sm.target = *target;
      if (total_budget) sm.total_budget = *total_budget;
      if (shard_size) sm.shard_size = *shard_size;
      if (!fractions.empty()) {
        const auto parts = split(fractions, ',');
        if (parts.size() != 3) throw ValidationError("--phase-fractions needs three values");
        for (std::size_t i = 0; i < 3; ++i) sm.fractions[i] = std::stod(parts[i]);
      }
      if (!sample_budgets.empty()) {
        const auto inputs = load_budgets_csv(sample_budgets);
        const auto budgets = compute_budgets(inputs, sm.cap, sm.target.value_or(UINT64_MAX));
        std::uint64_t natural = 0;
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& b : budgets) {
          natural += b.total_tokens;
          rows.push_back({{"lang", b.lang},
                          {"unique_tokens", b.unique_tokens},
                          {"total_tokens", b.total_tokens},
                          {"ratio", b.ratio()},
                          {"formula_ratio", b.formula_ratio()}});
        }
        nlohmann::json mism = nlohmann::json::array();
        for (const auto& m : override_mismatches(budgets)) {
          mism.push_back({{"lang", m.lang}, {"formula_ratio", m.formula_ratio}, {"override_ratio", m.override_ratio}});
        }
        const auto schedule = build_schedule(budgets, sm.fractions, sm.total_budget.value_or(natural), c.seed);
        write_file_atomic(fs::path(sample_out) / "sample-budgets.json", rows.dump(2) + "\n");
        write_file_atomic(fs::path(sample_out) / "sample-schedule.json", schedule.to_json().dump(2) + "\n");
        std::cout << nlohmann::json{{"budgets", rows}, {"override_mismatches", mism}}.dump(2) << "\n";
      } else {
        if (sample_in.empty()) throw ValidationError("sample needs --in or --budgets");
        StageIo io{sample_in, (fs::path(sample_out) / "corpus.jsonl").string(), "", sample_lang};
        c.validate();
        const auto docs = read_input(io);
        finish_stage(io, docs, execute_stage(Stage::Sample, docs, c, g.jobs));
      }
    } else if (*bpe_cmd) {
      const auto vocab = train_bpe(read_lang_dir(bpe_samples), read_byte_budget(bpe_budget), bpe_opts);
      vocab.save(bpe_out);
      std::cout << nlohmann::json{{"vocab_size", vocab.size()}, {"base", vocab.base_size()}, {"merges", vocab.merges().size()}}
                << "\n";
    } else if (*eq_cmd) {
      eq_opts.focus = parse_set(eq_focus);
      const auto samples = read_lang_dir(eq_samples);
      const auto parallel = read_parallel_dir(eq_parallel);
      const auto res = rebalance_loop(read_byte_budget(eq_budget), samples, parallel, eq_opts);
      write_file_atomic(eq_out, res.to_json().dump(2) + "\n");
      if (!eq_vocab_out.empty()) train_bpe(samples, res.final_budget, eq_opts.bpe).save(eq_vocab_out);
      std::cout << nlohmann::json{{"iterations", res.trace.size()},
                                  {"converged", res.converged},
                                  {"dispersion", res.trace.back().report.dispersion}}
                << "\n";
    } else if (*par_cmd) {
      std::unique_ptr<QualityScorer> scorer;
      if (par_scorer == "external-command") {
        if (par_scorer_cmd.empty()) throw ValidationError("--scorer external-command needs --scorer-cmd");
        scorer = std::make_unique<CommandScorer>(par_scorer_cmd);
      } else {
        scorer = std::make_unique<StubScorer>();
      }
      ThresholdTable table;
      if (!par_dev.empty()) {
        std::map<LangPair, std::vector<SentencePair>> dev;
        for (auto& p : read_pairs_tsv(par_dev)) dev[p.pair()].push_back(std::move(p));
        table = calibrate_thresholds(*scorer, dev);
      } else if (!par_thresholds.empty()) {
        table = ThresholdTable::parse_tsv(read_file(par_thresholds));
      } else {
        throw ValidationError("parallel needs --dev or --thresholds");
      }
      if (!par_thresholds_out.empty()) write_file_atomic(par_thresholds_out, table.to_tsv());
      const auto pairs = read_pairs_tsv(par_pairs);
      const auto kept = filter_pairs(pairs, table, scorer.get());
      AllocationOptions alloc;
      alloc.seed = g.seed.value_or(1);
      if (!par_priorities.empty()) alloc.priorities = load_priorities(par_priorities);
      const auto allocated = allocate_sentences(kept, alloc);
      std::optional<BpeVocab> vocab;
      if (!par_vocab.empty()) vocab = BpeVocab::load(par_vocab);
      const TokenCounter counter = [&](std::string_view s) {
        return vocab ? vocab->count(s) : split_whitespace(s).size();
      };
      BuildOptions build;
      build.max_tokens = par_max_tokens;
      build.seed = alloc.seed;
      const auto res = build_documents(allocated, counter, build);
      std::string out;
      for (const auto& d : res.documents) out += d.to_json().dump() + "\n";
      write_file_atomic(par_out, out);
      for (const auto& s : res.skipped) {
        std::cerr << "skipped pair " << s.index << ": " << s.tokens << " tokens exceeds the document cap\n";
      }
      std::cout << nlohmann::json{{"pairs", pairs.size()},
                                  {"kept", kept.size()},
                                  {"allocated", allocated.size()},
                                  {"documents", res.documents.size()},
                                  {"skipped", res.skipped.size()}}
                << "\n";
    } else if (*audit_cmd) {
      StageIo io{audit_in, "", "", audit_lang};
      const auto docs = read_input(io);
      const auto vocab = BpeVocab::load(audit_vocab);
      std::unique_ptr<TextGenerator> gen;
      if (echo) {
        gen = std::make_unique<EchoGenerator>(docs);
      } else if (!gen_cmd.empty()) {
        gen = std::make_unique<CommandGenerator>(gen_cmd);
      } else {
        throw ValidationError("audit needs --gen-cmd or --echo");
      }
      const auto res = memorization_audit(docs, *gen, vocab);
      write_file_atomic(audit_out, res.to_jsonl());
      if (!audit_summary.empty()) write_file_atomic(audit_summary, res.summary_tsv());
      std::cout << res.summary_tsv();
      if (res.failures != 0) std::cerr << res.failures << " documents failed to generate\n";
    } else if (*score_cmd) {
      if (!borda_in.empty()) {
        BenchmarkTable table;
        std::istringstream in(read_file(borda_in));
        std::string line;
        std::vector<std::string> header;
        while (std::getline(in, line)) {
          if (trim(line).empty()) continue;
          const auto cols = split(line, '\t');
          if (header.empty()) {
            header = cols;
            continue;
          }
          if (cols.size() != header.size()) throw ValidationError("Borda table row has the wrong number of columns");
          for (std::size_t k = 1; k < cols.size(); ++k) table.set(trim(cols[0]), trim(header[k]), std::stod(cols[k]));
        }
        nlohmann::json out = nlohmann::json::object();
        for (const auto& [m, v] : borda(table)) out[m] = v;
        std::cout << out.dump(2) << "\n";
      } else if (!score_in.empty()) {
        std::istringstream in(read_file(score_in));
        std::string line;
        double sum = 0.0;
        std::size_t n = 0;
        while (std::getline(in, line)) {
          if (trim(line).empty()) continue;
          const auto j = nlohmann::json::parse(line);
          const auto s = ScoredText::from_text(j.at("text").get<std::string>(), j.at("total_log_prob").get<double>(),
                                               j.value("token_count", std::uint64_t{0}));
          const double ppl = per_char_perplexity(s);
          nlohmann::json o = {{"per_char_perplexity", ppl}};
          if (baseline) o["relative_improvement"] = relative_improvement(ppl, *baseline);
          std::cout << o.dump() << "\n";
          sum += ppl;
          ++n;
        }
        if (n != 0) std::cerr << "mean per-character perplexity " << sum / static_cast<double>(n) << "\n";
      } else {
        throw ValidationError("score needs --in or --borda");
      }
    } else if (*run_cmd) {
      if (g.config.empty()) throw ValidationError("run needs --config");
      Pipeline p(base_config(g), g.jobs);
      p.set_logger([](const std::string& s) { std::cerr << s << "\n"; });
      if (!run_stage_name.empty()) {
        const auto e = p.run_stage(stage_from_string(run_stage_name));
        std::cout << e.to_json().dump(2) << "\n";
      } else {
        const auto m = p.run_all();
        std::cout << m.to_json().dump(2) << "\n";
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
