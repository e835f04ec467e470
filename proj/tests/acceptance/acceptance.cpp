#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "support/bitext.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "corpuskit/audit.hpp"
#include "corpuskit/bpe.hpp"
#include "corpuskit/dedup.hpp"
#include "corpuskit/equity.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/lda.hpp"
#include "corpuskit/metrics.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/pipeline.hpp"
#include "corpuskit/quality.hpp"
#include "corpuskit/sampler.hpp"

using namespace corpuskit;
namespace fs = std::filesystem;

namespace {

// Collects the first few failed expectations of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) detail_ << (failures_ > 1 ? "; " : "") << what;
  }
  bool ok() const { return failures_ == 0; }
  std::string detail() const {
    auto s = detail_.str();
    if (failures_ > 3) s += "; +" + std::to_string(failures_ - 3) + " more";
    return s;
  }

 private:
  int failures_ = 0;
  std::ostringstream detail_;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void borda_table(Check& c) {
  const auto t0 = Clock::now();
  const auto b = borda(fixture::benchmark_scores());
  const double elapsed = seconds_since(t0);
  const std::map<std::string, double> want = {{"EuroLLM", 0.8}, {"Gemma 2", 2.0}, {"ALIA", 1.4}, {"This work", 1.8}};
  c.expect(b.size() == want.size(), "model count");
  for (const auto& [m, v] : want) {
    const auto it = b.find(m);
    c.expect(it != b.end() && std::abs(it->second - v) <= 1e-9,
             m + " got " + (it == b.end() ? "none" : num(it->second)));
  }
  c.expect(elapsed < 1.0, "runtime " + num(elapsed) + " s");
}

void upsampling_table(Check& c) {
  const auto target = static_cast<std::uint64_t>(std::llround(fixture::kUpsamplingTarget * 1e9));
  const auto plain = compute_budgets(fixture::upsampling_inputs(false), 2.5, target);
  const auto rows = fixture::upsampling_rows();
  const std::set<std::string> capped(fixture::upsampling_capped().begin(), fixture::upsampling_capped().end());
  const std::set<std::string> subcap(fixture::upsampling_subcap().begin(), fixture::upsampling_subcap().end());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& b = plain[i];
    const double total_b = static_cast<double>(b.total_tokens) / 1e9;
    if (capped.count(r.lang)) {
      c.expect(std::abs(total_b - r.total_b) <= 0.1, r.lang + " total " + num(total_b));
      c.expect(std::abs(b.ratio() - r.ratio) <= 0.02, r.lang + " ratio " + num(b.ratio()));
    } else if (!subcap.count(r.lang)) {
      c.expect(b.total_tokens == b.unique_tokens && std::abs(total_b - r.total_b) <= 0.1, r.lang + " changed");
    }
  }
  const auto over = compute_budgets(fixture::upsampling_inputs(true), 2.5, target);
  std::set<std::string> expected_mismatch;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!subcap.count(rows[i].lang)) continue;
    const double u = static_cast<double>(over[i].unique_tokens);
    c.expect(over[i].total_tokens == static_cast<std::uint64_t>(std::llround(rows[i].ratio * u)),
             rows[i].lang + " override not applied");
    const double formula = std::max(std::min(2.5 * u, static_cast<double>(target)), u) / u;
    if (std::abs(formula - rows[i].ratio) > 0.02) expected_mismatch.insert(rows[i].lang);
  }
  std::set<std::string> reported;
  for (const auto& m : override_mismatches(over)) reported.insert(m.lang);
  c.expect(reported == expected_mismatch, "reported mismatches differ from the formula gap");
  c.expect(expected_mismatch.size() >= 9, "fewer than 9 sub-cap rows disagree with the formula");
}

void curriculum(Check& c) {
  const auto two = compute_budgets({{"a", 7, std::nullopt}, {"b", 13, std::nullopt}}, 2.5, 100);
  const auto s = build_schedule(two, kDefaultPhaseFractions, 2'000'000'000'000ull, 1);
  c.expect(s.phases.size() == 3 && s.phases[0].token_budget == 150'000'000'000ull &&
               s.phases[1].token_budget == 1'350'000'000'000ull && s.phases[2].token_budget == 500'000'000'000ull,
           "phase budgets");

  const std::vector<std::pair<std::string, std::uint64_t>> uniques = {
      {"sl", 80'000}, {"hr", 100'000}, {"sr", 150'000}, {"mk", 250'000}, {"bs", 300'000}};
  std::vector<BudgetInput> in;
  std::vector<DocTokens> docs;
  Rng rng(1);
  for (const auto& [lang, n] : uniques) {
    in.push_back({lang, n, std::nullopt});
    std::uint64_t left = n;
    for (int i = 0; left > 0; ++i) {
      const auto t = std::min<std::uint64_t>(left, rng.between(50, 400));
      docs.push_back({lang + "-" + std::to_string(i), lang, t});
      left -= t;
    }
  }
  const auto budgets = compute_budgets(in, 2.5, 250'000);
  const auto schedule = build_schedule(budgets, kDefaultPhaseFractions, 1'000'000, 1);
  const auto manifest = emit_manifest(schedule, budgets, docs, 1024, 1);
  for (const auto& plan : schedule.phases) {
    const auto realized = manifest.phase_language_tokens(plan.phase);
    const double total = static_cast<double>(manifest.phase_tokens(plan.phase));
    for (const auto& [lang, share] : plan.distribution) {
      const auto it = realized.find(lang);
      const double got = it == realized.end() ? 0.0 : static_cast<double>(it->second) / total;
      c.expect(std::abs(got - share) <= 0.01,
               std::string(to_string(plan.phase)) + " " + lang + " share " + num(got) + " vs " + num(share));
    }
  }
  for (const auto& b : budgets) {
    const auto cap = static_cast<std::uint32_t>(std::ceil(b.ratio() - 1e-9));
    c.expect(manifest.max_presentations(b.lang, docs) <= cap, b.lang + " presentations");
    c.expect(b.ratio() <= 2.5 + 1e-12, b.lang + " ratio above cap");
  }
}

void heuristics(Check& c) {
  const auto stops = fixture::heuristic_stopwords();
  const HeuristicThresholds th;
  int keeps = 0, drops = 0;
  for (const auto& hc : fixture::heuristic_cases()) {
    const auto v = apply_heuristics(score_text(fixture::build_text(hc.shape), "en", stops), th,
                                    fixture::kGlobalAvgWordLen);
    c.expect(v.keep == hc.keep && v.rule == hc.rule, hc.name + " got " + std::string(to_string(v.rule)));
    (v.keep ? keeps : drops) += 1;
  }
  c.expect(keeps == 7 && drops == 7, std::to_string(keeps) + " keeps");
}

std::string line_of_words(Rng& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) s += (i ? " " : "") + fixture::word(rng, 2);
  return s;
}

void dedup(Check& c) {
  const auto t0 = Clock::now();
  Rng rng(5);
  const auto text = line_of_words(rng, 20) + "\n\n" + line_of_words(rng, 25);
  std::vector<Document> copies;
  for (int i = 0; i < 5; ++i) copies.push_back(fixture::doc("k" + std::to_string(i), "en", text));
  const auto once = dedup_pipeline(copies, DedupConfig{});
  c.expect(once.docs.size() == 1, "k=5 left " + std::to_string(once.docs.size()));
  c.expect(dedup_pipeline(once.docs, DedupConfig{}).docs == once.docs, "second run changed the output");

  std::vector<Document> corpus;
  for (int i = 0; i < 200; ++i) {
    std::string t;
    for (int p = 0; p < 3; ++p) t += (p ? "\n\n" : "") + line_of_words(rng, 15 + static_cast<int>(rng.below(10)));
    corpus.push_back(fixture::doc("r" + std::to_string(i), "en", t));
    if (i % 10 == 0) corpus.push_back(fixture::doc("r" + std::to_string(i) + "b", "en", t));
  }
  const auto first = dedup_pipeline(corpus, DedupConfig{});
  const auto second = dedup_pipeline(first.docs, DedupConfig{});
  c.expect(second.docs.size() == first.docs.size(), "second run on a mixed corpus removed documents");

  std::vector<std::string> base;
  for (int p = 0; p < 4; ++p) base.push_back(line_of_words(rng, 20));
  std::string earlier, later;
  for (int p = 0; p < 4; ++p) {
    earlier += (p ? "\n\n" : "") + base[p];
    std::string para = base[p];
    if (p < 3) {
      para = para.substr(0, para.rfind(' ')) + " zzqx" + std::to_string(p);
    } else {
      para = line_of_words(rng, 20);
    }
    later += (p ? "\n\n" : "") + para;
  }
  const double expected = oracle::onion_dup_ratio({earlier}, later, 5, 0.5);
  c.expect(expected == 0.75, "oracle ratio " + num(expected));
  NGramState state;
  onion_paragraph_dedup(fixture::doc("e", "en", earlier), state);
  const auto r = onion_paragraph_dedup(fixture::doc("l", "en", later), state);
  c.expect(r.dup_ratio == expected, "dup_ratio " + num(r.dup_ratio));
  c.expect(!r.doc, "3-of-4 document kept by onion");
  const auto full = dedup_pipeline({fixture::doc("e", "en", earlier), fixture::doc("l", "en", later)}, DedupConfig{});
  c.expect(full.docs.size() == 1 && full.docs[0].id == "e", "3-of-4 document kept by the pipeline");
  c.expect(full.report.size() == 2 && full.report[1].action == DedupAction::Dropped &&
               full.report[1].dup_ratio == expected,
           "pipeline report");
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 5.0, "runtime " + num(elapsed) + " s");
}

struct AuditData {
  std::vector<Document> docs;
  BpeVocab vocab;
};

AuditData audit_data() {
  AuditData a;
  Rng rng(6);
  std::string train;
  for (int i = 0; i < 30; ++i) {
    std::string text;
    for (int s = 0; s < 6; ++s) text += fixture::sentence(rng, 12) + " ";
    a.docs.push_back(fixture::doc("a" + std::to_string(i), i % 3 == 0 ? "parallel" : (i % 2 ? "sl" : "hr"), text));
    train += text + "\n";
  }
  a.vocab = train_bpe_text(train, {600, 0.99995});
  return a;
}

void memorization(Check& c) {
  const auto a = audit_data();
  EchoGenerator echo(a.docs);
  const auto r = memorization_audit(a.docs, echo, a.vocab);
  c.expect(r.flagged_fraction() == 1.0, "echo flagged " + num(r.flagged_fraction()));
  double chrf = 0, edit = 0;
  for (const auto& rec : r.records) chrf += rec.chrf, edit += rec.edit_distance;
  chrf /= static_cast<double>(r.records.size());
  edit /= static_cast<double>(r.records.size());
  c.expect(chrf >= 99.9, "echo mean chrF " + num(chrf));
  c.expect(edit <= 0.001, "echo mean edit " + num(edit));
  const auto tsv = r.summary_tsv();
  c.expect(tsv.compare(0, kAuditSummaryHeader.size(), kAuditSummaryHeader) == 0, "header");
  c.expect(tsv.substr(0, tsv.find('\n')) == "Lang.\tDocs\tAvg. tok.\tChrF++ Avg.\tChrF++ Max.\tEdit dist.",
           "header text");
  FixedTextGenerator other("ζωή θάλασσα ουρανός");
  c.expect(memorization_audit(a.docs, other, a.vocab).flagged_fraction() == 0.0, "disjoint generator flagged");
}

std::string random_text(Rng& rng) {
  static const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e", "é", "ž", "ш", ",", ".", "!", " ", " "};
  std::string s;
  const auto n = rng.below(40);
  for (std::uint64_t i = 0; i < n; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

void chrf(Check& c) {
  Rng rng(12);
  for (int i = 0; i < 50; ++i) {
    const auto h = random_text(rng);
    const auto r = i % 3 == 0 ? h + random_text(rng) : random_text(rng);
    const double got = chrf_pp(h, r), want = oracle::chrf(h, r);
    c.expect(std::abs(got - want) <= 0.01, "\"" + h + "\" vs \"" + r + "\": " + num(got) + " vs " + num(want));
  }
}

void tokenizer(Check& c) {
  Rng rng(1);
  std::string text;
  for (int i = 0; i < 300; ++i) text += fixture::sentence(rng, 10) + " Привет мир 2024.\n";
  const auto v = train_bpe_text(text, {600, 0.99995});
  Rng strings(3);
  for (int i = 0; i < 1000; ++i) {
    const auto s = fixture::random_utf8(strings, 60);
    c.expect(v.decode(v.encode(s)) == s, "round trip " + std::to_string(i));
  }
  const auto f = fixture::equity_fixture();
  RebalanceOptions opt;
  opt.bpe = {400, 0.99995};
  const auto r = rebalance_loop({{"aa", 8000}, {"bb", 8000}}, f.samples, f.parallel, opt);
  c.expect(r.trace.size() >= 2, "loop stopped before iteration 1");
  if (r.trace.size() >= 2) {
    c.expect(r.trace[1].report.dispersion < r.trace[0].report.dispersion,
             "dispersion " + num(r.trace[0].report.dispersion) + " -> " + num(r.trace[1].report.dispersion));
  }
  c.expect(r.converged && r.trace.size() <= 10 && r.trace.back().report.dispersion <= 1.10,
           "final dispersion " + num(r.trace.back().report.dispersion));
}

void topics(Check& c) {
  const auto pc = fixture::planted_topics(300);
  LdaOptions o;
  o.topics = 3;
  o.iterations = 100;
  o.seed = 17;
  const auto m = train_lda(pc.docs, o);
  std::set<int> matched;
  for (int k = 0; k < 3; ++k) {
    std::vector<int> votes(3, 0);
    for (const auto& w : m.top_words(k, 10))
      for (int t = 0; t < 3; ++t)
        if (std::find(pc.vocab[t].begin(), pc.vocab[t].end(), w) != pc.vocab[t].end()) ++votes[t];
    const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
    c.expect(votes[best] >= 9, "topic " + std::to_string(k) + " purity " + std::to_string(votes[best]) + "/10");
    matched.insert(static_cast<int>(best));
  }
  c.expect(matched.size() == 3, "planted topics not all recovered");
  ClusterFlagRule rule;
  rule.keywords = {"propag"};
  rule.top_m = 10;
  const auto r = flag_and_filter(pc.docs, m, rule);
  std::size_t target = 0, removed_target = 0;
  for (const auto t : pc.topic_of_doc) target += t == 0;
  for (const auto& d : r.removed)
    removed_target += pc.topic_of_doc[std::stoul(d.id.substr(d.id.find('-') + 1))] == 0;
  c.expect(removed_target * 100 >= target * 95,
           "removed " + std::to_string(removed_target) + " of " + std::to_string(target) + " target documents");
}

void parallel(Check& c) {
  const auto pool = fixture::parallel_pairs(500);
  const auto pairs = allocate_sentences(pool, {});
  const auto r = build_documents(pairs, fixture::whitespace_tokens);
  std::size_t used = 0;
  for (const auto& d : r.documents) {
    const auto err = fixture::check_bitext(d, pool, 8192, fixture::whitespace_tokens);
    c.expect(err.empty(), d.id + ": " + err);
    used += d.pair_count;
  }
  c.expect(used + r.skipped.size() == pairs.size(), "pairs lost");
  c.expect(!r.documents.empty(), "no documents");
  c.expect(fixture::usage_audit(r.documents), "a sentence is reused");
  ConstantScorer stub(0.8);
  std::map<LangPair, std::vector<SentencePair>> dev;
  for (const auto& p : pool) dev[{p.src_lang, p.tgt_lang}].push_back(p);
  for (const auto& [pair, t] : calibrate_thresholds(stub, dev).thresholds)
    c.expect(t == 1.0, pair.first + "-" + pair.second + " threshold " + num(t));
}

void perplexity(Check& c) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto text = fixture::sentence(rng, 8);
    const double lp = -static_cast<double>(rng.between(1, 500)) / 7.0;
    const auto a = per_char_perplexity(ScoredText::from_text(text, lp, rng.between(1, 50)));
    const auto b = per_char_perplexity(ScoredText::from_text(text, lp, rng.between(1, 50)));
    c.expect(a == b, "retokenization changed " + text);
  }
  const auto uniform = ScoredText::from_text("abcdabcd", 8 * std::log(0.25), 8);
  const double p = per_char_perplexity(uniform);
  c.expect(std::abs(p - 4.0) <= 1e-12, "uniform " + num(p));
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return files;
}

void end_to_end(Check& c) {
  const auto t0 = Clock::now();
  const auto work = fs::temp_directory_path() / ("corpuskit-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(work);
  std::vector<RunManifest> manifests;
  for (const char* name : {"a", "b"}) {
    auto config = PipelineConfig::load(fs::path(CORPUSKIT_SOURCE_DIR) / "data" / "example" / "pipeline.ini");
    config.output_dir = work / name;
    manifests.push_back(Pipeline(config, 2).run_all());
  }
  c.expect(manifests[0].stages.size() == 7, "stage count");
  c.expect(manifests[0].to_json() == manifests[1].to_json(), "manifests differ");
  c.expect(snapshot(work / "a") == snapshot(work / "b"), "output directories differ");
  fs::remove_all(work);
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 60.0, "runtime " + num(elapsed) + " s");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"Borda reproduction", borda_table},
      {"Upsampling table", upsampling_table},
      {"Curriculum fractions", curriculum},
      {"Heuristic filter boundaries", heuristics},
      {"Dedup properties", dedup},
      {"Memorization harness oracles", memorization},
      {"ChrF++ oracle equivalence", chrf},
      {"Tokenizer round-trip and equity loop", tokenizer},
      {"LDA planted-topic recovery", topics},
      {"Parallel builder invariants", parallel},
      {"Per-character perplexity", perplexity},
      {"End-to-end determinism", end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double ms = seconds_since(t0) * 1000.0;
    char head[160];
    std::snprintf(head, sizeof head, "%s %2zu. %s (%.0f ms)", c.ok() ? "PASS" : "FAIL", i + 1,
                  criteria[i].first.c_str(), ms);
    std::cout << head;
    if (!c.ok()) std::cout << ": " << c.detail();
    std::cout << std::endl;
    failed += !c.ok();
  }
  return failed == 0 ? 0 : 1;
}
