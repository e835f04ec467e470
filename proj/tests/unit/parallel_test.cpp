#include <gtest/gtest.h>

#include <fstream>

#include "../support/bitext.hpp"
#include "../support/fixtures.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/parallel.hpp"

using namespace corpuskit;

namespace {

SentencePair sp(std::string s, std::string t, std::string src = "sl", std::string tgt = "hr",
                std::string origin = "o", std::optional<double> score = std::nullopt) {
  return {std::move(src), std::move(tgt), std::move(s), std::move(t), score, std::move(origin)};
}

}  // namespace

TEST(Pairs, TsvRoundTripAndValidation) {
  std::vector<SentencePair> pairs = {sp("a b", "c d"), sp("x", "y", "en", "de", "q", 0.25)};
  const auto text = format_pairs_tsv(pairs);
  EXPECT_EQ(parse_pairs_tsv(text), pairs);
  EXPECT_THROW(parse_pairs_tsv("sl\tsl\to\ta\tb\n"), ValidationError);
  EXPECT_THROW(parse_pairs_tsv("sl\thr\to\t\tb\n"), ValidationError);
  EXPECT_THROW(parse_pairs_tsv("sl\thr\to\ta\n"), ValidationError);
  EXPECT_EQ(lang_pair_from_string("sl-hr"), (LangPair{"sl", "hr"}));
}

TEST(Calibration, ConstantScorer) {
  ConstantScorer c(0.8);
  std::map<LangPair, std::vector<SentencePair>> dev = {{{"sl", "hr"}, {sp("a", "b"), sp("c", "d"), sp("e", "f")}}};
  const auto t = calibrate_thresholds(c, dev);
  EXPECT_EQ(t.at({"sl", "hr"}), 1.0);
}

TEST(Calibration, PerPairIndependence) {
  ConstantScorer c(0.8, {{{"en", "de"}, 0.4}});
  std::map<LangPair, std::vector<SentencePair>> dev = {{{"sl", "hr"}, {sp("a", "b")}},
                                                       {{"en", "de"}, {sp("a", "b", "en", "de")}}};
  const auto t = calibrate_thresholds(c, dev);
  EXPECT_EQ(t.at({"sl", "hr"}), 1.0);
  EXPECT_EQ(t.at({"en", "de"}), 0.5);
  EXPECT_THROW(t.at({"fr", "de"}), ValidationError);
  const auto back = ThresholdTable::parse_tsv(t.to_tsv());
  EXPECT_EQ(back.thresholds, t.thresholds);
  std::map<LangPair, std::vector<SentencePair>> empty = {{{"sl", "hr"}, {}}};
  EXPECT_THROW(calibrate_thresholds(c, empty), ValidationError);
}

TEST(Calibration, SingleSentence) {
  ConstantScorer c(0.64);
  const auto t = calibrate_thresholds(c, {{{"sl", "hr"}, {sp("a", "b")}}});
  EXPECT_DOUBLE_EQ(t.at({"sl", "hr"}), 1.25 * 0.64);
}

TEST(Filter, InclusiveThreshold) {
  ThresholdTable t;
  t.thresholds[{"sl", "hr"}] = 1.0;
  std::vector<SentencePair> pairs = {sp("a", "b", "sl", "hr", "o", 1.01), sp("c", "d", "sl", "hr", "o", 0.99),
                                     sp("e", "f", "sl", "hr", "o", 1.0)};
  const auto kept = filter_pairs(pairs, t);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].src_text, "a");
  EXPECT_EQ(kept[1].src_text, "e");
  EXPECT_THROW(filter_pairs({sp("a", "b")}, t), Error);
  EXPECT_THROW(filter_pairs({sp("a", "b", "en", "de", "o", 2.0)}, t), ValidationError);
  ConstantScorer c(1.0);
  EXPECT_EQ(filter_pairs({sp("a", "b")}, t, &c).size(), 1u);
}

TEST(StubScorer, RangeAndSymmetry) {
  EXPECT_DOUBLE_EQ(StubScorer::score(sp("Ljubljana 2024", "Ljubljana 2024")), 1.0);
  const auto s = StubScorer::score(sp("short", "a much longer sentence"));
  EXPECT_GE(s, 0.0);
  EXPECT_LE(s, 1.0);
}

TEST(Allocation, PriorityWinsSourceRole) {
  std::vector<SentencePair> pairs = {sp("shared", "hr one", "sl", "hr"), sp("shared", "de one", "sl", "de"),
                                     sp("other", "Shared!", "en", "sl")};
  AllocationOptions opt;
  opt.priorities = {{"sl", "de"}};
  const auto out = allocate_sentences(pairs, opt);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].tgt_lang, "de");
  EXPECT_EQ(out[1].tgt_text, "Shared!");
}

TEST(Allocation, DeterministicWithoutPriorities) {
  const auto pairs = fixture::parallel_pairs(300);
  const auto a = allocate_sentences(pairs, {});
  const auto b = allocate_sentences(pairs, {});
  EXPECT_EQ(a, b);
  std::set<std::string> src, tgt;
  for (const auto& p : a) {
    EXPECT_TRUE(src.insert(normalize_line(p.src_text)).second);
    EXPECT_TRUE(tgt.insert(normalize_line(p.tgt_text)).second);
  }
}

TEST(Allocation, PriorityFile) {
  fixture::TempDir dir;
  std::ofstream(dir / "p.txt") << "# neighbours first\nsl-hr\nhr-sl\n";
  const auto p = load_priorities(dir / "p.txt");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[1], (LangPair{"hr", "sl"}));
}

TEST(Build, ThreePairsOneDocument) {
  std::vector<SentencePair> pairs = {sp("a <1>", "b & 1"), sp("c\nline", "d"), sp("e", "f \"q\"")};
  const auto r = build_documents(pairs, fixture::whitespace_tokens);
  ASSERT_EQ(r.documents.size(), 1u);
  const auto& d = r.documents[0];
  EXPECT_EQ(d.pair_count, 3u);
  EXPECT_EQ(fixture::check_bitext(d, pairs, 8192, fixture::whitespace_tokens), "");
  EXPECT_EQ(d.xml_text.substr(0, 40), "<bitext src=\"sl\" tgt=\"hr\" origin=\"o\">\n<s");
}

TEST(Build, OriginsNeverMix) {
  std::vector<SentencePair> pairs = {sp("a", "b", "sl", "hr", "x"), sp("c", "d", "sl", "hr", "y"),
                                     sp("e", "f", "sl", "hr", "x")};
  const auto r = build_documents(pairs, fixture::whitespace_tokens);
  ASSERT_EQ(r.documents.size(), 2u);
  for (const auto& d : r.documents) EXPECT_EQ(fixture::check_bitext(d, pairs, 8192, fixture::whitespace_tokens), "");
}

TEST(Build, OversizedPairSkipped) {
  std::string huge;
  for (int i = 0; i < 9000; ++i) huge += "w ";
  std::vector<SentencePair> pairs = {sp("a", "b"), sp(huge, "x"), sp("c", "d")};
  const auto r = build_documents(pairs, fixture::whitespace_tokens);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].index, 1u);
  EXPECT_GT(r.skipped[0].tokens, 8192u);
  std::size_t n = 0;
  for (const auto& d : r.documents) n += d.pair_count;
  EXPECT_EQ(n, 2u);
}

TEST(Build, InvariantsUnderSmallCaps) {
  const auto pairs = allocate_sentences(fixture::parallel_pairs(500), {});
  for (std::size_t cap : {64u, 200u, 1000u, 8192u}) {
    BuildOptions opt;
    opt.max_tokens = cap;
    opt.min_target = std::min<std::size_t>(32, cap);
    const auto r = build_documents(pairs, fixture::whitespace_tokens, opt);
    std::size_t used = 0;
    for (const auto& d : r.documents) {
      EXPECT_EQ(fixture::check_bitext(d, pairs, cap, fixture::whitespace_tokens), "") << d.id;
      EXPECT_GE(d.target_tokens, opt.min_target);
      EXPECT_LE(d.target_tokens, cap);
      used += d.pair_count;
    }
    EXPECT_EQ(used + r.skipped.size(), pairs.size());
    EXPECT_TRUE(fixture::usage_audit(r.documents));
  }
}

TEST(Build, SeededLengths) {
  const auto pairs = fixture::parallel_pairs(500);
  BuildOptions a, b;
  a.max_tokens = b.max_tokens = 300;
  a.min_target = b.min_target = 50;
  b.seed = 99;
  const auto ra = build_documents(pairs, fixture::whitespace_tokens, a);
  const auto rb = build_documents(pairs, fixture::whitespace_tokens, a);
  const auto rc = build_documents(pairs, fixture::whitespace_tokens, b);
  ASSERT_EQ(ra.documents.size(), rb.documents.size());
  for (std::size_t i = 0; i < ra.documents.size(); ++i) EXPECT_EQ(ra.documents[i].xml_text, rb.documents[i].xml_text);
  bool differs = ra.documents.size() != rc.documents.size();
  for (std::size_t i = 0; !differs && i < ra.documents.size(); ++i)
    differs = ra.documents[i].target_tokens != rc.documents[i].target_tokens;
  EXPECT_TRUE(differs);
}

TEST(Build, CommandScorer) {
  CommandScorer c("awk '{print 0.5}'");
  const auto s = c.score_batch({sp("a", "b"), sp("c", "d")});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s[1], 0.5);
  CommandScorer bad("echo 1");
  EXPECT_THROW(bad.score_batch({sp("a", "b"), sp("c", "d")}), Error);
}
