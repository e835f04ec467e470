#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "corpuskit/dedup.hpp"
#include "corpuskit/error.hpp"

using namespace corpuskit;

namespace {

std::string paragraph(corpuskit::Rng& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s += (i % 7 == 0) ? "\n" : " ";
    s += fixture::word(rng, 2);
  }
  return s;
}

std::vector<Document> random_corpus(std::uint64_t seed, int n) {
  corpuskit::Rng rng(seed);
  std::vector<std::string> paras;
  for (int i = 0; i < 40; ++i) paras.push_back(paragraph(rng, 12 + static_cast<int>(rng.below(10))));
  std::vector<Document> docs;
  for (int i = 0; i < n; ++i) {
    std::string text;
    const auto k = 1 + rng.below(4);
    for (std::uint64_t p = 0; p < k; ++p) {
      if (p) text += "\n\n";
      text += paras[rng.below(paras.size())];
    }
    docs.push_back(fixture::doc("r" + std::to_string(i), "en", text));
  }
  return docs;
}

}  // namespace

TEST(NormalizeLine, CaseWhitespaceAndPunctuation) {
  EXPECT_EQ(normalize_line("  Hello,   WORLD!! "), "hello world");
  EXPECT_EQ(normalize_line("Čć-Šđ"), "čćšđ");
  EXPECT_EQ(normalize_line("!!!"), "");
}

TEST(ExactLines, MatchesFrequencyOracle) {
  const auto docs = random_corpus(2, 80);
  std::vector<std::string> texts;
  for (const auto& d : docs) texts.push_back(d.text);
  const auto freq = oracle::line_frequencies(texts);

  LineIndex index;
  const auto out = exact_line_dedup(docs, index);
  std::vector<std::string> out_texts;
  for (const auto& d : out) out_texts.push_back(d.text);
  const auto after = oracle::line_frequencies(out_texts);
  EXPECT_EQ(after.size(), freq.size());
  for (const auto& [line, n] : after) EXPECT_EQ(n, 1u) << line;
}

TEST(ExactLines, EmptyNormalizedLinesAreKept) {
  LineIndex index;
  auto r1 = exact_line_dedup(fixture::doc("a", "en", "one line\n---\nx"), index);
  auto r2 = exact_line_dedup(fixture::doc("b", "en", "---\nnew"), index);
  ASSERT_TRUE(r2.doc);
  EXPECT_EQ(r2.doc->text, "---\nnew");
  auto r3 = exact_line_dedup(fixture::doc("c", "en", "ONE LINE!"), index);
  EXPECT_FALSE(r3.doc);
  EXPECT_EQ(r3.removed_lines, 1u);
}

TEST(Onion, ShortParagraphsNeverDuplicate) {
  NGramState state;
  onion_paragraph_dedup(fixture::doc("a", "en", "one two three four"), state);
  const auto r = onion_paragraph_dedup(fixture::doc("b", "en", "one two three four"), state);
  EXPECT_EQ(r.duplicate_paragraphs, 0u);
  ASSERT_TRUE(r.doc);
}

TEST(Onion, DupRatioMatchesOracle) {
  const auto docs = random_corpus(7, 60);
  NGramState state;
  state.seed_dropped = false;
  std::vector<std::string> kept;
  for (const auto& d : docs) {
    const auto r = onion_paragraph_dedup(d, state);
    EXPECT_DOUBLE_EQ(r.dup_ratio, oracle::onion_dup_ratio(kept, d.text, 5, 0.5)) << d.id;
    if (r.doc) kept.push_back(d.text);
  }
}

TEST(Dedup, KCopiesLeaveOne) {
  corpuskit::Rng rng(3);
  const auto text = paragraph(rng, 20) + "\n\n" + paragraph(rng, 20);
  for (int k = 2; k <= 6; ++k) {
    std::vector<Document> docs;
    for (int i = 0; i < k; ++i) docs.push_back(fixture::doc("c" + std::to_string(i), "en", text));
    const auto out = dedup_pipeline(docs, DedupConfig{});
    ASSERT_EQ(out.docs.size(), 1u);
    EXPECT_EQ(out.docs[0].id, "c0");
    EXPECT_EQ(out.report.size(), docs.size());
  }
}

TEST(Dedup, SecondRunRemovesNothing) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto first = dedup_pipeline(random_corpus(seed, 100), DedupConfig{});
    const auto second = dedup_pipeline(first.docs, DedupConfig{});
    EXPECT_EQ(second.docs, first.docs);
  }
}

TEST(Dedup, ModesSeparateState) {
  std::vector<Document> docs = {fixture::doc("a", "en", "alpha beta gamma delta epsilon zeta", "s1"),
                                fixture::doc("b", "en", "alpha beta gamma delta epsilon zeta", "s2"),
                                fixture::doc("c", "sl", "alpha beta gamma delta epsilon zeta", "s1")};
  EXPECT_EQ(dedup_pipeline(docs, DedupConfig{}).docs.size(), 2u);
  DedupConfig per_source;
  per_source.default_mode = DedupMode::Source;
  EXPECT_EQ(dedup_pipeline(docs, per_source).docs.size(), 3u);
  EXPECT_EQ(dedup_mode_from_string("lines-only"), DedupMode::LinesOnly);
  EXPECT_THROW(dedup_mode_from_string("nope"), ValidationError);
}

TEST(Dedup, Deterministic) {
  const auto docs = random_corpus(11, 120);
  const auto a = dedup_pipeline(docs, DedupConfig{});
  const auto b = dedup_pipeline(docs, DedupConfig{});
  EXPECT_EQ(a.docs, b.docs);
}
