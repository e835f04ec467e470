#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "../support/fixtures.hpp"
#include "corpuskit/corpus_io.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/stats.hpp"
#include "corpuskit/unicode.hpp"

using namespace corpuskit;

TEST(Language, CategoriesFromBuiltinTable) {
  EXPECT_EQ(language("SL").code, "sl");
  EXPECT_EQ(language("sl").category, Category::Focus);
  EXPECT_EQ(language("en").category, Category::Other);
  EXPECT_EQ(language("code").category, Category::Code);
  EXPECT_EQ(language("parallel").category, Category::Parallel);
  EXPECT_EQ(display_label(language("parallel")), "PAR.");
  EXPECT_EQ(display_label(language("hr")), "HR");
}

TEST(Language, RegistryRejectsDuplicates) {
  LanguageRegistry reg;
  reg.add(language("sl"));
  EXPECT_THROW(reg.add(language("sl")), ValidationError);
  EXPECT_THROW(reg.add(LanguageTag{}), ValidationError);
  EXPECT_EQ(reg.get_or_add("xx").code, "xx");
  EXPECT_NE(reg.find("xx"), nullptr);
}

TEST(Paragraphs, SplitAndJoin) {
  const auto ps = split_paragraphs("a b\nc d\n\n\n\ne f\n\n");
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[0].lines.size(), 2u);
  EXPECT_EQ(ps[1].index, 1u);
  EXPECT_EQ(join_paragraphs(ps), "a b\nc d\n\ne f");
}

TEST(Utf8, BoundariesAndLength) {
  const std::string s = "a\xC3\xA9\xE2\x9C\x93";
  EXPECT_TRUE(utf8::is_valid(s));
  EXPECT_EQ(utf8::length(s), 3u);
  EXPECT_EQ(utf8::floor_boundary(s, 2), 1u);
  EXPECT_EQ(utf8::floor_boundary(s, 5), 3u);
  EXPECT_FALSE(utf8::is_valid("\xC3"));
}

TEST(Words, PunctuationAndDigitsRemoved) {
  const auto w = split_words("Hello, world 2024 x-y !!");
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0], "Hello");
  EXPECT_EQ(w[2], "xy");
}

TEST(CorpusIo, RoundTripPreservesEveryField) {
  fixture::TempDir dir;
  corpuskit::Rng rng(1);
  std::vector<Document> docs;
  for (int i = 0; i < 50; ++i) {
    auto d = fixture::doc("d" + std::to_string(i), i % 2 ? "sl" : "en", fixture::random_utf8(rng, 80));
    if (i % 3 == 0) d.url = "https://example.com/" + std::to_string(i);
    if (i % 4 == 0) d.token_count = static_cast<std::uint64_t>(i * 7);
    d.source = i % 5 ? "crawl" : "news";
    docs.push_back(d);
  }
  write_corpus(docs, dir / "c.jsonl");
  const auto back = read_corpus(dir / "c.jsonl");
  EXPECT_TRUE(back.errors.empty());
  EXPECT_EQ(back.docs, docs);
}

TEST(CorpusIo, MalformedLinesAreReportedAndSkipped) {
  fixture::TempDir dir;
  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"id":"a","lang":"en","text":"ok"})" << "\n";
    out << "{not json\n";
    out << R"({"id":"b","lang":"en"})" << "\n";
    out << R"({"id":"c","text":"no lang"})" << "\n";
    out << "\xff\xfe\n";
    out << R"({"id":"d","lang":"de","text":"fine"})" << "\n";
  }
  const auto r = read_corpus(dir / "bad.jsonl");
  ASSERT_EQ(r.docs.size(), 2u);
  ASSERT_EQ(r.errors.size(), 4u);
  EXPECT_EQ(r.errors[0].line, 2u);
  EXPECT_EQ(r.errors[3].line, 5u);
  const auto with_default = read_corpus(dir / "bad.jsonl", language("hr"));
  EXPECT_EQ(with_default.docs.size(), 3u);
}

TEST(CorpusIo, MissingFileIsIoError) { EXPECT_THROW(read_corpus("/nonexistent/x.jsonl"), IoError); }

TEST(Stats, OrderIndependentAndPartitionable) {
  corpuskit::Rng rng(9);
  std::vector<Document> docs;
  for (int i = 0; i < 200; ++i)
    docs.push_back(fixture::doc("d" + std::to_string(i), i % 3 ? "sl" : "hr", fixture::sentence(rng, 20)));
  const auto base = compute_stats(docs);
  for (int trial = 0; trial < 5; ++trial) {
    auto shuffled = docs;
    rng.shuffle(shuffled);
    EXPECT_EQ(compute_stats(shuffled), base);
  }
  CorpusStats merged;
  for (const char* l : {"sl", "hr"}) {
    std::vector<Document> part;
    std::copy_if(docs.begin(), docs.end(), std::back_inserter(part), [&](const Document& d) { return d.lang.code == l; });
    merged.merge(compute_stats(part));
  }
  EXPECT_EQ(merged, base);
  EXPECT_GT(base.find("sl")->avg_word_length(), 1.0);
}

TEST(Rng, DeterministicHelpers) {
  corpuskit::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.between(3, 9), b.between(3, 9));
  corpuskit::Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    const auto v = c.between(256, 8192);
    EXPECT_GE(v, 256u);
    EXPECT_LE(v, 8192u);
  }
  EXPECT_EQ(c.weighted({0.0, 0.0}), -1);
  EXPECT_EQ(c.weighted({0.0, 2.0, 0.0}), 1);
}

TEST(Fs, AtomicWriterLeavesNoTempOnAbort) {
  fixture::TempDir dir;
  {
    AtomicWriter w(dir / "x.txt");
    w.stream() << "partial";
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "x.txt"));
  EXPECT_FALSE(std::filesystem::exists(dir / "x.txt.tmp"));
  write_file_atomic(dir / "y.txt", "done");
  EXPECT_EQ(read_file(dir / "y.txt"), "done");
}
