#include <gtest/gtest.h>

#include <fstream>

#include "../support/fixtures.hpp"
#include "corpuskit/corpus_io.hpp"
#include "corpuskit/fsutil.hpp"
#include "corpuskit/pipeline.hpp"

using namespace corpuskit;
namespace fs = std::filesystem;

namespace {

const fs::path kExample = fs::path(CORPUSKIT_SOURCE_DIR) / "data" / "example";

PipelineConfig example_config(const fs::path& out) {
  auto c = PipelineConfig::load(kExample / "pipeline.ini");
  c.output_dir = out;
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return files;
}

}  // namespace

TEST(Config, ParsesExample) {
  const auto c = PipelineConfig::load(kExample / "pipeline.ini");
  EXPECT_EQ(c.inputs.size(), 3u);
  EXPECT_EQ(c.stages.size(), 7u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.pii.seed, 7u);
  EXPECT_EQ(c.topic.lda.topics, 4);
  EXPECT_TRUE(c.heuristics.stopwords.has("sl"));
  EXPECT_EQ(c.url.rules.max_subdomains, 4);
  EXPECT_DOUBLE_EQ(c.sample.fractions[1], 0.675);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsUnknownKeysSectionsAndMissingFiles) {
  fixture::TempDir dir;
  std::ofstream(dir / "in.jsonl") << R"({"id":"a","lang":"en","text":"x"})" << "\n";
  auto parse = [&](const std::string& text) { return PipelineConfig::parse(text, dir.path()); };
  EXPECT_NO_THROW(parse("[pipeline]\ninputs = in.jsonl\noutput = out\n"));
  EXPECT_THROW(parse("[pipeline]\ninputs = in.jsonl\nbogus = 1\n"), ValidationError);
  EXPECT_THROW(parse("[nosuch]\nx = 1\n"), ValidationError);
  EXPECT_THROW(parse("[pipeline]\ninputs = missing.jsonl\n"), ValidationError);
  EXPECT_THROW(parse("[heuristics]\nstopwords = nodir\n"), ValidationError);
  EXPECT_THROW(parse("[pipeline]\nseed = -3\n"), ValidationError);
  EXPECT_THROW(parse("[pipeline]\nstages = url, nosuch\n"), ValidationError);
  EXPECT_THROW(parse("[sample]\nphase_fractions = 0.5, 0.5\n"), ValidationError);
  EXPECT_THROW(parse("[dedup]\nmode = fuzzy\n"), ValidationError);
  EXPECT_NO_THROW(parse("[pipeline]\ninputs = in.jsonl\noutput = out\nstages = url, heuristics\n").validate());
  EXPECT_THROW(parse("[pipeline]\ninputs = in.jsonl\noutput = out\nstages = heuristics, url\n").validate(),
               ValidationError);
}

TEST(Config, HashFollowsBytesAndSeed) {
  fixture::TempDir dir;
  const auto a = PipelineConfig::parse("[pipeline]\nseed = 1\n", dir.path());
  const auto b = PipelineConfig::parse("[pipeline]\nseed = 1\n", dir.path());
  const auto c = PipelineConfig::parse("[pipeline]\nseed = 1 \n", dir.path());
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
  auto d = a;
  d.set_seed(5);
  EXPECT_NE(d.hash, a.hash);
  EXPECT_EQ(d.topic.lda.seed, 5u);
}

TEST(Pipeline, CountsChainAndFiltersOnlyRemove) {
  fixture::TempDir dir;
  Pipeline p(example_config(dir / "out"));
  const auto m = p.run_all();
  ASSERT_EQ(m.stages.size(), 7u);
  EXPECT_EQ(m.stages[0].input_docs, m.input_docs);
  for (std::size_t i = 1; i < m.stages.size(); ++i) {
    EXPECT_EQ(m.stages[i].input_docs, m.stages[i - 1].output_docs);
    EXPECT_LE(m.stages[i].output_docs, m.stages[i].input_docs);
  }
  const auto input = read_corpus(kExample / "corpus" / "en.jsonl").docs;
  std::map<std::string, std::string> original;
  for (const auto* f : {"en", "sl", "hr"})
    for (const auto& d : read_corpus(kExample / "corpus" / (std::string(f) + ".jsonl")).docs) original[d.id] = d.text;
  for (const char* stage : {"url", "heuristics", "topic", "sample"}) {
    const auto* e = m.find(stage);
    ASSERT_NE(e, nullptr);
    for (const auto& d : read_corpus(dir / "out" / e->output).docs) {
      ASSERT_TRUE(original.count(d.id));
      if (std::string(stage) == "url") EXPECT_EQ(d.text, original[d.id]);
    }
  }
  EXPECT_TRUE(fs::exists(dir / "out" / "reports" / "sample-shards.jsonl"));
  EXPECT_FALSE(fs::exists(dir / "out" / ".lock"));
}

TEST(Pipeline, ByteIdenticalAcrossRunsAndJobCounts) {
  fixture::TempDir dir;
  Pipeline(example_config(dir / "a"), 1).run_all();
  Pipeline(example_config(dir / "b"), 4).run_all();
  EXPECT_EQ(snapshot(dir / "a"), snapshot(dir / "b"));
}

TEST(Pipeline, RerunReusesEveryStage) {
  fixture::TempDir dir;
  const auto first = Pipeline(example_config(dir / "out")).run_all();
  const auto before = snapshot(dir / "out");
  std::vector<std::string> log;
  Pipeline again(example_config(dir / "out"));
  again.set_logger([&](const std::string& l) { log.push_back(l); });
  const auto second = again.run_all();
  for (const auto& e : second.stages) EXPECT_TRUE(e.skipped) << e.name;
  EXPECT_EQ(snapshot(dir / "out"), before);
  EXPECT_EQ(second.to_json(), first.to_json());
}

TEST(Pipeline, ChangedSeedInvalidatesStages) {
  fixture::TempDir dir;
  Pipeline(example_config(dir / "out")).run_all();
  auto c = example_config(dir / "out");
  c.set_seed(99);
  const auto m = Pipeline(c).run_all();
  for (const auto& e : m.stages) EXPECT_FALSE(e.skipped) << e.name;
}

TEST(Pipeline, SingleStageNeedsPredecessor) {
  fixture::TempDir dir;
  Pipeline p(example_config(dir / "out"));
  EXPECT_THROW(p.run_stage(Stage::Onion), StageError);
  const auto url = p.run_stage(Stage::Url);
  EXPECT_FALSE(url.skipped);
  const auto lines = p.run_stage(Stage::ExactLines);
  EXPECT_EQ(lines.input_docs, url.output_docs);
  EXPECT_TRUE(p.run_stage(Stage::Url).skipped);
  const auto m = RunManifest::from_json(nlohmann::json::parse(read_file(dir / "out" / "manifest.json")));
  EXPECT_EQ(m.stages.size(), 1u);
  EXPECT_THROW(p.run_stage(Stage::Onion), StageError);
}

TEST(Pipeline, DisabledStageAbsentFromManifest) {
  fixture::TempDir dir;
  auto c = example_config(dir / "out");
  c.stages.erase(std::find(c.stages.begin(), c.stages.end(), Stage::Topic));
  const auto m = Pipeline(c).run_all();
  EXPECT_EQ(m.find("topic"), nullptr);
  EXPECT_EQ(m.stages.size(), 6u);
}

TEST(Pipeline, ZeroInputsGiveEmptyOutputs) {
  fixture::TempDir dir;
  std::ofstream(dir / "empty.jsonl") << "";
  std::ofstream(dir / "kw.txt") << "propag\n";
  const auto c = PipelineConfig::parse(
      "[pipeline]\ninputs = empty.jsonl\noutput = out\n[topic]\nkeywords = kw.txt\n", dir.path());
  const auto m = Pipeline(c).run_all();
  ASSERT_EQ(m.stages.size(), 7u);
  for (const auto& e : m.stages) {
    EXPECT_EQ(e.output_docs, 0u);
    EXPECT_TRUE(fs::exists(dir / "out" / e.output));
  }
}

TEST(Pipeline, InputErrorsAreReportedAndSkipped) {
  fixture::TempDir dir;
  std::ofstream(dir / "in.jsonl") << R"({"id":"a","lang":"en","text":"hello world"})" << "\n{broken\n";
  const auto c =
      PipelineConfig::parse("[pipeline]\ninputs = in.jsonl\noutput = out\nstages = url, exact-lines\n", dir.path());
  const auto m = Pipeline(c).run_all();
  EXPECT_EQ(m.input_docs, 1u);
  EXPECT_EQ(m.input_errors, 1u);
  EXPECT_NE(read_file(dir / "out" / "reports" / "input-errors.jsonl").find("\"line\":2"), std::string::npos);
}

TEST(Pipeline, DuplicateIdsRejected) {
  fixture::TempDir dir;
  std::ofstream(dir / "in.jsonl") << R"({"id":"a","lang":"en","text":"x"})" << "\n"
                                  << R"({"id":"a","lang":"en","text":"y"})" << "\n";
  const auto c = PipelineConfig::parse("[pipeline]\ninputs = in.jsonl\noutput = out\nstages = url\n", dir.path());
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(Pipeline(c).run_all(), ValidationError);
}

TEST(Pipeline, LockIsExclusive) {
  fixture::TempDir dir;
  fs::create_directories(dir / "out");
  DirectoryLock held(dir / "out");
  EXPECT_THROW(DirectoryLock(dir / "out"), Error);
  EXPECT_THROW(Pipeline(example_config(dir / "out")).run_all(), Error);
}
