// Copyright 2026 The Presque Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "presque/scorer.hpp"

namespace presque {
namespace {

std::string TempPath(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "presque_scorer_test";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::filesystem::remove(path);
  return path.string();
}

// Counts backend traffic so cache hits can be observed.
class CountingScorer : public Scorer {
 public:
  explicit CountingScorer(MockScorer& inner) : inner_(inner) {}
  std::string id() const override { return inner_.id(); }
  std::size_t calls = 0;
  std::size_t pairs = 0;

 protected:
  std::vector<EntailmentResult> do_score_batch(std::span<const EntailmentQuery> qs) override {
    ++calls;
    pairs += qs.size();
    return inner_.score_batch(qs);
  }

 private:
  MockScorer& inner_;
};

bool Identical(const EntailmentResult& a, const EntailmentResult& b) {
  return a.entail == b.entail && a.neutral == b.neutral && a.contradict == b.contradict;
}

TEST(MockScorerTest, ReflexiveFallback) {
  MockScorer mock;
  EntailmentResult r = mock.score({"X is here.", "X is here."});
  EXPECT_GE(r.entail, 0.99);
  EXPECT_TRUE(is_simplex(r));
}

TEST(MockScorerTest, TableEntry) {
  MockScorer mock;
  mock.set("Some apples are red.", "30% apples are red.", {0.6, 0.3, 0.1});
  EntailmentResult r = mock.score({"Some apples are red.", "30% apples are red."});
  EXPECT_TRUE(Identical(r, {0.6, 0.3, 0.1}));
}

TEST(MockScorerTest, UnknownPairIsUniform) {
  MockScorer mock;
  EntailmentResult r = mock.score({"a", "b"});
  EXPECT_DOUBLE_EQ(r.entail, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.neutral, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.contradict, 1.0 / 3.0);
}

TEST(MockScorerTest, RejectsNonSimplexEntry) {
  MockScorer mock;
  EXPECT_THROW(mock.set("a", "b", {0.5, 0.5, 0.5}), Error);
  EXPECT_THROW(mock.set_entail("a", "b", 1.5), Error);
}

TEST(MockScorerTest, IdDependsOnContentNotOrder) {
  MockScorer a, b, c;
  a.set_entail("p1", "h1", 0.2);
  a.set_entail("p2", "h2", 0.7);
  b.set_entail("p2", "h2", 0.7);
  b.set_entail("p1", "h1", 0.2);
  c.set_entail("p1", "h1", 0.2);
  c.set_entail("p2", "h2", 0.71);
  EXPECT_EQ(a.id(), b.id());
  EXPECT_NE(a.id(), c.id());
  // Overwriting an entry updates the identity.
  c.set_entail("p2", "h2", 0.7);
  EXPECT_EQ(a.id(), c.id());
}

TEST(MockScorerTest, SaveLoadRoundTrip) {
  MockScorer mock;
  mock.set("Some apples are red.", "30% apples are red.", {0.61, 0.29, 0.1});
  mock.set_entail("Für Ä", "ö", 0.125);
  std::string path = TempPath("mock.jsonl");
  mock.save(path);
  MockScorer loaded = MockScorer::load(path);
  EXPECT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded.id(), mock.id());
}

TEST(MockScorerTest, LoadReportsLine) {
  std::string path = TempPath("bad_mock.jsonl");
  std::ofstream(path) << R"({"premise":"a","hypothesis":"b","entail":0.5})" << "\n"
                      << "{not json\n";
  try {
    MockScorer::load(path);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(ScoreBatchTest, RejectsEmptyAndInvalid) {
  MockScorer mock;
  std::vector<EntailmentQuery> none;
  EXPECT_THROW(mock.score_batch(none), Error);
  std::vector<EntailmentQuery> empty_text = {{"", "b"}};
  EXPECT_THROW(mock.score_batch(empty_text), Error);
  std::vector<EntailmentQuery> bad_utf8 = {{"a\xff", "b"}};
  EXPECT_THROW(mock.score_batch(bad_utf8), Error);
}

TEST(ScoreBatchTest, DuplicatesGiveIdenticalResults) {
  MockScorer mock;
  mock.set_entail("p", "h", 0.42);
  std::vector<EntailmentQuery> qs = {{"p", "h"}, {"p", "h"}};
  auto out = mock.score_batch(qs);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(Identical(out[0], out[1]));
}

TEST(ScoreBatchTest, BatchEqualsSequential) {
  MockScorer mock;
  std::vector<EntailmentQuery> qs;
  for (int i = 0; i < 5; ++i) {
    std::string p = "premise " + std::to_string(i), h = "hypothesis " + std::to_string(i);
    mock.set_entail(p, h, 0.1 * (i + 1));
    qs.push_back({p, h});
  }
  qs.push_back({"unknown", "pair"});
  auto batch = mock.score_batch(qs);
  ASSERT_EQ(batch.size(), qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) EXPECT_TRUE(Identical(batch[i], mock.score(qs[i])));
}

TEST(StableHashTest, KnownValues) {
  // FNV-1a 64-bit reference values.
  EXPECT_EQ(hex64(stable_hash("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(stable_hash("a")), "af63dc4c8601ec8c");
}

TEST(ScoreCacheTest, InMemoryLookup) {
  ScoreCache cache;
  EntailmentQuery q{"p", "h"};
  EXPECT_FALSE(cache.lookup("s1", q));
  cache.insert("s1", q, {0.2, 0.3, 0.5});
  ASSERT_TRUE(cache.lookup("s1", q));
  EXPECT_TRUE(Identical(*cache.lookup("s1", q), {0.2, 0.3, 0.5}));
  // Different backend identity never collides.
  EXPECT_FALSE(cache.lookup("s2", q));
}

TEST(ScoreCacheTest, PersistsByteIdentical) {
  std::string path = TempPath("cache.tsv");
  const EntailmentResult r{0.1 + 0.2, 0.3, 1.0 - (0.1 + 0.2) - 0.3};
  {
    ScoreCache cache(path);
    cache.insert("mock-1", {"p", "h"}, r);
    cache.insert("mock-1", {"p", "h"}, r);  // second insert is a no-op
  }
  {
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 1u);
  }
  ScoreCache reloaded(path);
  auto hit = reloaded.lookup("mock-1", {"p", "h"});
  ASSERT_TRUE(hit);
  EXPECT_TRUE(Identical(*hit, r));
}

TEST(ScoreCacheTest, SkipsMalformedLines) {
  std::string path = TempPath("cache_bad.tsv");
  std::ofstream(path) << "garbage\n"
                      << "id\t0\t0\t0.5\t0.25\n"
                      << "id\taa\tbb\t0.5\t0.25\t0.25\n";
  std::vector<std::string> warnings;
  auto saved = warning_sink();
  warning_sink() = [&](std::string_view m) { warnings.emplace_back(m); };
  ScoreCache cache(path);
  warning_sink() = saved;
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(CachedScorerTest, TransparentAndDeduplicating) {
  MockScorer mock;
  mock.set_entail("p1", "h1", 0.3);
  mock.set_entail("p2", "h2", 0.8);
  CountingScorer counting(mock);
  ScoreCache cache;
  CachedScorer cached(counting, cache);
  std::vector<EntailmentQuery> qs = {{"p1", "h1"}, {"p2", "h2"}, {"p1", "h1"}, {"x", "y"}};
  auto first = cached.score_batch(qs);
  EXPECT_EQ(counting.calls, 1u);
  EXPECT_EQ(counting.pairs, 3u);
  auto second = cached.score_batch(qs);
  EXPECT_EQ(counting.calls, 1u);
  auto direct = mock.score_batch(qs);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    EXPECT_TRUE(Identical(first[i], direct[i]));
    EXPECT_TRUE(Identical(second[i], direct[i]));
  }
  EXPECT_EQ(cached.id(), mock.id());
}

TEST(CachedScorerTest, FileCacheServesSecondRun) {
  std::string path = TempPath("cached_run.tsv");
  MockScorer mock;
  mock.set_entail("p", "h", 0.7);
  std::vector<EntailmentQuery> qs = {{"p", "h"}};
  {
    ScoreCache cache(path);
    CachedScorer cached(mock, cache);
    cached.score_batch(qs);
  }
  CountingScorer counting(mock);
  ScoreCache cache(path);
  CachedScorer cached(counting, cache);
  auto out = cached.score_batch(qs);
  EXPECT_EQ(counting.calls, 0u);
  EXPECT_DOUBLE_EQ(out[0].entail, 0.7);
}

}  // namespace
}  // namespace presque
