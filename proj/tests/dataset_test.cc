// Copyright 2026 The bamt Authors.
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

#include "bamt/dataset.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "bamt/random.h"
#include "json.hpp"
#include "test_util.h"

namespace bamt::data {
namespace {

using bamt::testing::ReadFile;
using bamt::testing::TempDir;
using bamt::testing::WriteFile;

constexpr LanguageTag kBam = LanguageTag::kBam;
constexpr LanguageTag kFr = LanguageTag::kFr;
constexpr LanguageTag kEn = LanguageTag::kEn;

ParallelCorpus Numbered(std::size_t n, LanguageTag src = kFr, LanguageTag tgt = kBam) {
  ParallelCorpus c;
  c.src_lang = src;
  c.tgt_lang = tgt;
  for (std::size_t i = 0; i < n; ++i) {
    c.pairs.push_back({"s" + std::to_string(i), "t" + std::to_string(i), false});
  }
  return c;
}

std::size_t Index(const SentencePair &p) { return std::stoul(p.source.substr(1)); }

TEST(SplitTest, PublishedSizes) {
  EXPECT_EQ(ComputeSplitSizes(2146), (SplitSizes{1611, 268, 267}));
  EXPECT_EQ(ComputeSplitSizes(2158), (SplitSizes{1620, 270, 268}));
  EXPECT_EQ(ComputeSplitSizes(8), (SplitSizes{6, 1, 1}));
}

TEST(SplitTest, TooSmallOrBadRatiosAreRejected) {
  for (std::size_t n = 0; n < 8; ++n) EXPECT_THROW(ComputeSplitSizes(n), InvalidArgument);
  SplitSpec bad;
  bad.train = 0.8;
  EXPECT_THROW(ComputeSplitSizes(100, bad), InvalidArgument);
  EXPECT_THROW(SplitCorpus(Numbered(5)), InvalidArgument);
}

TEST(SplitTest, PartitionForEverySmallSize) {
  for (std::size_t n = 8; n <= 64; ++n) {
    const Split s = SplitCorpus(Numbered(n));
    const double eighth = static_cast<double>(n) / 8.0;
    EXPECT_EQ(s.dev.size(), static_cast<std::size_t>(std::floor(eighth + 0.5))) << n;
    EXPECT_EQ(s.test.size(),
              static_cast<std::size_t>(std::max(1.0, std::ceil(eighth) - 2.0))) << n;
    EXPECT_EQ(s.train.size() + s.dev.size() + s.test.size(), n);
    std::vector<int> seen(n, 0);
    for (const ParallelCorpus *part : {&s.train, &s.dev, &s.test}) {
      for (const auto &p : part->pairs) ++seen[Index(p)];
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; })) << n;
    for (std::size_t i = 0; i < s.dev.size(); ++i) {
      EXPECT_EQ(Index(s.dev.pairs[i]), s.dev_index[i]);
    }
  }
}

TEST(SplitTest, ShuffleIsSeededFisherYatesOverMt19937_64) {
  // The engine is fully specified by the C++ standard, so splits are the
  // same on every platform.
  Rng check(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = check.Next();
  EXPECT_EQ(x, 9981545732273789042ULL);

  const std::size_t n = 40;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 engine(kDefaultSplitSeed);
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % i;
    std::uint64_t r;
    do {
      r = engine();
    } while (r >= limit);
    std::swap(order[i - 1], order[r % i]);
  }
  const Split s = SplitCorpus(Numbered(n));
  std::vector<std::size_t> got = s.train_index;
  got.insert(got.end(), s.dev_index.begin(), s.dev_index.end());
  got.insert(got.end(), s.test_index.begin(), s.test_index.end());
  EXPECT_EQ(got, order);
}

TEST(SplitTest, SameSeedSameSplitOtherSeedDiffers) {
  const auto c = Numbered(200);
  EXPECT_EQ(SplitCorpus(c).dev, SplitCorpus(c).dev);
  SplitSpec other;
  other.seed = 7;
  EXPECT_NE(SplitCorpus(c).dev, SplitCorpus(c, other).dev);
}

TEST(SplitTest, WrittenFilesAndMetadata) {
  TempDir dir;
  const auto c = Numbered(24, kBam, kEn);
  const auto s = SplitCorpus(c);
  WriteSplit(dir.file("x"), s, {}, c.ContentHash());
  EXPECT_EQ(ReadParallel(dir.file("x.dev.bam"), dir.file("x.dev.en"), kBam, kEn), s.dev);
  EXPECT_EQ(ReadParallel(dir.file("x.train.bam"), dir.file("x.train.en"), kBam, kEn), s.train);
  const auto meta = nlohmann::json::parse(ReadFile(dir.file("x.meta.json")));
  EXPECT_EQ(meta["seed"], kDefaultSplitSeed);
  EXPECT_EQ(meta["counts"]["train"], 20);
  EXPECT_EQ(meta["counts"]["dev"], 3);
  EXPECT_EQ(meta["counts"]["test"], 1);
  EXPECT_EQ(meta["source_hash"], c.ContentHash());
  EXPECT_EQ(meta["hashes"]["test"], s.test.ContentHash());
  EXPECT_EQ(meta["ratios"], nlohmann::json::parse("[0.75, 0.125, 0.125]"));
}

TEST(ParallelTest, MismatchedFilesAndEmptySides) {
  TempDir dir;
  WriteFile(dir.file("a"), "x\ny\n");
  WriteFile(dir.file("b"), "x\n");
  EXPECT_THROW(ReadParallel(dir.file("a"), dir.file("b"), kFr, kBam), InvalidArgument);
  EXPECT_THROW(ReadParallel(dir.file("a"), dir.file("missing"), kFr, kBam), IoError);
  ParallelCorpus c = Numbered(3);
  EXPECT_NO_THROW(c.Validate());
  c.pairs[1].target = "  ";
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(ParallelTest, ReversedAndHash) {
  const auto c = Numbered(4);
  const auto r = c.Reversed();
  EXPECT_EQ(r.src_lang, kBam);
  EXPECT_EQ(r.pairs[2].source, "t2");
  EXPECT_EQ(r.Reversed(), c);
  EXPECT_NE(r.ContentHash(), c.ContentHash());
  auto d = c;
  d.pairs[0].synthetic = true;
  EXPECT_NE(d.ContentHash(), c.ContentHash());
}

ParallelCorpus Pairs(LanguageTag src, LanguageTag tgt,
                     const std::vector<std::pair<std::string, std::string>> &pairs) {
  ParallelCorpus c;
  c.src_lang = src;
  c.tgt_lang = tgt;
  for (const auto &[s, t] : pairs) c.pairs.push_back({s, t, false});
  return c;
}

TEST(ConcatTest, DisjointInputsConcatenate) {
  const auto fr = Pairs(kFr, kBam, {{"f1", "b1"}, {"f2", "b2"}});
  const auto en = Pairs(kEn, kBam, {{"e1", "b3"}});
  const auto r = MultilingualConcat(fr, en, {Pairs(kFr, kBam, {{"fd", "b9"}})},
                                    {Pairs(kEn, kBam, {{"ed", "b8"}})});
  EXPECT_EQ(r.removed, 0u);
  ASSERT_EQ(r.corpus.size(), 3u);
  EXPECT_EQ(r.corpus.pairs[2].source, "e1");
  EXPECT_EQ(r.foreign, (std::vector<LanguageTag>{kFr, kFr, kEn}));
}

TEST(ConcatTest, EnglishPairLeakingIntoFrenchDevIsRemoved) {
  const auto fr = Pairs(kFr, kBam, {{"f1", "b1"}});
  const auto en = Pairs(kEn, kBam, {{"e1", "A bɛ  taa."}, {"e2", "b2"}});
  const auto fr_dev = Pairs(kFr, kBam, {{"x", "A bɛ taa."}});
  const auto r = MultilingualConcat(fr, en, {fr_dev}, {});
  EXPECT_EQ(r.removed, 1u);
  EXPECT_EQ(r.removed_en, 1u);
  ASSERT_EQ(r.corpus.size(), 2u);
  EXPECT_EQ(r.corpus.pairs[1].source, "e2");
}

TEST(ConcatTest, BambaraSidesMustAgree) {
  const auto fr = Pairs(kFr, kBam, {{"f1", "b1"}});
  const auto en = Pairs(kBam, kEn, {{"b1", "e1"}});
  EXPECT_THROW(MultilingualConcat(fr, en, {}, {}), InvalidArgument);
  EXPECT_THROW(MultilingualConcat(fr, Pairs(kEn, kFr, {}), {}, {}), InvalidArgument);
  const auto r = MultilingualConcat(fr.Reversed(), en, {}, {en});
  EXPECT_EQ(r.corpus.src_lang, kBam);
  EXPECT_EQ(r.removed_fr, 1u);
}

TEST(ConcatTest, RemovalCountEqualsSetIntersection) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto make = [&](LanguageTag foreign, int n) {
      ParallelCorpus c;
      c.src_lang = foreign;
      c.tgt_lang = kBam;
      for (int i = 0; i < n; ++i) {
        c.pairs.push_back({"x", "b" + std::to_string(rng() % 60), false});
      }
      return c;
    };
    const auto fr = make(kFr, 40), en = make(kEn, 40);
    const auto fr_dev = make(kFr, 8), fr_test = make(kFr, 8);
    const auto en_dev = make(kEn, 8), en_test = make(kEn, 8);
    const auto r = MultilingualConcat(fr, en, {fr_dev, fr_test}, {en_dev, en_test});
    std::set<std::string> fr_eval, en_eval;
    for (const auto &p : fr_dev.pairs) fr_eval.insert(p.target);
    for (const auto &p : fr_test.pairs) fr_eval.insert(p.target);
    for (const auto &p : en_dev.pairs) en_eval.insert(p.target);
    for (const auto &p : en_test.pairs) en_eval.insert(p.target);
    std::size_t expect_fr = 0, expect_en = 0;
    for (const auto &p : fr.pairs) expect_fr += en_eval.count(p.target);
    for (const auto &p : en.pairs) expect_en += fr_eval.count(p.target);
    EXPECT_EQ(r.removed_fr, expect_fr);
    EXPECT_EQ(r.removed_en, expect_en);
    EXPECT_EQ(r.corpus.size(), 80 - expect_fr - expect_en);
    for (std::size_t i = 0; i < r.corpus.size(); ++i) {
      const auto &other = r.foreign[i] == kFr ? en_eval : fr_eval;
      EXPECT_EQ(other.count(r.corpus.pairs[i].target), 0u);
    }
  }
}

TEST(MonolingualTest, FourHundredEightyEightLines) {
  TempDir dir;
  std::string text;
  for (int i = 0; i < 488; ++i) text += "Kumasen " + std::to_string(i) + " bɛ yan.\n";
  WriteFile(dir.file("mono.bam"), text);
  const auto set = LoadMonolingual(dir.file("mono.bam"));
  ASSERT_EQ(set.sentences.size(), 488u);
  EXPECT_EQ(set.sentences[487], "Kumasen 487 bɛ yan.");
  EXPECT_EQ(set.blank_lines, 0u);
}

TEST(MonolingualTest, LengthFilterMatchesBruteForce) {
  TempDir dir;
  std::mt19937 rng(21);
  std::string text;
  std::size_t short_lines = 0, blanks = 0;
  std::vector<std::string> expected;
  for (int i = 0; i < 300; ++i) {
    if (rng() % 10 == 0) {
      text += "   \n";
      ++blanks;
      continue;
    }
    const int words = 1 + static_cast<int>(rng() % 9);
    std::string line;
    for (int w = 0; w < words; ++w) line += (w ? " " : "") + std::string("ka");
    if (words <= 5) {
      ++short_lines;
      expected.push_back(line);
    }
    text += line + "\n";
  }
  WriteFile(dir.file("m"), text);
  const auto set = LoadMonolingual(dir.file("m"), 5);
  EXPECT_EQ(set.sentences.size(), short_lines);
  EXPECT_EQ(set.sentences, expected);
  EXPECT_EQ(set.blank_lines, blanks);
  EXPECT_EQ(set.filtered, 300 - blanks - short_lines);
}

TEST(MonolingualTest, EmptyFileIsAnError) {
  TempDir dir;
  WriteFile(dir.file("empty"), "");
  WriteFile(dir.file("blank"), "\n  \n\n");
  EXPECT_THROW(LoadMonolingual(dir.file("empty")), InvalidArgument);
  EXPECT_THROW(LoadMonolingual(dir.file("blank")), InvalidArgument);
  WriteFile(dir.file("one"), "\nA bɛ taa.\n\n");
  const auto set = LoadMonolingual(dir.file("one"));
  EXPECT_EQ(set.sentences.size(), 1u);
  EXPECT_EQ(set.blank_lines, 2u);
}

}  // namespace
}  // namespace bamt::data
