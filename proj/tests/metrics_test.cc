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

#include "bamt/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"

#include "bamt/common.h"
#include "bamt/random.h"

namespace bamt::metrics {
namespace {

using ::bamt::testing::DataPath;
using ::bamt::testing::ReadFile;
using ::bamt::testing::ReadLines;

class ReferenceScorerTest : public ::testing::TestWithParam<std::string> {
 protected:
  void SetUp() override {
    golden_ = nlohmann::json::parse(ReadFile(DataPath("metrics/golden.json")));
    hyps_ = ReadLines(DataPath("metrics/hyp." + GetParam()));
    refs_ = ReadLines(DataPath("metrics/ref." + GetParam()));
  }

  nlohmann::json golden_;
  std::vector<std::string> hyps_, refs_;
};

TEST_P(ReferenceScorerTest, Tokenization) {
  const auto &expected = golden_[GetParam()]["tokenized_hyp"];
  ASSERT_EQ(expected.size(), hyps_.size());
  for (std::size_t i = 0; i < hyps_.size(); ++i) {
    EXPECT_EQ(TokenizeIntl(hyps_[i]), expected[i].get<std::string>());
  }
}

TEST_P(ReferenceScorerTest, Bleu) {
  const auto &g = golden_[GetParam()];
  const ScoreReport r = Bleu(hyps_, refs_);
  EXPECT_NEAR(r.bleu, g["bleu"].get<double>(), 1e-9);
  for (int n = 0; n < 4; ++n) {
    EXPECT_NEAR(r.precisions[n], g["precisions"][n].get<double>(), 1e-9);
  }
  EXPECT_NEAR(r.brevity_penalty, g["bp"].get<double>(), 1e-12);
  EXPECT_EQ(r.sys_len, g["sys_len"].get<std::int64_t>());
  EXPECT_EQ(r.ref_len, g["ref_len"].get<std::int64_t>());
  EXPECT_EQ(r.bleu_signature, golden_["signatures"]["bleu"].get<std::string>());
}

TEST_P(ReferenceScorerTest, Chrf) {
  const ScoreReport r = Chrf(hyps_, refs_);
  EXPECT_NEAR(r.chrf, golden_[GetParam()]["chrf"].get<double>(), 1e-12);
  EXPECT_EQ(r.chrf_signature, golden_["signatures"]["chrf"].get<std::string>());
}

INSTANTIATE_TEST_SUITE_P(Languages, ReferenceScorerTest,
                         ::testing::Values("bam", "fr", "en"));

TEST(TokenizeIntlTest, DigitAdjacency) {
  // Values produced by the reference scorer, double spaces included.
  EXPECT_EQ(TokenizeIntl("3,5 francs."), "3,5 francs  .");
  EXPECT_EQ(TokenizeIntl("en 1938."), "en 1938.");
  EXPECT_EQ(TokenizeIntl("a,b"), "a  ,  b");
  EXPECT_EQ(TokenizeIntl("$3.50"), "$ 3.50");
  EXPECT_EQ(TokenizeIntl("  x  "), "x");
}

TEST(BleuTest, Identity) {
  const std::vector<std::string> s = {"A bangera Bamakɔ san 1938.",
                                      "Il est né à Bamako en 1938."};
  EXPECT_DOUBLE_EQ(Bleu(s, s).bleu, 100.0);
  EXPECT_DOUBLE_EQ(Chrf(s, s).chrf, 1.0);
}

TEST(BleuTest, EmptyHypotheses) {
  EXPECT_EQ(Bleu({"", ""}, {"a b c", "d e"}).bleu, 0.0);
  EXPECT_EQ(Chrf({"", ""}, {"a b c", "d e"}).chrf, 0.0);
}

TEST(ChrfTest, DisjointCharacters) {
  EXPECT_EQ(Chrf({"xyz"}, {"abc"}).chrf, 0.0);
}

TEST(BleuTest, RejectsBadInput) {
  EXPECT_THROW(Bleu({"a"}, {"a", "b"}), InvalidArgument);
  EXPECT_THROW(Bleu({}, {}), InvalidArgument);
  EXPECT_THROW(Chrf({"a"}, {}), InvalidArgument);
}

TEST(BleuTest, PermutationInvariant) {
  auto hyps = ReadLines(DataPath("metrics/hyp.fr"));
  auto refs = ReadLines(DataPath("metrics/ref.fr"));
  const ScoreReport before = Score(hyps, refs);
  std::vector<std::size_t> order(hyps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(3);
  rng.Shuffle(order);
  std::vector<std::string> h2, r2;
  for (std::size_t i : order) {
    h2.push_back(hyps[i]);
    r2.push_back(refs[i]);
  }
  const ScoreReport after = Score(h2, r2);
  EXPECT_DOUBLE_EQ(before.bleu, after.bleu);
  EXPECT_DOUBLE_EQ(before.chrf, after.chrf);
}

TEST(BleuTest, ReplacingHypothesisByReferenceNeverHurts) {
  for (const std::string lang : {"bam", "fr", "en"}) {
    auto hyps = ReadLines(DataPath("metrics/hyp." + lang));
    const auto refs = ReadLines(DataPath("metrics/ref." + lang));
    ScoreReport prev = Score(hyps, refs);
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      hyps[i] = refs[i];
      const ScoreReport next = Score(hyps, refs);
      EXPECT_GE(next.bleu, prev.bleu - 1e-9) << lang << " " << i;
      EXPECT_GE(next.chrf, prev.chrf - 1e-12) << lang << " " << i;
      EXPECT_LE(next.bleu, 100.0 + 1e-9);
      EXPECT_LE(next.chrf, 1.0 + 1e-12);
      prev = next;
    }
  }
}

TEST(ScoreTableTest, OneSystemOneRow) {
  const ResultsTable t = ScoreTable({{"(1)", "word", "fr-bam", {"a b c d"}}},
                                    {{"fr-bam", {"a b c d"}}});
  ASSERT_EQ(t.labels.size(), 1u);
  EXPECT_EQ(t.Cell(0, 0), "100.0");
  EXPECT_EQ(t.Cell(0, 1), "1.00");
}

TEST(ScoreTableTest, TiesAreAllMarked) {
  const ResultsTable t = ScoreTable(
      {{"(1)", "a", "x", {"a b c d"}},
       {"(2)", "b", "x", {"a b c d"}},
       {"(3)", "c", "x", {"q"}}},
      {{"x", {"a b c d"}}});
  const auto mask = t.BestMask();
  EXPECT_TRUE(mask[0][0]);
  EXPECT_TRUE(mask[1][0]);
  EXPECT_FALSE(mask[2][0]);
}

TEST(ScoreTableTest, MissingCells) {
  const ResultsTable t = ScoreTable({{"(1)", "", "x", {"a"}}, {"(2)", "", "y", {"b"}}},
                                    {{"x", {"a"}}, {"y", {"b"}}});
  EXPECT_EQ(t.Cell(0, 2), "-");
  EXPECT_EQ(t.Cell(1, 0), "-");
  EXPECT_THROW(ScoreTable({{"(1)", "", "z", {"a"}}}, {{"x", {"a"}}}),
               InvalidArgument);
}

TEST(ScoreTableTest, Snapshot) {
  std::vector<SystemOutput> systems;
  std::vector<EvalSet> evals;
  for (const std::string lang : {"bam", "fr"}) {
    const auto refs = ReadLines(DataPath("metrics/ref." + lang));
    auto hyps = ReadLines(DataPath("metrics/hyp." + lang));
    evals.push_back({"to-" + lang, refs});
    systems.push_back({"(1)", "fixture", "to-" + lang, hyps});
    hyps.resize(hyps.size() / 2);
    hyps.resize(refs.size());
    systems.push_back({"(2)", "half empty", "to-" + lang, hyps});
  }
  const ResultsTable t = ScoreTable(systems, evals);
  EXPECT_EQ(t.ToText(), ReadFile(DataPath("metrics/table.txt")));
  EXPECT_EQ(nlohmann::json::parse(t.ToJson()),
            nlohmann::json::parse(ReadFile(DataPath("metrics/table.json"))));
}

}  // namespace
}  // namespace bamt::metrics
