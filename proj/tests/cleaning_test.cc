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

#include "bamt/cleaning.h"

#include <gtest/gtest.h>

#include <regex>
#include <set>

#include "cleaning_fixture.h"
#include "bamt/records.h"
#include "test_util.h"

namespace bamt::cleaning {
namespace {

using bamt::testing::DataPath;
using bamt::testing::ReadFile;
using Pairs = std::vector<std::pair<std::string, std::string>>;
using Strings = std::vector<std::string>;

constexpr LanguageTag kBam = LanguageTag::kBam;
constexpr LanguageTag kFr = LanguageTag::kFr;
constexpr LanguageTag kEn = LanguageTag::kEn;

SentenceRecord Rec(const std::string &id, LanguageTag lang, const std::string &text,
                   int ordinal = 0) {
  return {id, lang, ordinal, text, {}};
}

// Removes innermost parenthesized spans (with one preceding space) until
// none remain, then normalizes spaces. Balance is checked with a counter.
std::string OracleStrip(const std::string &text, bool *unbalanced) {
  int depth = 0;
  bool broken = false;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')' && --depth < 0) broken = true;
  }
  *unbalanced = broken || depth != 0;
  if (*unbalanced || text.find('(') == std::string::npos) return text;
  static const std::regex kInner(R"( ?\([^()]*\))");
  std::string s = text;
  for (std::string next; (next = std::regex_replace(s, kInner, "", std::regex_constants::format_first_only)) != s;) {
    s = next;
  }
  s = std::regex_replace(s, std::regex(" +"), " ");
  s = std::regex_replace(s, std::regex("^ | $"), "");
  s = std::regex_replace(s, std::regex(" +\\.$"), ".");
  return s.empty() ? text : s;
}

TEST(CleaningTest, DiscardsSingleLanguageGroups) {
  auto groups = GroupByEntry({Rec("a", kBam, "A bɛ taa.")});
  auto [kept, report] = DropUnpaired(groups);
  EXPECT_TRUE(kept.empty());
  EXPECT_EQ(report.discarded_count, 1u);

  groups = GroupByEntry({Rec("a", kBam, "A bɛ taa."), Rec("a", kFr, "Il part.")});
  std::tie(kept, report) = DropUnpaired(groups);
  EXPECT_EQ(kept.size(), 1u);
  EXPECT_EQ(report.discarded_count, 0u);
}

TEST(CleaningTest, TenGroupsThreeMonolingual) {
  std::vector<SentenceRecord> records;
  for (int g = 0; g < 10; ++g) {
    const std::string id = "g" + std::to_string(g);
    records.push_back(Rec(id, g % 2 ? kFr : kBam, "x" + std::to_string(g)));
    if (g != 2 && g != 5 && g != 7) records.push_back(Rec(id, kEn, "y" + std::to_string(g)));
  }
  auto [kept, report] = DropUnpaired(GroupByEntry(records));
  EXPECT_EQ(kept.size(), 7u);
  EXPECT_EQ(report.discarded_count, 3u);
  for (const auto &g : kept) EXPECT_NE(g.entry_id, "g5");
}

TEST(CleaningTest, PronounExample) {
  const std::string bam = "A bangera Bamakɔ san 1938.";
  EXPECT_EQ(ExpandPronouns({"Il/elle est né à Bamako en 1938.", bam}, kFr),
            (Pairs{{"Il est né à Bamako en 1938.", bam}, {"Elle est né à Bamako en 1938.", bam}}));
  EXPECT_EQ(ExpandPronouns({"Il est né à Bamako.", bam}, kFr),
            (Pairs{{"Il est né à Bamako.", bam}}));
}

TEST(CleaningTest, TwoSitesExpandAsCartesianProduct) {
  EXPECT_EQ(ExpandAlternations("he/she runs. he/she jumps.", kEn, CleaningConfig::Default()),
            (Strings{"he runs. he jumps.", "he runs. she jumps.", "she runs. he jumps.",
                     "she runs. she jumps."}));
}

TEST(CleaningTest, AlternationCapitalizationAndBoundaries) {
  const auto config = CleaningConfig::Default();
  EXPECT_EQ(ExpandAlternations("Ils/elles viennent.", kFr, config),
            (Strings{"Ils viennent.", "Elles viennent."}));
  EXPECT_EQ(ExpandAlternations("Je le vois, il/elle aussi.", kFr, config),
            (Strings{"Je le vois, il aussi.", "Je le vois, elle aussi."}));
  EXPECT_EQ(ExpandAlternations("I saw him/her.", kEn, config),
            (Strings{"I saw him.", "I saw her."}));
  EXPECT_EQ(ExpandAlternations("Il/elle part.", kEn, config), Strings{"Il/elle part."});
  EXPECT_EQ(ExpandAlternations("et/ou", kFr, config), Strings{"et/ou"});
  EXPECT_EQ(ExpandAlternations("il/ils", kFr, config), Strings{"il/ils"});
  EXPECT_EQ(ExpandAlternations("fil/elle", kFr, config), Strings{"fil/elle"});
}

TEST(CleaningTest, ExpansionIsCapped) {
  const auto config = CleaningConfig::Default();
  bool capped = false;
  const auto out = ExpandAlternations("he/she he/she he/she he/she", kEn, config, &capped);
  EXPECT_TRUE(capped);
  EXPECT_EQ(out.size(), config.max_expansions);
  EXPECT_EQ(std::set<std::string>(out.begin(), out.end()).size(), out.size());
  ExpandAlternations("he/she he/she he/she", kEn, config, &capped);
  EXPECT_FALSE(capped);
}

TEST(CleaningTest, AlternationListIsConfiguration) {
  CleaningConfig config;
  config.alternations[kEn] = {{"cat", "dog", "bird"}};
  EXPECT_EQ(ExpandAlternations("A cat/dog/bird sings.", kEn, config),
            (Strings{"A cat sings.", "A dog sings.", "A bird sings."}));
  EXPECT_EQ(ExpandAlternations("he/she", kEn, config), Strings{"he/she"});
}

TEST(CleaningTest, ParentheticalExamples) {
  EXPECT_EQ(StripParentheticals("Un doigt ne peut pas prendre un caillou (C'est important "
                                "d'aider les uns les autres)."),
            "Un doigt ne peut pas prendre un caillou.");
  EXPECT_EQ(StripParentheticals("no parens here."), "no parens here.");
  EXPECT_EQ(StripParentheticals("a (b (c) d) e."), "a e.");
  EXPECT_EQ(StripParentheticals("(note) Start here."), "Start here.");
  EXPECT_EQ(StripParentheticals("a(b) c."), "a c.");
  EXPECT_EQ(StripParentheticals("(only)"), "(only)");
  bool unbalanced = false;
  EXPECT_EQ(StripParentheticals("a (b c.", &unbalanced), "a (b c.");
  EXPECT_TRUE(unbalanced);
  EXPECT_EQ(StripParentheticals("a ) b (c).", &unbalanced), "a ) b (c).");
  EXPECT_TRUE(unbalanced);
}

TEST(CleaningTest, ParentheticalsMatchOracleOnFuzz) {
  std::mt19937 rng(17);
  const Strings parts = {"a", "bɛ", " ", " ", "(", ")", "(x)", ".", "ɔ", "  "};
  for (int n = 0; n < 3000; ++n) {
    std::string text;
    for (int k = rng() % 10; k >= 0; --k) text += parts[rng() % parts.size()];
    bool u1 = false, u2 = false;
    const std::string got = StripParentheticals(text, &u1);
    const std::string want = OracleStrip(text, &u2);
    EXPECT_EQ(u1, u2) << "[" << text << "]";
    if (text.find("  ") == std::string::npos || text.find('(') == std::string::npos) {
      EXPECT_EQ(got, want) << "[" << text << "]";
    }
    EXPECT_LE(got.size(), text.size());
    if (!u1) {
      int depth = 0;
      for (char c : got) {
        depth += c == '(' ? 1 : c == ')' ? -1 : 0;
        ASSERT_GE(depth, 0);
      }
      EXPECT_EQ(depth, 0);
    }
  }
}

TEST(CleaningTest, ProverbMarker) {
  EXPECT_EQ(StripProverbPrefix("Une phrase normale."), "Une phrase normale.");
  EXPECT_EQ(StripProverbPrefix("proverb:X"), "X");
  EXPECT_EQ(StripProverbPrefix("PROVERBE:  Qui cherche trouve."), "Qui cherche trouve.");
  EXPECT_EQ(StripProverbPrefix("Proverb:"), "Proverb:");
  EXPECT_EQ(StripProverbPrefix("A proverb: not at the start."), "A proverb: not at the start.");
  EXPECT_EQ(StripParentheticals(StripProverbPrefix(
                "Proverbe: Une longue absence vaut mieux qu'un communiqué (d'un décès).")),
            "Une longue absence vaut mieux qu'un communiqué.");
}

TEST(CleaningTest, ReferenceExamplesThroughFullPipeline) {
  const std::vector<SentenceRecord> records = {
      Rec("p2", kFr, "Il/elle est né à Bamako en 1938."),
      Rec("p2", kBam, "A bangera Bamakɔ san 1938."),
      Rec("p3", kFr,
          "Un doigt ne peut pas prendre un caillou (C'est important d'aider les uns les "
          "autres)."),
      Rec("p3", kBam, "Bolokɔni kelen tɛ se ka bɛlɛ ta."),
      Rec("p4", kFr, "Proverbe: Une longue absence vaut mieux qu'un communiqué (d'un décès)."),
      Rec("p4", kBam, "Fama ka fisa ni kɔmunike ye."),
      Rec("p1", kBam, "Kelen dɔrɔn.")};
  const auto result = CleanCorpus(GroupByEntry(records));
  ASSERT_EQ(result.groups.size(), 3u);
  EXPECT_EQ(result.groups[0].of(kFr)[0].text, "Il est né à Bamako en 1938.");
  EXPECT_EQ(result.groups[0].of(kFr)[1].text, "Elle est né à Bamako en 1938.");
  EXPECT_EQ(result.groups[0].of(kBam).size(), 2u);
  EXPECT_EQ(result.groups[1].of(kFr)[0].text, "Un doigt ne peut pas prendre un caillou.");
  EXPECT_EQ(result.groups[2].of(kFr)[0].text, "Une longue absence vaut mieux qu'un communiqué.");
  EXPECT_EQ(result.groups[2].of(kFr)[0].applied_rules,
            (Strings{std::string(kRuleProverb), std::string(kRuleParenthetical)}));
  EXPECT_EQ(result.report.discarded_count, 1u);
  EXPECT_EQ(result.report.expanded_count, 1u);
  EXPECT_EQ(result.report.parenthetical_strips, 2u);
  EXPECT_EQ(result.report.proverb_strips, 1u);
}

TEST(CleaningTest, TwentyGroupFixtureMatchesHandCleanedGolden) {
  const auto result =
      CleanCorpus(GroupByEntry(ReadRecordsFile(DataPath("cleaning/groups.records"))));
  std::ostringstream os;
  WriteRecords(os, Flatten(result.groups));
  EXPECT_EQ(os.str(), ReadFile(DataPath("cleaning/groups.golden")));
  EXPECT_EQ(result.report.discarded_count, 3u);
  EXPECT_EQ(result.report.expanded_count, 7u);
  EXPECT_EQ(result.report.parenthetical_strips, 7u);
  EXPECT_EQ(result.report.proverb_strips, 3u);
  EXPECT_EQ(result.report.unbalanced_flags, 1u);
  EXPECT_EQ(result.report.capped_expansions, 0u);
}

TEST(CleaningTest, CleanCorpusIsIdempotentAndLeavesBambaraAlone) {
  for (std::uint32_t seed : {1u, 2u, 3u}) {
    const auto records = bamt::testing::FuzzRecords(400, seed);
    const auto once = CleanCorpus(GroupByEntry(records));
    const auto twice = CleanCorpus(once.groups);
    ASSERT_EQ(once.groups.size(), twice.groups.size());
    for (std::size_t g = 0; g < once.groups.size(); ++g) {
      for (std::size_t l = 0; l < kAllLanguages.size(); ++l) {
        const auto &a = once.groups[g].records[l];
        const auto &b = twice.groups[g].records[l];
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].text, b[i].text);
      }
    }
    EXPECT_EQ(twice.report.discarded_count, 0u);
    EXPECT_EQ(twice.report.expanded_count, 0u);
    EXPECT_EQ(twice.report.parenthetical_strips, 0u);
    EXPECT_EQ(twice.report.proverb_strips, 0u);

    std::set<std::string> bam_in, bam_out;
    for (const auto &r : records) {
      if (r.language == kBam) bam_in.insert(r.text);
    }
    for (const auto &r : Flatten(once.groups)) {
      if (r.language == kBam) {
        bam_out.insert(r.text);
        EXPECT_TRUE(r.applied_rules.empty());
      }
    }
    for (const auto &t : bam_out) EXPECT_TRUE(bam_in.count(t)) << t;
  }
}

TEST(CleaningTest, ReportCountsEqualRuleTallies) {
  const auto result = CleanCorpus(GroupByEntry(bamt::testing::FuzzRecords(600, 9)));
  std::size_t proverb = 0, paren = 0, unbalanced = 0;
  std::set<std::tuple<std::string, int, int>> expanded;
  for (const auto &r : Flatten(result.groups)) {
    for (const auto &rule : r.applied_rules) {
      if (rule == kRuleExpand) {
        expanded.insert({r.entry_id, static_cast<int>(r.language), r.ordinal});
      }
    }
  }
  // Expanded rows duplicate their records, so count distinct originals.
  for (const auto &g : result.groups) {
    for (const auto &list : g.records) {
      std::set<int> seen;
      for (const auto &r : list) {
        if (!seen.insert(r.ordinal).second) continue;
        for (const auto &rule : r.applied_rules) {
          proverb += rule == kRuleProverb;
          paren += rule == kRuleParenthetical;
          unbalanced += rule == kFlagUnbalanced;
        }
      }
    }
  }
  EXPECT_EQ(result.report.proverb_strips, proverb);
  EXPECT_EQ(result.report.parenthetical_strips, paren);
  EXPECT_EQ(result.report.unbalanced_flags, unbalanced);
  EXPECT_EQ(result.report.expanded_count, expanded.size());
}

TEST(CleaningTest, AlreadyCleanCorpusIsUnchanged) {
  const std::vector<SentenceRecord> records = {Rec("a", kBam, "A bɛ taa."),
                                               Rec("a", kFr, "Il part."),
                                               Rec("a", kEn, "He leaves.")};
  const auto result = CleanCorpus(GroupByEntry(records));
  EXPECT_EQ(Flatten(result.groups), records);
  EXPECT_TRUE(result.report.empty());
}

TEST(CleaningTest, ReportJson) {
  CleaningReport r;
  r.discarded_count = 2;
  r.proverb_strips = 1;
  EXPECT_EQ(r.ToJson(),
            "{\n  \"discarded_count\": 2,\n  \"expanded_count\": 0,\n  \"parenthetical_strips\": "
            "0,\n  \"proverb_strips\": 1,\n  \"unbalanced_flags\": 0,\n  \"capped_expansions\": "
            "0\n}\n");
}

}  // namespace
}  // namespace bamt::cleaning
