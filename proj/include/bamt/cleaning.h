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

#ifndef BAMT_CLEANING_H_
#define BAMT_CLEANING_H_

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bamt/common.h"
#include "bamt/language.h"
#include "bamt/records.h"

namespace bamt::cleaning {

// Rule identifiers recorded in SentenceRecord::applied_rules.
inline constexpr std::string_view kRuleProverb = "strip_proverb_prefix";
inline constexpr std::string_view kRuleParenthetical = "strip_parentheticals";
inline constexpr std::string_view kRuleExpand = "expand_pronouns";
inline constexpr std::string_view kFlagUnbalanced = "unbalanced_parentheses";
inline constexpr std::string_view kFlagExpansionCap = "expansion_capped";

struct CleaningConfig {
  // Per source language, sets of interchangeable words (lowercase). A token
  // "A/B" whose parts belong to one set is an alternation site.
  std::map<LanguageTag, std::vector<std::vector<std::string>>> alternations;
  // Matched case-insensitively at the start of a sentence.
  std::vector<std::string> proverb_markers;
  // Upper bound on sentences produced from one sentence.
  std::size_t max_expansions = 8;

  // fr: il/elle, ils/elles. en: he/she, him/her, his/her.
  static CleaningConfig Default();
};

struct CleaningReport {
  std::size_t discarded_count = 0;
  std::size_t expanded_count = 0;
  std::size_t parenthetical_strips = 0;
  std::size_t proverb_strips = 0;
  // Texts left unchanged because of unbalanced parentheses, and sentences
  // whose expansion hit max_expansions.
  std::size_t unbalanced_flags = 0;
  std::size_t capped_expansions = 0;

  CleaningReport &operator+=(const CleaningReport &other);
  bool operator==(const CleaningReport &) const = default;
  bool empty() const { return *this == CleaningReport{}; }
  std::string ToJson() const;
};

// All records of one dictionary entry, bucketed by language in stream order.
struct EntryGroup {
  std::string entry_id;
  std::array<std::vector<SentenceRecord>, kAllLanguages.size()> records;

  std::vector<SentenceRecord> &of(LanguageTag t) {
    return records[static_cast<std::size_t>(t)];
  }
  const std::vector<SentenceRecord> &of(LanguageTag t) const {
    return records[static_cast<std::size_t>(t)];
  }
  std::size_t LanguageCount() const;
  bool operator==(const EntryGroup &) const = default;
};

// Groups by entry_id in order of first appearance.
std::vector<EntryGroup> GroupByEntry(const std::vector<SentenceRecord> &records);
// Entry order, then language order, then stream order.
std::vector<SentenceRecord> Flatten(const std::vector<EntryGroup> &groups);

// Removes groups whose examples cover fewer than two languages.
std::pair<std::vector<EntryGroup>, CleaningReport> DropUnpaired(
    std::vector<EntryGroup> groups);

// Alternation tokens such as "Il/elle" become one sentence per
// alternative. Several sites expand as a cartesian product (first site
// varies slowest), truncated to config.max_expansions. The first alternative
// keeps its spelling; the others are capitalized iff the first one is.
std::vector<std::string> ExpandAlternations(std::string_view text,
                                            LanguageTag language,
                                            const CleaningConfig &config,
                                            bool *capped = nullptr);

// Pairs each expansion of the source side with the untouched Bambara side.
std::vector<std::pair<std::string, std::string>> ExpandPronouns(
    const std::pair<std::string, std::string> &source_and_bambara,
    LanguageTag source_language,
    const CleaningConfig &config = CleaningConfig::Default());

// Removes top-level balanced "(...)" spans with the space before them (the
// space after them when they open the text), then collapses double spaces and
// drops spaces before a final period.
// Unbalanced input is returned unchanged with *unbalanced set.
std::string StripParentheticals(std::string_view text,
                                bool *unbalanced = nullptr);

// Removes a leading "Proverbe:" / "Proverb:" marker.
std::string StripProverbPrefix(
    std::string_view text,
    const CleaningConfig &config = CleaningConfig::Default());

struct CleanResult {
  std::vector<EntryGroup> groups;
  CleaningReport report;
};

// drop_unpaired, then on every non-Bambara sentence strip_proverb_prefix and
// strip_parentheticals, then pronoun expansion row by row: the i-th sentences
// of each language in a group form a row, and a row with k alternatives is
// replaced by k rows in which the Bambara sentence is repeated.
// Deterministic and idempotent.
CleanResult CleanCorpus(std::vector<EntryGroup> groups,
                        const CleaningConfig &config = CleaningConfig::Default());

}  // namespace bamt::cleaning

#endif  // BAMT_CLEANING_H_
