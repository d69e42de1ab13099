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

#ifndef BAMT_LIFT_H_
#define BAMT_LIFT_H_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "bamt/common.h"
#include "bamt/language.h"
#include "bamt/records.h"

namespace bamt {

// Strings indexed by LanguageTag.
using PerLanguage = std::array<std::vector<std::string>, kAllLanguages.size()>;

struct DictionaryEntry {
  std::string entry_id;
  PerLanguage glosses;
  PerLanguage examples;

  const std::vector<std::string> &glosses_of(LanguageTag t) const {
    return glosses[static_cast<std::size_t>(t)];
  }
  const std::vector<std::string> &examples_of(LanguageTag t) const {
    return examples[static_cast<std::size_t>(t)];
  }
  std::vector<std::string> &glosses_of(LanguageTag t) {
    return glosses[static_cast<std::size_t>(t)];
  }
  std::vector<std::string> &examples_of(LanguageTag t) {
    return examples[static_cast<std::size_t>(t)];
  }

  bool operator==(const DictionaryEntry &) const = default;
};

struct CorpusStats {
  std::array<std::size_t, kAllLanguages.size()> gloss_count{};
  std::array<std::size_t, kAllLanguages.size()> example_count{};

  std::size_t glosses(LanguageTag t) const {
    return gloss_count[static_cast<std::size_t>(t)];
  }
  std::size_t examples(LanguageTag t) const {
    return example_count[static_cast<std::size_t>(t)];
  }
  bool operator==(const CorpusStats &) const = default;
};

struct LiftDocument {
  std::vector<DictionaryEntry> entries;
  // Glosses and example forms dropped because their language attribute does
  // not map onto a LanguageTag.
  std::size_t skipped_language_items = 0;
  std::vector<std::string> diagnostics;
};

// Reads <entry> elements. Within an entry, sense/gloss elements give glosses
// and example/form (or example/translation/form) elements give example
// sentences; each carries a `lang` attribute and its text in a <text> child.
// Text is NFC-normalized and whitespace-collapsed; empty strings are dropped.
//
// Throws ParseError (with line/column) on malformed XML and StructuralError
// on a missing or duplicate entry id.
LiftDocument ParseLift(std::string_view document);
LiftDocument ParseLiftFile(const std::string &path);

// Writes back the subset ParseLift reads. ParseLift(SerializeLift(e)).entries
// equals e for any entries produced by ParseLift.
std::string SerializeLift(const std::vector<DictionaryEntry> &entries);

CorpusStats ComputeStats(const std::vector<DictionaryEntry> &entries);

// One record per (entry, language, example), ordered by entry, then language
// (bam < fr < en < es), then ordinal.
std::vector<SentenceRecord> ExtractExamples(
    const std::vector<DictionaryEntry> &entries);
std::vector<SentenceRecord> ExtractGlosses(
    const std::vector<DictionaryEntry> &entries);

}  // namespace bamt

#endif  // BAMT_LIFT_H_
