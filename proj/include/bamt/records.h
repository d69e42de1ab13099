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

#ifndef BAMT_RECORDS_H_
#define BAMT_RECORDS_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bamt/common.h"
#include "bamt/language.h"

namespace bamt {

// One sentence in one language, with the dictionary entry it came from.
struct SentenceRecord {
  std::string entry_id;
  LanguageTag language = LanguageTag::kBam;
  int ordinal = 0;
  std::string text;
  // Identifiers of cleaning rules that modified this record, in order.
  std::vector<std::string> applied_rules;

  bool operator==(const SentenceRecord &) const = default;
};

// Tab-separated record lines: entry_id, language, ordinal, text and an
// optional fifth column listing applied rules joined by ','. Tabs, newlines
// and backslashes inside fields are written as \t, \n and \\.
void WriteRecords(std::ostream &os, const std::vector<SentenceRecord> &records);
std::vector<SentenceRecord> ReadRecords(std::istream &is);

void WriteRecordsFile(const std::string &path,
                      const std::vector<SentenceRecord> &records);
std::vector<SentenceRecord> ReadRecordsFile(const std::string &path);

std::string EscapeField(std::string_view field);
std::string UnescapeField(std::string_view field);

// Splits one line on '\t' without unescaping.
std::vector<std::string_view> SplitTabs(std::string_view line);

}  // namespace bamt

#endif  // BAMT_RECORDS_H_
