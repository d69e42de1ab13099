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

#include "bamt/language.h"

#include <algorithm>
#include <cctype>

#include "bamt/common.h"

namespace bamt {

std::string_view LanguageCode(LanguageTag tag) {
  switch (tag) {
    case LanguageTag::kBam:
      return "bam";
    case LanguageTag::kFr:
      return "fr";
    case LanguageTag::kEn:
      return "en";
    case LanguageTag::kEs:
      return "es";
  }
  return "?";
}

std::optional<LanguageTag> ParseLanguageTag(std::string_view code) {
  std::string primary(code.substr(0, code.find_first_of("-_")));
  std::transform(primary.begin(), primary.end(), primary.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (primary == "bam" || primary == "bm") return LanguageTag::kBam;
  if (primary == "fr" || primary == "fra" || primary == "fre")
    return LanguageTag::kFr;
  if (primary == "en" || primary == "eng") return LanguageTag::kEn;
  if (primary == "es" || primary == "spa") return LanguageTag::kEs;
  return std::nullopt;
}

LanguageTag LanguageFromCode(std::string_view code) {
  if (auto tag = ParseLanguageTag(code)) return *tag;
  throw InvalidArgument("unknown language code '" + std::string(code) + "'");
}

}  // namespace bamt
