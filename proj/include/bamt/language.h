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

#ifndef BAMT_LANGUAGE_H_
#define BAMT_LANGUAGE_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "bamt/common.h"

namespace bamt {

// The four languages present in the dictionary. Enumerator order is the
// canonical output order (bam < fr < en < es).
enum class LanguageTag { kBam = 0, kFr = 1, kEn = 2, kEs = 3 };

inline constexpr std::array<LanguageTag, 4> kAllLanguages = {
    LanguageTag::kBam, LanguageTag::kFr, LanguageTag::kEn, LanguageTag::kEs};

// Short code: "bam", "fr", "en", "es".
std::string_view LanguageCode(LanguageTag tag);

// Accepts the canonical codes plus common ISO 639 aliases ("bm", "fra",
// "eng", ...) and region subtags ("fr-FR"). Returns nullopt otherwise.
std::optional<LanguageTag> ParseLanguageTag(std::string_view code);

// Like ParseLanguageTag but throws InvalidArgument on unknown codes.
LanguageTag LanguageFromCode(std::string_view code);

}  // namespace bamt

#endif  // BAMT_LANGUAGE_H_
