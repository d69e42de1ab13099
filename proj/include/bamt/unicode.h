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

#ifndef BAMT_UNICODE_H_
#define BAMT_UNICODE_H_

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers. Whitespace follows Python's str.isspace() so that word
// splitting agrees with the reference scorer and subword toolkit.
namespace bamt::unicode {

// Invalid sequences decode to U+FFFD.
std::u32string Decode(std::string_view utf8);
std::string Encode(std::u32string_view text);
std::string Encode(char32_t cp);

// Canonical composed form (NFC).
std::string Nfc(std::string_view utf8);

bool IsSpace(char32_t cp);
bool IsPunctuation(char32_t cp);  // general category P*
bool IsSymbol(char32_t cp);       // general category S*
bool IsDecimalDigit(char32_t cp); // general category Nd
bool IsLetter(char32_t cp);
bool IsUpper(char32_t cp);

// Uppercases the first code point (title case).
std::string CapitalizeFirst(std::string_view utf8);
std::string Lowercase(std::string_view utf8);

// str.split() with no arguments.
std::vector<std::string> SplitWhitespace(std::string_view utf8);
// Trim both ends and replace internal whitespace runs by one space.
std::string NormalizeSpaces(std::string_view utf8);
std::string Trim(std::string_view utf8);
std::string RightTrim(std::string_view utf8);

// Extended grapheme clusters, in order.
std::vector<std::string> Graphemes(std::string_view utf8);

}  // namespace bamt::unicode

#endif  // BAMT_UNICODE_H_
