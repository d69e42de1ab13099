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

#include "bamt/records.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "bamt/common.h"

namespace bamt {

std::string EscapeField(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (char c : field) {
    switch (c) {
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\\':
        out += "\\\\";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string UnescapeField(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] != '\\' || i + 1 == field.size()) {
      out.push_back(field[i]);
      continue;
    }
    switch (field[++i]) {
      case 't':
        out.push_back('\t');
        break;
      case 'n':
        out.push_back('\n');
        break;
      case 'r':
        out.push_back('\r');
        break;
      case '\\':
        out.push_back('\\');
        break;
      default:
        out.push_back('\\');
        out.push_back(field[i]);
    }
  }
  return out;
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

void WriteRecords(std::ostream &os,
                  const std::vector<SentenceRecord> &records) {
  for (const auto &r : records) {
    os << EscapeField(r.entry_id) << '\t' << LanguageCode(r.language) << '\t'
       << r.ordinal << '\t' << EscapeField(r.text);
    if (!r.applied_rules.empty()) {
      os << '\t';
      for (std::size_t i = 0; i < r.applied_rules.size(); ++i) {
        if (i) os << ',';
        os << r.applied_rules[i];
      }
    }
    os << '\n';
  }
}

std::vector<SentenceRecord> ReadRecords(std::istream &is) {
  std::vector<SentenceRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 4 && fields.size() != 5) {
      throw ParseError("expected 4 or 5 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       lineno, 1);
    }
    SentenceRecord r;
    r.entry_id = UnescapeField(fields[0]);
    const auto lang = ParseLanguageTag(fields[1]);
    if (!lang) {
      throw ParseError("unknown language '" + std::string(fields[1]) + "'",
                       lineno, fields[0].size() + 2);
    }
    r.language = *lang;
    const auto ord = fields[2];
    auto [ptr, ec] = std::from_chars(ord.data(), ord.data() + ord.size(),
                                     r.ordinal);
    if (ec != std::errc() || ptr != ord.data() + ord.size()) {
      throw ParseError("bad ordinal '" + std::string(ord) + "'", lineno,
                       fields[0].size() + fields[1].size() + 3);
    }
    r.text = UnescapeField(fields[3]);
    if (fields.size() == 5 && !fields[4].empty()) {
      std::string_view rules = fields[4];
      std::size_t start = 0;
      while (start <= rules.size()) {
        const std::size_t comma = rules.find(',', start);
        const auto rule = rules.substr(
            start, comma == std::string_view::npos ? std::string_view::npos
                                                   : comma - start);
        if (!rule.empty()) r.applied_rules.emplace_back(rule);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

void WriteRecordsFile(const std::string &path,
                      const std::vector<SentenceRecord> &records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  WriteRecords(os, records);
  if (!os) throw IoError("write failed: " + path);
}

std::vector<SentenceRecord> ReadRecordsFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return ReadRecords(is);
}

}  // namespace bamt
