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

#include <algorithm>
#include <unordered_map>

#include "bamt/unicode.h"
#include "json.hpp"

namespace bamt::cleaning {
namespace {

struct Site {
  std::size_t begin = 0;  // code point offsets, end exclusive
  std::size_t end = 0;
  std::vector<std::u32string> words;
};

std::u32string LowerU32(std::u32string_view s) {
  return unicode::Decode(unicode::Lowercase(unicode::Encode(s)));
}

std::u32string SetCase(std::u32string_view word, bool capital) {
  std::string w = unicode::Encode(word);
  if (capital) return unicode::Decode(unicode::CapitalizeFirst(w));
  std::u32string cps(word);
  if (!cps.empty()) cps[0] = unicode::Decode(unicode::Lowercase(
                                 unicode::Encode(cps[0])))[0];
  return cps;
}

const std::vector<std::u32string> *FindSet(
    const std::vector<std::vector<std::u32string>> &sets,
    const std::vector<std::u32string> &lowered) {
  for (const auto &set : sets) {
    const bool all = std::all_of(
        lowered.begin(), lowered.end(), [&](const std::u32string &w) {
          return std::find(set.begin(), set.end(), w) != set.end();
        });
    if (all) return &set;
  }
  return nullptr;
}

std::vector<Site> FindSites(const std::u32string &text,
                            const std::vector<std::vector<std::u32string>> &sets) {
  std::vector<Site> sites;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!unicode::IsLetter(text[i]) ||
        (i > 0 && unicode::IsLetter(text[i - 1]))) {
      ++i;
      continue;
    }
    Site site;
    site.begin = i;
    std::size_t j = i;
    while (true) {
      std::size_t k = j;
      while (k < n && unicode::IsLetter(text[k])) ++k;
      site.words.push_back(text.substr(j, k - j));
      if (k + 1 < n && text[k] == U'/' && unicode::IsLetter(text[k + 1])) {
        j = k + 1;
        continue;
      }
      site.end = k;
      break;
    }
    i = site.end;
    if (site.words.size() < 2) continue;
    std::vector<std::u32string> lowered;
    for (const auto &w : site.words) lowered.push_back(LowerU32(w));
    if (FindSet(sets, lowered)) sites.push_back(std::move(site));
  }
  return sites;
}

void AddRule(SentenceRecord *r, std::string_view rule) {
  r->applied_rules.emplace_back(rule);
}

void AddFlagOnce(SentenceRecord *r, std::string_view flag) {
  if (std::find(r->applied_rules.begin(), r->applied_rules.end(), flag) ==
      r->applied_rules.end()) {
    r->applied_rules.emplace_back(flag);
  }
}

}  // namespace

CleaningConfig CleaningConfig::Default() {
  CleaningConfig c;
  c.alternations[LanguageTag::kFr] = {{"il", "elle"}, {"ils", "elles"}};
  c.alternations[LanguageTag::kEn] = {{"he", "she"}, {"him", "her"},
                                      {"his", "her"}};
  c.proverb_markers = {"Proverbe:", "Proverb:"};
  return c;
}

CleaningReport &CleaningReport::operator+=(const CleaningReport &o) {
  discarded_count += o.discarded_count;
  expanded_count += o.expanded_count;
  parenthetical_strips += o.parenthetical_strips;
  proverb_strips += o.proverb_strips;
  unbalanced_flags += o.unbalanced_flags;
  capped_expansions += o.capped_expansions;
  return *this;
}

std::string CleaningReport::ToJson() const {
  nlohmann::ordered_json j;
  j["discarded_count"] = discarded_count;
  j["expanded_count"] = expanded_count;
  j["parenthetical_strips"] = parenthetical_strips;
  j["proverb_strips"] = proverb_strips;
  j["unbalanced_flags"] = unbalanced_flags;
  j["capped_expansions"] = capped_expansions;
  return j.dump(2) + "\n";
}

std::size_t EntryGroup::LanguageCount() const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(),
      [](const auto &list) { return !list.empty(); }));
}

std::vector<EntryGroup> GroupByEntry(
    const std::vector<SentenceRecord> &records) {
  std::vector<EntryGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto &r : records) {
    auto [it, inserted] = index.emplace(r.entry_id, groups.size());
    if (inserted) {
      groups.emplace_back();
      groups.back().entry_id = r.entry_id;
    }
    groups[it->second].of(r.language).push_back(r);
  }
  return groups;
}

std::vector<SentenceRecord> Flatten(const std::vector<EntryGroup> &groups) {
  std::vector<SentenceRecord> out;
  for (const auto &g : groups) {
    for (const auto &list : g.records) {
      out.insert(out.end(), list.begin(), list.end());
    }
  }
  return out;
}

std::pair<std::vector<EntryGroup>, CleaningReport> DropUnpaired(
    std::vector<EntryGroup> groups) {
  CleaningReport report;
  std::vector<EntryGroup> kept;
  kept.reserve(groups.size());
  for (auto &g : groups) {
    if (g.LanguageCount() < 2) {
      ++report.discarded_count;
    } else {
      kept.push_back(std::move(g));
    }
  }
  return {std::move(kept), report};
}

std::vector<std::string> ExpandAlternations(std::string_view text,
                                            LanguageTag language,
                                            const CleaningConfig &config,
                                            bool *capped) {
  if (capped) *capped = false;
  const auto it = config.alternations.find(language);
  if (it == config.alternations.end() || it->second.empty()) {
    return {std::string(text)};
  }
  std::vector<std::vector<std::u32string>> sets;
  for (const auto &set : it->second) {
    std::vector<std::u32string> lowered;
    for (const auto &w : set) lowered.push_back(LowerU32(unicode::Decode(w)));
    sets.push_back(std::move(lowered));
  }
  const std::u32string cps = unicode::Decode(text);
  const std::vector<Site> sites = FindSites(cps, sets);
  if (sites.empty()) return {std::string(text)};

  // Alternatives for each site, with the capitalization rule applied.
  std::vector<std::vector<std::u32string>> choices;
  for (const auto &site : sites) {
    const bool capital = unicode::IsUpper(site.words.front().front());
    std::vector<std::u32string> alts;
    alts.push_back(site.words.front());
    for (std::size_t k = 1; k < site.words.size(); ++k) {
      alts.push_back(SetCase(site.words[k], capital));
    }
    choices.push_back(std::move(alts));
  }

  std::size_t total = 1;
  bool overflow = false;
  for (const auto &c : choices) {
    total *= c.size();
    if (total > config.max_expansions) {
      overflow = true;
      total = config.max_expansions;
    }
  }
  if (capped) *capped = overflow;

  std::vector<std::string> out;
  std::vector<std::size_t> pick(sites.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::u32string s;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      s.append(cps, pos, sites[k].begin - pos);
      s += choices[k][pick[k]];
      pos = sites[k].end;
    }
    s.append(cps, pos, std::u32string::npos);
    out.push_back(unicode::Encode(s));
    // Odometer increment, last site fastest.
    for (std::size_t k = sites.size(); k-- > 0;) {
      if (++pick[k] < choices[k].size()) break;
      pick[k] = 0;
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> ExpandPronouns(
    const std::pair<std::string, std::string> &source_and_bambara,
    LanguageTag source_language, const CleaningConfig &config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto &alt : ExpandAlternations(source_and_bambara.first,
                                      source_language, config)) {
    out.emplace_back(std::move(alt), source_and_bambara.second);
  }
  return out;
}

std::string StripParentheticals(std::string_view text, bool *unbalanced) {
  if (unbalanced) *unbalanced = false;
  const std::u32string cps = unicode::Decode(text);
  const std::size_t n = cps.size();
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  int depth = 0;
  std::size_t open = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (cps[i] == U'(') {
      if (depth++ == 0) open = i;
    } else if (cps[i] == U')') {
      if (--depth < 0) break;
      if (depth == 0) spans.emplace_back(open, i);
    }
  }
  if (depth != 0) {
    if (unbalanced) *unbalanced = true;
    return std::string(text);
  }
  if (spans.empty()) return std::string(text);

  std::vector<bool> removed(n, false);
  for (auto [b, e] : spans) {
    if (b > 0 && cps[b - 1] == U' ' && !removed[b - 1]) {
      --b;
    } else if (b == 0 && e + 1 < n && cps[e + 1] == U' ') {
      ++e;
    }
    for (std::size_t i = b; i <= e; ++i) removed[i] = true;
  }
  std::u32string kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (!removed[i]) kept.push_back(cps[i]);
  }
  // Collapse doubled spaces, trim, and drop spaces before a final period.
  std::u32string out;
  for (char32_t cp : kept) {
    if (cp == U' ' && (out.empty() || out.back() == U' ')) continue;
    out.push_back(cp);
  }
  while (!out.empty() && out.back() == U' ') out.pop_back();
  if (!out.empty() && out.back() == U'.') {
    std::size_t k = out.size() - 1;
    while (k > 0 && out[k - 1] == U' ') --k;
    out.erase(k, out.size() - 1 - k);
  }
  if (out.empty()) return std::string(text);
  return unicode::Encode(out);
}

std::string StripProverbPrefix(std::string_view text,
                               const CleaningConfig &config) {
  std::u32string cps = unicode::Decode(text);
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (const auto &marker : config.proverb_markers) {
      const std::u32string m = LowerU32(unicode::Decode(marker));
      if (m.empty() || cps.size() < m.size()) continue;
      if (LowerU32(std::u32string_view(cps).substr(0, m.size())) != m) {
        continue;
      }
      std::size_t k = m.size();
      while (k < cps.size() && unicode::IsSpace(cps[k])) ++k;
      if (k == cps.size()) continue;  // nothing left after the marker
      cps.erase(0, k);
      stripped = true;
    }
  }
  return unicode::Encode(cps);
}

CleanResult CleanCorpus(std::vector<EntryGroup> groups,
                        const CleaningConfig &config) {
  auto [kept, report] = DropUnpaired(std::move(groups));

  for (auto &g : kept) {
    for (LanguageTag lang : kAllLanguages) {
      if (lang == LanguageTag::kBam) continue;
      for (auto &r : g.of(lang)) {
        std::string text = StripProverbPrefix(r.text, config);
        if (text != r.text) {
          ++report.proverb_strips;
          AddRule(&r, kRuleProverb);
        }
        bool unbalanced = false;
        std::string stripped = StripParentheticals(text, &unbalanced);
        if (unbalanced) {
          ++report.unbalanced_flags;
          AddFlagOnce(&r, kFlagUnbalanced);
        }
        if (stripped != text) {
          ++report.parenthetical_strips;
          AddRule(&r, kRuleParenthetical);
        }
        r.text = std::move(stripped);
      }
    }

    EntryGroup expanded;
    expanded.entry_id = g.entry_id;
    std::size_t rows = 0;
    for (const auto &list : g.records) rows = std::max(rows, list.size());
    for (std::size_t i = 0; i < rows; ++i) {
      std::array<std::vector<std::string>, kAllLanguages.size()> alts;
      std::size_t copies = 1;
      for (LanguageTag lang : kAllLanguages) {
        const auto l = static_cast<std::size_t>(lang);
        if (i >= g.records[l].size()) continue;
        if (lang == LanguageTag::kBam) {
          alts[l] = {g.records[l][i].text};
          continue;
        }
        bool capped = false;
        alts[l] = ExpandAlternations(g.records[l][i].text, lang, config,
                                     &capped);
        if (alts[l].size() > 1) ++report.expanded_count;
        if (capped) {
          ++report.capped_expansions;
          AddFlagOnce(&g.records[l][i], kFlagExpansionCap);
        }
        copies = std::max(copies, alts[l].size());
      }
      for (std::size_t j = 0; j < copies; ++j) {
        for (LanguageTag lang : kAllLanguages) {
          const auto l = static_cast<std::size_t>(lang);
          if (i >= g.records[l].size()) continue;
          SentenceRecord r = g.records[l][i];
          if (alts[l].size() > 1) {
            r.text = alts[l][j % alts[l].size()];
            AddRule(&r, kRuleExpand);
          }
          expanded.records[l].push_back(std::move(r));
        }
      }
    }
    g = std::move(expanded);
  }
  return {std::move(kept), report};
}

}  // namespace bamt::cleaning
