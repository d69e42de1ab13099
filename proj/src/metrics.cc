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
#include <cstdio>
#include <limits>
#include <map>
#include <unordered_map>

#include "json.hpp"

#include "bamt/common.h"
#include "bamt/unicode.h"

namespace bamt::metrics {
namespace {

constexpr int kMaxOrder = 4;
constexpr int kCharOrder = 6;

bool IsP(char32_t c) { return unicode::IsPunctuation(c); }

// One left-to-right, non-overlapping pass of a two-character regex
// substitution, like re.sub.
template <typename Match, typename Emit>
std::u32string SubPairs(const std::u32string &in, Match match, Emit emit) {
  std::u32string out;
  out.reserve(in.size() * 2);
  std::size_t i = 0;
  while (i < in.size()) {
    if (i + 1 < in.size() && match(in[i], in[i + 1])) {
      emit(out, in[i], in[i + 1]);
      i += 2;
    } else {
      out.push_back(in[i]);
      ++i;
    }
  }
  return out;
}

std::u32string Strip(const std::u32string &s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && unicode::IsSpace(s[b])) ++b;
  while (e > b && unicode::IsSpace(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> Words(std::string_view line) {
  return unicode::SplitWhitespace(
      TokenizeIntl(unicode::RightTrim(line)));
}

std::unordered_map<std::string, std::int64_t> NGrams(
    const std::vector<std::string> &words) {
  std::unordered_map<std::string, std::int64_t> counts;
  for (int n = 1; n <= kMaxOrder; ++n) {
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
      std::string key = words[i];
      for (int k = 1; k < n; ++k) {
        key.push_back(' ');
        key += words[i + k];
      }
      ++counts[key];
    }
  }
  return counts;
}

int Order(const std::string &ngram) {
  return 1 + static_cast<int>(std::count(ngram.begin(), ngram.end(), ' '));
}

double MyLog(double x) { return x == 0.0 ? -9999999999.0 : std::log(x); }

void CheckInputs(const std::vector<std::string> &hyps,
                 const std::vector<std::string> &refs) {
  if (hyps.size() != refs.size()) {
    throw InvalidArgument("hypotheses (" + std::to_string(hyps.size()) +
                          ") and references (" + std::to_string(refs.size()) +
                          ") differ in length");
  }
  if (hyps.empty()) throw InvalidArgument("no hypotheses to score");
}

std::u32string WithoutSpaces(std::string_view s) {
  std::u32string out;
  for (char32_t c : unicode::Decode(s)) {
    if (!unicode::IsSpace(c)) out.push_back(c);
  }
  return out;
}

std::unordered_map<std::u32string, std::int64_t> CharNGrams(
    const std::u32string &s, int n) {
  std::unordered_map<std::u32string, std::int64_t> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[s.substr(i, n)];
  return counts;
}

std::string Fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::size_t DisplayWidth(const std::string &s) {
  return unicode::Decode(s).size();
}

}  // namespace

std::string TokenizeIntl(std::string_view line) {
  std::u32string s = unicode::Decode(line);
  s = SubPairs(
      s,
      [](char32_t a, char32_t b) { return !unicode::IsDecimalDigit(a) && IsP(b); },
      [](std::u32string &o, char32_t a, char32_t b) {
        o.push_back(a);
        o.push_back(U' ');
        o.push_back(b);
        o.push_back(U' ');
      });
  s = SubPairs(
      s,
      [](char32_t a, char32_t b) { return IsP(a) && !unicode::IsDecimalDigit(b); },
      [](std::u32string &o, char32_t a, char32_t b) {
        o.push_back(U' ');
        o.push_back(a);
        o.push_back(U' ');
        o.push_back(b);
      });
  std::u32string t;
  t.reserve(s.size() * 3);
  for (char32_t c : s) {
    if (unicode::IsSymbol(c)) {
      t.push_back(U' ');
      t.push_back(c);
      t.push_back(U' ');
    } else {
      t.push_back(c);
    }
  }
  return unicode::Encode(Strip(t));
}

BleuStats &BleuStats::operator+=(const BleuStats &o) {
  for (int n = 0; n < kMaxOrder; ++n) {
    correct[n] += o.correct[n];
    total[n] += o.total[n];
  }
  sys_len += o.sys_len;
  ref_len += o.ref_len;
  return *this;
}

BleuStats SentenceBleuStats(std::string_view hypothesis,
                            std::string_view reference) {
  const auto hyp = Words(hypothesis);
  const auto ref = Words(reference);
  BleuStats st;
  st.sys_len = static_cast<std::int64_t>(hyp.size());
  st.ref_len = static_cast<std::int64_t>(ref.size());
  const auto ref_ngrams = NGrams(ref);
  for (const auto &[ngram, count] : NGrams(hyp)) {
    const int n = Order(ngram) - 1;
    const auto it = ref_ngrams.find(ngram);
    st.correct[n] += std::min(count, it == ref_ngrams.end() ? 0 : it->second);
    st.total[n] += count;
  }
  return st;
}

ScoreReport BleuFromStats(const BleuStats &st) {
  ScoreReport r;
  double smooth = 1.0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (st.total[n] == 0) break;
    if (st.correct[n] == 0) {
      smooth *= 2.0;
      r.precisions[n] = 100.0 / (smooth * static_cast<double>(st.total[n]));
    } else {
      r.precisions[n] = 100.0 * static_cast<double>(st.correct[n]) /
                        static_cast<double>(st.total[n]);
    }
  }
  if (st.sys_len < st.ref_len) {
    r.brevity_penalty =
        st.sys_len > 0 ? std::exp(1.0 - static_cast<double>(st.ref_len) /
                                            static_cast<double>(st.sys_len))
                       : 0.0;
  } else {
    r.brevity_penalty = 1.0;
  }
  double sum = 0.0;
  for (double p : r.precisions) sum += MyLog(p);
  r.bleu = r.brevity_penalty * std::exp(sum / kMaxOrder);
  r.sys_len = st.sys_len;
  r.ref_len = st.ref_len;
  return r;
}

ChrfStats &ChrfStats::operator+=(const ChrfStats &o) {
  for (int n = 0; n < kCharOrder; ++n) {
    hyp[n] += o.hyp[n];
    ref[n] += o.ref[n];
    match[n] += o.match[n];
  }
  return *this;
}

ChrfStats SentenceChrfStats(std::string_view hypothesis,
                            std::string_view reference) {
  const std::u32string h = WithoutSpaces(hypothesis);
  const std::u32string r = WithoutSpaces(reference);
  ChrfStats st;
  for (int n = 1; n <= kCharOrder; ++n) {
    const auto hn = CharNGrams(h, n);
    const auto rn = CharNGrams(r, n);
    std::int64_t hyp_total = 0;
    std::int64_t matches = 0;
    for (const auto &[g, c] : hn) {
      hyp_total += c;
      const auto it = rn.find(g);
      if (it != rn.end()) matches += std::min(c, it->second);
    }
    std::int64_t ref_total = 0;
    for (const auto &kv : rn) ref_total += kv.second;
    st.hyp[n - 1] = hyp_total;
    st.ref[n - 1] = ref_total;
    st.match[n - 1] = matches;
  }
  return st;
}

double ChrfFromStats(const ChrfStats &st, double beta) {
  double precision = 0.0;
  double recall = 0.0;
  int effective = 0;
  for (int n = 0; n < kCharOrder; ++n) {
    if (st.hyp[n] > 0 && st.ref[n] > 0) {
      precision += static_cast<double>(st.match[n]) / static_cast<double>(st.hyp[n]);
      recall += static_cast<double>(st.match[n]) / static_cast<double>(st.ref[n]);
      ++effective;
    }
  }
  if (effective == 0) return 0.0;
  precision /= effective;
  recall /= effective;
  if (precision + recall == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1 + b2) * (precision * recall) / ((b2 * precision) + recall);
}

ScoreReport Bleu(const std::vector<std::string> &hypotheses,
                 const std::vector<std::string> &references) {
  CheckInputs(hypotheses, references);
  BleuStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    total += SentenceBleuStats(hypotheses[i], references[i]);
  }
  return BleuFromStats(total);
}

ScoreReport Chrf(const std::vector<std::string> &hypotheses,
                 const std::vector<std::string> &references) {
  CheckInputs(hypotheses, references);
  ChrfStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    total += SentenceChrfStats(hypotheses[i], references[i]);
  }
  ScoreReport r;
  r.chrf = ChrfFromStats(total);
  return r;
}

ScoreReport Score(const std::vector<std::string> &hypotheses,
                  const std::vector<std::string> &references) {
  ScoreReport r = Bleu(hypotheses, references);
  r.chrf = Chrf(hypotheses, references).chrf;
  return r;
}

std::string ScoreReport::ToJson() const {
  nlohmann::ordered_json j;
  j["bleu"] = bleu;
  j["chrf"] = chrf;
  j["precisions"] = precisions;
  j["brevity_penalty"] = brevity_penalty;
  j["sys_len"] = sys_len;
  j["ref_len"] = ref_len;
  j["bleu_signature"] = bleu_signature;
  j["chrf_signature"] = chrf_signature;
  return j.dump(2);
}

void ResultsTable::AddRow(const std::string &label,
                          const std::string &description,
                          const std::vector<const ScoreReport *> &per_direction) {
  if (per_direction.size() != directions.size()) {
    throw InvalidArgument("row '" + label + "' has " +
                          std::to_string(per_direction.size()) +
                          " cells for " + std::to_string(directions.size()) +
                          " directions");
  }
  std::vector<double> row;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const ScoreReport *r : per_direction) {
    row.push_back(r ? r->bleu : nan);
    row.push_back(r ? r->chrf : nan);
  }
  labels.push_back(label);
  descriptions.push_back(description);
  values.push_back(std::move(row));
}

std::string ResultsTable::Cell(std::size_t row, std::size_t column) const {
  const double v = values.at(row).at(column);
  if (std::isnan(v)) return "-";
  return Fixed(v, column % 2 == 0 ? bleu_decimals : chrf_decimals);
}

std::vector<std::vector<bool>> ResultsTable::BestMask() const {
  std::vector<std::vector<bool>> mask(values.size(),
                                      std::vector<bool>(2 * directions.size()));
  for (std::size_t c = 0; c < 2 * directions.size(); ++c) {
    // Compare the printed values so that visually equal cells tie.
    double best = -1.0;
    for (std::size_t r = 0; r < values.size(); ++r) {
      if (std::isnan(values[r][c])) continue;
      best = std::max(best, std::stod(Cell(r, c)));
    }
    for (std::size_t r = 0; r < values.size(); ++r) {
      if (!std::isnan(values[r][c]) && std::stod(Cell(r, c)) == best) {
        mask[r][c] = true;
      }
    }
  }
  return mask;
}

std::string ResultsTable::ToText() const {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"", "Configuration"};
  for (const auto &d : directions) {
    header.push_back(d + " BLEU");
    header.push_back(d + " ChrF");
  }
  grid.push_back(header);
  const auto mask = BestMask();
  for (std::size_t r = 0; r < values.size(); ++r) {
    std::vector<std::string> line = {labels[r], descriptions[r]};
    for (std::size_t c = 0; c < 2 * directions.size(); ++c) {
      line.push_back(Cell(r, c) + (mask[r][c] ? "*" : ""));
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto &line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      width[c] = std::max(width[c], DisplayWidth(line[c]));
    }
  }
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::string text;
    for (std::size_t c = 0; c < grid[i].size(); ++c) {
      const std::string &cell = grid[i][c];
      const std::string pad(width[c] - DisplayWidth(cell), ' ');
      if (c > 0) text += "  ";
      // Text columns left-aligned, numbers right-aligned.
      text += c < 2 ? cell + pad : pad + cell;
    }
    out += unicode::RightTrim(text) + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  out += "* best in column\n";
  return out;
}

std::string ResultsTable::ToJson() const {
  nlohmann::ordered_json j;
  j["directions"] = directions;
  j["bleu_signature"] = kBleuSignature;
  j["chrf_signature"] = kChrfSignature;
  auto rows = nlohmann::ordered_json::array();
  const auto mask = BestMask();
  for (std::size_t r = 0; r < values.size(); ++r) {
    nlohmann::ordered_json row;
    row["label"] = labels[r];
    row["description"] = descriptions[r];
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (std::size_t d = 0; d < directions.size(); ++d) {
      const double b = values[r][2 * d];
      const double c = values[r][2 * d + 1];
      if (std::isnan(b)) continue;
      scores[directions[d]] = {{"bleu", b},
                               {"chrf", c},
                               {"best_bleu", static_cast<bool>(mask[r][2 * d])},
                               {"best_chrf", static_cast<bool>(mask[r][2 * d + 1])}};
    }
    row["scores"] = std::move(scores);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

ResultsTable ScoreTable(const std::vector<SystemOutput> &systems,
                        const std::vector<EvalSet> &eval_sets) {
  ResultsTable table;
  std::map<std::string, const EvalSet *> by_direction;
  for (const auto &e : eval_sets) {
    if (!by_direction.emplace(e.direction, &e).second) {
      throw InvalidArgument("duplicate evaluation direction " + e.direction);
    }
    table.directions.push_back(e.direction);
  }
  std::vector<std::string> order;
  std::map<std::string, std::string> description;
  std::map<std::pair<std::string, std::string>, ScoreReport> reports;
  for (const auto &s : systems) {
    const auto it = by_direction.find(s.direction);
    if (it == by_direction.end()) {
      throw InvalidArgument("no references for direction " + s.direction);
    }
    if (!description.count(s.label)) {
      order.push_back(s.label);
      description[s.label] = s.description;
    }
    reports[{s.label, s.direction}] = Score(s.hypotheses, it->second->references);
  }
  for (const auto &label : order) {
    std::vector<const ScoreReport *> cells;
    for (const auto &d : table.directions) {
      const auto it = reports.find({label, d});
      cells.push_back(it == reports.end() ? nullptr : &it->second);
    }
    table.AddRow(label, description[label], cells);
  }
  return table;
}

}  // namespace bamt::metrics
