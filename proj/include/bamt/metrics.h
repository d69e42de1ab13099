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

#ifndef BAMT_METRICS_H_
#define BAMT_METRICS_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bamt/common.h"

// Corpus BLEU and chrF reproducing sacreBLEU 1.4.9 with the signatures
// below, so scores are comparable with published numbers.
namespace bamt::metrics {

inline constexpr std::string_view kBleuSignature =
    "BLEU+case.mixed+numrefs.1+smooth.exp+tok.intl+version.1.4.9";
inline constexpr std::string_view kChrfSignature =
    "chrF2+case.mixed+numchars.6+numrefs.1+space.False+version.1.4.9";

// The "intl" tokenizer: punctuation is split off unless it touches a digit
// on the relevant side, symbols are always split off.
std::string TokenizeIntl(std::string_view line);

struct BleuStats {
  std::array<std::int64_t, 4> correct{};
  std::array<std::int64_t, 4> total{};
  std::int64_t sys_len = 0;
  std::int64_t ref_len = 0;

  BleuStats &operator+=(const BleuStats &o);
};

BleuStats SentenceBleuStats(std::string_view hypothesis,
                            std::string_view reference);

struct ChrfStats {
  // Per order n = 1..6: hypothesis n-grams, reference n-grams, matches.
  std::array<std::int64_t, 6> hyp{};
  std::array<std::int64_t, 6> ref{};
  std::array<std::int64_t, 6> match{};

  ChrfStats &operator+=(const ChrfStats &o);
};

ChrfStats SentenceChrfStats(std::string_view hypothesis,
                            std::string_view reference);

struct ScoreReport {
  double bleu = 0.0;        // 0..100
  double chrf = 0.0;        // 0..1
  std::array<double, 4> precisions{};  // smoothed, in percent
  double brevity_penalty = 0.0;
  std::int64_t sys_len = 0;
  std::int64_t ref_len = 0;
  std::string bleu_signature{kBleuSignature};
  std::string chrf_signature{kChrfSignature};

  double chrf_percent() const { return chrf * 100.0; }
  std::string ToJson() const;
};

// Both throw InvalidArgument on a length mismatch or an empty list. Each
// fills the fields of its own metric.
ScoreReport Bleu(const std::vector<std::string> &hypotheses,
                 const std::vector<std::string> &references);
ScoreReport Chrf(const std::vector<std::string> &hypotheses,
                 const std::vector<std::string> &references);
// BLEU and chrF together.
ScoreReport Score(const std::vector<std::string> &hypotheses,
                  const std::vector<std::string> &references);

ScoreReport BleuFromStats(const BleuStats &stats);
double ChrfFromStats(const ChrfStats &stats, double beta = 2.0);

// Rows are systems, columns are direction x {BLEU, ChrF}. Cells holding the
// best value of their column (compared as printed) are marked; ties are all
// marked.
struct ResultsTable {
  std::vector<std::string> directions;
  std::vector<std::string> labels;
  std::vector<std::string> descriptions;
  // values[row][2 * direction + metric]; NaN marks a missing cell.
  std::vector<std::vector<double>> values;
  int bleu_decimals = 1;
  int chrf_decimals = 2;

  void AddRow(const std::string &label, const std::string &description,
              const std::vector<const ScoreReport *> &per_direction);
  // Printed value of a cell; "-" when missing.
  std::string Cell(std::size_t row, std::size_t column) const;
  std::vector<std::vector<bool>> BestMask() const;

  std::string ToText() const;
  std::string ToJson() const;
};

// Scores every system on every direction it has hypotheses for.
struct SystemOutput {
  std::string label;
  std::string description;
  std::string direction;
  std::vector<std::string> hypotheses;
};

struct EvalSet {
  std::string direction;
  std::vector<std::string> references;
};

ResultsTable ScoreTable(const std::vector<SystemOutput> &systems,
                        const std::vector<EvalSet> &eval_sets);

}  // namespace bamt::metrics

#endif  // BAMT_METRICS_H_
