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

#ifndef BAMT_NMT_BEAM_H_
#define BAMT_NMT_BEAM_H_

#include <vector>

namespace bamt::nmt {

// Anything that scores the next token given the tokens emitted so far.
class StepModel {
 public:
  virtual ~StepModel() = default;
  virtual int vocab_size() const = 0;
  // Log-probabilities over the vocabulary after `prefix` (emitted tokens,
  // without BOS).
  virtual std::vector<double> NextLogProbs(const std::vector<int> &prefix) = 0;
};

struct Hypothesis {
  std::vector<int> tokens;  // ends with EOS unless cut at max_len
  double log_prob = 0.0;

  // Length-normalized score; the length counts EOS.
  double score() const {
    return tokens.empty() ? log_prob : log_prob / static_cast<double>(tokens.size());
  }
};

struct SearchOptions {
  int beam_width = 5;
  // Maximum number of emitted tokens, EOS included.
  int max_len = 50;
  int eos = 3;
  // Never emitted (PAD and BOS by default).
  std::vector<int> banned = {0, 2};
};

// At every step the best beam_width expansions of the live hypotheses (by
// cumulative log-probability) are kept; those ending in EOS move to the
// finished set and the beam shrinks accordingly. Hypotheses still alive at
// max_len are finished as they are. The finished hypothesis with the best
// length-normalized score wins; ties go to the one finished first. With
// beam_width 1 this is greedy decoding.
Hypothesis BeamSearch(StepModel &model, const SearchOptions &options);

// Argmax at every step until EOS or max_len.
Hypothesis GreedySearch(StepModel &model, const SearchOptions &options);

}  // namespace bamt::nmt

#endif  // BAMT_NMT_BEAM_H_
