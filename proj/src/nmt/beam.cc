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

#include "bamt/nmt/beam.h"

#include <algorithm>

#include "bamt/common.h"

namespace bamt::nmt {
namespace {

struct Candidate {
  double log_prob;
  std::size_t parent;
  int token;
};

std::vector<char> BannedMask(const SearchOptions &o, int vocab) {
  std::vector<char> mask(vocab, 0);
  for (int b : o.banned) {
    if (b >= 0 && b < vocab) mask[b] = 1;
  }
  return mask;
}

void CheckOptions(const SearchOptions &o) {
  if (o.beam_width < 1) throw InvalidArgument("beam width must be at least 1");
  if (o.max_len < 1) throw InvalidArgument("max_len must be at least 1");
}

}  // namespace

Hypothesis BeamSearch(StepModel &model, const SearchOptions &options) {
  CheckOptions(options);
  const int vocab = model.vocab_size();
  const std::vector<char> banned = BannedMask(options, vocab);
  const std::size_t k = static_cast<std::size_t>(options.beam_width);

  std::vector<Hypothesis> alive(1);
  std::vector<Hypothesis> finished;
  std::vector<Candidate> cands;
  for (int step = 1; step <= options.max_len && !alive.empty(); ++step) {
    cands.clear();
    for (std::size_t a = 0; a < alive.size(); ++a) {
      const std::vector<double> lp = model.NextLogProbs(alive[a].tokens);
      if (static_cast<int>(lp.size()) != vocab) {
        throw InvalidArgument("step model returned a wrong-sized distribution");
      }
      for (int v = 0; v < vocab; ++v) {
        if (!banned[v]) cands.push_back({alive[a].log_prob + lp[v], a, v});
      }
    }
    const std::size_t keep = std::min(k, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(),
                      [](const Candidate &x, const Candidate &y) {
                        if (x.log_prob != y.log_prob) return x.log_prob > y.log_prob;
                        if (x.parent != y.parent) return x.parent < y.parent;
                        return x.token < y.token;
                      });
    std::vector<Hypothesis> next;
    for (std::size_t i = 0; i < keep; ++i) {
      Hypothesis h;
      h.tokens = alive[cands[i].parent].tokens;
      h.tokens.push_back(cands[i].token);
      h.log_prob = cands[i].log_prob;
      if (cands[i].token == options.eos || step == options.max_len) {
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    alive = std::move(next);
  }
  if (finished.empty()) return {};
  std::size_t best = 0;
  for (std::size_t i = 1; i < finished.size(); ++i) {
    if (finished[i].score() > finished[best].score()) best = i;
  }
  return finished[best];
}

Hypothesis GreedySearch(StepModel &model, const SearchOptions &options) {
  CheckOptions(options);
  const int vocab = model.vocab_size();
  const std::vector<char> banned = BannedMask(options, vocab);
  Hypothesis h;
  while (static_cast<int>(h.tokens.size()) < options.max_len) {
    const std::vector<double> lp = model.NextLogProbs(h.tokens);
    int arg = -1;
    for (int v = 0; v < vocab; ++v) {
      if (!banned[v] && (arg < 0 || lp[v] > lp[arg])) arg = v;
    }
    if (arg < 0) break;
    h.tokens.push_back(arg);
    h.log_prob += lp[arg];
    if (arg == options.eos) break;
  }
  return h;
}

}  // namespace bamt::nmt
