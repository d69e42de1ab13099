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

#ifndef BAMT_NMT_GRADCHECK_H_
#define BAMT_NMT_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bamt/nmt/model.h"

namespace bamt::nmt {

// |a - n| / max(|a| + |n|, floor).
double RelativeError(double analytic, double numeric, double floor = 1e-8);

// Central differences of f at x.
std::vector<double> NumericalGradient(
    const std::function<double(const std::vector<double> &)> &f,
    std::vector<double> x, double eps = 1e-5);

struct GradCheckOptions {
  // Entries sampled per parameter tensor.
  int samples_per_tensor = 6;
  double eps = 1e-5;
  double label_smoothing = 0.2;
  // Dropout masks are replayed identically for every evaluation.
  bool with_dropout = true;
  double floor = 1e-8;
  // Entries whose analytic and numeric values are both below this are
  // compared absolutely: their relative error only measures round-off (the
  // attention key biases, for example, have an identically zero gradient).
  double zero_tolerance = 1e-9;
  std::uint64_t seed = 1;
};

struct GradCheckResult {
  // Largest relative error per parameter group name.
  std::map<std::string, double> max_error;
  double overall = 0.0;
  std::size_t checked = 0;
  std::size_t near_zero = 0;  // entries compared absolutely
  std::string worst;  // "param[index]" of the overall maximum
};

using Batch = std::vector<std::pair<std::vector<int>, std::vector<int>>>;

// Compares the analytic gradient of the per-token mean loss over `batch`
// against central finite differences on a random subsample of entries.
GradCheckResult GradientCheck(Transformer<double> &model, const Batch &batch,
                              const GradCheckOptions &options = {});

}  // namespace bamt::nmt

#endif  // BAMT_NMT_GRADCHECK_H_
