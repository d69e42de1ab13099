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

#include "bamt/nmt/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "bamt/random.h"

namespace bamt::nmt {

double RelativeError(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max(std::abs(analytic) + std::abs(numeric), floor);
}

std::vector<double> NumericalGradient(
    const std::function<double(const std::vector<double> &)> &f,
    std::vector<double> x, double eps) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double up = f(x);
    x[i] = orig - eps;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

namespace {

std::int64_t CountTokens(const Batch &batch) {
  std::int64_t n = 0;
  for (const auto &[src, trg] : batch) {
    for (int t : trg) n += t != Transformer<double>::kPad;
  }
  return n;
}

double MeanLoss(Transformer<double> &model, const Batch &batch,
                const GradCheckOptions &o, bool backward) {
  const double n = static_cast<double>(CountTokens(batch));
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng rng(DeriveSeed(o.seed, i));
    const auto v = model.Backprop(batch[i].first, batch[i].second,
                                  o.label_smoothing,
                                  o.with_dropout ? &rng : nullptr,
                                  backward ? 1.0 / n : 0.0);
    total += v.sum;
  }
  return total / n;
}

}  // namespace

GradCheckResult GradientCheck(Transformer<double> &model, const Batch &batch,
                              const GradCheckOptions &options) {
  model.ZeroGrad();
  MeanLoss(model, batch, options, true);
  std::vector<Matrix<double>> analytic;
  for (const auto &p : model.parameters()) analytic.push_back(p.grad);

  GradCheckResult result;
  Rng pick(DeriveSeed(options.seed, 0xc0ffee));
  auto &params = model.parameters();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const std::string group = ParamGroupName(params[pi].group);
    const auto size = static_cast<std::uint64_t>(params[pi].value.size());
    for (int s = 0; s < options.samples_per_tensor; ++s) {
      const auto idx = static_cast<Eigen::Index>(pick.UniformInt(size));
      double &w = params[pi].value.data()[idx];
      const double orig = w;
      w = orig + options.eps;
      const double up = MeanLoss(model, batch, options, false);
      w = orig - options.eps;
      const double down = MeanLoss(model, batch, options, false);
      w = orig;
      const double numeric = (up - down) / (2 * options.eps);
      const double a = analytic[pi].data()[idx];
      double err = RelativeError(a, numeric, options.floor);
      if (std::abs(a) < options.zero_tolerance &&
          std::abs(numeric) < options.zero_tolerance) {
        err = 0.0;
        ++result.near_zero;
      }
      ++result.checked;
      auto &slot = result.max_error[group];
      slot = std::max(slot, err);
      if (err >= result.overall) {
        result.overall = err;
        result.worst = params[pi].name + "[" + std::to_string(idx) + "]";
      }
    }
  }
  model.ZeroGrad();
  return result;
}

}  // namespace bamt::nmt
