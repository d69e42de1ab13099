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

#ifndef BAMT_NMT_OPTIMIZER_H_
#define BAMT_NMT_OPTIMIZER_H_

#include <cmath>
#include <cstdint>
#include <vector>

#include "bamt/common.h"
#include "bamt/nmt/model.h"

namespace bamt::nmt {

// Adam with bias correction and no weight decay, updating
// p -= lr * m_hat / (sqrt(v_hat) + eps) like torch.optim.Adam.
template <typename T>
class Adam {
 public:
  Adam(double lr = 0.0004, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void Step(std::vector<Parameter<T>> &params) {
    if (m_.empty()) {
      for (const auto &p : params) {
        m_.push_back(Matrix<T>::Zero(p.value.rows(), p.value.cols()));
        v_.push_back(Matrix<T>::Zero(p.value.rows(), p.value.cols()));
      }
    }
    if (m_.size() != params.size()) {
      throw InvalidArgument("optimizer state does not match the parameters");
    }
    ++steps_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
    const T b1 = T(beta1_), b2 = T(beta2_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto &g = params[i].grad.array();
      m_[i].array() = b1 * m_[i].array() + (T(1) - b1) * g;
      v_[i].array() = b2 * v_[i].array() + (T(1) - b2) * g.square();
      const auto m_hat = m_[i].array() / T(c1);
      const auto denom = (v_[i].array() / T(c2)).sqrt() + T(eps_);
      params[i].value.array() -= T(lr_) * m_hat / denom;
    }
  }

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  std::int64_t steps() const { return steps_; }
  std::vector<Matrix<T>> &first_moments() { return m_; }
  std::vector<Matrix<T>> &second_moments() { return v_; }
  const std::vector<Matrix<T>> &first_moments() const { return m_; }
  const std::vector<Matrix<T>> &second_moments() const { return v_; }
  void Restore(std::vector<Matrix<T>> m, std::vector<Matrix<T>> v,
               std::int64_t steps) {
    m_ = std::move(m);
    v_ = std::move(v);
    steps_ = steps;
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t steps_ = 0;
  std::vector<Matrix<T>> m_, v_;
};

// Scales all gradients so that their global L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename T>
double ClipGradNorm(std::vector<Parameter<T>> &params, double max_norm) {
  double sq = 0.0;
  for (const auto &p : params) sq += static_cast<double>(p.grad.squaredNorm());
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const T s = T(max_norm / (norm + 1e-6));
    for (auto &p : params) p.grad *= s;
  }
  return norm;
}

}  // namespace bamt::nmt

#endif  // BAMT_NMT_OPTIMIZER_H_
