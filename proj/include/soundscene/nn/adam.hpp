// Copyright 2026 The soundscene authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <vector>

#include "soundscene/nn/tensor.hpp"

namespace soundscene::nn {

/// Bias-corrected Adam. lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8 by
/// default; the update is a pure function of (params, grads, state).
template <typename S>
class Adam {
 public:
  explicit Adam(S lr = static_cast<S>(1e-3), S beta1 = static_cast<S>(0.9),
                S beta2 = static_cast<S>(0.999), S eps = static_cast<S>(1e-8))
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void attach(const std::vector<Param<S>*>& params) {
    m_.clear();
    v_.clear();
    for (const auto* p : params) {
      m_.push_back(Matrix<S>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix<S>::Zero(p->value.rows(), p->value.cols()));
    }
    t_ = 0;
  }

  void step(const std::vector<Param<S>*>& params) {
    check(params.size() == m_.size(), "adam: parameter list changed after attach");
    ++t_;
    const S bc1 = static_cast<S>(1) - std::pow(beta1_, static_cast<S>(t_));
    const S bc2 = static_cast<S>(1) - std::pow(beta2_, static_cast<S>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      m_[i] = beta1_ * m_[i] + (static_cast<S>(1) - beta1_) * p.grad;
      v_[i] = (beta2_ * v_[i].array() + (static_cast<S>(1) - beta2_) * p.grad.array().square())
                  .matrix();
      const auto m_hat = m_[i].array() / bc1;
      const auto v_hat = v_[i].array() / bc2;
      p.value.array() -= lr_ * m_hat / (v_hat.sqrt() + eps_);
    }
  }

  long long timestep() const { return t_; }
  S learning_rate() const { return lr_; }

 private:
  S lr_, beta1_, beta2_, eps_;
  std::vector<Matrix<S>> m_, v_;
  long long t_ = 0;
};

}  // namespace soundscene::nn
