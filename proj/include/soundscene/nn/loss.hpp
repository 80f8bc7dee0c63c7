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

#include "soundscene/nn/tensor.hpp"

namespace soundscene::nn {

/// Binary cross entropy, averaged over every (frame, class) entry of every
/// batch item, with probabilities clamped to [1e-7, 1 - 1e-7]. The gradient
/// is taken with respect to the probabilities (clamped entries get zero).
template <typename S>
struct BceLoss {
  static constexpr S kClamp = static_cast<S>(1e-7);

  static S clamp(S p) {
    const S lo = kClamp, hi = static_cast<S>(1) - kClamp;
    return p < lo ? lo : (p > hi ? hi : p);
  }

  static S value(const Batch<S>& pred, const Batch<S>& target) {
    check(pred.size() == target.size(), "bce: batch size mismatch");
    long long n = 0;
    double acc = 0.0;  // accumulate in double regardless of S
    for (std::size_t i = 0; i < pred.size(); ++i) {
      check(pred[i].rows() == target[i].rows() && pred[i].cols() == target[i].cols(),
            "bce: prediction/target shape mismatch");
      for (Eigen::Index k = 0; k < pred[i].size(); ++k) {
        const double p = static_cast<double>(clamp(pred[i].data()[k]));
        const double y = static_cast<double>(target[i].data()[k]);
        acc -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        ++n;
      }
    }
    return static_cast<S>(acc / static_cast<double>(n));
  }

  static Batch<S> grad(const Batch<S>& pred, const Batch<S>& target) {
    long long n = 0;
    for (const auto& p : pred) n += p.size();
    Batch<S> out(pred.size());
    const S inv_n = static_cast<S>(1) / static_cast<S>(n);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      out[i].resize(pred[i].rows(), pred[i].cols());
      for (Eigen::Index k = 0; k < pred[i].size(); ++k) {
        const S p = pred[i].data()[k];
        const S y = target[i].data()[k];
        if (p < kClamp || p > static_cast<S>(1) - kClamp) {
          out[i].data()[k] = 0;  // inside the clamp plateau
        } else {
          out[i].data()[k] = (-y / p + (static_cast<S>(1) - y) / (static_cast<S>(1) - p)) * inv_n;
        }
      }
    }
    return out;
  }
};

}  // namespace soundscene::nn
