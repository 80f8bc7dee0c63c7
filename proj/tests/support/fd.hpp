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
//
// Central finite differences for layer-level gradient verification.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

inline double fd_relative_error(double analytic, double numeric) {
  const double denom = std::max({1e-6, std::fabs(analytic), std::fabs(numeric)});
  return std::fabs(analytic - numeric) / denom;
}

/// Max relative error between the analytic gradient matrix and central
/// differences of `loss` taken through every entry of `value`.
inline double fd_check_matrix(const std::function<double()>& loss,
                              Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>& value,
                              const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>& analytic,
                              double eps = 1e-5) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < value.size(); ++k) {
    const double saved = value.data()[k];
    value.data()[k] = saved + eps;
    const double plus = loss();
    value.data()[k] = saved - eps;
    const double minus = loss();
    value.data()[k] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    worst = std::max(worst, fd_relative_error(analytic.data()[k], numeric));
  }
  return worst;
}

}  // namespace oracle
