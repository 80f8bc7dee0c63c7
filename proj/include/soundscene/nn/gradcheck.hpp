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

#include <string>
#include <vector>

#include <json.hpp>

#include "soundscene/nn/loss.hpp"
#include "soundscene/nn/network.hpp"

namespace soundscene::nn {

struct GradCheckGroup {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double max_rel_error = 0.0;
  double epsilon = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  nlohmann::json to_json() const {
    nlohmann::json jg = nlohmann::json::array();
    for (const auto& g : groups)
      jg.push_back({{"name", g.name}, {"max_rel_error", g.max_rel_error}});
    return nlohmann::json{{"groups", jg},
                          {"max_rel_error", max_rel_error},
                          {"epsilon", epsilon},
                          {"tolerance", tolerance},
                          {"passed", passed}};
  }
};

/// Relative error with an absolute floor: for gradient entries below the
/// floor, central differences carry accumulated rounding noise of order
/// 1e-10, which is negligible for training but would dominate a pure ratio.
inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({1e-4, std::fabs(analytic), std::fabs(numeric)});
  return std::fabs(analytic - numeric) / denom;
}

/// Compare the composed network's analytic parameter gradients against
/// central finite differences of the BCE loss. The network must be built
/// with all dropout probabilities at zero (the check differentiates a
/// deterministic train-mode forward).
inline GradCheckReport gradient_check(Crnn<double>& net, const Batch<double>& inputs,
                                      Eigen::Index frames, const Batch<double>& targets,
                                      double epsilon = 1e-5, double tolerance = 1e-4) {
  for (const auto& b : net.config().blocks)
    check(b.dropout == 0.0, "gradient_check requires dropout-free configurations");
  check(net.config().dropout_hidden == 0.0,
        "gradient_check requires dropout-free configurations");

  const auto loss_at = [&]() {
    const auto pred = net.forward(inputs, frames, Mode::train, 0);
    return static_cast<double>(BceLoss<double>::value(pred, targets));
  };

  net.zero_grads();
  const auto pred = net.forward(inputs, frames, Mode::train, 0);
  net.backward(BceLoss<double>::grad(pred, targets));

  auto params = net.params();
  std::vector<Matrix<double>> analytic;
  for (const auto* p : params) analytic.push_back(p->grad);

  GradCheckReport report;
  report.epsilon = epsilon;
  report.tolerance = tolerance;
  for (std::size_t g = 0; g < params.size(); ++g) {
    GradCheckGroup group;
    group.name = params[g]->name;
    auto& value = params[g]->value;
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      const double saved = value.data()[k];
      value.data()[k] = saved + epsilon;
      const double plus = loss_at();
      value.data()[k] = saved - epsilon;
      const double minus = loss_at();
      value.data()[k] = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      group.max_rel_error =
          std::max(group.max_rel_error, relative_error(analytic[g].data()[k], numeric));
    }
    report.max_rel_error = std::max(report.max_rel_error, group.max_rel_error);
    report.groups.push_back(group);
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

/// Reduced configuration for the verification harness: 16 frames, 16 bands,
/// two conv blocks, all dropout off.
inline NetworkConfig reduced_gradcheck_config() {
  NetworkConfig cfg;
  cfg.input_bands = 16;
  cfg.input_channels = 2;
  cfg.blocks = {{4, 3, 3, true, 0.0}, {6, 3, 3, false, 0.0}};
  cfg.lstm_units = 8;
  cfg.dense_units = 8;
  cfg.dropout_hidden = 0.0;
  cfg.output_units = 5;
  return cfg;
}

/// Build a network plus random input/target for one seed and run the
/// composed check. Inputs are re-drawn (deterministically) while any pooling
/// window has a max-vs-runner-up gap too small for stable finite
/// differences at the requested probe width.
inline GradCheckReport run_composed_gradient_check(const NetworkConfig& cfg, Eigen::Index frames,
                                                   std::uint64_t seed, double epsilon = 1e-5,
                                                   double tolerance = 1e-4,
                                                   double gap_threshold = 3e-4) {
  Crnn<double> net(cfg, seed);
  Batch<double> inputs(2), targets(2);
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, 777 + attempt));
    for (auto& x : inputs) {
      x.resize(frames * cfg.input_bands, cfg.input_channels);
      for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.uniform(-1.0, 1.0);
    }
    // a window max within a few probe widths of its runner-up could flip
    // under an FD step; re-draw until the whole net is clear of that region
    if (net.min_pool_gap(inputs, frames, Mode::train) > gap_threshold) break;
    check(attempt < 1000, "could not find a tie-free pooling input");
  }
  Rng rng(derive_seed(seed, 99));
  for (auto& y : targets) {
    y.resize(frames, cfg.output_units);
    for (Eigen::Index k = 0; k < y.size(); ++k) y.data()[k] = rng.uniform() < 0.3 ? 1.0 : 0.0;
  }
  return gradient_check(net, inputs, frames, targets, epsilon, tolerance);
}

inline GradCheckReport run_reduced_gradient_check(std::uint64_t seed, double epsilon = 1e-5,
                                                  double tolerance = 1e-4) {
  return run_composed_gradient_check(reduced_gradcheck_config(), 16, seed, epsilon, tolerance);
}

}  // namespace soundscene::nn
