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

#include <Eigen/Dense>
#include <array>
#include <vector>

#include <json.hpp>

#include "soundscene/features/tensor.hpp"

namespace soundscene::features {

/// Per-band, per-channel mean/std fitted on the training fold only.
struct Standardizer {
  std::array<Eigen::VectorXd, 2> mean;
  std::array<Eigen::VectorXd, 2> std_dev;

  nlohmann::json to_json() const {
    nlohmann::json j;
    for (int c = 0; c < 2; ++c) {
      std::vector<double> m(mean[c].data(), mean[c].data() + mean[c].size());
      std::vector<double> s(std_dev[c].data(), std_dev[c].data() + std_dev[c].size());
      j["mean"].push_back(m);
      j["std"].push_back(s);
    }
    return j;
  }

  static Standardizer from_json(const nlohmann::json& j) {
    Standardizer out;
    for (int c = 0; c < 2; ++c) {
      const auto m = j.at("mean").at(c).get<std::vector<double>>();
      const auto s = j.at("std").at(c).get<std::vector<double>>();
      out.mean[c] = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
      out.std_dev[c] =
          Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    }
    return out;
  }
};

/// Two-pass population mean/std over every frame of the training tensors.
/// Bands with std below 1e-8 get std = 1 so constant bands standardize to 0.
/// Deterministic: tensors are visited in the order given.
inline Standardizer fit_standardizer(const std::vector<const FeatureTensor*>& training) {
  check(!training.empty(), "cannot fit a standardizer on an empty training set");
  const Eigen::Index bands = training.front()->bands();
  Standardizer out;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(bands);
    long long n = 0;
    for (const auto* t : training) {
      check(t->bands() == bands, "band count mismatch across training tensors");
      sum += t->channels[c].colwise().sum().transpose();
      n += t->frames();
    }
    const Eigen::VectorXd mean = sum / static_cast<double>(n);
    Eigen::VectorXd ssd = Eigen::VectorXd::Zero(bands);
    for (const auto* t : training) {
      const Eigen::MatrixXd centered = t->channels[c].rowwise() - mean.transpose();
      ssd += centered.array().square().colwise().sum().matrix().transpose();
    }
    Eigen::VectorXd sd = (ssd / static_cast<double>(n)).array().sqrt();
    for (Eigen::Index b = 0; b < bands; ++b)
      if (sd(b) < 1e-8) sd(b) = 1.0;
    out.mean[c] = mean;
    out.std_dev[c] = sd;
  }
  return out;
}

inline FeatureTensor apply_standardizer(const FeatureTensor& t, const Standardizer& s) {
  FeatureTensor out = t;
  for (int c = 0; c < 2; ++c) {
    check(s.mean[c].size() == t.bands(), "standardizer band count mismatch");
    out.channels[c] = (t.channels[c].rowwise() - s.mean[c].transpose()).array().rowwise() /
                      s.std_dev[c].transpose().array();
  }
  return out;
}

}  // namespace soundscene::features
