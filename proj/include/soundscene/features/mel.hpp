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
#include <cmath>

#include "soundscene/features/stft.hpp"

namespace soundscene::features {

// Slaney-style mel scale: linear below 1 kHz, logarithmic above.
inline double hz_to_mel(double hz) {
  if (hz < 1000.0) return hz * 3.0 / 200.0;
  return 15.0 + 27.0 * std::log(hz / 1000.0) / std::log(6.4);
}

inline double mel_to_hz(double mel) {
  if (mel < 15.0) return mel * 200.0 / 3.0;
  return 1000.0 * std::exp(std::log(6.4) * (mel - 15.0) / 27.0);
}

/// Triangular mel filterbank, n_mels x (n_fft/2 + 1), spanning 0..sr/2 with
/// area-normalized (Slaney) triangles.
inline Eigen::MatrixXd mel_filterbank(int n_mels, int sample_rate, int n_fft) {
  check(n_mels > 0, "n_mels must be positive");
  check(n_mels < n_fft / 2, "n_mels must be smaller than n_fft/2");
  const int n_bins = n_fft / 2 + 1;
  const double fmax = sample_rate / 2.0;
  const double mel_max = hz_to_mel(fmax);

  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int b = 0; b < n_mels; ++b) {
    const double lo = edges[static_cast<std::size_t>(b)];
    const double center = edges[static_cast<std::size_t>(b) + 1];
    const double hi = edges[static_cast<std::size_t>(b) + 2];
    const double norm = 2.0 / (hi - lo);
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      double w = 0.0;
      if (f > lo && f < center) {
        w = (f - lo) / (center - lo);
      } else if (f >= center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      fb(b, k) = w * norm;
    }
  }
  return fb;
}

inline constexpr double kLogMelEpsilon = 1e-10;

/// log(mel energies + eps) of the power spectrogram: frames x n_mels.
inline Eigen::MatrixXd log_mel(const audio::AudioClip& clip, int n_mels = 128, int n_fft = 2048,
                               int hop = 512) {
  const Eigen::MatrixXd mag = stft_magnitude(clip, n_fft, hop);
  const Eigen::MatrixXd power = mag.array().square().matrix();
  const Eigen::MatrixXd fb = mel_filterbank(n_mels, clip.sample_rate, n_fft);
  Eigen::MatrixXd energies = power * fb.transpose();
  return (energies.array() + kLogMelEpsilon).log().matrix();
}

}  // namespace soundscene::features
