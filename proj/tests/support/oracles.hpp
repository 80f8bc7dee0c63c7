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
// Test-only oracles, deliberately independent of the library's FFT/DSP path.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<double> make_sine(double freq, int sample_rate, double duration_s,
                                     double amplitude = 0.8, double phase = 0.0) {
  const double pi = 3.14159265358979323846;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amplitude * std::sin(2.0 * pi * freq * static_cast<double>(i) / sample_rate + phase);
  return x;
}

/// Naive O(n) single-frequency projection |sum x[n] e^{-i w n}|.
inline double projection_magnitude(const std::vector<double>& x, double freq, int sample_rate) {
  const double pi = 3.14159265358979323846;
  const double omega = 2.0 * pi * freq / sample_rate;
  const std::complex<double> rot(std::cos(-omega), std::sin(-omega));
  std::complex<double> phasor(1.0, 0.0);
  std::complex<double> acc(0.0, 0.0);
  for (double v : x) {
    acc += v * phasor;
    phasor *= rot;
  }
  return std::abs(acc);
}

/// Brute-force dominant frequency: scan [fmin, fmax] in `step` Hz increments
/// and return the candidate with the largest projection magnitude.
inline double dominant_frequency(const std::vector<double>& x, int sample_rate, double fmin,
                                 double fmax, double step = 0.5) {
  double best_f = fmin, best_mag = -1.0;
  for (double f = fmin; f <= fmax + 1e-9; f += step) {
    const double mag = projection_magnitude(x, f, sample_rate);
    if (mag > best_mag) {
      best_mag = mag;
      best_f = f;
    }
  }
  return best_f;
}

/// Textbook O(n^2) DFT for cross-checking the library FFT.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const double pi = 3.14159265358979323846;
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * pi * static_cast<double>(k * t) / static_cast<double>(n);
      out[k] += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
  }
  return out;
}

/// Sweep-line maximum concurrency over (onset, offset) intervals.
inline int max_concurrency(const std::vector<std::pair<double, double>>& intervals) {
  std::vector<std::pair<double, int>> boundaries;
  for (const auto& [on, off] : intervals) {
    boundaries.emplace_back(on, +1);
    boundaries.emplace_back(off, -1);
  }
  std::sort(boundaries.begin(), boundaries.end(),
            [](const auto& a, const auto& b) {
              // close before open at identical times: touching intervals do
              // not overlap
              return a.first != b.first ? a.first < b.first : a.second < b.second;
            });
  int active = 0, worst = 0;
  for (const auto& [t, delta] : boundaries) {
    active += delta;
    worst = std::max(worst, active);
  }
  return worst;
}

inline double rms_of(const std::vector<double>& x, std::size_t from, std::size_t to) {
  if (to > x.size()) to = x.size();
  if (from >= to) return 0.0;
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(to - from));
}

/// Residual between two signals over [from, to), in dB relative to the
/// reference signal's RMS.
inline double residual_db(const std::vector<double>& ref, const std::vector<double>& test,
                          std::size_t from, std::size_t to) {
  std::vector<double> diff;
  const std::size_t n = std::min(ref.size(), test.size());
  if (to > n) to = n;
  for (std::size_t i = from; i < to; ++i) diff.push_back(ref[i] - test[i]);
  const double r = rms_of(ref, from, to);
  const double d = rms_of(diff, 0, diff.size());
  if (d == 0.0) return -400.0;
  return 20.0 * std::log10(d / r);
}

}  // namespace oracle
