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
#include <cstddef>
#include <vector>

#include "soundscene/audio/clip.hpp"
#include "soundscene/dsp/window.hpp"

namespace soundscene::audio {

namespace detail {

inline double sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  const double pi = 3.14159265358979323846;
  return std::sin(pi * x) / (pi * x);
}

/// Kaiser-windowed sinc low-pass kernel tabulated on [0, half_width] with
/// linear interpolation between table points.
class SincKernel {
 public:
  // cutoff: normalized to the input rate (Nyquist = 0.5).
  SincKernel(double cutoff, double half_width, double beta)
      : cutoff_(cutoff), half_width_(half_width) {
    const std::size_t n = static_cast<std::size_t>(half_width * kOversample) + 2;
    table_.resize(n);
    const double i0b = dsp::bessel_i0(beta);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / kOversample;
      if (u > half_width) {
        table_[i] = 0.0;
        continue;
      }
      const double frac = u / half_width;
      const double win = dsp::bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - frac * frac))) / i0b;
      table_[i] = 2.0 * cutoff_ * sinc(2.0 * cutoff_ * u) * win;
    }
  }

  double half_width() const { return half_width_; }

  double operator()(double u) const {
    u = std::fabs(u);
    if (u >= half_width_) return 0.0;
    const double pos = u * kOversample;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return table_[i] * (1.0 - frac) + table_[i + 1] * frac;
  }

 private:
  static constexpr double kOversample = 256.0;
  double cutoff_;
  double half_width_;
  std::vector<double> table_;
};

}  // namespace detail

/// Band-limited resampling of a sample buffer by an arbitrary real ratio
/// (output length = round(len * ratio)). Windowed-sinc interpolation with a
/// Kaiser window; each output sample is normalized by its kernel sum so DC
/// gain is exactly one at every phase.
inline std::vector<double> resample_ratio(const std::vector<double>& x, double ratio) {
  check(!x.empty(), "empty audio");
  check(ratio > 0.0, "resample ratio must be positive");
  const auto out_len =
      static_cast<std::size_t>(std::max<long long>(1, std::llround(static_cast<double>(x.size()) * ratio)));

  // Cutoff sits at 93% of the narrower Nyquist; 32 sinc zero crossings at the
  // cutoff give a transition band comfortably inside the remaining 7%.
  const double fc = 0.5 * std::min(1.0, ratio) * 0.93;
  const double half_width = 32.0 / (2.0 * fc);
  const detail::SincKernel kernel(fc, half_width, 9.0);

  std::vector<double> out(out_len, 0.0);
  const double step = 1.0 / ratio;
  const auto len = static_cast<long long>(x.size());
  for (std::size_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) * step;
    const auto lo = static_cast<long long>(std::ceil(t - kernel.half_width()));
    const auto hi = static_cast<long long>(std::floor(t + kernel.half_width()));
    double acc = 0.0, wsum = 0.0;
    for (long long m = lo; m <= hi; ++m) {
      const double w = kernel(t - static_cast<double>(m));
      wsum += w;
      if (m >= 0 && m < len) acc += w * x[static_cast<std::size_t>(m)];
    }
    out[n] = wsum > 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

/// Resample a clip to target_rate. Same-rate input is returned unchanged.
inline AudioClip resample(const AudioClip& clip, int target_rate) {
  check(!clip.samples.empty(), "empty audio");
  check(target_rate > 0, "target rate must be positive");
  if (target_rate == clip.sample_rate) return clip;
  AudioClip out;
  out.sample_rate = target_rate;
  out.samples = resample_ratio(clip.samples,
                               static_cast<double>(target_rate) / clip.sample_rate);
  return out;
}

}  // namespace soundscene::audio
