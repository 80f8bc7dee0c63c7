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
#include <cstddef>
#include <vector>

#include "soundscene/audio/clip.hpp"
#include "soundscene/dsp/fft.hpp"
#include "soundscene/dsp/window.hpp"

namespace soundscene::features {

namespace detail {

/// Reflect index (librosa-style, without edge repetition).
inline std::size_t reflect_index(long long i, std::size_t len) {
  if (len == 1) return 0;
  const auto period = static_cast<long long>(2 * len - 2);
  long long m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<long long>(len)) m = period - m;
  return static_cast<std::size_t>(m);
}

}  // namespace detail

/// Centered STFT magnitude with a periodic Hann window and reflect padding.
/// Output is frames x (n_fft/2 + 1) with frames = floor(len / hop) + 1.
inline Eigen::MatrixXd stft_magnitude(const audio::AudioClip& clip, int n_fft = 2048,
                                      int hop = 512) {
  check(!clip.samples.empty(), "empty audio");
  check(dsp::is_pow2(static_cast<std::size_t>(n_fft)), "n_fft must be a power of two");
  check(hop > 0, "hop must be positive");

  const auto len = static_cast<long long>(clip.samples.size());
  const std::size_t n_frames = clip.samples.size() / static_cast<std::size_t>(hop) + 1;
  const std::size_t n_bins = static_cast<std::size_t>(n_fft) / 2 + 1;
  const auto window = dsp::hann_periodic(static_cast<std::size_t>(n_fft));
  const long long half = n_fft / 2;

  Eigen::MatrixXd mag(n_frames, n_bins);
  std::vector<double> frame(static_cast<std::size_t>(n_fft));
  for (std::size_t t = 0; t < n_frames; ++t) {
    const long long start = static_cast<long long>(t) * hop - half;
    for (long long i = 0; i < n_fft; ++i) {
      const long long src = start + i;
      const double v = (src >= 0 && src < len)
                           ? clip.samples[static_cast<std::size_t>(src)]
                           : clip.samples[detail::reflect_index(src, clip.samples.size())];
      frame[static_cast<std::size_t>(i)] = v * window[static_cast<std::size_t>(i)];
    }
    const auto spec = dsp::rfft(frame, static_cast<std::size_t>(n_fft));
    for (std::size_t k = 0; k < n_bins; ++k) mag(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = std::abs(spec[k]);
  }
  return mag;
}

}  // namespace soundscene::features
