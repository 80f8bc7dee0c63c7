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
#include <complex>
#include <cstddef>
#include <vector>

#include "soundscene/audio/clip.hpp"
#include "soundscene/audio/resample.hpp"
#include "soundscene/dsp/fft.hpp"
#include "soundscene/dsp/window.hpp"

namespace soundscene::audio {

namespace detail {

inline double princarg(double phase) {
  const double pi = 3.14159265358979323846;
  const double two_pi = 2.0 * pi;
  phase = std::fmod(phase + pi, two_pi);
  if (phase < 0.0) phase += two_pi;
  return phase - pi;
}

}  // namespace detail

/// Phase-vocoder time stretch: output duration = input duration * ratio,
/// pitch preserved. Analysis hop is fixed at `hop`; the synthesis hop is
/// round(ratio * hop), so the realized ratio is quantized to 1/hop steps.
/// Overlap-add is normalized by the accumulated squared window, which makes
/// ratio == 1 an exact reconstruction up to rounding noise.
inline std::vector<double> time_stretch_samples(const std::vector<double>& x, double ratio,
                                                std::size_t n_fft = 2048, std::size_t hop = 512) {
  check(!x.empty(), "empty audio");
  check(ratio > 0.0, "stretch ratio must be positive");

  const auto out_len = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(static_cast<double>(x.size()) * ratio)));
  const auto syn_hop = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(ratio * static_cast<double>(hop))));
  check(syn_hop < n_fft, "stretch ratio too large for the analysis window");

  const std::size_t half = n_fft / 2;
  const std::size_t n_bins = half + 1;
  const std::vector<double> window = dsp::hann_periodic(n_fft);
  const double pi = 3.14159265358979323846;

  // Frames centered at k*hop over the input, with half-window zero padding.
  std::vector<double> padded(x.size() + n_fft, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) padded[half + i] = x[i];
  const std::size_t n_frames = x.size() / hop + 1;

  std::vector<double> out_padded(n_frames * syn_hop + n_fft, 0.0);
  std::vector<double> norm(out_padded.size(), 0.0);

  std::vector<double> prev_phase(n_bins, 0.0), syn_phase(n_bins, 0.0);
  std::vector<double> frame(n_fft);
  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::size_t start = k * hop;
    for (std::size_t i = 0; i < n_fft; ++i) frame[i] = padded[start + i] * window[i];
    auto spec = dsp::rfft(frame, n_fft);

    if (k == 0) {
      for (std::size_t b = 0; b < n_bins; ++b) {
        prev_phase[b] = std::arg(spec[b]);
        syn_phase[b] = prev_phase[b];
      }
    } else {
      for (std::size_t b = 0; b < n_bins; ++b) {
        const double phase = std::arg(spec[b]);
        const double omega = 2.0 * pi * static_cast<double>(b) / static_cast<double>(n_fft);
        const double expected = omega * static_cast<double>(hop);
        const double deviation = detail::princarg(phase - prev_phase[b] - expected);
        const double true_freq = omega + deviation / static_cast<double>(hop);
        syn_phase[b] = detail::princarg(syn_phase[b] + true_freq * static_cast<double>(syn_hop));
        prev_phase[b] = phase;
      }
    }

    std::vector<std::complex<double>> syn_spec(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b)
      syn_spec[b] = std::polar(std::abs(spec[b]), syn_phase[b]);
    const std::vector<double> syn_frame = dsp::irfft(syn_spec, n_fft);

    const std::size_t out_start = k * syn_hop;
    for (std::size_t i = 0; i < n_fft; ++i) {
      out_padded[out_start + i] += syn_frame[i] * window[i];
      norm[out_start + i] += window[i] * window[i];
    }
  }

  std::vector<double> out(out_len, 0.0);
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::size_t j = half + i;
    if (j < out_padded.size() && norm[j] > 1e-9) out[i] = out_padded[j] / norm[j];
  }
  return out;
}

/// Stretch a clip's duration by `ratio`, preserving pitch.
inline AudioClip time_stretch(const AudioClip& clip, double ratio) {
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples = time_stretch_samples(clip.samples, ratio);
  return out;
}

/// Shift pitch by a (possibly fractional) number of semitones, preserving
/// duration: phase-vocoder stretch by 2^(s/12) followed by band-limited
/// resampling back to the original length.
inline AudioClip pitch_shift(const AudioClip& clip, double semitones) {
  check(std::fabs(semitones) <= 12.0, "pitch shift limited to +-12 semitones");
  const double factor = std::pow(2.0, semitones / 12.0);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  if (semitones == 0.0) {
    out.samples = time_stretch_samples(clip.samples, 1.0);
    return out;
  }
  const std::vector<double> stretched = time_stretch_samples(clip.samples, factor);
  out.samples = resample_ratio(stretched, 1.0 / factor);
  return out;
}

}  // namespace soundscene::audio
