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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "soundscene/common.hpp"

namespace soundscene::audio {

/// Mono sample buffer plus its sample rate. The unit of all DSP here.
/// All operations on clips are pure: they never mutate their inputs.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  AudioClip() = default;
  AudioClip(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {
    check(!samples.empty(), "empty audio");
    check(sample_rate > 0, "sample rate must be positive");
  }

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

inline double peak_amplitude(const AudioClip& clip) {
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::fabs(s));
  return peak;
}

/// RMS over the sample range [from, to).
inline double rms(const std::vector<double>& samples, std::size_t from, std::size_t to) {
  to = std::min(to, samples.size());
  if (from >= to) return 0.0;
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += samples[i] * samples[i];
  return std::sqrt(acc / static_cast<double>(to - from));
}

inline double rms(const AudioClip& clip) { return rms(clip.samples, 0, clip.size()); }

/// Scale so that max(|samples|) == 1. All-zero input is returned unchanged.
inline AudioClip peak_normalize(const AudioClip& clip) {
  const double peak = peak_amplitude(clip);
  AudioClip out = clip;
  if (peak <= 0.0) return out;
  const double g = 1.0 / peak;
  for (double& s : out.samples) s *= g;
  return out;
}

/// Drop samples before the first one whose magnitude exceeds
/// peak * 10^(threshold_db/20). threshold_db must be negative (relative dB).
inline AudioClip trim_leading_silence(const AudioClip& clip, double threshold_db) {
  check(threshold_db < 0.0, "threshold_db must be negative");
  const double peak = peak_amplitude(clip);
  const double threshold = peak * db_to_amplitude(threshold_db);
  if (peak <= 0.0) fail("no signal above threshold");
  std::size_t first = clip.size();
  for (std::size_t i = 0; i < clip.size(); ++i) {
    if (std::fabs(clip.samples[i]) > threshold) {
      first = i;
      break;
    }
  }
  if (first == clip.size()) fail("no signal above threshold");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(first), clip.samples.end());
  return out;
}

/// Multiply every sample by 10^(gain_db/20). No clipping is applied.
inline AudioClip apply_gain(const AudioClip& clip, double gain_db) {
  AudioClip out = clip;
  const double g = db_to_amplitude(gain_db);
  for (double& s : out.samples) s *= g;
  return out;
}

/// Add a gain-scaled overlay into a copy of base starting at
/// round(onset_s * rate). The overlay must fit inside the base.
inline AudioClip mix_at(const AudioClip& base, const AudioClip& overlay, double onset_s,
                        double gain_db) {
  check(base.sample_rate == overlay.sample_rate, "sample rate mismatch between base and overlay");
  check(onset_s >= 0.0, "onset must be non-negative");
  const auto start = static_cast<std::size_t>(std::llround(onset_s * base.sample_rate));
  if (start + overlay.size() > base.size()) fail("event exceeds scene bounds");
  AudioClip out = base;
  const double g = db_to_amplitude(gain_db);
  for (std::size_t i = 0; i < overlay.size(); ++i) out.samples[start + i] += g * overlay.samples[i];
  return out;
}

}  // namespace soundscene::audio
