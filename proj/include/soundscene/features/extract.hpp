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

#include "soundscene/audio/resample.hpp"
#include "soundscene/features/mel.hpp"
#include "soundscene/features/tensor.hpp"

namespace soundscene::features {

/// Feature-stage parameters. Scenes are synthesized at 44100 Hz and
/// downsampled to `sample_rate` before extraction; 22050 Hz with hop 512
/// yields 1292 frames for a 30 s recording.
struct FeatureParams {
  int sample_rate = 22050;
  int n_fft = 2048;
  int hop = 512;
  int n_mels = 128;
  int smooth_window_frames = 21;

  double frame_hop_s() const { return static_cast<double>(hop) / sample_rate; }
  Eigen::Index frames_for(double duration_s) const {
    const auto len = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
    return static_cast<Eigen::Index>(len / static_cast<std::size_t>(hop) + 1);
  }
};

/// Full per-recording extraction: resample, log-mel, temporal smoothing,
/// two-channel stack. Output is unstandardized; fold statistics are applied
/// downstream.
inline FeatureTensor extract_features(const audio::AudioClip& clip, const FeatureParams& params) {
  const audio::AudioClip at_rate = audio::resample(clip, params.sample_rate);
  const Eigen::MatrixXd raw = log_mel(at_rate, params.n_mels, params.n_fft, params.hop);
  const Eigen::MatrixXd smoothed = temporal_smooth(raw, params.smooth_window_frames);
  return stack_channels(raw, smoothed, params.frame_hop_s(), params.sample_rate);
}

}  // namespace soundscene::features
