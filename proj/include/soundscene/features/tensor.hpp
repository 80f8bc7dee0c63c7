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

#include "soundscene/common.hpp"

namespace soundscene::features {

/// frames x bands x 2 feature stack. Channel 0 is the log-mel spectrogram,
/// channel 1 its temporally smoothed copy; both standardized per band per
/// channel before training.
struct FeatureTensor {
  std::array<Eigen::MatrixXd, 2> channels;  // each frames x bands
  double frame_hop_s = 0.0;
  int sample_rate = 0;

  Eigen::Index frames() const { return channels[0].rows(); }
  Eigen::Index bands() const { return channels[0].cols(); }
};

/// Centered moving average along time with edge replication; window 1 is the
/// identity. window_frames must be odd.
inline Eigen::MatrixXd temporal_smooth(const Eigen::MatrixXd& feature, int window_frames) {
  check(window_frames >= 1 && window_frames % 2 == 1, "smoothing window must be odd and >= 1");
  if (window_frames == 1) return feature;
  const Eigen::Index t_len = feature.rows();
  const int half = window_frames / 2;
  Eigen::MatrixXd out(t_len, feature.cols());
  for (Eigen::Index t = 0; t < t_len; ++t) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(feature.cols());
    for (int d = -half; d <= half; ++d) {
      Eigen::Index src = t + d;
      if (src < 0) src = 0;
      if (src >= t_len) src = t_len - 1;
      acc += feature.row(src);
    }
    out.row(t) = acc / static_cast<double>(window_frames);
  }
  return out;
}

/// Stack the raw and smoothed features into one two-channel tensor.
inline FeatureTensor stack_channels(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& smoothed,
                                    double frame_hop_s, int sample_rate) {
  check(raw.rows() == smoothed.rows() && raw.cols() == smoothed.cols(),
        "channel shape mismatch: raw and smoothed features must agree");
  FeatureTensor t;
  t.channels[0] = raw;
  t.channels[1] = smoothed;
  t.frame_hop_s = frame_hop_s;
  t.sample_rate = sample_rate;
  return t;
}

}  // namespace soundscene::features
