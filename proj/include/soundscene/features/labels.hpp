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

#include "soundscene/synth/annotation.hpp"
#include "soundscene/synth/ontology.hpp"

namespace soundscene::features {

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Per-frame N-hot targets: scene columns first (exactly one active per
/// frame), then event columns (active while an event of that class overlaps
/// the frame).
struct LabelMatrix {
  BinaryMatrix values;  // frames x (n_scenes + n_events)
  int n_scenes = 0;
  double frame_hop_s = 0.0;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  int n_events() const { return static_cast<int>(values.cols()) - n_scenes; }
};

/// Rasterize an annotation track onto `frames` half-open frame intervals
/// [f*hop, (f+1)*hop): an event class column is set for frame f iff some
/// event of that class intersects the frame's span.
inline LabelMatrix labels_from_annotation(const synth::AnnotationTrack& track,
                                          Eigen::Index frames, double frame_hop_s,
                                          const synth::SceneOntology& ontology) {
  const int n_scenes = static_cast<int>(ontology.scene_classes.size());
  const int n_events = static_cast<int>(ontology.event_classes.size());
  const int scene = ontology.scene_index(track.scene_label);
  check(scene >= 0, "unknown scene label: " + track.scene_label);

  LabelMatrix out;
  out.n_scenes = n_scenes;
  out.frame_hop_s = frame_hop_s;
  out.values = BinaryMatrix::Zero(frames, n_scenes + n_events);
  out.values.col(scene).setConstant(1);

  for (const auto& e : track.events) {
    const int idx = ontology.event_index(e.label);
    check(idx >= 0, "unknown event label: " + e.label);
    const Eigen::Index col = n_scenes + idx;
    for (Eigen::Index f = 0; f < frames; ++f) {
      // (f+1)*hop, not begin+hop: keeps frame edges bitwise identical to
      // event times that were themselves computed as frame_index * hop
      const double frame_begin = static_cast<double>(f) * frame_hop_s;
      const double frame_end = static_cast<double>(f + 1) * frame_hop_s;
      if (e.onset_s < frame_end && e.offset_s > frame_begin) out.values(f, col) = 1;
    }
  }
  return out;
}

}  // namespace soundscene::features
