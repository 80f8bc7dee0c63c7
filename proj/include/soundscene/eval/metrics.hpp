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
#include <limits>
#include <vector>

#include "soundscene/features/labels.hpp"
#include "soundscene/synth/annotation.hpp"

namespace soundscene::eval {

/// Threshold per-frame scores; ties at the threshold count as active.
inline features::BinaryMatrix binarize(const Eigen::MatrixXd& pred, double threshold = 0.9) {
  features::BinaryMatrix out(pred.rows(), pred.cols());
  for (Eigen::Index r = 0; r < pred.rows(); ++r)
    for (Eigen::Index c = 0; c < pred.cols(); ++c) out(r, c) = pred(r, c) >= threshold ? 1 : 0;
  return out;
}

/// Scene decision for one recording: the class with the most thresholded
/// active frames, ties to the lowest index. If no frame activated any scene
/// column, falls back to the argmax of the mean pre-threshold score.
inline int asc_majority_vote(const features::BinaryMatrix& binary_scene,
                             const Eigen::MatrixXd& raw_scene) {
  check(binary_scene.cols() == raw_scene.cols() && binary_scene.rows() == raw_scene.rows(),
        "majority vote: binary/raw shape mismatch");
  long long best_count = 0;
  int best = -1;
  for (Eigen::Index c = 0; c < binary_scene.cols(); ++c) {
    long long count = 0;
    for (Eigen::Index r = 0; r < binary_scene.rows(); ++r) count += binary_scene(r, c);
    if (count > best_count) {
      best_count = count;
      best = static_cast<int>(c);
    }
  }
  if (best >= 0) return best;
  Eigen::Index argmax = 0;
  raw_scene.colwise().mean().maxCoeff(&argmax);
  return static_cast<int>(argmax);
}

/// A detected or reference event, with the class as a column index.
struct Event {
  double onset_s = 0.0;
  double offset_s = 0.0;
  int class_index = 0;
};

/// Maximal runs of consecutive active frames become events; single-frame
/// runs are allowed.
inline std::vector<Event> events_from_frames(const features::BinaryMatrix& event_cols,
                                             double frame_hop_s) {
  std::vector<Event> out;
  for (Eigen::Index c = 0; c < event_cols.cols(); ++c) {
    Eigen::Index run_start = -1;
    for (Eigen::Index f = 0; f <= event_cols.rows(); ++f) {
      const bool active = f < event_cols.rows() && event_cols(f, c) != 0;
      if (active && run_start < 0) run_start = f;
      if (!active && run_start >= 0) {
        Event e;
        e.onset_s = static_cast<double>(run_start) * frame_hop_s;
        e.offset_s = static_cast<double>(f) * frame_hop_s;
        e.class_index = static_cast<int>(c);
        out.push_back(e);
        run_start = -1;
      }
    }
  }
  return out;
}

inline std::vector<Event> events_from_annotation(const synth::AnnotationTrack& track,
                                                 const synth::SceneOntology& ontology) {
  std::vector<Event> out;
  for (const auto& e : track.events) {
    const int idx = ontology.event_index(e.label);
    check(idx >= 0, "unknown event label: " + e.label);
    out.push_back({e.onset_s, e.offset_s, idx});
  }
  return out;
}

/// Totals over all 1 s (by default) segments: per segment a class is active
/// iff any event of that class intersects it. S/D/I follow the segment-based
/// convention: S = min(FN, FP), D = FN - S, I = FP - S per segment.
struct SegmentCounts {
  long long nref = 0;
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long substitutions = 0;
  long long deletions = 0;
  long long insertions = 0;

  SegmentCounts& operator+=(const SegmentCounts& o) {
    nref += o.nref;
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    return *this;
  }
};

struct SegmentMetrics {
  double er = 0.0;
  double f1 = 0.0;  // ratio in [0, 1]; reports print it as a percentage
  double precision = 0.0;
  double recall = 0.0;
  SegmentCounts counts;
  bool reference_empty = false;  // Nref == 0 with spurious predictions
};

inline void validate_events(const std::vector<Event>& events) {
  for (const auto& e : events)
    check(e.onset_s >= 0.0 && e.offset_s > e.onset_s,
          "invalid event times: onset must be >= 0 and offset > onset");
}

inline SegmentCounts segment_counts(const std::vector<Event>& reference,
                                    const std::vector<Event>& predicted, int n_classes,
                                    double duration_s, double segment_s = 1.0) {
  validate_events(reference);
  validate_events(predicted);
  check(segment_s > 0.0 && duration_s > 0.0, "segment and duration must be positive");
  const auto n_segments =
      static_cast<long long>(std::ceil(duration_s / segment_s - 1e-12));

  SegmentCounts total;
  std::vector<char> ref_active(static_cast<std::size_t>(n_classes));
  std::vector<char> pred_active(static_cast<std::size_t>(n_classes));
  for (long long s = 0; s < n_segments; ++s) {
    const double begin = static_cast<double>(s) * segment_s;
    const double end = std::min(begin + segment_s, duration_s);
    std::fill(ref_active.begin(), ref_active.end(), 0);
    std::fill(pred_active.begin(), pred_active.end(), 0);
    for (const auto& e : reference)
      if (e.onset_s < end && e.offset_s > begin) ref_active[static_cast<std::size_t>(e.class_index)] = 1;
    for (const auto& e : predicted)
      if (e.onset_s < end && e.offset_s > begin) pred_active[static_cast<std::size_t>(e.class_index)] = 1;

    long long nref = 0, tp = 0, fp = 0, fn = 0;
    for (int c = 0; c < n_classes; ++c) {
      nref += ref_active[static_cast<std::size_t>(c)];
      if (ref_active[static_cast<std::size_t>(c)] && pred_active[static_cast<std::size_t>(c)]) ++tp;
      if (!ref_active[static_cast<std::size_t>(c)] && pred_active[static_cast<std::size_t>(c)]) ++fp;
      if (ref_active[static_cast<std::size_t>(c)] && !pred_active[static_cast<std::size_t>(c)]) ++fn;
    }
    const long long subs = std::min(fn, fp);
    total.nref += nref;
    total.tp += tp;
    total.fp += fp;
    total.fn += fn;
    total.substitutions += subs;
    total.deletions += fn - subs;
    total.insertions += fp - subs;
  }
  return total;
}

inline SegmentMetrics metrics_from_counts(const SegmentCounts& counts) {
  SegmentMetrics m;
  m.counts = counts;
  const long long f1_denominator = 2 * counts.tp + counts.fp + counts.fn;
  m.f1 = f1_denominator > 0 ? 2.0 * static_cast<double>(counts.tp) / static_cast<double>(f1_denominator)
                            : 1.0;
  m.precision = (counts.tp + counts.fp) > 0
                    ? static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp)
                    : (counts.nref == 0 ? 1.0 : 0.0);
  m.recall = counts.nref > 0
                 ? static_cast<double>(counts.tp) / static_cast<double>(counts.nref)
                 : 1.0;
  if (counts.nref > 0) {
    m.er = static_cast<double>(counts.substitutions + counts.deletions + counts.insertions) /
           static_cast<double>(counts.nref);
  } else if (counts.fp == 0) {
    m.er = 0.0;
  } else {
    m.er = std::numeric_limits<double>::infinity();
    m.reference_empty = true;
    m.f1 = 0.0;
  }
  return m;
}

inline SegmentMetrics segment_metrics(const std::vector<Event>& reference,
                                      const std::vector<Event>& predicted, int n_classes,
                                      double duration_s, double segment_s = 1.0) {
  return metrics_from_counts(segment_counts(reference, predicted, n_classes, duration_s, segment_s));
}

struct MetricStat {
  double mean = 0.0;
  double std_dev = 0.0;  // population standard deviation across folds
};

inline MetricStat cross_fold_stat(const std::vector<double>& values) {
  check(!values.empty(), "cross_fold_stat: no values");
  MetricStat s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double ssd = 0.0;
  for (double v : values) ssd += (v - s.mean) * (v - s.mean);
  s.std_dev = std::sqrt(ssd / static_cast<double>(values.size()));
  return s;
}

}  // namespace soundscene::eval
