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
#include <string>
#include <vector>

#include "soundscene/audio/clip.hpp"
#include "soundscene/audio/stretch.hpp"
#include "soundscene/synth/annotation.hpp"
#include "soundscene/synth/plan.hpp"

namespace soundscene::synth {

/// Gain (dB) that brings the event stem to the target SNR against the
/// background over [span_begin, span_end). A silent background span falls
/// back to the full-file background RMS.
inline double snr_gain(const std::vector<double>& event_stem,
                       const std::vector<double>& background_stem, std::size_t span_begin,
                       std::size_t span_end, double target_snr_db) {
  const double event_rms = audio::rms(event_stem, 0, event_stem.size());
  check(event_rms > 0.0, "silent event stem");
  double bg_rms = audio::rms(background_stem, span_begin, span_end);
  if (bg_rms <= 0.0) bg_rms = audio::rms(background_stem, 0, background_stem.size());
  check(bg_rms > 0.0, "silent background");
  return target_snr_db - amplitude_to_db(event_rms / bg_rms);
}

/// How one placement was realized at render time.
struct RealizedEvent {
  double onset_s = 0.0;
  double duration_s = 0.0;
  double gain_db = 0.0;  // applied on top of the corpus entry's variant gain
  std::string event_class;
};

struct RenderResult {
  audio::AudioClip audio;
  AnnotationTrack annotation;
  std::vector<RealizedEvent> realized;
};

/// Render a plan against its background: slice the background to the scene
/// duration, attenuate it, apply pitch shift -> time stretch -> SNR gain ->
/// mix for every placement, then peak-normalize the sum once at the end.
inline RenderResult render_scene(const ScenePlan& plan, const EventCorpus& corpus,
                                 const audio::AudioClip& background,
                                 const SynthParams& params = {}) {
  check(background.sample_rate == params.sample_rate,
        "background sample rate mismatch: expected " + std::to_string(params.sample_rate));
  const auto scene_len =
      static_cast<std::size_t>(std::llround(params.scene_duration_s * params.sample_rate));
  check(background.size() >= scene_len, "background shorter than the scene duration");

  audio::AudioClip bg;
  bg.sample_rate = params.sample_rate;
  bg.samples.assign(background.samples.begin(),
                    background.samples.begin() + static_cast<std::ptrdiff_t>(scene_len));
  bg = audio::apply_gain(bg, params.background_attenuation_db);

  RenderResult result;
  result.audio = bg;
  result.annotation.scene_label = plan.scene_class;
  result.annotation.duration_s = params.scene_duration_s;

  for (const auto& p : plan.placements) {
    audio::AudioClip stem = corpus.entry(p.corpus_entry).clip;
    stem = audio::pitch_shift(stem, p.pitch_semitones);
    stem = audio::time_stretch(stem, p.stretch_ratio);

    const auto span_begin = static_cast<std::size_t>(std::llround(p.onset_s * params.sample_rate));
    const std::size_t span_end = span_begin + stem.size();
    const double gain_db = snr_gain(stem.samples, bg.samples, span_begin, span_end, p.snr_db);
    result.audio = audio::mix_at(result.audio, stem, p.onset_s, gain_db);

    RealizedEvent realized;
    realized.onset_s = p.onset_s;
    realized.duration_s = stem.duration_s();
    realized.gain_db = gain_db;
    realized.event_class = p.event_class;
    result.realized.push_back(realized);

    AnnotatedEvent e;
    e.onset_s = p.onset_s;
    e.offset_s = std::min(p.onset_s + realized.duration_s, params.scene_duration_s);
    e.label = p.event_class;
    result.annotation.events.push_back(e);
  }

  result.audio = audio::peak_normalize(result.audio);
  result.annotation.sort_by_onset();
  return result;
}

struct SceneVariant {
  audio::AudioClip audio;
  AnnotationTrack annotation;
  double shift_semitones = 0.0;
};

/// Whole-scene pitch augmentation: two extra copies of a rendered scene, one
/// shifted up and one down by a uniform integer count of semitones within
/// the configured bound. Annotations are copied unchanged (the shift
/// preserves duration).
inline std::vector<SceneVariant> augment_scene_pitch(const audio::AudioClip& scene_audio,
                                                     const AnnotationTrack& annotation, Rng& rng,
                                                     double max_semitones = 6.0) {
  const int bound = static_cast<int>(max_semitones);
  const int up = rng.uniform_int(1, bound);
  const int down = -rng.uniform_int(1, bound);
  std::vector<SceneVariant> out;
  for (int shift : {up, down}) {
    SceneVariant v;
    v.shift_semitones = shift;
    v.audio = audio::peak_normalize(audio::pitch_shift(scene_audio, shift));
    v.annotation = annotation;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace soundscene::synth
