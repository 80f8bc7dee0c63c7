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
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "soundscene/common.hpp"
#include "soundscene/synth/corpus.hpp"
#include "soundscene/synth/ontology.hpp"
#include "soundscene/synth/rng.hpp"

namespace soundscene::synth {

/// Randomization ranges and scene geometry for synthesis. Defaults follow
/// the 30-second, polyphony-3 configuration.
struct SynthParams {
  double scene_duration_s = 30.0;
  int sample_rate = 44100;
  double event_pitch_range_semitones = 3.0;  // per-event shift in [-range, +range]
  double stretch_min = 0.8;
  double stretch_max = 1.15;
  double snr_min_db = -15.0;
  double snr_max_db = 15.0;
  int polyphony_max = 3;
  int onset_retries = 50;
  // Truncated-normal onset distribution. Negative means "derive from the
  // scene duration": mean = duration/2, std = duration/6 (15 s / 5 s at 30 s).
  double onset_mean_s = -1.0;
  double onset_std_s = -1.0;
  double background_attenuation_db = -6.0;
  double scene_pitch_max_semitones = 6.0;  // whole-scene augmentation bound

  double onset_mean() const { return onset_mean_s >= 0.0 ? onset_mean_s : scene_duration_s / 2.0; }
  double onset_std() const { return onset_std_s >= 0.0 ? onset_std_s : scene_duration_s / 6.0; }
};

/// One planned event instance: which corpus entry plays, when, and with what
/// per-event randomization applied.
struct EventPlacement {
  std::string event_class;
  std::size_t corpus_entry = 0;
  double onset_s = 0.0;
  double pitch_semitones = 0.0;
  double stretch_ratio = 1.0;
  double snr_db = 0.0;
  double est_duration_s = 0.0;  // source duration * stretch_ratio
};

struct DroppedEvent {
  std::string event_class;
  std::string reason;
};

/// The full random draw for one soundscape, sufficient to re-render it.
struct ScenePlan {
  std::string scene_class;
  std::string background_id;
  std::uint64_t seed = 0;
  std::vector<EventPlacement> placements;
  std::vector<DroppedEvent> dropped;
};

/// Number of events for a scene: uniform in [1, (E+1)*3] where E is the
/// count of event classes compatible with the scene.
inline int draw_event_count(const std::string& scene_class, const SceneOntology& ontology,
                            Rng& rng) {
  const auto& compatible = ontology.compatible_events(scene_class);
  const int e = static_cast<int>(compatible.size());
  return rng.uniform_int(1, (e + 1) * 3);
}

namespace detail {

/// Max number of already-accepted intervals concurrently active anywhere in
/// [onset, onset+dur), counting the candidate itself. Durations are padded by
/// `pad_s` so that render-time length rounding (a couple of samples) can
/// never raise realized concurrency above the planned value.
inline int concurrency_with(const std::vector<EventPlacement>& accepted, double onset,
                            double duration, double pad_s = 1e-3) {
  const double off = onset + duration + pad_s;
  // Boundary sweep over interval endpoints restricted to the candidate span.
  std::vector<double> probes{onset};
  for (const auto& p : accepted) {
    if (p.onset_s > onset && p.onset_s < off) probes.push_back(p.onset_s);
  }
  int worst = 0;
  for (double t : probes) {
    int active = 1;  // the candidate
    for (const auto& p : accepted) {
      if (p.onset_s <= t && t < p.onset_s + p.est_duration_s + pad_s) ++active;
    }
    worst = std::max(worst, active);
  }
  return worst;
}

}  // namespace detail

/// Draw a full scene plan. Placements come only from classes compatible with
/// the scene; duplicate classes and duplicate sources are permitted. Onsets
/// are truncated-normal over [0, duration - stretched length]; an onset is
/// re-drawn up to `onset_retries` times if it would exceed the polyphony cap,
/// after which the event is dropped into the plan's warning list.
/// A given (ontology, corpus, seed) always produces the identical plan.
inline ScenePlan plan_scene(const std::string& scene_class, const std::string& background_id,
                            const SceneOntology& ontology, const EventCorpus& corpus,
                            std::uint64_t seed, const SynthParams& params = {}) {
  check(ontology.scene_index(scene_class) >= 0, "unknown scene class: " + scene_class);
  const auto& compatible = ontology.compatible_events(scene_class);
  for (const auto& cls : compatible)
    check(corpus.has_class(cls), "corpus has no entries for event class: " + cls);

  Rng rng(seed);
  ScenePlan plan;
  plan.scene_class = scene_class;
  plan.background_id = background_id;
  plan.seed = seed;

  const int n_events = draw_event_count(scene_class, ontology, rng);
  for (int i = 0; i < n_events; ++i) {
    EventPlacement p;
    p.event_class = compatible[rng.uniform_index(compatible.size())];
    const auto& candidates = corpus.entries_for(p.event_class);
    p.corpus_entry = candidates[rng.uniform_index(candidates.size())];
    p.pitch_semitones =
        rng.uniform(-params.event_pitch_range_semitones, params.event_pitch_range_semitones);
    p.stretch_ratio = rng.uniform(params.stretch_min, params.stretch_max);
    p.snr_db = rng.uniform(params.snr_min_db, params.snr_max_db);
    p.est_duration_s = corpus.entry(p.corpus_entry).clip.duration_s() * p.stretch_ratio;

    // 2 ms of headroom: the rendered stem may be a sample or two longer than
    // the planning estimate and must still fit the scene.
    const double latest_onset = params.scene_duration_s - p.est_duration_s - 0.002;
    if (latest_onset < 0.0) {
      plan.dropped.push_back({p.event_class, "event longer than scene"});
      continue;
    }
    bool placed = false;
    for (int attempt = 0; attempt < params.onset_retries; ++attempt) {
      p.onset_s = rng.truncated_normal(params.onset_mean(), params.onset_std(), 0.0, latest_onset);
      if (detail::concurrency_with(plan.placements, p.onset_s, p.est_duration_s) <=
          params.polyphony_max) {
        placed = true;
        break;
      }
    }
    if (placed) {
      plan.placements.push_back(p);
    } else {
      plan.dropped.push_back({p.event_class, "polyphony cap"});
    }
  }
  return plan;
}

inline nlohmann::json placement_to_json(const EventPlacement& p, const EventCorpus& corpus) {
  return nlohmann::json{{"event_class", p.event_class},
                        {"corpus_entry", corpus.entry(p.corpus_entry).id()},
                        {"corpus_index", p.corpus_entry},
                        {"onset_s", p.onset_s},
                        {"pitch_semitones", p.pitch_semitones},
                        {"stretch_ratio", p.stretch_ratio},
                        {"snr_db", p.snr_db},
                        {"est_duration_s", p.est_duration_s}};
}

/// Rich annotation: the full plan as JSON, for exact reproducibility.
inline nlohmann::json plan_to_json(const ScenePlan& plan, const EventCorpus& corpus) {
  nlohmann::json placements = nlohmann::json::array();
  for (const auto& p : plan.placements) placements.push_back(placement_to_json(p, corpus));
  nlohmann::json dropped = nlohmann::json::array();
  for (const auto& d : plan.dropped)
    dropped.push_back({{"event_class", d.event_class}, {"reason", d.reason}});
  return nlohmann::json{{"scene_class", plan.scene_class},
                        {"background_id", plan.background_id},
                        {"seed", plan.seed},
                        {"placements", placements},
                        {"dropped", dropped}};
}

inline ScenePlan plan_from_json(const nlohmann::json& j) {
  ScenePlan plan;
  plan.scene_class = j.at("scene_class").get<std::string>();
  plan.background_id = j.at("background_id").get<std::string>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& pj : j.at("placements")) {
    EventPlacement p;
    p.event_class = pj.at("event_class").get<std::string>();
    p.corpus_entry = pj.at("corpus_index").get<std::size_t>();
    p.onset_s = pj.at("onset_s").get<double>();
    p.pitch_semitones = pj.at("pitch_semitones").get<double>();
    p.stretch_ratio = pj.at("stretch_ratio").get<double>();
    p.snr_db = pj.at("snr_db").get<double>();
    p.est_duration_s = pj.at("est_duration_s").get<double>();
    plan.placements.push_back(std::move(p));
  }
  for (const auto& dj : j.at("dropped"))
    plan.dropped.push_back(
        {dj.at("event_class").get<std::string>(), dj.at("reason").get<std::string>()});
  return plan;
}

}  // namespace soundscene::synth
