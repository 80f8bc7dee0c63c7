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
#include <filesystem>
#include <string>
#include <vector>

#include "soundscene/audio/clip.hpp"
#include "soundscene/audio/wav.hpp"
#include "soundscene/dsp/fft.hpp"
#include "soundscene/synth/corpus.hpp"
#include "soundscene/synth/ontology.hpp"
#include "soundscene/synth/rng.hpp"

namespace soundscene::synth {

// Procedural corpus: synthesized backgrounds and events with class-distinct
// spectral signatures, so the whole pipeline can run with zero external data.

struct ProcCorpusParams {
  int n_scenes = 3;
  int n_events = 6;
  int locations_per_scene = 6;
  int sources_per_event = 4;
  double background_duration_s = 6.0;
  double event_min_duration_s = 0.4;
  double event_max_duration_s = 0.9;
  int sample_rate = 44100;
  std::uint64_t seed = 1;
};

namespace procgen {

/// White noise shaped into [lo_hz, hi_hz] with raised-cosine band edges.
inline std::vector<double> band_noise(std::size_t n, int sample_rate, double lo_hz, double hi_hz,
                                      Rng& rng) {
  std::size_t n_fft = 1;
  while (n_fft < n) n_fft <<= 1;
  std::vector<double> noise(n_fft);
  for (auto& v : noise) v = rng.normal(0.0, 1.0);
  auto spec = dsp::rfft(noise, n_fft);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n_fft);
  const double edge = std::max(20.0, 0.1 * (hi_hz - lo_hz));
  const double pi = 3.14159265358979323846;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    double w = 0.0;
    if (f >= lo_hz && f <= hi_hz) {
      w = 1.0;
    } else if (f > lo_hz - edge && f < lo_hz) {
      w = 0.5 * (1.0 + std::cos(pi * (lo_hz - f) / edge));
    } else if (f > hi_hz && f < hi_hz + edge) {
      w = 0.5 * (1.0 + std::cos(pi * (f - hi_hz) / edge));
    }
    spec[k] *= w;
  }
  auto shaped = dsp::irfft(spec, n_fft);
  shaped.resize(n);
  return shaped;
}

inline void apply_fade(std::vector<double>& x, double fade_fraction = 0.08) {
  const auto f = static_cast<std::size_t>(static_cast<double>(x.size()) * fade_fraction);
  const double pi = 3.14159265358979323846;
  for (std::size_t i = 0; i < f && i < x.size(); ++i) {
    const double w = 0.5 * (1.0 - std::cos(pi * static_cast<double>(i) / static_cast<double>(f)));
    x[i] *= w;
    x[x.size() - 1 - i] *= w;
  }
}

/// Frequency band for scene class `index` out of `count`, log-spaced over
/// [60, 9000] Hz. Distinct bands make scenes separable from spectra alone.
inline std::pair<double, double> scene_band(int index, int count) {
  const double lo = 60.0, hi = 9000.0;
  const double step = std::log(hi / lo) / count;
  return {lo * std::exp(step * index), lo * std::exp(step * (index + 1))};
}

inline audio::AudioClip make_background_clip(int scene_index, int n_scenes, double duration_s,
                                             int sample_rate, std::uint64_t seed) {
  Rng rng(seed);
  auto [lo, hi] = scene_band(scene_index, n_scenes);
  // mild per-location wobble keeps locations distinguishable
  lo *= rng.uniform(0.95, 1.05);
  hi *= rng.uniform(0.95, 1.05);
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  auto x = band_noise(n, sample_rate, lo, hi, rng);
  audio::AudioClip clip(std::move(x), sample_rate);
  clip = audio::peak_normalize(clip);
  for (auto& s : clip.samples) s *= 0.9;
  return clip;
}

enum class EventSignature { tone_low, tone_high, chirp_up, chirp_down, click_train, noise_band };

inline const char* signature_name(EventSignature s) {
  switch (s) {
    case EventSignature::tone_low: return "tone_low";
    case EventSignature::tone_high: return "tone_high";
    case EventSignature::chirp_up: return "chirp_up";
    case EventSignature::chirp_down: return "chirp_down";
    case EventSignature::click_train: return "click_train";
    case EventSignature::noise_band: return "noise_band";
  }
  return "unknown";
}

inline audio::AudioClip make_event_clip(EventSignature sig, double duration_s, int sample_rate,
                                        std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> x(n, 0.0);
  const double pi = 3.14159265358979323846;
  const double jitter = rng.uniform(0.92, 1.08);
  switch (sig) {
    case EventSignature::tone_low: {
      const double f = 420.0 * jitter;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        x[i] = std::sin(2 * pi * f * t) + 0.35 * std::sin(2 * pi * 2 * f * t);
      }
      break;
    }
    case EventSignature::tone_high: {
      const double f = 2600.0 * jitter;
      for (std::size_t i = 0; i < n; ++i)
        x[i] = std::sin(2 * pi * f * static_cast<double>(i) / sample_rate);
      break;
    }
    case EventSignature::chirp_up:
    case EventSignature::chirp_down: {
      double f0 = 500.0 * jitter, f1 = 3200.0 * jitter;
      if (sig == EventSignature::chirp_down) std::swap(f0, f1);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double frac = static_cast<double>(i) / static_cast<double>(n);
        x[i] = std::sin(2 * pi * t * (f0 + 0.5 * (f1 - f0) * frac));
      }
      break;
    }
    case EventSignature::click_train: {
      const auto period = static_cast<std::size_t>(sample_rate * 0.04 * jitter);
      const auto ping = static_cast<std::size_t>(sample_rate * 0.004);
      for (std::size_t start = 0; start + ping < n; start += period) {
        for (std::size_t i = 0; i < ping; ++i) {
          const double w =
              0.5 * (1.0 - std::cos(2 * pi * static_cast<double>(i) / static_cast<double>(ping)));
          x[start + i] = w * rng.uniform(-1.0, 1.0);
        }
      }
      break;
    }
    case EventSignature::noise_band: {
      x = band_noise(n, sample_rate, 1200.0 * jitter, 4200.0 * jitter, rng);
      break;
    }
  }
  apply_fade(x);
  audio::AudioClip clip(std::move(x), sample_rate);
  clip = audio::peak_normalize(clip);
  for (auto& s : clip.samples) s *= 0.8;
  // small leading pad; corpus preparation strips it again
  std::vector<double> padded(static_cast<std::size_t>(sample_rate * 0.01), 0.0);
  padded.insert(padded.end(), clip.samples.begin(), clip.samples.end());
  return audio::AudioClip(std::move(padded), sample_rate);
}

}  // namespace procgen

/// Ontology for the procedural corpus: every event class is compatible with
/// two adjacent scene classes, so no event pins down a single scene.
inline SceneOntology procedural_ontology(int n_scenes, int n_events) {
  check(n_scenes >= 2, "procedural ontology needs at least 2 scenes");
  check(n_events >= 1, "procedural ontology needs at least 1 event");
  SceneOntology ont;
  char buf[64];
  for (int s = 0; s < n_scenes; ++s) {
    std::snprintf(buf, sizeof(buf), "scene%02d", s);
    ont.scene_classes.emplace_back(buf);
    ont.compatibility[buf] = {};
  }
  for (int e = 0; e < n_events; ++e) {
    const auto sig = static_cast<procgen::EventSignature>(e % 6);
    std::string name = procgen::signature_name(sig);
    if (e >= 6) {
      std::snprintf(buf, sizeof(buf), "%s_%d", name.c_str(), e / 6);
      name = buf;
    }
    ont.event_classes.push_back(name);
    ont.compatibility[ont.scene_classes[e % n_scenes]].push_back(name);
    ont.compatibility[ont.scene_classes[(e + 1) % n_scenes]].push_back(name);
  }
  ont.validate();
  return ont;
}

struct ProcCorpusOutput {
  SceneOntology ontology;
  std::vector<BackgroundEntry> backgrounds;
  std::vector<RawSource> sources;
  std::string ontology_path;
  std::string background_manifest_path;
  std::string event_manifest_path;
};

/// Generate the corpus on disk: ontology config, background WAVs with their
/// manifest, raw event WAVs with theirs. Deterministic for a fixed seed.
inline ProcCorpusOutput generate_procedural_corpus(const ProcCorpusParams& params,
                                                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "backgrounds");
  fs::create_directories(fs::path(out_dir) / "events");

  ProcCorpusOutput out;
  out.ontology = procedural_ontology(params.n_scenes, params.n_events);
  out.ontology_path = (fs::path(out_dir) / "ontology.cfg").string();
  save_ontology(out.ontology, out.ontology_path);

  char buf[128];
  std::uint64_t stream = 0;
  for (int s = 0; s < params.n_scenes; ++s) {
    for (int loc = 0; loc < params.locations_per_scene; ++loc) {
      const auto clip = procgen::make_background_clip(
          s, params.n_scenes, params.background_duration_s, params.sample_rate,
          derive_seed(params.seed, stream++));
      std::snprintf(buf, sizeof(buf), "%s_loc%02d", out.ontology.scene_classes[s].c_str(), loc);
      const std::string id = buf;
      const std::string path = (fs::path(out_dir) / "backgrounds" / (id + ".wav")).string();
      audio::write_wav(path, clip, audio::WavFormat::float32);
      out.backgrounds.push_back({out.ontology.scene_classes[s], id, path});
    }
  }

  for (int e = 0; e < params.n_events; ++e) {
    const auto sig = static_cast<procgen::EventSignature>(e % 6);
    const std::string& cls = out.ontology.event_classes[static_cast<std::size_t>(e)];
    for (int src = 0; src < params.sources_per_event; ++src) {
      Rng dur_rng(derive_seed(params.seed, 100000 + stream));
      const double dur =
          dur_rng.uniform(params.event_min_duration_s, params.event_max_duration_s);
      const auto clip = procgen::make_event_clip(sig, dur, params.sample_rate,
                                                 derive_seed(params.seed, stream++));
      std::snprintf(buf, sizeof(buf), "src%02d", src);
      const std::string id = buf;
      const std::string path = (fs::path(out_dir) / "events" / (cls + "_" + id + ".wav")).string();
      audio::write_wav(path, clip, audio::WavFormat::float32);
      out.sources.push_back({cls, id, path});
    }
  }

  out.background_manifest_path = (fs::path(out_dir) / "backgrounds.tsv").string();
  {
    std::ofstream f(out.background_manifest_path);
    f << "# scene_class\tlocation_id\tpath\n";
    for (const auto& b : out.backgrounds)
      f << b.scene_class << "\t" << b.location_id << "\t" << b.path << "\n";
  }
  out.event_manifest_path = (fs::path(out_dir) / "events.tsv").string();
  {
    std::ofstream f(out.event_manifest_path);
    f << "# event_class\tsource_id\tpath\n";
    for (const auto& s : out.sources)
      f << s.event_class << "\t" << s.source_id << "\t" << s.path << "\n";
  }
  return out;
}

}  // namespace soundscene::synth
