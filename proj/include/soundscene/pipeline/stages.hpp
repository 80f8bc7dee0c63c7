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
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "soundscene/features/extract.hpp"
#include "soundscene/features/feature_io.hpp"
#include "soundscene/features/folds.hpp"
#include "soundscene/features/standardize.hpp"
#include "soundscene/pipeline/config.hpp"
#include "soundscene/pipeline/hash.hpp"
#include "soundscene/synth/procgen.hpp"
#include "soundscene/synth/render.hpp"

namespace soundscene::pipeline {

namespace fs = std::filesystem;

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream f(path);
  check(f.good(), "cannot open for writing: " + path);
  f << j.dump(2) << "\n";
  check(f.good(), "write failed: " + path);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  check(f.good(), "cannot open: " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    fail("malformed JSON in " + path + ": " + e.what());
  }
}

inline std::string manifest_path(const std::string& dir) {
  return (fs::path(dir) / "manifest.json").string();
}

/// Refuse to consume an upstream artifact whose manifest changed since the
/// downstream one was produced.
inline void require_fresh(const std::string& recorded_hash, const std::string& current_hash,
                          const std::string& what, bool allow_stale) {
  if (recorded_hash == current_hash) return;
  if (allow_stale) return;
  fail("stale input: " + what + " changed since this artifact was produced (" + recorded_hash +
       " -> " + current_hash + "); re-run the upstream stage or pass --allow-stale");
}

// ---------------------------------------------------------------------------
// prepare-corpus

struct PrepareCorpusResult {
  int n_sources = 0;
  int n_entries = 0;
  std::string index_path;
};

inline std::vector<synth::RawSource> read_source_manifest_checked(const std::string& path) {
  const auto sources = synth::read_source_manifest(path);
  check(!sources.empty(), "source manifest is empty: " + path);
  for (const auto& s : sources)
    check(fs::exists(s.path), "source file does not exist: " + s.path);
  return sources;
}

/// Normalize, trim, resample to the scene rate and emit the three gain
/// variants of every raw source. Reruns are byte-identical.
inline PrepareCorpusResult cmd_prepare_corpus(const std::string& source_manifest_path,
                                              const std::string& out_dir,
                                              int sample_rate = 44100,
                                              double trim_threshold_db = -60.0) {
  const auto sources = read_source_manifest_checked(source_manifest_path);
  fs::create_directories(fs::path(out_dir) / "wav");

  PrepareCorpusResult result;
  result.n_sources = static_cast<int>(sources.size());
  std::vector<synth::CorpusIndexRow> rows;
  for (const auto& src : sources) {
    const auto raw = audio::read_wav(src.path);
    for (auto& entry : synth::EventCorpus::prepare_source(src, raw, sample_rate,
                                                          trim_threshold_db)) {
      char gain_tag[16];
      std::snprintf(gain_tag, sizeof(gain_tag), "%+03d", static_cast<int>(entry.gain_variant_db));
      const std::string filename =
          entry.event_class + "__" + entry.source_id + "__" + gain_tag + "dB.wav";
      const std::string path = (fs::path(out_dir) / "wav" / filename).string();
      audio::write_wav(path, entry.clip, audio::WavFormat::float32);
      rows.push_back({entry.event_class, entry.source_id, entry.gain_variant_db, path});
      ++result.n_entries;
    }
  }
  result.index_path = (fs::path(out_dir) / "corpus_index.tsv").string();
  synth::write_corpus_index(rows, result.index_path);

  nlohmann::json manifest{{"stage", "prepare-corpus"},
                          {"version", kVersion},
                          {"sample_rate", sample_rate},
                          {"trim_threshold_db", trim_threshold_db},
                          {"inputs", {{"sources", hash_file(source_manifest_path)}}},
                          {"n_sources", result.n_sources},
                          {"n_entries", result.n_entries},
                          {"index", "corpus_index.tsv"}};
  write_json_file(manifest, manifest_path(out_dir));
  return result;
}

// ---------------------------------------------------------------------------
// synthesize

struct DatasetRecording {
  std::string id;
  std::string scene_class;
  std::string location_id;
  std::string wav;         // relative to the dataset dir
  std::string annotation;  // relative
  std::string plan;        // relative
  std::string variant_of;  // empty for base scenes
  double pitch_shift = 0.0;
};

struct DatasetManifest {
  nlohmann::json raw;
  std::string dir;
  std::vector<DatasetRecording> recordings;
  double scene_duration_s = 0.0;

  std::string absolute(const std::string& rel) const { return (fs::path(dir) / rel).string(); }
};

inline DatasetManifest load_dataset(const std::string& dir) {
  DatasetManifest m;
  m.dir = dir;
  m.raw = read_json_file(manifest_path(dir));
  check(m.raw.at("stage") == "synthesize", "not a dataset directory: " + dir);
  m.scene_duration_s = m.raw.at("scene_duration_s").get<double>();
  for (const auto& r : m.raw.at("recordings")) {
    DatasetRecording rec;
    rec.id = r.at("id").get<std::string>();
    rec.scene_class = r.at("scene").get<std::string>();
    rec.location_id = r.at("location").get<std::string>();
    rec.wav = r.at("wav").get<std::string>();
    rec.annotation = r.at("annotation").get<std::string>();
    rec.plan = r.at("plan").get<std::string>();
    rec.variant_of = r.value("variant_of", "");
    rec.pitch_shift = r.value("pitch_shift", 0.0);
    m.recordings.push_back(std::move(rec));
  }
  return m;
}

struct SynthesizeResult {
  int n_base_scenes = 0;
  int n_recordings = 0;
};

/// Render the full dataset: every background location gets
/// `scenes_per_background` planned scenes; each is optionally tripled by the
/// two whole-scene pitch variants. Fully deterministic from the seed.
inline SynthesizeResult cmd_synthesize(const ExperimentConfig& config,
                                       const std::string& out_dir) {
  const auto ontology = synth::load_ontology(config.ontology_path);
  const auto corpus = synth::load_corpus(config.corpus_index_path);
  const auto backgrounds = synth::read_background_manifest(config.backgrounds_path);
  check(!backgrounds.empty(), "background manifest is empty: " + config.backgrounds_path);

  fs::create_directories(fs::path(out_dir) / "audio");
  fs::create_directories(fs::path(out_dir) / "annotations");
  fs::create_directories(fs::path(out_dir) / "plans");

  SynthesizeResult result;
  nlohmann::json recordings = nlohmann::json::array();

  // writes one recording and returns its manifest entry
  const auto emit = [&](const std::string& id, const audio::AudioClip& clip,
                        const synth::AnnotationTrack& ann, const nlohmann::json& plan_json,
                        const synth::BackgroundEntry& bg, const std::string& variant_of,
                        double shift) {
    const std::string wav_rel = "audio/" + id + ".wav";
    const std::string ann_rel = "annotations/" + id + ".txt";
    const std::string plan_rel = "plans/" + id + ".json";
    audio::write_wav((fs::path(out_dir) / wav_rel).string(), clip, audio::WavFormat::float32);
    synth::write_annotation(ann, (fs::path(out_dir) / ann_rel).string());
    write_json_file(plan_json, (fs::path(out_dir) / plan_rel).string());
    nlohmann::json entry{{"id", id},          {"scene", bg.scene_class},
                         {"location", bg.location_id}, {"wav", wav_rel},
                         {"annotation", ann_rel},      {"plan", plan_rel},
                         {"pitch_shift", shift}};
    if (!variant_of.empty()) entry["variant_of"] = variant_of;
    recordings.push_back(entry);
    ++result.n_recordings;
  };

  std::uint64_t scene_index = 0;
  for (const auto& bg : backgrounds) {
    check(ontology.scene_index(bg.scene_class) >= 0,
          "background scene class not in ontology: " + bg.scene_class);
    const auto bg_clip = audio::read_wav(bg.path);
    for (int s = 0; s < config.scenes_per_background; ++s) {
      const std::uint64_t plan_seed = derive_seed(config.seed, scene_index);
      const auto plan = synth::plan_scene(bg.scene_class, bg.location_id, ontology, corpus,
                                          plan_seed, config.synth);
      const auto rendered = synth::render_scene(plan, corpus, bg_clip, config.synth);

      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "_s%03d", s);
      const std::string base_id = bg.location_id + suffix;
      nlohmann::json plan_json = synth::plan_to_json(plan, corpus);
      nlohmann::json realized = nlohmann::json::array();
      for (const auto& r : rendered.realized)
        realized.push_back({{"event_class", r.event_class},
                            {"onset_s", r.onset_s},
                            {"duration_s", r.duration_s},
                            {"gain_db", r.gain_db}});
      plan_json["realized"] = realized;
      emit(base_id, rendered.audio, rendered.annotation, plan_json, bg, "", 0.0);
      ++result.n_base_scenes;

      if (config.pitch_augment) {
        Rng aug_rng(derive_seed(config.seed, 0xA0000000ULL + scene_index));
        const auto variants = synth::augment_scene_pitch(
            rendered.audio, rendered.annotation, aug_rng,
            config.synth.scene_pitch_max_semitones);
        const char* tags[2] = {"_up", "_dn"};
        for (std::size_t v = 0; v < variants.size(); ++v) {
          nlohmann::json vplan{{"variant_of", base_id},
                               {"pitch_shift", variants[v].shift_semitones}};
          emit(base_id + tags[v], variants[v].audio, variants[v].annotation, vplan, bg, base_id,
               variants[v].shift_semitones);
        }
      }
      ++scene_index;
    }
  }

  nlohmann::json manifest{{"stage", "synthesize"},
                          {"version", kVersion},
                          {"seed", config.seed},
                          {"config", config.to_json()},
                          {"config_hash", config.hash()},
                          {"scene_duration_s", config.synth.scene_duration_s},
                          {"sample_rate", config.synth.sample_rate},
                          {"inputs",
                           {{"ontology", hash_file(config.ontology_path)},
                            {"corpus_index", hash_file(config.corpus_index_path)},
                            {"backgrounds", hash_file(config.backgrounds_path)}}},
                          {"n_base_scenes", result.n_base_scenes},
                          {"n_recordings", result.n_recordings},
                          {"recordings", recordings}};
  write_json_file(manifest, manifest_path(out_dir));
  return result;
}

// ---------------------------------------------------------------------------
// make-folds

inline std::vector<features::FoldSplit> cmd_make_folds(const std::string& dataset_dir, int k,
                                                       std::uint64_t seed,
                                                       double validation_fraction,
                                                       const std::string& out_path) {
  const auto dataset = load_dataset(dataset_dir);
  std::vector<features::RecordingMeta> manifest;
  for (const auto& r : dataset.recordings) manifest.push_back({r.id, r.scene_class, r.location_id});
  auto folds = features::make_folds(manifest, k, seed, validation_fraction);

  nlohmann::json j = features::folds_to_json(folds, seed, validation_fraction);
  j["inputs"] = {{"dataset", hash_file(manifest_path(dataset_dir))}};
  write_json_file(j, out_path);
  return folds;
}

// ---------------------------------------------------------------------------
// featurize

struct FeatureStore {
  nlohmann::json raw;
  std::string dir;
  features::FeatureParams params;
  int n_scenes = 0;
  int n_events = 0;

  std::string feature_path(const std::string& id) const {
    return (fs::path(dir) / "features" / (id + ".feat")).string();
  }
  std::string label_path(const std::string& id) const {
    return (fs::path(dir) / "labels" / (id + ".lab")).string();
  }
  std::string stats_path(int fold) const {
    return (fs::path(dir) / ("fold" + std::to_string(fold) + "_stats.json")).string();
  }
};

inline FeatureStore load_feature_store(const std::string& dir) {
  FeatureStore store;
  store.dir = dir;
  store.raw = read_json_file(manifest_path(dir));
  check(store.raw.at("stage") == "featurize", "not a feature directory: " + dir);
  const auto& fp = store.raw.at("feature_params");
  store.params.sample_rate = fp.at("sample_rate").get<int>();
  store.params.n_fft = fp.at("n_fft").get<int>();
  store.params.hop = fp.at("hop").get<int>();
  store.params.n_mels = fp.at("n_mels").get<int>();
  store.params.smooth_window_frames = fp.at("smooth_window_frames").get<int>();
  store.n_scenes = store.raw.at("n_scenes").get<int>();
  store.n_events = store.raw.at("n_events").get<int>();
  return store;
}

/// Extract raw (un-standardized) features and per-frame labels for every
/// recording, then fit one standardizer per fold on that fold's training
/// recordings only. Test recordings never touch the statistics.
inline void cmd_featurize(const std::string& dataset_dir, const std::string& folds_path,
                          const std::string& out_dir, const features::FeatureParams& params,
                          const std::string& ontology_path, bool allow_stale = false) {
  const auto dataset = load_dataset(dataset_dir);
  const auto folds_json = read_json_file(folds_path);
  require_fresh(folds_json.at("inputs").at("dataset").get<std::string>(),
                hash_file(manifest_path(dataset_dir)), "dataset behind " + folds_path,
                allow_stale);
  const auto folds = features::folds_from_json(folds_json);
  const auto ontology = synth::load_ontology(ontology_path);

  fs::create_directories(fs::path(out_dir) / "features");
  fs::create_directories(fs::path(out_dir) / "labels");

  FeatureStore store;
  store.dir = out_dir;
  store.params = params;

  // per-recording extraction is independent; parallel then reduced in order
  std::vector<Eigen::Index> frame_counts(dataset.recordings.size());
  nn::parallel_for_items(dataset.recordings.size(), [&](std::size_t i) {
    const auto& rec = dataset.recordings[i];
    const auto clip = audio::read_wav(dataset.absolute(rec.wav));
    const auto tensor = features::extract_features(clip, params);
    features::write_feature_file(store.feature_path(rec.id), tensor);
    const auto track = synth::read_annotation(dataset.absolute(rec.annotation));
    const auto labels =
        features::labels_from_annotation(track, tensor.frames(), params.frame_hop_s(), ontology);
    features::write_label_file(store.label_path(rec.id), labels);
    frame_counts[i] = tensor.frames();
  });

  for (const auto& fold : folds) {
    std::vector<std::string> train_ids = fold.train;
    std::sort(train_ids.begin(), train_ids.end());  // fixed visitation order
    std::vector<features::FeatureTensor> tensors;
    tensors.reserve(train_ids.size());
    for (const auto& id : train_ids) tensors.push_back(features::read_feature_file(store.feature_path(id)));
    std::vector<const features::FeatureTensor*> ptrs;
    for (const auto& t : tensors) ptrs.push_back(&t);
    const auto stats = features::fit_standardizer(ptrs);
    write_json_file(stats.to_json(), store.stats_path(fold.fold_id));
  }

  nlohmann::json ids = nlohmann::json::array();
  for (std::size_t i = 0; i < dataset.recordings.size(); ++i)
    ids.push_back({{"id", dataset.recordings[i].id},
                   {"frames", frame_counts[i]},
                   {"scene", dataset.recordings[i].scene_class}});
  nlohmann::json manifest{
      {"stage", "featurize"},
      {"version", kVersion},
      {"feature_params",
       {{"sample_rate", params.sample_rate},
        {"n_fft", params.n_fft},
        {"hop", params.hop},
        {"n_mels", params.n_mels},
        {"smooth_window_frames", params.smooth_window_frames}}},
      {"n_scenes", static_cast<int>(ontology.scene_classes.size())},
      {"n_events", static_cast<int>(ontology.event_classes.size())},
      {"inputs",
       {{"dataset", hash_file(manifest_path(dataset_dir))}, {"folds", hash_file(folds_path)}}},
      {"recordings", ids}};
  write_json_file(manifest, manifest_path(out_dir));
}

}  // namespace soundscene::pipeline
