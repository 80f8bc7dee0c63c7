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

#include <string>

#include <json.hpp>

#include "soundscene/features/extract.hpp"
#include "soundscene/nn/network.hpp"
#include "soundscene/nn/train.hpp"
#include "soundscene/pipeline/hash.hpp"
#include "soundscene/synth/plan.hpp"

namespace soundscene::pipeline {

/// Everything one experiment run needs, serializable for the run manifest.
/// Defaults are the paper-scale values; desk_scale() switches the small
/// configuration used in tests and CI.
struct ExperimentConfig {
  std::uint64_t seed = 0;

  // input artifacts
  std::string ontology_path;
  std::string corpus_index_path;
  std::string backgrounds_path;

  // synthesis
  synth::SynthParams synth;
  int scenes_per_background = 10;
  bool pitch_augment = true;

  // folds
  int k_folds = 5;
  double validation_fraction = 0.125;

  // features
  features::FeatureParams feature_params;

  // network widths (the block structure itself is fixed: 3x3/3x3/2x2 kernels
  // with 3x3/3x3/2x2 pools, batch norm on blocks 1 and 3)
  int conv_filters1 = 64;
  int conv_filters2 = 128;
  int conv_filters3 = 256;
  int lstm_units = 256;
  int dense_units = 256;
  double dropout_conv = 0.25;
  double dropout_hidden = 0.5;
  int pool_time_stride = 1;
  double bn_momentum = 0.9;

  // training
  int epochs = 100;
  int batch_size = 8;
  double learning_rate = 1e-3;
  int patience = 10;

  // evaluation
  double threshold = 0.9;

  nn::NetworkConfig network_config(int bands, int outputs) const {
    nn::NetworkConfig cfg;
    cfg.input_bands = bands;
    cfg.input_channels = 2;
    cfg.blocks = {{conv_filters1, 3, 3, true, dropout_conv},
                  {conv_filters2, 3, 3, false, dropout_conv},
                  {conv_filters3, 2, 2, true, dropout_conv}};
    cfg.pool_time_stride = pool_time_stride;
    cfg.lstm_units = lstm_units;
    cfg.dense_units = dense_units;
    cfg.dropout_hidden = dropout_hidden;
    cfg.output_units = outputs;
    cfg.bn_momentum = bn_momentum;
    return cfg;
  }

  nn::TrainOptions train_options() const {
    nn::TrainOptions o;
    o.max_epochs = epochs;
    o.batch_size = batch_size;
    o.learning_rate = learning_rate;
    o.patience = patience;
    o.seed = seed;
    return o;
  }

  /// The small configuration for CI: 5 s scenes, 32 mel bands, reduced
  /// network widths.
  static ExperimentConfig desk_scale() {
    ExperimentConfig cfg;
    cfg.synth.scene_duration_s = 5.0;
    cfg.scenes_per_background = 4;
    cfg.k_folds = 3;
    cfg.feature_params.n_mels = 32;
    cfg.conv_filters1 = 16;
    cfg.conv_filters2 = 32;
    cfg.conv_filters3 = 64;
    cfg.lstm_units = 64;
    cfg.dense_units = 64;
    cfg.epochs = 30;
    return cfg;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{
        {"seed", seed},
        {"ontology", ontology_path},
        {"corpus_index", corpus_index_path},
        {"backgrounds", backgrounds_path},
        {"synth",
         {{"scene_duration_s", synth.scene_duration_s},
          {"sample_rate", synth.sample_rate},
          {"event_pitch_range_semitones", synth.event_pitch_range_semitones},
          {"stretch_min", synth.stretch_min},
          {"stretch_max", synth.stretch_max},
          {"snr_min_db", synth.snr_min_db},
          {"snr_max_db", synth.snr_max_db},
          {"polyphony_max", synth.polyphony_max},
          {"onset_retries", synth.onset_retries},
          {"onset_mean_s", synth.onset_mean_s},
          {"onset_std_s", synth.onset_std_s},
          {"background_attenuation_db", synth.background_attenuation_db},
          {"scene_pitch_max_semitones", synth.scene_pitch_max_semitones},
          {"scenes_per_background", scenes_per_background},
          {"pitch_augment", pitch_augment}}},
        {"folds", {{"k", k_folds}, {"validation_fraction", validation_fraction}}},
        {"features",
         {{"sample_rate", feature_params.sample_rate},
          {"n_fft", feature_params.n_fft},
          {"hop", feature_params.hop},
          {"n_mels", feature_params.n_mels},
          {"smooth_window_frames", feature_params.smooth_window_frames}}},
        {"network",
         {{"conv_filters1", conv_filters1},
          {"conv_filters2", conv_filters2},
          {"conv_filters3", conv_filters3},
          {"lstm_units", lstm_units},
          {"dense_units", dense_units},
          {"dropout_conv", dropout_conv},
          {"dropout_hidden", dropout_hidden},
          {"pool_time_stride", pool_time_stride},
          {"bn_momentum", bn_momentum}}},
        {"training",
         {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"patience", patience}}},
        {"evaluation", {{"threshold", threshold}}}};
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.ontology_path = j.at("ontology").get<std::string>();
    cfg.corpus_index_path = j.at("corpus_index").get<std::string>();
    cfg.backgrounds_path = j.at("backgrounds").get<std::string>();
    const auto& s = j.at("synth");
    cfg.synth.scene_duration_s = s.at("scene_duration_s").get<double>();
    cfg.synth.sample_rate = s.at("sample_rate").get<int>();
    cfg.synth.event_pitch_range_semitones = s.at("event_pitch_range_semitones").get<double>();
    cfg.synth.stretch_min = s.at("stretch_min").get<double>();
    cfg.synth.stretch_max = s.at("stretch_max").get<double>();
    cfg.synth.snr_min_db = s.at("snr_min_db").get<double>();
    cfg.synth.snr_max_db = s.at("snr_max_db").get<double>();
    cfg.synth.polyphony_max = s.at("polyphony_max").get<int>();
    cfg.synth.onset_retries = s.at("onset_retries").get<int>();
    cfg.synth.onset_mean_s = s.at("onset_mean_s").get<double>();
    cfg.synth.onset_std_s = s.at("onset_std_s").get<double>();
    cfg.synth.background_attenuation_db = s.at("background_attenuation_db").get<double>();
    cfg.synth.scene_pitch_max_semitones = s.at("scene_pitch_max_semitones").get<double>();
    cfg.scenes_per_background = s.at("scenes_per_background").get<int>();
    cfg.pitch_augment = s.at("pitch_augment").get<bool>();
    cfg.k_folds = j.at("folds").at("k").get<int>();
    cfg.validation_fraction = j.at("folds").at("validation_fraction").get<double>();
    const auto& f = j.at("features");
    cfg.feature_params.sample_rate = f.at("sample_rate").get<int>();
    cfg.feature_params.n_fft = f.at("n_fft").get<int>();
    cfg.feature_params.hop = f.at("hop").get<int>();
    cfg.feature_params.n_mels = f.at("n_mels").get<int>();
    cfg.feature_params.smooth_window_frames = f.at("smooth_window_frames").get<int>();
    const auto& n = j.at("network");
    cfg.conv_filters1 = n.at("conv_filters1").get<int>();
    cfg.conv_filters2 = n.at("conv_filters2").get<int>();
    cfg.conv_filters3 = n.at("conv_filters3").get<int>();
    cfg.lstm_units = n.at("lstm_units").get<int>();
    cfg.dense_units = n.at("dense_units").get<int>();
    cfg.dropout_conv = n.at("dropout_conv").get<double>();
    cfg.dropout_hidden = n.at("dropout_hidden").get<double>();
    cfg.pool_time_stride = n.at("pool_time_stride").get<int>();
    cfg.bn_momentum = n.at("bn_momentum").get<double>();
    const auto& t = j.at("training");
    cfg.epochs = t.at("epochs").get<int>();
    cfg.batch_size = t.at("batch_size").get<int>();
    cfg.learning_rate = t.at("learning_rate").get<double>();
    cfg.patience = t.at("patience").get<int>();
    cfg.threshold = j.at("evaluation").at("threshold").get<double>();
    return cfg;
  }

  std::string hash() const { return hash_json(to_json()); }
};

namespace detail_cfg {

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail("config: expected a boolean, got '" + v + "'");
}

}  // namespace detail_cfg

/// Apply one config key. Keys are the CLI flag names without the leading
/// dashes, so a config file line and a flag always spell the same thing.
inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  try {
    if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "ontology") cfg.ontology_path = value;
    else if (key == "corpus-index") cfg.corpus_index_path = value;
    else if (key == "backgrounds") cfg.backgrounds_path = value;
    else if (key == "scene-duration") cfg.synth.scene_duration_s = std::stod(value);
    else if (key == "synth-sample-rate") cfg.synth.sample_rate = std::stoi(value);
    else if (key == "pitch-range") cfg.synth.event_pitch_range_semitones = std::stod(value);
    else if (key == "stretch-min") cfg.synth.stretch_min = std::stod(value);
    else if (key == "stretch-max") cfg.synth.stretch_max = std::stod(value);
    else if (key == "snr-min") cfg.synth.snr_min_db = std::stod(value);
    else if (key == "snr-max") cfg.synth.snr_max_db = std::stod(value);
    else if (key == "polyphony") cfg.synth.polyphony_max = std::stoi(value);
    else if (key == "onset-retries") cfg.synth.onset_retries = std::stoi(value);
    else if (key == "onset-mean") cfg.synth.onset_mean_s = std::stod(value);
    else if (key == "onset-std") cfg.synth.onset_std_s = std::stod(value);
    else if (key == "background-attenuation")
      cfg.synth.background_attenuation_db = std::stod(value);
    else if (key == "scene-pitch-max") cfg.synth.scene_pitch_max_semitones = std::stod(value);
    else if (key == "scenes-per-background") cfg.scenes_per_background = std::stoi(value);
    else if (key == "pitch-augment") cfg.pitch_augment = detail_cfg::parse_bool(value);
    else if (key == "k-folds") cfg.k_folds = std::stoi(value);
    else if (key == "validation-fraction") cfg.validation_fraction = std::stod(value);
    else if (key == "feature-sample-rate") cfg.feature_params.sample_rate = std::stoi(value);
    else if (key == "n-fft") cfg.feature_params.n_fft = std::stoi(value);
    else if (key == "hop") cfg.feature_params.hop = std::stoi(value);
    else if (key == "n-mels") cfg.feature_params.n_mels = std::stoi(value);
    else if (key == "smooth-window") cfg.feature_params.smooth_window_frames = std::stoi(value);
    else if (key == "conv-filters1") cfg.conv_filters1 = std::stoi(value);
    else if (key == "conv-filters2") cfg.conv_filters2 = std::stoi(value);
    else if (key == "conv-filters3") cfg.conv_filters3 = std::stoi(value);
    else if (key == "lstm-units") cfg.lstm_units = std::stoi(value);
    else if (key == "dense-units") cfg.dense_units = std::stoi(value);
    else if (key == "dropout-conv") cfg.dropout_conv = std::stod(value);
    else if (key == "dropout-hidden") cfg.dropout_hidden = std::stod(value);
    else if (key == "pool-time-stride") cfg.pool_time_stride = std::stoi(value);
    else if (key == "bn-momentum") cfg.bn_momentum = std::stod(value);
    else if (key == "epochs") cfg.epochs = std::stoi(value);
    else if (key == "batch-size") cfg.batch_size = std::stoi(value);
    else if (key == "learning-rate") cfg.learning_rate = std::stod(value);
    else if (key == "patience") cfg.patience = std::stoi(value);
    else if (key == "threshold") cfg.threshold = std::stod(value);
    else fail("config: unknown key '" + key + "'");
  } catch (const std::invalid_argument&) {
    fail("config: bad value '" + value + "' for key '" + key + "'");
  } catch (const std::out_of_range&) {
    fail("config: value out of range '" + value + "' for key '" + key + "'");
  }
}

/// Load `key = value` lines into a config. '#' starts a comment; blank lines
/// and decorative [section] headers are ignored (keys are globally unique).
inline void load_experiment_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream file(path);
  check(file.good(), "cannot open config: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;
    const auto eq = line.find('=');
    check(eq != std::string::npos,
          "config parse error at line " + std::to_string(line_no) + " of " + path +
              ": expected key = value");
    apply_config_key(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
}

}  // namespace soundscene::pipeline
