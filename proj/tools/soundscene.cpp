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

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "soundscene/pipeline/experiment.hpp"
#include "soundscene/pipeline/stages.hpp"
#include "soundscene/synth/procgen.hpp"

namespace {

using namespace soundscene;

/// Apply any `--config FILE` appearing in argv to cfg before the flag parse,
/// so explicit flags override file values regardless of position.
void preload_config_file(int argc, char** argv, pipeline::ExperimentConfig& cfg) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      pipeline::load_experiment_config_file(cfg, argv[i + 1]);
    } else if (arg.rfind("--config=", 0) == 0) {
      pipeline::load_experiment_config_file(cfg, arg.substr(9));
    }
  }
}

void add_experiment_options(CLI::App* cmd, pipeline::ExperimentConfig& cfg) {
  std::string ignored;
  cmd->add_option("--config", ignored,
                  "experiment config file (key = value lines; flags override)");
  cmd->add_option("--seed", cfg.seed, "master random seed");
  cmd->add_option("--ontology", cfg.ontology_path, "ontology config file");
  cmd->add_option("--corpus-index", cfg.corpus_index_path, "prepared corpus index TSV");
  cmd->add_option("--backgrounds", cfg.backgrounds_path, "background manifest TSV");

  cmd->add_option("--scene-duration", cfg.synth.scene_duration_s, "scene length, seconds");
  cmd->add_option("--synth-sample-rate", cfg.synth.sample_rate, "synthesis sample rate");
  cmd->add_option("--pitch-range", cfg.synth.event_pitch_range_semitones,
                  "per-event pitch shift bound, semitones");
  cmd->add_option("--stretch-min", cfg.synth.stretch_min, "stretch ratio lower bound");
  cmd->add_option("--stretch-max", cfg.synth.stretch_max, "stretch ratio upper bound");
  cmd->add_option("--snr-min", cfg.synth.snr_min_db, "event SNR lower bound, dB");
  cmd->add_option("--snr-max", cfg.synth.snr_max_db, "event SNR upper bound, dB");
  cmd->add_option("--polyphony", cfg.synth.polyphony_max, "max concurrent events");
  cmd->add_option("--onset-retries", cfg.synth.onset_retries,
                  "onset re-draws before dropping an event");
  cmd->add_option("--onset-mean", cfg.synth.onset_mean_s,
                  "onset distribution mean, seconds (negative: duration/2)");
  cmd->add_option("--onset-std", cfg.synth.onset_std_s,
                  "onset distribution std, seconds (negative: duration/6)");
  cmd->add_option("--background-attenuation", cfg.synth.background_attenuation_db,
                  "background gain before mixing, dB");
  cmd->add_option("--scene-pitch-max", cfg.synth.scene_pitch_max_semitones,
                  "whole-scene pitch augmentation bound, semitones");
  cmd->add_option("--scenes-per-background", cfg.scenes_per_background,
                  "scenes synthesized per background recording");
  cmd->add_flag("--pitch-augment,!--no-pitch-augment", cfg.pitch_augment,
                "emit the two whole-scene pitch variants per base scene");

  cmd->add_option("--k-folds", cfg.k_folds, "number of folds");
  cmd->add_option("--validation-fraction", cfg.validation_fraction,
                  "fraction of non-test recordings held out for validation");

  cmd->add_option("--feature-sample-rate", cfg.feature_params.sample_rate,
                  "feature-stage sample rate");
  cmd->add_option("--n-fft", cfg.feature_params.n_fft, "STFT size");
  cmd->add_option("--hop", cfg.feature_params.hop, "STFT hop length");
  cmd->add_option("--n-mels", cfg.feature_params.n_mels, "mel bands");
  cmd->add_option("--smooth-window", cfg.feature_params.smooth_window_frames,
                  "temporal smoothing window, frames (odd)");

  cmd->add_option("--conv-filters1", cfg.conv_filters1, "conv block 1 filters");
  cmd->add_option("--conv-filters2", cfg.conv_filters2, "conv block 2 filters");
  cmd->add_option("--conv-filters3", cfg.conv_filters3, "conv block 3 filters");
  cmd->add_option("--lstm-units", cfg.lstm_units, "LSTM units");
  cmd->add_option("--dense-units", cfg.dense_units, "dense layer units");
  cmd->add_option("--dropout-conv", cfg.dropout_conv, "conv dropout probability");
  cmd->add_option("--dropout-hidden", cfg.dropout_hidden, "hidden dropout probability");
  cmd->add_option("--pool-time-stride", cfg.pool_time_stride,
                  "1: frequency-only pooling (default); 2: pool time too, upsample outputs");
  cmd->add_option("--bn-momentum", cfg.bn_momentum, "batch-norm running-stat momentum");

  cmd->add_option("--epochs", cfg.epochs, "max training epochs");
  cmd->add_option("--batch-size", cfg.batch_size, "recordings per minibatch");
  cmd->add_option("--learning-rate", cfg.learning_rate, "Adam learning rate");
  cmd->add_option("--patience", cfg.patience,
                  "epochs without validation improvement before stopping");

  cmd->add_option("--threshold", cfg.threshold, "binarization threshold");
}

int run(int argc, char** argv) {
  pipeline::ExperimentConfig file_defaults;
  CLI::App app{"soundscene: synthesize annotated soundscapes, extract log-mel features, train a "
               "joint scene+event CRNN and evaluate it"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand(
      "gen-corpus", "generate the procedural test corpus (backgrounds, events, ontology)");
  synth::ProcCorpusParams gen_params;
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_params.seed, "random seed");
  gen->add_option("--scenes", gen_params.n_scenes, "scene classes");
  gen->add_option("--events", gen_params.n_events, "event classes");
  gen->add_option("--locations", gen_params.locations_per_scene, "locations per scene class");
  gen->add_option("--sources", gen_params.sources_per_event, "source recordings per event class");
  gen->add_option("--background-duration", gen_params.background_duration_s,
                  "background recording length, seconds");
  gen->add_option("--event-min-duration", gen_params.event_min_duration_s,
                  "event length lower bound, seconds");
  gen->add_option("--event-max-duration", gen_params.event_max_duration_s,
                  "event length upper bound, seconds");
  gen->add_option("--sample-rate", gen_params.sample_rate, "sample rate");

  // prepare-corpus
  auto* prep = app.add_subcommand("prepare-corpus",
                                  "normalize, trim, resample and gain-triple event sources");
  std::string prep_sources, prep_out;
  int prep_rate = 44100;
  double prep_trim = -60.0;
  prep->add_option("--sources", prep_sources, "raw source manifest TSV")->required();
  prep->add_option("--out", prep_out, "output corpus directory")->required();
  prep->add_option("--sample-rate", prep_rate, "target sample rate");
  prep->add_option("--trim-threshold", prep_trim, "leading-silence threshold, dB below peak");

  // synthesize
  auto* synth_cmd = app.add_subcommand("synthesize", "plan and render the annotated dataset");
  preload_config_file(argc, argv, file_defaults);
  pipeline::ExperimentConfig& synth_cfg = file_defaults;
  std::string synth_out;
  synth_cmd->add_option("--out", synth_out, "output dataset directory")->required();
  add_experiment_options(synth_cmd, synth_cfg);

  // make-folds
  auto* folds_cmd =
      app.add_subcommand("make-folds", "stratified grouped cross-validation splits");
  std::string folds_dataset, folds_out;
  int folds_k = 5;
  std::uint64_t folds_seed = 0;
  double folds_vfrac = 0.125;
  folds_cmd->add_option("--dataset", folds_dataset, "dataset directory")->required();
  folds_cmd->add_option("--out", folds_out, "output folds JSON")->required();
  folds_cmd->add_option("--k", folds_k, "number of folds");
  folds_cmd->add_option("--seed", folds_seed, "split seed");
  folds_cmd->add_option("--validation-fraction", folds_vfrac,
                        "fraction of non-test recordings used for validation");

  // featurize
  auto* feat = app.add_subcommand("featurize",
                                  "extract two-channel log-mel features, labels and fold stats");
  std::string feat_dataset, feat_folds, feat_out, feat_ontology;
  features::FeatureParams feat_params;
  bool feat_stale = false;
  feat->add_option("--dataset", feat_dataset, "dataset directory")->required();
  feat->add_option("--folds", feat_folds, "folds JSON")->required();
  feat->add_option("--out", feat_out, "output feature directory")->required();
  feat->add_option("--ontology", feat_ontology, "ontology config file")->required();
  feat->add_option("--sample-rate", feat_params.sample_rate, "feature-stage sample rate");
  feat->add_option("--n-fft", feat_params.n_fft, "STFT size");
  feat->add_option("--hop", feat_params.hop, "STFT hop");
  feat->add_option("--n-mels", feat_params.n_mels, "mel bands");
  feat->add_option("--smooth-window", feat_params.smooth_window_frames,
                   "smoothing window, frames");
  feat->add_flag("--allow-stale", feat_stale, "accept upstream hash mismatches");

  // train
  auto* train_cmd = app.add_subcommand("train", "train one task on one fold");
  pipeline::ExperimentConfig& train_cfg = file_defaults;
  std::string train_features, train_folds, train_out, train_task = "joint";
  int train_fold = 0;
  bool train_stale = false;
  train_cmd->add_option("--features", train_features, "feature directory")->required();
  train_cmd->add_option("--folds", train_folds, "folds JSON")->required();
  train_cmd->add_option("--fold", train_fold, "fold index")->required();
  train_cmd->add_option("--task", train_task, "joint, asc or sed");
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_cmd->add_flag("--allow-stale", train_stale, "accept upstream hash mismatches");
  add_experiment_options(train_cmd, train_cfg);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on a fold's test set");
  std::string eval_ckpt, eval_features, eval_dataset, eval_folds, eval_out, eval_task = "joint";
  int eval_fold = 0;
  double eval_threshold = 0.9;
  bool eval_stale = false, eval_no_dump = false;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--features", eval_features, "feature directory")->required();
  eval_cmd->add_option("--dataset", eval_dataset, "dataset directory")->required();
  eval_cmd->add_option("--folds", eval_folds, "folds JSON")->required();
  eval_cmd->add_option("--fold", eval_fold, "fold index")->required();
  eval_cmd->add_option("--task", eval_task, "joint, asc or sed");
  eval_cmd->add_option("--out", eval_out, "output directory")->required();
  eval_cmd->add_option("--threshold", eval_threshold, "binarization threshold");
  eval_cmd->add_flag("--allow-stale", eval_stale, "accept upstream hash mismatches");
  eval_cmd->add_flag("--no-dump-predictions", eval_no_dump,
                     "skip per-recording prediction dumps");

  // compare
  auto* cmp = app.add_subcommand(
      "compare", "train and evaluate asc, sed and joint models across all folds");
  pipeline::ExperimentConfig& cmp_cfg = file_defaults;
  std::string cmp_dataset, cmp_features, cmp_folds, cmp_out;
  cmp->add_option("--dataset", cmp_dataset, "dataset directory")->required();
  cmp->add_option("--features", cmp_features, "feature directory")->required();
  cmp->add_option("--folds", cmp_folds, "folds JSON")->required();
  cmp->add_option("--out", cmp_out, "output directory")->required();
  add_experiment_options(cmp, cmp_cfg);

  // gradient-check
  auto* gc = app.add_subcommand("gradient-check",
                                "verify analytic gradients against finite differences");
  int gc_seeds = 20;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  std::string gc_out;
  gc->add_option("--seeds", gc_seeds, "number of random seeds");
  gc->add_option("--epsilon", gc_eps, "finite-difference step");
  gc->add_option("--tolerance", gc_tol, "max allowed relative error");
  gc->add_option("--out", gc_out, "report JSON path");

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    const auto out = synth::generate_procedural_corpus(gen_params, gen_out);
    std::printf("wrote %zu backgrounds, %zu event sources, ontology %s\n",
                out.backgrounds.size(), out.sources.size(), out.ontology_path.c_str());
  } else if (*prep) {
    const auto result = pipeline::cmd_prepare_corpus(prep_sources, prep_out, prep_rate, prep_trim);
    std::printf("prepared %d sources into %d corpus entries (%s)\n", result.n_sources,
                result.n_entries, result.index_path.c_str());
  } else if (*synth_cmd) {
    const auto result = pipeline::cmd_synthesize(synth_cfg, synth_out);
    std::printf("synthesized %d base scenes, %d recordings total\n", result.n_base_scenes,
                result.n_recordings);
  } else if (*folds_cmd) {
    const auto folds = pipeline::cmd_make_folds(folds_dataset, folds_k, folds_seed, folds_vfrac,
                                                folds_out);
    for (const auto& f : folds)
      std::printf("fold %d: %zu train, %zu validation, %zu test\n", f.fold_id, f.train.size(),
                  f.validation.size(), f.test.size());
  } else if (*feat) {
    pipeline::cmd_featurize(feat_dataset, feat_folds, feat_out, feat_params, feat_ontology,
                            feat_stale);
    std::printf("features written to %s\n", feat_out.c_str());
  } else if (*train_cmd) {
    const auto result = pipeline::cmd_train(train_cfg, train_features, train_folds, train_fold,
                                            nn::task_from_name(train_task), train_out,
                                            train_stale);
    std::printf("trained %s fold %d: best val loss %.6f at epoch %d (converged in %d epochs)\n",
                train_task.c_str(), train_fold, result.stats.best_val_loss,
                result.stats.best_epoch, result.stats.epochs_to_converge);
    std::printf("checkpoint: %s\n", result.checkpoint_path.c_str());
  } else if (*eval_cmd) {
    const auto outcome = pipeline::cmd_evaluate(eval_ckpt, eval_features, eval_dataset, eval_folds,
                                                eval_fold, nn::task_from_name(eval_task),
                                                eval_threshold, eval_out, eval_stale,
                                                !eval_no_dump);
    if (outcome.asc_accuracy) std::printf("asc accuracy: %.4f\n", *outcome.asc_accuracy);
    if (outcome.sed)
      std::printf("sed f1: %.2f%%  er: %.4f\n", 100.0 * outcome.sed->f1, outcome.sed->er);
  } else if (*cmp) {
    const auto result = pipeline::cmd_compare(cmp_cfg, cmp_dataset, cmp_features, cmp_folds,
                                              cmp_out);
    std::ifstream table(result.table_path);
    std::cout << table.rdbuf();
  } else if (*gc) {
    nlohmann::json reports = nlohmann::json::array();
    double worst = 0.0;
    bool all_passed = true;
    for (int s = 0; s < gc_seeds; ++s) {
      const auto report = nn::run_reduced_gradient_check(static_cast<std::uint64_t>(s) + 1,
                                                         gc_eps, gc_tol);
      worst = std::max(worst, report.max_rel_error);
      all_passed = all_passed && report.passed;
      reports.push_back(report.to_json());
    }
    std::printf("composed network gradient check: %d seeds, max relative error %.3g (%s)\n",
                gc_seeds, worst, all_passed ? "pass" : "FAIL");
    if (!gc_out.empty())
      pipeline::write_json_file(
          {{"seeds", gc_seeds}, {"max_rel_error", worst}, {"passed", all_passed},
           {"reports", reports}},
          gc_out);
    if (!all_passed) return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
}
