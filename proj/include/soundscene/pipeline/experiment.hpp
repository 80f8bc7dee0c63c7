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

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "soundscene/eval/metrics.hpp"
#include "soundscene/nn/checkpoint.hpp"
#include "soundscene/nn/gradcheck.hpp"
#include "soundscene/nn/train.hpp"
#include "soundscene/pipeline/stages.hpp"

namespace soundscene::pipeline {

// ---------------------------------------------------------------------------
// train

/// Load + standardize one fold's examples for a task.
inline std::vector<nn::Example<float>> load_examples(const FeatureStore& store,
                                                     const std::vector<std::string>& ids,
                                                     int fold, nn::Task task) {
  const auto stats = features::Standardizer::from_json(read_json_file(store.stats_path(fold)));
  std::vector<nn::Example<float>> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto tensor = features::apply_standardizer(
        features::read_feature_file(store.feature_path(id)), stats);
    const auto labels = features::read_label_file(store.label_path(id));
    check(labels.frames() == tensor.frames(), "feature/label frame mismatch for " + id);
    nn::Example<float> e;
    e.id = id;
    e.frames = tensor.frames();
    e.input = nn::feature_input<float>(tensor);
    e.target = nn::label_target<float>(labels, task);
    out.push_back(std::move(e));
  }
  return out;
}

struct TrainStageResult {
  std::string checkpoint_path;
  std::string history_path;
  nn::TrainResult stats;
};

/// Train one task on one fold and write the best-validation checkpoint plus
/// the per-epoch history CSV.
inline TrainStageResult cmd_train(const ExperimentConfig& config, const std::string& features_dir,
                                  const std::string& folds_path, int fold, nn::Task task,
                                  const std::string& out_dir, bool allow_stale = false) {
  const auto store = load_feature_store(features_dir);
  require_fresh(store.raw.at("inputs").at("folds").get<std::string>(), hash_file(folds_path),
                "folds file behind " + features_dir, allow_stale);
  const auto folds = features::folds_from_json(read_json_file(folds_path));
  check(fold >= 0 && fold < static_cast<int>(folds.size()), "fold index out of range");
  const auto& split = folds[static_cast<std::size_t>(fold)];

  const auto train_set = load_examples(store, split.train, fold, task);
  const auto val_set = load_examples(store, split.validation, fold, task);
  check(!train_set.empty(), "fold has no training recordings");

  const int outputs = nn::task_output_units(task, store.n_scenes, store.n_events);
  auto net_config = config.network_config(store.params.n_mels, outputs);
  nn::Crnn<float> net(net_config, derive_seed(config.seed, 0xE0000000ULL + static_cast<std::uint64_t>(fold)));

  auto options = config.train_options();
  options.seed = derive_seed(config.seed, 0xF0000000ULL + static_cast<std::uint64_t>(fold) * 16 +
                                              static_cast<std::uint64_t>(task));
  const auto stats = nn::train_network(net, train_set, val_set.empty() ? train_set : val_set,
                                       options);

  fs::create_directories(out_dir);
  TrainStageResult result;
  result.stats = stats;
  const std::string tag = std::string(nn::task_name(task)) + "_fold" + std::to_string(fold);
  result.checkpoint_path = (fs::path(out_dir) / ("checkpoint_" + tag + ".bin")).string();
  result.history_path = (fs::path(out_dir) / ("history_" + tag + ".csv")).string();

  nlohmann::json extra{{"task", nn::task_name(task)},
                       {"fold", fold},
                       {"seed", config.seed},
                       {"config_hash", config.hash()},
                       {"best_epoch", stats.best_epoch},
                       {"best_val_loss", stats.best_val_loss},
                       {"epochs_to_converge", stats.epochs_to_converge},
                       {"early_stopped", stats.early_stopped},
                       {"inputs",
                        {{"features", hash_file(manifest_path(features_dir))},
                         {"folds", hash_file(folds_path)}}}};
  nn::save_checkpoint(net, result.checkpoint_path, extra);

  std::ofstream csv(result.history_path);
  check(csv.good(), "cannot open for writing: " + result.history_path);
  csv << "epoch,train_loss,val_loss,wall_s\n";
  char line[128];
  for (const auto& e : stats.history) {
    std::snprintf(line, sizeof(line), "%d,%.8f,%.8f,%.3f\n", e.epoch, e.train_loss, e.val_loss,
                  e.wall_s);
    csv << line;
  }
  return result;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvalOutcome {
  nn::Task task = nn::Task::joint;
  int fold = 0;
  int n_test = 0;
  std::optional<double> asc_accuracy;
  std::optional<eval::SegmentMetrics> sed;
  nlohmann::json per_class = nlohmann::json::object();
  nlohmann::json report;
};

/// Score one checkpoint on one fold's test set. The joint task scores both
/// metrics from the same forward pass per recording.
inline EvalOutcome cmd_evaluate(const std::string& checkpoint_path,
                                const std::string& features_dir, const std::string& dataset_dir,
                                const std::string& folds_path, int fold, nn::Task task,
                                double threshold, const std::string& out_dir,
                                bool allow_stale = false, bool dump_predictions = true) {
  const auto store = load_feature_store(features_dir);
  const auto dataset = load_dataset(dataset_dir);
  const auto header = nn::read_checkpoint_header(checkpoint_path);
  require_fresh(header.at("inputs").at("features").get<std::string>(),
                hash_file(manifest_path(features_dir)), "features behind " + checkpoint_path,
                allow_stale);
  check(header.at("task").get<std::string>() == nn::task_name(task),
        "checkpoint was trained for task '" + header.at("task").get<std::string>() + "'");

  const auto folds = features::folds_from_json(read_json_file(folds_path));
  check(fold >= 0 && fold < static_cast<int>(folds.size()), "fold index out of range");
  const auto& split = folds[static_cast<std::size_t>(fold)];
  check(!split.test.empty(), "fold has no test recordings");

  const auto ontology =
      synth::load_ontology(dataset.raw.at("config").at("ontology").get<std::string>());
  const int n_scenes = store.n_scenes;
  const int n_events = store.n_events;
  const int outputs = nn::task_output_units(task, n_scenes, n_events);
  nn::Crnn<float> net(nn::NetworkConfig::from_json(header.at("network")), 0);
  check(net.config().output_units == outputs, "checkpoint output width mismatch");
  nn::load_checkpoint(net, checkpoint_path);

  std::map<std::string, const DatasetRecording*> by_id;
  for (const auto& r : dataset.recordings) by_id[r.id] = &r;

  const auto examples = load_examples(store, split.test, fold, task);
  if (dump_predictions) fs::create_directories(fs::path(out_dir) / "predictions");

  int correct_scenes = 0;
  eval::SegmentCounts sed_totals;
  std::vector<eval::SegmentCounts> per_class_totals(static_cast<std::size_t>(n_events));

  for (const auto& example : examples) {
    const auto it = by_id.find(example.id);
    check(it != by_id.end(), "test id missing from dataset manifest: " + example.id);
    const auto& rec = *it->second;

    nn::Batch<float> input{example.input};
    const auto pred_batch = net.forward(input, example.frames, nn::Mode::eval);
    Eigen::MatrixXd pred = pred_batch[0].cast<double>();
    const auto binary = eval::binarize(pred, threshold);

    synth::AnnotationTrack predicted_track;
    predicted_track.duration_s = dataset.scene_duration_s;

    if (task != nn::Task::sed) {
      const Eigen::MatrixXd raw_scene = pred.leftCols(n_scenes);
      features::BinaryMatrix bin_scene(binary.rows(), n_scenes);
      for (Eigen::Index r = 0; r < binary.rows(); ++r)
        for (int c = 0; c < n_scenes; ++c) bin_scene(r, c) = binary(r, c);
      const int vote = eval::asc_majority_vote(bin_scene, raw_scene);
      predicted_track.scene_label = ontology.scene_classes[static_cast<std::size_t>(vote)];
      if (ontology.scene_classes[static_cast<std::size_t>(vote)] == rec.scene_class)
        ++correct_scenes;
    } else {
      predicted_track.scene_label = "unscored";
    }

    if (task != nn::Task::asc) {
      const int col0 = task == nn::Task::joint ? n_scenes : 0;
      features::BinaryMatrix bin_events(binary.rows(), n_events);
      for (Eigen::Index r = 0; r < binary.rows(); ++r)
        for (int c = 0; c < n_events; ++c) bin_events(r, c) = binary(r, col0 + c);
      const auto predicted_events =
          eval::events_from_frames(bin_events, store.params.frame_hop_s());
      const auto track = synth::read_annotation(dataset.absolute(rec.annotation));
      const auto reference_events = eval::events_from_annotation(track, ontology);

      sed_totals += eval::segment_counts(reference_events, predicted_events, n_events,
                                         dataset.scene_duration_s);
      for (int c = 0; c < n_events; ++c) {
        std::vector<eval::Event> ref_c, pred_c;
        for (const auto& e : reference_events)
          if (e.class_index == c) ref_c.push_back({e.onset_s, e.offset_s, 0});
        for (const auto& e : predicted_events)
          if (e.class_index == c) pred_c.push_back({e.onset_s, e.offset_s, 0});
        per_class_totals[static_cast<std::size_t>(c)] +=
            eval::segment_counts(ref_c, pred_c, 1, dataset.scene_duration_s);
      }
      for (const auto& e : predicted_events)
        predicted_track.events.push_back(
            {e.onset_s, e.offset_s,
             ontology.event_classes[static_cast<std::size_t>(e.class_index)]});
    }

    if (dump_predictions) {
      synth::write_annotation(
          predicted_track,
          (fs::path(out_dir) / "predictions" / (example.id + ".txt")).string());
    }
  }

  EvalOutcome outcome;
  outcome.task = task;
  outcome.fold = fold;
  outcome.n_test = static_cast<int>(examples.size());
  nlohmann::json report{{"task", nn::task_name(task)},
                        {"fold", fold},
                        {"threshold", threshold},
                        {"n_test", outcome.n_test},
                        {"inputs",
                         {{"checkpoint", hash_file(checkpoint_path)},
                          {"features", hash_file(manifest_path(features_dir))},
                          {"dataset", hash_file(manifest_path(dataset_dir))}}}};

  if (task != nn::Task::sed) {
    outcome.asc_accuracy = static_cast<double>(correct_scenes) / outcome.n_test;
    report["asc_accuracy"] = *outcome.asc_accuracy;
  }
  if (task != nn::Task::asc) {
    const auto m = eval::metrics_from_counts(sed_totals);
    outcome.sed = m;
    report["sed"] = {{"er", std::isinf(m.er) ? nlohmann::json() : nlohmann::json(m.er)},
                     {"f1", m.f1},
                     {"precision", m.precision},
                     {"recall", m.recall},
                     {"reference_empty", m.reference_empty},
                     {"counts",
                      {{"nref", m.counts.nref},
                       {"tp", m.counts.tp},
                       {"fp", m.counts.fp},
                       {"fn", m.counts.fn},
                       {"substitutions", m.counts.substitutions},
                       {"deletions", m.counts.deletions},
                       {"insertions", m.counts.insertions}}}};
    for (int c = 0; c < n_events; ++c) {
      const auto& cls = ontology.event_classes[static_cast<std::size_t>(c)];
      const auto cm = eval::metrics_from_counts(per_class_totals[static_cast<std::size_t>(c)]);
      outcome.per_class[cls] = {{"f1", cm.f1},
                                {"er", std::isinf(cm.er) ? nlohmann::json() : nlohmann::json(cm.er)},
                                {"nref", cm.counts.nref}};
    }
    report["per_class"] = outcome.per_class;
  }

  outcome.report = report;
  fs::create_directories(out_dir);
  write_json_file(report, (fs::path(out_dir) / ("report_" + std::string(nn::task_name(task)) +
                                                "_fold" + std::to_string(fold) + ".json"))
                              .string());
  return outcome;
}

// ---------------------------------------------------------------------------
// compare

struct CompareResult {
  nlohmann::json report;
  std::string report_path;
  std::string table_path;
};

namespace detail_compare {

inline nlohmann::json stat_json(const eval::MetricStat& s) {
  return {{"mean", s.mean}, {"std", s.std_dev}};
}

inline std::string stat_cell(const eval::MetricStat& s, bool percent) {
  char buf[48];
  if (percent)
    std::snprintf(buf, sizeof(buf), "%.2f%% s %.2f", 100.0 * s.mean, 100.0 * s.std_dev);
  else
    std::snprintf(buf, sizeof(buf), "%.3f s %.3f", s.mean, s.std_dev);
  return buf;
}

}  // namespace detail_compare

/// Run the separate-vs-joint experiment: train and evaluate asc, sed and
/// joint models on every fold, then aggregate mean/std across folds into a
/// two-row comparison report.
inline CompareResult cmd_compare(const ExperimentConfig& config, const std::string& dataset_dir,
                                 const std::string& features_dir, const std::string& folds_path,
                                 const std::string& out_dir) {
  fs::create_directories(out_dir);

  std::vector<double> joint_acc, joint_f1, joint_er;
  std::vector<double> sep_acc, sep_f1, sep_er;
  std::map<std::string, std::vector<double>> converge;
  nlohmann::json per_fold = nlohmann::json::array();

  for (int fold = 0; fold < config.k_folds; ++fold) {
    for (const auto task : {nn::Task::asc, nn::Task::sed, nn::Task::joint}) {
      const auto trained =
          cmd_train(config, features_dir, folds_path, fold, task, out_dir);
      const auto outcome = cmd_evaluate(trained.checkpoint_path, features_dir, dataset_dir,
                                        folds_path, fold, task, config.threshold, out_dir);
      converge[nn::task_name(task)].push_back(
          static_cast<double>(trained.stats.epochs_to_converge));

      nlohmann::json fold_entry{{"fold", fold},
                                {"task", nn::task_name(task)},
                                {"epochs_to_converge", trained.stats.epochs_to_converge},
                                {"best_val_loss", trained.stats.best_val_loss}};
      if (outcome.asc_accuracy) fold_entry["asc_accuracy"] = *outcome.asc_accuracy;
      if (outcome.sed) {
        fold_entry["sed_f1"] = outcome.sed->f1;
        fold_entry["sed_er"] = std::isinf(outcome.sed->er) ? nlohmann::json()
                                                           : nlohmann::json(outcome.sed->er);
      }
      per_fold.push_back(fold_entry);

      if (task == nn::Task::joint) {
        joint_acc.push_back(*outcome.asc_accuracy);
        joint_f1.push_back(outcome.sed->f1);
        joint_er.push_back(outcome.sed->er);
      } else if (task == nn::Task::asc) {
        sep_acc.push_back(*outcome.asc_accuracy);
      } else {
        sep_f1.push_back(outcome.sed->f1);
        sep_er.push_back(outcome.sed->er);
      }
    }
  }

  const auto sep_acc_s = eval::cross_fold_stat(sep_acc);
  const auto sep_f1_s = eval::cross_fold_stat(sep_f1);
  const auto sep_er_s = eval::cross_fold_stat(sep_er);
  const auto joint_acc_s = eval::cross_fold_stat(joint_acc);
  const auto joint_f1_s = eval::cross_fold_stat(joint_f1);
  const auto joint_er_s = eval::cross_fold_stat(joint_er);

  nlohmann::json converge_json;
  for (const auto& [task, values] : converge)
    converge_json[task] = detail_compare::stat_json(eval::cross_fold_stat(values));

  CompareResult result;
  result.report = nlohmann::json{
      {"stage", "compare"},
      {"version", kVersion},
      {"seed", config.seed},
      {"config_hash", config.hash()},
      {"k_folds", config.k_folds},
      {"inputs",
       {{"dataset", hash_file(manifest_path(dataset_dir))},
        {"features", hash_file(manifest_path(features_dir))},
        {"folds", hash_file(folds_path)}}},
      {"separate",
       {{"asc_accuracy", detail_compare::stat_json(sep_acc_s)},
        {"sed_f1", detail_compare::stat_json(sep_f1_s)},
        {"sed_er", detail_compare::stat_json(sep_er_s)}}},
      {"joint",
       {{"asc_accuracy", detail_compare::stat_json(joint_acc_s)},
        {"sed_f1", detail_compare::stat_json(joint_f1_s)},
        {"sed_er", detail_compare::stat_json(joint_er_s)}}},
      {"epochs_to_converge", converge_json},
      {"per_fold", per_fold}};

  result.report_path = (fs::path(out_dir) / "comparison.json").string();
  write_json_file(result.report, result.report_path);

  std::string table;
  table += "                    ASC              SED\n";
  table += "                    MV Acc           F1                ER\n";
  char row[160];
  std::snprintf(row, sizeof(row), "%-20s%-17s%-18s%s\n", "separate models",
                detail_compare::stat_cell(sep_acc_s, false).c_str(),
                detail_compare::stat_cell(sep_f1_s, true).c_str(),
                detail_compare::stat_cell(sep_er_s, false).c_str());
  table += row;
  std::snprintf(row, sizeof(row), "%-20s%-17s%-18s%s\n", "joint model",
                detail_compare::stat_cell(joint_acc_s, false).c_str(),
                detail_compare::stat_cell(joint_f1_s, true).c_str(),
                detail_compare::stat_cell(joint_er_s, false).c_str());
  table += row;
  table += "\nepochs to converge (mean over folds):";
  for (const auto& [task, values] : converge) {
    std::snprintf(row, sizeof(row), " %s %.1f", task.c_str(),
                  eval::cross_fold_stat(values).mean);
    table += row;
  }
  table += "\n";

  result.table_path = (fs::path(out_dir) / "comparison.txt").string();
  std::ofstream tf(result.table_path);
  tf << table;
  return result;
}

}  // namespace soundscene::pipeline
