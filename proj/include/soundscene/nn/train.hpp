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

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "soundscene/features/feature_io.hpp"
#include "soundscene/nn/adam.hpp"
#include "soundscene/nn/checkpoint.hpp"
#include "soundscene/nn/loss.hpp"
#include "soundscene/nn/network.hpp"

namespace soundscene::nn {

/// Which label columns a model trains on: all of them, the scene block, or
/// the event block.
enum class Task { joint, asc, sed };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::joint: return "joint";
    case Task::asc: return "asc";
    case Task::sed: return "sed";
  }
  return "unknown";
}

inline Task task_from_name(const std::string& s) {
  if (s == "joint") return Task::joint;
  if (s == "asc") return Task::asc;
  if (s == "sed") return Task::sed;
  fail("unknown task: " + s + " (expected joint, asc or sed)");
}

inline int task_output_units(Task task, int n_scenes, int n_events) {
  switch (task) {
    case Task::joint: return n_scenes + n_events;
    case Task::asc: return n_scenes;
    case Task::sed: return n_events;
  }
  return 0;
}

template <typename S>
struct Example {
  std::string id;
  Eigen::Index frames = 0;
  Matrix<S> input;   // (T*F) x C
  Matrix<S> target;  // T x output_units
};

/// (T*F) x 2 network input from a standardized feature tensor.
template <typename S>
inline Matrix<S> feature_input(const features::FeatureTensor& t) {
  Matrix<S> x(t.frames() * t.bands(), 2);
  for (Eigen::Index fr = 0; fr < t.frames(); ++fr)
    for (Eigen::Index b = 0; b < t.bands(); ++b)
      for (int c = 0; c < 2; ++c)
        x(fr * t.bands() + b, c) = static_cast<S>(t.channels[c](fr, b));
  return x;
}

/// T x C_task float targets: the task's slice of the label matrix.
template <typename S>
inline Matrix<S> label_target(const features::LabelMatrix& labels, Task task) {
  Eigen::Index col0 = 0, width = labels.cols();
  if (task == Task::asc) {
    width = labels.n_scenes;
  } else if (task == Task::sed) {
    col0 = labels.n_scenes;
    width = labels.cols() - labels.n_scenes;
  }
  Matrix<S> y(labels.frames(), width);
  for (Eigen::Index r = 0; r < labels.frames(); ++r)
    for (Eigen::Index c = 0; c < width; ++c)
      y(r, c) = static_cast<S>(labels.values(r, col0 + c));
  return y;
}

struct TrainOptions {
  int max_epochs = 100;
  int batch_size = 8;
  double learning_rate = 1e-3;
  int patience = 10;  // epochs without validation improvement before stopping
  std::uint64_t seed = 0;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_s = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;  // 0-based index into history
  double best_val_loss = 0.0;
  int epochs_to_converge = 0;  // epochs until validation stopped improving
  bool early_stopped = false;
};

template <typename S>
inline double eval_loss(Crnn<S>& net, const std::vector<Example<S>>& examples, int batch_size) {
  check(!examples.empty(), "eval_loss: empty example list");
  double acc = 0.0;
  long long n_entries = 0;
  for (std::size_t i = 0; i < examples.size(); i += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(examples.size(), i + static_cast<std::size_t>(batch_size));
    Batch<S> inputs, targets;
    for (std::size_t k = i; k < end; ++k) {
      inputs.push_back(examples[k].input);
      targets.push_back(examples[k].target);
    }
    const auto pred = net.forward(inputs, examples[i].frames, Mode::eval);
    long long entries = 0;
    for (const auto& t : targets) entries += t.size();
    acc += static_cast<double>(BceLoss<S>::value(pred, targets)) * static_cast<double>(entries);
    n_entries += entries;
  }
  return acc / static_cast<double>(n_entries);
}

/// Minibatch Adam training with best-validation checkpointing and early
/// stopping. Deterministic for a fixed seed: shuffles, dropout masks and all
/// reductions are seed- or order-fixed. The network is left holding the best
/// validation parameters (and their batch-norm statistics).
template <typename S>
inline TrainResult train_network(Crnn<S>& net, const std::vector<Example<S>>& train_set,
                                 const std::vector<Example<S>>& val_set,
                                 const TrainOptions& options) {
  check(!train_set.empty(), "training set is empty");
  check(options.batch_size >= 1, "batch size must be >= 1");

  Adam<S> adam(static_cast<S>(options.learning_rate));
  auto params = net.params();
  adam.attach(params);

  const auto snapshot = [&] {
    std::vector<Matrix<S>> values;
    for (const auto* p : params) values.push_back(p->value);
    for (const auto& [name, bn] : net.batchnorms()) {
      values.push_back(bn->running_mean());
      values.push_back(bn->running_var());
    }
    return values;
  };
  const auto restore = [&](const std::vector<Matrix<S>>& values) {
    std::size_t i = 0;
    for (auto* p : params) p->value = values[i++];
    for (auto& [name, bn] : net.batchnorms_mutable()) {
      const auto& mean = values[i++];
      const auto& var = values[i++];
      bn->set_running(mean, var);
    }
  };

  TrainResult result;
  std::vector<Matrix<S>> best_values = snapshot();
  int epochs_since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    const auto wall_start = std::chrono::steady_clock::now();
    Rng shuffle_rng(derive_seed(options.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_acc = 0.0;
    long long entries_acc = 0;
    std::size_t step = 0;
    for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t end =
          std::min(order.size(), i + static_cast<std::size_t>(options.batch_size));
      Batch<S> inputs, targets;
      for (std::size_t k = i; k < end; ++k) {
        inputs.push_back(train_set[order[k]].input);
        targets.push_back(train_set[order[k]].target);
      }
      const std::uint64_t step_seed =
          derive_seed(options.seed, 0xD0000000ULL + static_cast<std::uint64_t>(epoch) * 100000 +
                                        step);
      net.zero_grads();
      const auto pred =
          net.forward(inputs, train_set[order[i]].frames, Mode::train, step_seed);
      const S loss = BceLoss<S>::value(pred, targets);
      if (!std::isfinite(static_cast<double>(loss)))
        fail("training diverged: loss is not finite at epoch " + std::to_string(epoch));
      net.backward(BceLoss<S>::grad(pred, targets));
      adam.step(params);

      long long entries = 0;
      for (const auto& t : targets) entries += t.size();
      loss_acc += static_cast<double>(loss) * static_cast<double>(entries);
      entries_acc += entries;
      ++step;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_acc / static_cast<double>(entries_acc);
    stats.val_loss = val_set.empty()
                         ? stats.train_loss
                         : eval_loss(net, val_set, options.batch_size);
    stats.wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    result.history.push_back(stats);

    if (result.best_epoch < 0 || stats.val_loss < result.best_val_loss) {
      result.best_epoch = epoch;
      result.best_val_loss = stats.val_loss;
      best_values = snapshot();
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= options.patience) {
        result.early_stopped = true;
        break;
      }
    }
  }

  restore(best_values);
  result.epochs_to_converge = result.best_epoch + 1;
  return result;
}

}  // namespace soundscene::nn
