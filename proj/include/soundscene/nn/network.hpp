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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "soundscene/nn/layers.hpp"
#include "soundscene/nn/lstm.hpp"
#include "soundscene/nn/tensor.hpp"

namespace soundscene::nn {

struct ConvBlockConfig {
  int filters = 64;
  int kernel = 3;
  int pool_kernel = 3;
  bool batchnorm = true;
  double dropout = 0.25;
};

/// CRNN structure: conv blocks (conv, max-pool, optional batch norm,
/// dropout), per-frame flatten, LSTM, dense+relu, dropout, batch norm and a
/// sigmoid output layer. Pooling strides 2 along frequency; the time axis is
/// pooled only when pool_time_stride = 2, in which case outputs are
/// nearest-neighbor upsampled back to the input frame count.
struct NetworkConfig {
  int input_bands = 128;
  int input_channels = 2;
  std::vector<ConvBlockConfig> blocks = {{64, 3, 3, true, 0.25},
                                         {128, 3, 3, false, 0.25},
                                         {256, 2, 2, true, 0.25}};
  int pool_time_stride = 1;
  int lstm_units = 256;
  int dense_units = 256;
  double dropout_hidden = 0.5;
  int output_units = 42;
  double bn_momentum = 0.9;

  /// Reduced widths for tests and desk-scale experiments.
  static NetworkConfig desk_scale(int bands, int outputs) {
    NetworkConfig cfg;
    cfg.input_bands = bands;
    cfg.blocks = {{16, 3, 3, true, 0.25}, {32, 3, 3, false, 0.25}, {64, 2, 2, true, 0.25}};
    cfg.lstm_units = 64;
    cfg.dense_units = 64;
    cfg.output_units = outputs;
    return cfg;
  }

  nlohmann::json to_json() const {
    nlohmann::json jb = nlohmann::json::array();
    for (const auto& b : blocks)
      jb.push_back({{"filters", b.filters},
                    {"kernel", b.kernel},
                    {"pool_kernel", b.pool_kernel},
                    {"batchnorm", b.batchnorm},
                    {"dropout", b.dropout}});
    return nlohmann::json{{"input_bands", input_bands},
                          {"input_channels", input_channels},
                          {"blocks", jb},
                          {"pool_time_stride", pool_time_stride},
                          {"lstm_units", lstm_units},
                          {"dense_units", dense_units},
                          {"dropout_hidden", dropout_hidden},
                          {"output_units", output_units},
                          {"bn_momentum", bn_momentum}};
  }

  static NetworkConfig from_json(const nlohmann::json& j) {
    NetworkConfig cfg;
    cfg.input_bands = j.at("input_bands").get<int>();
    cfg.input_channels = j.at("input_channels").get<int>();
    cfg.blocks.clear();
    for (const auto& jb : j.at("blocks")) {
      ConvBlockConfig b;
      b.filters = jb.at("filters").get<int>();
      b.kernel = jb.at("kernel").get<int>();
      b.pool_kernel = jb.at("pool_kernel").get<int>();
      b.batchnorm = jb.at("batchnorm").get<bool>();
      b.dropout = jb.at("dropout").get<double>();
      cfg.blocks.push_back(b);
    }
    cfg.pool_time_stride = j.at("pool_time_stride").get<int>();
    cfg.lstm_units = j.at("lstm_units").get<int>();
    cfg.dense_units = j.at("dense_units").get<int>();
    cfg.dropout_hidden = j.at("dropout_hidden").get<double>();
    cfg.output_units = j.at("output_units").get<int>();
    cfg.bn_momentum = j.at("bn_momentum").get<double>();
    return cfg;
  }
};

template <typename S>
class Crnn {
 public:
  Crnn(const NetworkConfig& config, std::uint64_t seed) : config_(config) {
    GridShape shape{1, config.input_bands, config.input_channels};
    int block_no = 0;
    std::uint64_t layer_id = 1;
    for (const auto& bc : config.blocks) {
      Block block;
      const std::string name = "conv" + std::to_string(block_no + 1);
      block.conv = std::make_unique<Conv2d<S>>(name, bc.kernel, bc.kernel,
                                               static_cast<int>(shape.c), bc.filters);
      shape = block.conv->out_shape(shape);
      block.pool =
          std::make_unique<MaxPool2d<S>>(bc.pool_kernel, bc.pool_kernel,
                                         config.pool_time_stride, /*stride_f=*/2);
      shape = block.pool->out_shape(shape);
      if (bc.batchnorm)
        block.bn = std::make_unique<BatchNorm<S>>("bn" + std::to_string(block_no + 1),
                                                  bc.filters, static_cast<S>(config.bn_momentum));
      block.dropout = std::make_unique<Dropout<S>>(static_cast<S>(bc.dropout), layer_id++);
      blocks_.push_back(std::move(block));
      ++block_no;
    }
    conv_out_bands_ = shape.f;
    conv_out_channels_ = shape.c;
    const int lstm_in = static_cast<int>(shape.f * shape.c);
    lstm_ = std::make_unique<Lstm<S>>("lstm", lstm_in, config.lstm_units);
    dense1_ = std::make_unique<Dense<S>>("dense1", config.lstm_units, config.dense_units,
                                         Activation::relu);
    dropout_hidden_ =
        std::make_unique<Dropout<S>>(static_cast<S>(config.dropout_hidden), layer_id++);
    bn_final_ = std::make_unique<BatchNorm<S>>("bn_final", config.dense_units,
                                               static_cast<S>(config.bn_momentum));
    dense_out_ = std::make_unique<Dense<S>>("dense_out", config.dense_units, config.output_units,
                                            Activation::sigmoid);

    Rng rng(derive_seed(seed, 0xC0FFEE));
    for (auto& b : blocks_) b.conv->init(rng);
    lstm_->init(rng);
    dense1_->init(rng);
    dense_out_->init(rng);
  }

  const NetworkConfig& config() const { return config_; }

  /// Inputs are (T*F) x C feature grids; outputs are T x output_units
  /// per-frame probabilities in (0, 1).
  Batch<S> forward(const Batch<S>& inputs, Eigen::Index frames, Mode mode,
                   std::uint64_t step_seed = 0) {
    check(!inputs.empty(), "empty batch");
    GridShape shape{frames, config_.input_bands, config_.input_channels};
    for (const auto& x : inputs)
      check(x.rows() == shape.rows() && x.cols() == shape.c,
            "input shape mismatch: expected frames*" + std::to_string(config_.input_bands) +
                " x " + std::to_string(config_.input_channels));
    in_frames_ = frames;

    Batch<S> h = inputs;
    for (auto& b : blocks_) {
      h = b.conv->forward(h, shape);
      shape = b.conv->out_shape(shape);
      h = b.pool->forward(h, shape);
      shape = b.pool->out_shape(shape);
      if (b.bn) h = b.bn->forward(h, mode);
      h = b.dropout->forward(h, mode, step_seed);
    }
    conv_frames_ = shape.t;
    h = flatten_frames(h, shape);
    h = lstm_->forward(h);
    h = dense1_->forward(h);
    h = dropout_hidden_->forward(h, mode, step_seed);
    h = bn_final_->forward(h, mode);
    h = dense_out_->forward(h);
    if (conv_frames_ != in_frames_) h = upsample_time(h);
    return h;
  }

  /// dprob: gradient of the loss with respect to the output probabilities.
  void backward(const Batch<S>& dprob) {
    Batch<S> g = dprob;
    if (conv_frames_ != in_frames_) g = downsample_time_grad(g);
    g = dense_out_->backward(g);
    g = bn_final_->backward(g);
    g = dropout_hidden_->backward(g);
    g = dense1_->backward(g);
    g = lstm_->backward(g);
    g = unflatten_frames(g);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
      g = it->dropout->backward(g);
      if (it->bn) g = it->bn->backward(g);
      g = it->pool->backward(g);
      g = it->conv->backward(g);
    }
  }

  std::vector<Param<S>*> params() {
    std::vector<Param<S>*> out;
    for (auto& b : blocks_) {
      for (auto* p : b.conv->params()) out.push_back(p);
      if (b.bn)
        for (auto* p : b.bn->params()) out.push_back(p);
    }
    for (auto* p : lstm_->params()) out.push_back(p);
    for (auto* p : dense1_->params()) out.push_back(p);
    for (auto* p : bn_final_->params()) out.push_back(p);
    for (auto* p : dense_out_->params()) out.push_back(p);
    return out;
  }

  void zero_grads() {
    for (auto* p : params()) p->zero_grad();
  }

  /// Running batch-norm statistics, in layer order, for checkpointing.
  std::vector<std::pair<std::string, const BatchNorm<S>*>> batchnorms() const {
    std::vector<std::pair<std::string, const BatchNorm<S>*>> out;
    int i = 1;
    for (const auto& b : blocks_) {
      if (b.bn) out.emplace_back("bn" + std::to_string(i), b.bn.get());
      ++i;
    }
    out.emplace_back("bn_final", bn_final_.get());
    return out;
  }

  std::vector<std::pair<std::string, BatchNorm<S>*>> batchnorms_mutable() {
    std::vector<std::pair<std::string, BatchNorm<S>*>> out;
    int i = 1;
    for (auto& b : blocks_) {
      if (b.bn) out.emplace_back("bn" + std::to_string(i), b.bn.get());
      ++i;
    }
    out.emplace_back("bn_final", bn_final_.get());
    return out;
  }

  /// Smallest pooling-window tie gap of the last forward, for FD checks.
  S min_pool_gap(const Batch<S>& inputs, Eigen::Index frames, Mode mode) {
    GridShape shape{frames, config_.input_bands, config_.input_channels};
    S gap = std::numeric_limits<S>::infinity();
    Batch<S> h = inputs;
    for (auto& b : blocks_) {
      h = b.conv->forward(h, shape);
      shape = b.conv->out_shape(shape);
      const Batch<S> pre_pool = h;
      h = b.pool->forward(h, shape);
      gap = std::min(gap, b.pool->min_tie_gap(pre_pool));
      shape = b.pool->out_shape(shape);
      if (b.bn) h = b.bn->forward(h, mode);
      h = b.dropout->forward(h, mode, 0);
    }
    return gap;
  }

 private:
  struct Block {
    std::unique_ptr<Conv2d<S>> conv;
    std::unique_ptr<MaxPool2d<S>> pool;
    std::unique_ptr<BatchNorm<S>> bn;
    std::unique_ptr<Dropout<S>> dropout;
  };

  // (T*F) x C -> T x (F*C), feature-major then channel within each band
  Batch<S> flatten_frames(const Batch<S>& x, GridShape shape) {
    flat_f_ = shape.f;
    flat_c_ = shape.c;
    Batch<S> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      out[i].resize(shape.t, shape.f * shape.c);
      for (Eigen::Index t = 0; t < shape.t; ++t)
        for (Eigen::Index f = 0; f < shape.f; ++f)
          out[i].row(t).segment(f * shape.c, shape.c) = x[i].row(t * shape.f + f);
    }
    return out;
  }

  Batch<S> unflatten_frames(const Batch<S>& dy) {
    Batch<S> out(dy.size());
    for (std::size_t i = 0; i < dy.size(); ++i) {
      const Eigen::Index t_len = dy[i].rows();
      out[i].resize(t_len * flat_f_, flat_c_);
      for (Eigen::Index t = 0; t < t_len; ++t)
        for (Eigen::Index f = 0; f < flat_f_; ++f)
          out[i].row(t * flat_f_ + f) = dy[i].row(t).segment(f * flat_c_, flat_c_);
    }
    return out;
  }

  // nearest-neighbor repeat of each conv-rate frame back to the input rate
  Batch<S> upsample_time(const Batch<S>& x) {
    const Eigen::Index factor = (in_frames_ + conv_frames_ - 1) / conv_frames_;
    Batch<S> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      out[i].resize(in_frames_, x[i].cols());
      for (Eigen::Index t = 0; t < in_frames_; ++t)
        out[i].row(t) = x[i].row(std::min(t / factor, conv_frames_ - 1));
    }
    return out;
  }

  Batch<S> downsample_time_grad(const Batch<S>& dy) {
    const Eigen::Index factor = (in_frames_ + conv_frames_ - 1) / conv_frames_;
    Batch<S> out(dy.size());
    for (std::size_t i = 0; i < dy.size(); ++i) {
      out[i] = Matrix<S>::Zero(conv_frames_, dy[i].cols());
      for (Eigen::Index t = 0; t < in_frames_; ++t)
        out[i].row(std::min(t / factor, conv_frames_ - 1)) += dy[i].row(t);
    }
    return out;
  }

  NetworkConfig config_;
  std::vector<Block> blocks_;
  std::unique_ptr<Lstm<S>> lstm_;
  std::unique_ptr<Dense<S>> dense1_;
  std::unique_ptr<Dropout<S>> dropout_hidden_;
  std::unique_ptr<BatchNorm<S>> bn_final_;
  std::unique_ptr<Dense<S>> dense_out_;
  Eigen::Index conv_out_bands_ = 0, conv_out_channels_ = 0;
  Eigen::Index in_frames_ = 0, conv_frames_ = 0;
  Eigen::Index flat_f_ = 0, flat_c_ = 0;
};

}  // namespace soundscene::nn
