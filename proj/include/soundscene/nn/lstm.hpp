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
#include <vector>

#include "soundscene/nn/layers.hpp"
#include "soundscene/nn/tensor.hpp"

namespace soundscene::nn {

/// Standard LSTM over T x D sequences, returning the full T x H hidden-state
/// sequence. Gate order in the packed weight matrices is (input, forget,
/// cell, output); initial hidden and cell states are zero. Backward is full
/// backpropagation through time.
template <typename S>
class Lstm {
 public:
  Lstm(std::string name, int input_dim, int hidden) : d_(input_dim), h_(hidden) {
    wx_.name = name + ".wx";
    wx_.value = Matrix<S>::Zero(d_, 4 * h_);
    wh_.name = name + ".wh";
    wh_.value = Matrix<S>::Zero(h_, 4 * h_);
    b_.name = name + ".b";
    b_.value = Matrix<S>::Zero(1, 4 * h_);
  }

  void init(Rng& rng) {
    glorot_init(wx_.value, d_, h_, rng);
    glorot_init(wh_.value, h_, h_, rng);
    b_.value.setZero();
  }

  int hidden_units() const { return h_; }

  Batch<S> forward(const Batch<S>& x) {
    const std::size_t n = x.size();
    x_cache_ = x;
    gates_.assign(n, {});
    cells_.assign(n, {});
    tanh_c_.assign(n, {});
    hidden_.assign(n, {});
    Batch<S> y(n);
    const double cost =
        x.empty() ? 0.0 : static_cast<double>(x[0].rows()) * (d_ + h_) * 4 * h_;
    parallel_for_items(n, [&](std::size_t i) { y[i] = run_one(i, x[i]); }, cost);
    return y;
  }

  Batch<S> backward(const Batch<S>& dy) {
    const std::size_t n = dy.size();
    Batch<S> dx(n);
    std::vector<Matrix<S>> dwx(n), dwh(n), db(n);
    const double cost =
        dy.empty() ? 0.0 : static_cast<double>(dy[0].rows()) * (d_ + h_) * 8 * h_;
    parallel_for_items(
        n, [&](std::size_t i) { backward_one(i, dy[i], dx[i], dwx[i], dwh[i], db[i]); }, cost);
    for (std::size_t i = 0; i < n; ++i) {
      wx_.grad += dwx[i];
      wh_.grad += dwh[i];
      b_.grad += db[i];
    }
    return dx;
  }

  std::vector<Param<S>*> params() { return {&wx_, &wh_, &b_}; }

 private:
  static Matrix<S> sigmoid(const Matrix<S>& z) {
    return ((-z.array()).exp() + static_cast<S>(1)).inverse();
  }

  Matrix<S> run_one(std::size_t i, const Matrix<S>& x) {
    check(x.cols() == d_, "lstm: input width mismatch");
    const Eigen::Index t_len = x.rows();
    Matrix<S> z_all = x * wx_.value;  // T x 4H, one GEMM for the input path
    z_all.rowwise() += b_.value.row(0);

    auto& gates = gates_[i];
    auto& cells = cells_[i];
    auto& tanh_c = tanh_c_[i];
    auto& hidden = hidden_[i];
    gates.resize(t_len, 4 * h_);
    cells.resize(t_len, h_);
    tanh_c.resize(t_len, h_);
    hidden.resize(t_len, h_);

    RowVector<S> h_prev = RowVector<S>::Zero(h_);
    RowVector<S> c_prev = RowVector<S>::Zero(h_);
    for (Eigen::Index t = 0; t < t_len; ++t) {
      RowVector<S> z = z_all.row(t) + h_prev * wh_.value;
      const auto zi = z.segment(0, h_);
      const auto zf = z.segment(h_, h_);
      const auto zg = z.segment(2 * h_, h_);
      const auto zo = z.segment(3 * h_, h_);
      RowVector<S> i_gate = ((-zi.array()).exp() + static_cast<S>(1)).inverse();
      RowVector<S> f_gate = ((-zf.array()).exp() + static_cast<S>(1)).inverse();
      RowVector<S> g_gate = zg.array().tanh();
      RowVector<S> o_gate = ((-zo.array()).exp() + static_cast<S>(1)).inverse();

      RowVector<S> c = f_gate.array() * c_prev.array() + i_gate.array() * g_gate.array();
      RowVector<S> tc = c.array().tanh();
      RowVector<S> h = o_gate.array() * tc.array();

      gates.row(t).segment(0, h_) = i_gate;
      gates.row(t).segment(h_, h_) = f_gate;
      gates.row(t).segment(2 * h_, h_) = g_gate;
      gates.row(t).segment(3 * h_, h_) = o_gate;
      cells.row(t) = c;
      tanh_c.row(t) = tc;
      hidden.row(t) = h;
      h_prev = h;
      c_prev = c;
    }
    return hidden;
  }

  void backward_one(std::size_t i, const Matrix<S>& dy, Matrix<S>& dx, Matrix<S>& dwx,
                    Matrix<S>& dwh, Matrix<S>& db) const {
    const auto& x = x_cache_[i];
    const auto& gates = gates_[i];
    const auto& cells = cells_[i];
    const auto& tanh_c = tanh_c_[i];
    const auto& hidden = hidden_[i];
    const Eigen::Index t_len = x.rows();

    dwx = Matrix<S>::Zero(d_, 4 * h_);
    dwh = Matrix<S>::Zero(h_, 4 * h_);
    db = Matrix<S>::Zero(1, 4 * h_);
    Matrix<S> dz_all(t_len, 4 * h_);

    RowVector<S> dh_next = RowVector<S>::Zero(h_);
    RowVector<S> dc_next = RowVector<S>::Zero(h_);
    for (Eigen::Index t = t_len - 1; t >= 0; --t) {
      const auto i_gate = gates.row(t).segment(0, h_).array();
      const auto f_gate = gates.row(t).segment(h_, h_).array();
      const auto g_gate = gates.row(t).segment(2 * h_, h_).array();
      const auto o_gate = gates.row(t).segment(3 * h_, h_).array();
      const auto tc = tanh_c.row(t).array();

      const RowVector<S> dh = dy.row(t) + dh_next;
      const RowVector<S> dc =
          (dh.array() * o_gate * (static_cast<S>(1) - tc.square())).matrix() + dc_next;

      const RowVector<S> c_prev =
          t > 0 ? RowVector<S>(cells.row(t - 1)) : RowVector<S>::Zero(h_);

      RowVector<S> dzi =
          (dc.array() * g_gate * i_gate * (static_cast<S>(1) - i_gate)).matrix();
      RowVector<S> dzf =
          (dc.array() * c_prev.array() * f_gate * (static_cast<S>(1) - f_gate)).matrix();
      RowVector<S> dzg =
          (dc.array() * i_gate * (static_cast<S>(1) - g_gate.square())).matrix();
      RowVector<S> dzo = (dh.array() * tc * o_gate * (static_cast<S>(1) - o_gate)).matrix();

      dz_all.row(t).segment(0, h_) = dzi;
      dz_all.row(t).segment(h_, h_) = dzf;
      dz_all.row(t).segment(2 * h_, h_) = dzg;
      dz_all.row(t).segment(3 * h_, h_) = dzo;

      if (t > 0) {
        dwh.noalias() += hidden.row(t - 1).transpose() * dz_all.row(t);
        dh_next = dz_all.row(t) * wh_.value.transpose();
      } else {
        dh_next.setZero();
      }
      dc_next = (dc.array() * f_gate).matrix();
    }
    dwx.noalias() = x.transpose() * dz_all;
    db = dz_all.colwise().sum();
    dx = dz_all * wx_.value.transpose();
  }

  int d_, h_;
  Param<S> wx_, wh_, b_;
  Batch<S> x_cache_;
  std::vector<Matrix<S>> gates_, cells_, tanh_c_, hidden_;
};

}  // namespace soundscene::nn
