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
#include <limits>
#include <string>
#include <vector>

#include "soundscene/nn/tensor.hpp"
#include "soundscene/synth/rng.hpp"

namespace soundscene::nn {

/// Glorot-uniform fill: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename S>
inline void glorot_init(Matrix<S>& w, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<S>(rng.uniform(-a, a));
}

/// 2D convolution over (time, frequency) grids, stride 1, same padding.
/// Inputs and outputs are (T*F) x C matrices; the kernel is stored as a
/// (kh*kw*cin) x cout GEMM matrix. Even kernels pad 0 before / 1 after.
template <typename S>
class Conv2d {
 public:
  Conv2d(std::string name, int kh, int kw, int cin, int cout)
      : kh_(kh), kw_(kw), cin_(cin), cout_(cout) {
    w_.name = name + ".w";
    w_.value = Matrix<S>::Zero(kh * kw * cin, cout);
    b_.name = name + ".b";
    b_.value = Matrix<S>::Zero(1, cout);
  }

  void init(Rng& rng) {
    glorot_init(w_.value, static_cast<Eigen::Index>(kh_) * kw_ * cin_, cout_, rng);
    b_.value.setZero();
  }

  GridShape out_shape(GridShape in) const { return {in.t, in.f, cout_}; }

  Batch<S> forward(const Batch<S>& x, GridShape in) {
    check(in.c == cin_, "conv2d: input channel mismatch");
    in_ = in;
    x_cache_ = x;
    Batch<S> y(x.size());
    const double cost = static_cast<double>(in.rows()) * kh_ * kw_ * cin_ * cout_;
    parallel_for_items(
        x.size(),
        [&](std::size_t i) {
          check(x[i].rows() == in.rows() && x[i].cols() == cin_, "conv2d: input shape mismatch");
          y[i] = run_one(x[i]);
        },
        cost);
    return y;
  }

  Batch<S> backward(const Batch<S>& dy) {
    Batch<S> dx(dy.size());
    std::vector<Matrix<S>> dw(dy.size()), db(dy.size());
    const double cost = static_cast<double>(in_.rows()) * kh_ * kw_ * cin_ * cout_ * 2;
    parallel_for_items(
        dy.size(),
        [&](std::size_t i) { backward_one(x_cache_[i], dy[i], dx[i], dw[i], db[i]); }, cost);
    for (std::size_t i = 0; i < dy.size(); ++i) {  // fixed-order reduction
      w_.grad += dw[i];
      b_.grad += db[i];
    }
    return dx;
  }

  std::vector<Param<S>*> params() { return {&w_, &b_}; }

 private:
  static constexpr Eigen::Index kBlockT = 64;

  // patches for output rows [t0, t1): ((t1-t0)*F) x (kh*kw*cin)
  void fill_patches(const Matrix<S>& x, Eigen::Index t0, Eigen::Index t1, Matrix<S>& p) const {
    const Eigen::Index f_len = in_.f;
    const int pad_t = (kh_ - 1) / 2;
    const int pad_f = (kw_ - 1) / 2;
    p.setZero((t1 - t0) * f_len, static_cast<Eigen::Index>(kh_) * kw_ * cin_);
    for (Eigen::Index t = t0; t < t1; ++t) {
      for (int dt = 0; dt < kh_; ++dt) {
        const Eigen::Index src_t = t + dt - pad_t;
        if (src_t < 0 || src_t >= in_.t) continue;
        for (int df = 0; df < kw_; ++df) {
          const Eigen::Index col0 = (static_cast<Eigen::Index>(dt) * kw_ + df) * cin_;
          const Eigen::Index f_lo = std::max<Eigen::Index>(0, pad_f - df);
          const Eigen::Index f_hi = std::min<Eigen::Index>(f_len, f_len + pad_f - df);
          if (f_lo >= f_hi) continue;
          // output cell (t, f) reads input (src_t, f + df - pad_f)
          p.block((t - t0) * f_len + f_lo, col0, f_hi - f_lo, cin_) =
              x.block(src_t * f_len + f_lo + df - pad_f, 0, f_hi - f_lo, cin_);
        }
      }
    }
  }

  Matrix<S> run_one(const Matrix<S>& x) const {
    Matrix<S> y(in_.rows(), cout_);
    Matrix<S> patches;
    for (Eigen::Index t0 = 0; t0 < in_.t; t0 += kBlockT) {
      const Eigen::Index t1 = std::min(in_.t, t0 + kBlockT);
      fill_patches(x, t0, t1, patches);
      y.middleRows(t0 * in_.f, (t1 - t0) * in_.f).noalias() = patches * w_.value;
    }
    y.rowwise() += b_.value.row(0);
    return y;
  }

  void backward_one(const Matrix<S>& x, const Matrix<S>& dy, Matrix<S>& dx, Matrix<S>& dw,
                    Matrix<S>& db) const {
    dx = Matrix<S>::Zero(x.rows(), x.cols());
    dw = Matrix<S>::Zero(w_.value.rows(), w_.value.cols());
    db = dy.colwise().sum();
    const Eigen::Index f_len = in_.f;
    const int pad_t = (kh_ - 1) / 2;
    const int pad_f = (kw_ - 1) / 2;
    Matrix<S> patches, dpatches;
    for (Eigen::Index t0 = 0; t0 < in_.t; t0 += kBlockT) {
      const Eigen::Index t1 = std::min(in_.t, t0 + kBlockT);
      fill_patches(x, t0, t1, patches);
      const auto dy_block = dy.middleRows(t0 * f_len, (t1 - t0) * f_len);
      dw.noalias() += patches.transpose() * dy_block;
      dpatches.noalias() = dy_block * w_.value.transpose();
      // col2im scatter-add
      for (Eigen::Index t = t0; t < t1; ++t) {
        for (int dt = 0; dt < kh_; ++dt) {
          const Eigen::Index src_t = t + dt - pad_t;
          if (src_t < 0 || src_t >= in_.t) continue;
          for (int df = 0; df < kw_; ++df) {
            const Eigen::Index col0 = (static_cast<Eigen::Index>(dt) * kw_ + df) * cin_;
            const Eigen::Index f_lo = std::max<Eigen::Index>(0, pad_f - df);
            const Eigen::Index f_hi = std::min<Eigen::Index>(f_len, f_len + pad_f - df);
            if (f_lo >= f_hi) continue;
            dx.block(src_t * f_len + f_lo + df - pad_f, 0, f_hi - f_lo, cin_) +=
                dpatches.block((t - t0) * f_len + f_lo, col0, f_hi - f_lo, cin_);
          }
        }
      }
    }
  }

  int kh_, kw_, cin_, cout_;
  GridShape in_;
  Param<S> w_, b_;
  Batch<S> x_cache_;
};

/// Max pooling with TensorFlow-style same padding and independent time /
/// frequency strides (the frequency-only pooling of the default network uses
/// stride 1 in time). Gradients route to the first maximum of each window.
template <typename S>
class MaxPool2d {
 public:
  MaxPool2d(int kh, int kw, int stride_t, int stride_f)
      : kh_(kh), kw_(kw), st_(stride_t), sf_(stride_f) {}

  GridShape out_shape(GridShape in) const {
    return {(in.t + st_ - 1) / st_, (in.f + sf_ - 1) / sf_, in.c};
  }

  Batch<S> forward(const Batch<S>& x, GridShape in) {
    in_ = in;
    out_ = out_shape(in);
    const Eigen::Index pad_total_t = std::max<Eigen::Index>(0, (out_.t - 1) * st_ + kh_ - in.t);
    const Eigen::Index pad_total_f = std::max<Eigen::Index>(0, (out_.f - 1) * sf_ + kw_ - in.f);
    pad_t_ = pad_total_t / 2;
    pad_f_ = pad_total_f / 2;

    argmax_.assign(x.size(), {});
    Batch<S> y(x.size());
    const double cost = static_cast<double>(in.rows()) * in.c * kh_ * kw_;
    parallel_for_items(x.size(), [&](std::size_t i) {
      y[i].resize(out_.rows(), in.c);
      auto& amax = argmax_[i];
      amax.resize(out_.rows(), in.c);
      for (Eigen::Index ot = 0; ot < out_.t; ++ot) {
        for (Eigen::Index of = 0; of < out_.f; ++of) {
          const Eigen::Index orow = ot * out_.f + of;
          for (Eigen::Index c = 0; c < in.c; ++c) {
            S best = -std::numeric_limits<S>::infinity();
            Eigen::Index best_row = -1;
            for (int dt = 0; dt < kh_; ++dt) {
              const Eigen::Index it = ot * st_ + dt - pad_t_;
              if (it < 0 || it >= in.t) continue;
              for (int df = 0; df < kw_; ++df) {
                const Eigen::Index ifq = of * sf_ + df - pad_f_;
                if (ifq < 0 || ifq >= in.f) continue;
                const S v = x[i](it * in.f + ifq, c);
                if (v > best) {  // strict: ties keep the first (lowest) index
                  best = v;
                  best_row = it * in.f + ifq;
                }
              }
            }
            y[i](orow, c) = best;
            amax(orow, c) = best_row;
          }
        }
      }
    }, cost);
    return y;
  }

  Batch<S> backward(const Batch<S>& dy) {
    Batch<S> dx(dy.size());
    const double cost = static_cast<double>(in_.rows()) * in_.c;
    parallel_for_items(
        dy.size(),
        [&](std::size_t i) {
          dx[i] = Matrix<S>::Zero(in_.rows(), in_.c);
          for (Eigen::Index r = 0; r < dy[i].rows(); ++r)
            for (Eigen::Index c = 0; c < dy[i].cols(); ++c)
              dx[i](argmax_[i](r, c), c) += dy[i](r, c);
        },
        cost);
    return dx;
  }

  /// Smallest max-vs-runner-up gap over all windows of the last forward;
  /// used by gradient checks to reject near-tie inputs.
  S min_tie_gap(const Batch<S>& x) const {
    S gap = std::numeric_limits<S>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (Eigen::Index ot = 0; ot < out_.t; ++ot) {
        for (Eigen::Index of = 0; of < out_.f; ++of) {
          for (Eigen::Index c = 0; c < in_.c; ++c) {
            S best = -std::numeric_limits<S>::infinity();
            S second = -std::numeric_limits<S>::infinity();
            for (int dt = 0; dt < kh_; ++dt) {
              const Eigen::Index it = ot * st_ + dt - pad_t_;
              if (it < 0 || it >= in_.t) continue;
              for (int df = 0; df < kw_; ++df) {
                const Eigen::Index ifq = of * sf_ + df - pad_f_;
                if (ifq < 0 || ifq >= in_.f) continue;
                const S v = x[i](it * in_.f + ifq, c);
                if (v > best) {
                  second = best;
                  best = v;
                } else if (v > second) {
                  second = v;
                }
              }
            }
            if (std::isfinite(second)) gap = std::min(gap, best - second);
          }
        }
      }
    }
    return gap;
  }

 private:
  int kh_, kw_, st_, sf_;
  GridShape in_, out_;
  Eigen::Index pad_t_ = 0, pad_f_ = 0;
  std::vector<Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic>> argmax_;
};

/// Per-channel batch normalization over every row of every batch item.
/// Train mode normalizes by batch statistics and updates the running ones;
/// eval mode applies the running statistics.
template <typename S>
class BatchNorm {
 public:
  BatchNorm(std::string name, int channels, S momentum = static_cast<S>(0.9))
      : momentum_(momentum) {
    gamma_.name = name + ".gamma";
    gamma_.value = Matrix<S>::Ones(1, channels);
    beta_.name = name + ".beta";
    beta_.value = Matrix<S>::Zero(1, channels);
    running_mean_ = Matrix<S>::Zero(1, channels);
    running_var_ = Matrix<S>::Ones(1, channels);
  }

  Batch<S> forward(const Batch<S>& x, Mode mode) {
    const Eigen::Index c_len = gamma_.value.cols();
    mode_ = mode;
    if (mode == Mode::eval) {
      Batch<S> y(x.size());
      const RowVector<S> scale =
          gamma_.value.row(0).array() / (running_var_.row(0).array() + eps_).sqrt();
      for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = ((x[i].rowwise() - running_mean_.row(0)).array().rowwise() * scale.array())
                   .rowwise() +
               beta_.value.row(0).array();
      }
      return y;
    }

    long long n = 0;
    RowVector<S> sum = RowVector<S>::Zero(c_len);
    for (const auto& xi : x) {
      sum += xi.colwise().sum();
      n += xi.rows();
    }
    check(n > 1, "batchnorm needs more than one row");
    n_rows_ = n;
    mean_ = sum / static_cast<S>(n);
    RowVector<S> ssd = RowVector<S>::Zero(c_len);
    for (const auto& xi : x)
      ssd += (xi.rowwise() - mean_).array().square().colwise().sum().matrix();
    var_ = ssd / static_cast<S>(n);

    running_mean_ = momentum_ * running_mean_ + (1 - momentum_) * mean_;
    running_var_ = momentum_ * running_var_ + (1 - momentum_) * var_;

    inv_std_ = (var_.array() + eps_).rsqrt();
    xhat_.resize(x.size());
    Batch<S> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      xhat_[i] = (x[i].rowwise() - mean_).array().rowwise() * inv_std_.array();
      y[i] = (xhat_[i].array().rowwise() * gamma_.value.row(0).array()).rowwise() +
             beta_.value.row(0).array();
    }
    return y;
  }

  Batch<S> backward(const Batch<S>& dy) {
    const Eigen::Index c_len = gamma_.value.cols();
    Batch<S> dx(dy.size());
    if (mode_ == Mode::eval) {
      const RowVector<S> scale =
          gamma_.value.row(0).array() / (running_var_.row(0).array() + eps_).sqrt();
      for (std::size_t i = 0; i < dy.size(); ++i)
        dx[i] = dy[i].array().rowwise() * scale.array();
      return dx;
    }
    // accumulate dgamma, dbeta and the two reduction terms of the batch-stat
    // backward pass in one sweep
    RowVector<S> sum_dy = RowVector<S>::Zero(c_len);
    RowVector<S> sum_dy_xhat = RowVector<S>::Zero(c_len);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      sum_dy += dy[i].colwise().sum();
      sum_dy_xhat += (dy[i].array() * xhat_[i].array()).colwise().sum().matrix();
    }
    gamma_.grad += sum_dy_xhat;
    beta_.grad += sum_dy;

    const S inv_n = static_cast<S>(1) / static_cast<S>(n_rows_);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      // dx = gamma * inv_std * (dy - mean(dy) - xhat * mean(dy*xhat))
      Matrix<S> centered = dy[i].rowwise() - (sum_dy * inv_n);
      centered.noalias() -=
          (xhat_[i].array().rowwise() * (sum_dy_xhat * inv_n).array()).matrix();
      dx[i] = centered.array().rowwise() * (gamma_.value.row(0).array() * inv_std_.array());
    }
    return dx;
  }

  std::vector<Param<S>*> params() { return {&gamma_, &beta_}; }
  const Matrix<S>& running_mean() const { return running_mean_; }
  const Matrix<S>& running_var() const { return running_var_; }
  void set_running(const Matrix<S>& mean, const Matrix<S>& var) {
    running_mean_ = mean;
    running_var_ = var;
  }

 private:
  Param<S> gamma_, beta_;
  Matrix<S> running_mean_, running_var_;
  S momentum_;
  S eps_ = static_cast<S>(1e-3);
  Mode mode_ = Mode::train;
  long long n_rows_ = 0;
  RowVector<S> mean_, var_, inv_std_;
  Batch<S> xhat_;
};

/// Inverted dropout: kept units scale by 1/(1-p) in train mode, eval is the
/// identity. Masks are drawn per (step seed, item) so results do not depend
/// on thread scheduling.
template <typename S>
class Dropout {
 public:
  Dropout(S p, std::uint64_t layer_id) : p_(p), layer_id_(layer_id) {}

  Batch<S> forward(const Batch<S>& x, Mode mode, std::uint64_t step_seed) {
    if (mode == Mode::eval || p_ <= 0) {
      active_ = false;
      return x;
    }
    active_ = true;
    const S scale = static_cast<S>(1) / (static_cast<S>(1) - p_);
    mask_.resize(x.size());
    Batch<S> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      Rng rng(derive_seed(step_seed, layer_id_ * 1000003 + i));
      mask_[i].resize(x[i].rows(), x[i].cols());
      for (Eigen::Index k = 0; k < mask_[i].size(); ++k)
        mask_[i].data()[k] = rng.uniform() < static_cast<double>(p_) ? static_cast<S>(0) : scale;
      y[i] = x[i].array() * mask_[i].array();
    }
    return y;
  }

  Batch<S> backward(const Batch<S>& dy) {
    if (!active_) return dy;
    Batch<S> dx(dy.size());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i].array() * mask_[i].array();
    return dx;
  }

 private:
  S p_;
  std::uint64_t layer_id_;
  bool active_ = false;
  Batch<S> mask_;
};

enum class Activation { none, relu, sigmoid };

/// Time-distributed dense layer: every row (frame) of each item maps through
/// the same weights.
template <typename S>
class Dense {
 public:
  Dense(std::string name, int in, int out, Activation act) : act_(act) {
    w_.name = name + ".w";
    w_.value = Matrix<S>::Zero(in, out);
    b_.name = name + ".b";
    b_.value = Matrix<S>::Zero(1, out);
  }

  void init(Rng& rng) {
    glorot_init(w_.value, w_.value.rows(), w_.value.cols(), rng);
    b_.value.setZero();
  }

  Batch<S> forward(const Batch<S>& x) {
    x_cache_ = x;
    Batch<S> y(x.size());
    out_cache_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      check(x[i].cols() == w_.value.rows(), "dense: input width mismatch");
      Matrix<S> z = x[i] * w_.value;
      z.rowwise() += b_.value.row(0);
      switch (act_) {
        case Activation::none:
          y[i] = z;
          break;
        case Activation::relu:
          y[i] = z.cwiseMax(static_cast<S>(0));
          break;
        case Activation::sigmoid:
          y[i] = ((-z.array()).exp() + static_cast<S>(1)).inverse();
          break;
      }
      out_cache_[i] = y[i];
    }
    return y;
  }

  Batch<S> backward(const Batch<S>& dy) {
    Batch<S> dx(dy.size());
    for (std::size_t i = 0; i < dy.size(); ++i) {
      Matrix<S> dz;
      switch (act_) {
        case Activation::none:
          dz = dy[i];
          break;
        case Activation::relu:
          dz = dy[i].array() * (out_cache_[i].array() > static_cast<S>(0)).template cast<S>();
          break;
        case Activation::sigmoid:
          dz = dy[i].array() * out_cache_[i].array() *
               (static_cast<S>(1) - out_cache_[i].array());
          break;
      }
      w_.grad.noalias() += x_cache_[i].transpose() * dz;
      b_.grad += dz.colwise().sum();
      dx[i].noalias() = dz * w_.value.transpose();
    }
    return dx;
  }

  std::vector<Param<S>*> params() { return {&w_, &b_}; }

 private:
  Activation act_;
  Param<S> w_, b_;
  Batch<S> x_cache_, out_cache_;
};

}  // namespace soundscene::nn
