// fssr/nn/layers.h
//
// Copyright 2026  FSSR Authors
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
//
// Hand-written layers with explicit forward/backward passes. Backward
// accumulates into parameter gradients (callers zero them between steps)
// and returns the gradient with respect to the layer input. Inputs are
// NCHW tensors unless noted.

#ifndef FSSR_NN_LAYERS_H_
#define FSSR_NN_LAYERS_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fssr/common/error.h"
#include "fssr/common/rng.h"
#include "fssr/nn/gemm.h"
#include "fssr/nn/tensor.h"

namespace fssr {
namespace nn {

inline int64_t ConvOutDim(int64_t in, int k, int stride, int pad) {
  const int64_t out = (in + 2 * pad - k) / stride + 1;
  FSSR_CHECK(out > 0, ErrorCode::kShapeMismatch)
      << "kernel " << k << "/stride " << stride << " does not fit input "
      << in << " (pad " << pad << ")";
  return out;
}

// Scatters an image into the [C*kh*kw, oh*ow] patch matrix.
template <typename T>
void Im2Col(const T *x, int64_t C, int64_t H, int64_t W, int kh, int kw,
            int sh, int sw, int ph, int pw, int64_t oh, int64_t ow, T *col) {
  const int64_t cols = oh * ow;
  for (int64_t c = 0; c < C; ++c) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        T *dst = col + ((c * kh + ki) * kw + kj) * cols;
        for (int64_t i = 0; i < oh; ++i) {
          const int64_t yi = i * sh - ph + ki;
          if (yi < 0 || yi >= H) {
            std::fill(dst + i * ow, dst + (i + 1) * ow, T(0));
            continue;
          }
          const T *src = x + (c * H + yi) * W;
          for (int64_t j = 0; j < ow; ++j) {
            const int64_t xj = j * sw - pw + kj;
            dst[i * ow + j] = (xj < 0 || xj >= W) ? T(0) : src[xj];
          }
        }
      }
    }
  }
}

// Patch matrix transposed: [oh*ow, C*kh*kw] rows of flattened receptive
// fields. Lets the weight-gradient GEMM run in the fast row-streaming form.
template <typename T>
void Im2Row(const T *x, int64_t C, int64_t H, int64_t W, int kh, int kw,
            int sh, int sw, int ph, int pw, int64_t oh, int64_t ow, T *rows) {
  const int64_t ckk = C * kh * kw;
  for (int64_t i = 0; i < oh; ++i) {
    for (int64_t j = 0; j < ow; ++j) {
      T *dst = rows + (i * ow + j) * ckk;
      for (int64_t c = 0; c < C; ++c) {
        for (int ki = 0; ki < kh; ++ki) {
          const int64_t yi = i * sh - ph + ki;
          for (int kj = 0; kj < kw; ++kj) {
            const int64_t xj = j * sw - pw + kj;
            *dst++ = (yi < 0 || yi >= H || xj < 0 || xj >= W)
                         ? T(0)
                         : x[(c * H + yi) * W + xj];
          }
        }
      }
    }
  }
}

template <typename T>
void Col2Im(const T *col, int64_t C, int64_t H, int64_t W, int kh, int kw,
            int sh, int sw, int ph, int pw, int64_t oh, int64_t ow, T *x) {
  const int64_t cols = oh * ow;
  for (int64_t c = 0; c < C; ++c) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const T *src = col + ((c * kh + ki) * kw + kj) * cols;
        for (int64_t i = 0; i < oh; ++i) {
          const int64_t yi = i * sh - ph + ki;
          if (yi < 0 || yi >= H) continue;
          T *dst = x + (c * H + yi) * W;
          for (int64_t j = 0; j < ow; ++j) {
            const int64_t xj = j * sw - pw + kj;
            if (xj >= 0 && xj < W) dst[xj] += src[i * ow + j];
          }
        }
      }
    }
  }
}

template <typename T>
class Conv2d {
 public:
  Conv2d(std::string name, int in_ch, int out_ch, int kh, int kw, int sh,
         int sw, int ph, int pw, bool bias)
      : name_(std::move(name)),
        in_ch_(in_ch),
        out_ch_(out_ch),
        kh_(kh),
        kw_(kw),
        sh_(sh),
        sw_(sw),
        ph_(ph),
        pw_(pw),
        has_bias_(bias) {
    w_.Resize({out_ch, static_cast<int64_t>(in_ch) * kh * kw});
    gw_.Resize(w_.shape);
    if (has_bias_) {
      b_.Resize({out_ch});
      gb_.Resize(b_.shape);
    }
  }

  void Init(Rng *rng) {
    HeNormalInit(&w_, static_cast<int64_t>(in_ch_) * kh_ * kw_, rng);
    if (has_bias_) b_.Zero();
  }

  Tensor<T> Forward(const Tensor<T> &x, bool /*train*/) {
    FSSR_CHECK(x.ndim() == 4 && x.dim(1) == in_ch_, ErrorCode::kShapeMismatch)
        << name_ << ": expected {N," << in_ch_ << ",H,W}";
    const int64_t N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int64_t oh = ConvOutDim(H, kh_, sh_, ph_);
    const int64_t ow = ConvOutDim(W, kw_, sw_, pw_);
    x_ = x;
    Tensor<T> y({N, out_ch_, oh, ow});
    const int64_t ckk = static_cast<int64_t>(in_ch_) * kh_ * kw_;
    std::vector<T> col(static_cast<size_t>(ckk * oh * ow));
    for (int64_t n = 0; n < N; ++n) {
      Im2Col(x.ptr() + n * in_ch_ * H * W, in_ch_, H, W, kh_, kw_, sh_, sw_,
             ph_, pw_, oh, ow, col.data());
      T *yn = y.ptr() + n * out_ch_ * oh * ow;
      GemmNN<T>(out_ch_, oh * ow, ckk, w_.ptr(), ckk, col.data(), oh * ow, yn,
                oh * ow, /*accumulate=*/false);
      if (has_bias_) {
        for (int64_t c = 0; c < out_ch_; ++c) {
          const T bc = b_.data[static_cast<size_t>(c)];
          T *row = yn + c * oh * ow;
          for (int64_t i = 0; i < oh * ow; ++i) row[i] += bc;
        }
      }
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T> &gy) {
    const int64_t N = x_.dim(0), H = x_.dim(2), W = x_.dim(3);
    const int64_t oh = gy.dim(2), ow = gy.dim(3);
    const int64_t ckk = static_cast<int64_t>(in_ch_) * kh_ * kw_;
    Tensor<T> gx(x_.shape);
    std::vector<T> rows(static_cast<size_t>(ckk * oh * ow));
    std::vector<T> gcol(static_cast<size_t>(ckk * oh * ow));
    for (int64_t n = 0; n < N; ++n) {
      const T *gyn = gy.ptr() + n * out_ch_ * oh * ow;
      // dW += gy_n * patches; patch rows keep the GEMM in streaming form.
      Im2Row(x_.ptr() + n * in_ch_ * H * W, in_ch_, H, W, kh_, kw_, sh_, sw_,
             ph_, pw_, oh, ow, rows.data());
      GemmNN<T>(out_ch_, ckk, oh * ow, gyn, oh * ow, rows.data(), ckk,
                gw_.ptr(), ckk, /*accumulate=*/true);
      if (has_bias_) {
        for (int64_t c = 0; c < out_ch_; ++c) {
          T acc = T(0);
          const T *row = gyn + c * oh * ow;
          for (int64_t i = 0; i < oh * ow; ++i) acc += row[i];
          gb_.data[static_cast<size_t>(c)] += acc;
        }
      }
      // gcol = W^T * gy_n, then scatter back to image layout.
      GemmTN<T>(ckk, oh * ow, out_ch_, w_.ptr(), ckk, gyn, oh * ow,
                gcol.data(), oh * ow, /*accumulate=*/false);
      Col2Im(gcol.data(), in_ch_, H, W, kh_, kw_, sh_, sw_, ph_, pw_, oh, ow,
             gx.ptr() + n * in_ch_ * H * W);
    }
    return gx;
  }

  void Collect(std::vector<ParamRef<T>> *out) {
    out->push_back({name_ + ".weight", &w_, &gw_});
    if (has_bias_) out->push_back({name_ + ".bias", &b_, &gb_});
  }

  Tensor<T> *weight() { return &w_; }
  Tensor<T> *bias() { return has_bias_ ? &b_ : nullptr; }
  void DropCaches() { x_ = Tensor<T>(); }

 private:
  std::string name_;
  int64_t in_ch_, out_ch_;
  int kh_, kw_, sh_, sw_, ph_, pw_;
  bool has_bias_;
  Tensor<T> w_, b_, gw_, gb_;
  Tensor<T> x_;
};

template <typename T>
class MaxPool2d {
 public:
  MaxPool2d(int kh, int kw, int sh, int sw, int ph = 0, int pw = 0)
      : kh_(kh), kw_(kw), sh_(sh), sw_(sw), ph_(ph), pw_(pw) {}

  Tensor<T> Forward(const Tensor<T> &x, bool /*train*/) {
    const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t oh = ConvOutDim(H, kh_, sh_, ph_);
    const int64_t ow = ConvOutDim(W, kw_, sw_, pw_);
    in_shape_ = x.shape;
    Tensor<T> y({N, C, oh, ow});
    argmax_.assign(static_cast<size_t>(y.numel()), 0);
    const int64_t planes = N * C;
#pragma omp parallel for schedule(static)
    for (int64_t p = 0; p < planes; ++p) {
      const T *xp = x.ptr() + p * H * W;
      T *yp = y.ptr() + p * oh * ow;
      int64_t *am = argmax_.data() + p * oh * ow;
      for (int64_t i = 0; i < oh; ++i) {
        for (int64_t j = 0; j < ow; ++j) {
          T best = -std::numeric_limits<T>::infinity();
          int64_t best_idx = -1;
          for (int ki = 0; ki < kh_; ++ki) {
            const int64_t yi = i * sh_ - ph_ + ki;
            if (yi < 0 || yi >= H) continue;
            for (int kj = 0; kj < kw_; ++kj) {
              const int64_t xj = j * sw_ - pw_ + kj;
              if (xj < 0 || xj >= W) continue;
              const T v = xp[yi * W + xj];
              if (v > best) {
                best = v;
                best_idx = yi * W + xj;
              }
            }
          }
          yp[i * ow + j] = best;
          am[i * ow + j] = best_idx;
        }
      }
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T> &gy) {
    Tensor<T> gx(in_shape_);
    const int64_t H = in_shape_[2], W = in_shape_[3];
    const int64_t planes = in_shape_[0] * in_shape_[1];
    const int64_t per_plane = gy.dim(2) * gy.dim(3);
#pragma omp parallel for schedule(static)
    for (int64_t p = 0; p < planes; ++p) {
      const T *gyp = gy.ptr() + p * per_plane;
      const int64_t *am = argmax_.data() + p * per_plane;
      T *gxp = gx.ptr() + p * H * W;
      for (int64_t i = 0; i < per_plane; ++i)
        if (am[i] >= 0) gxp[am[i]] += gyp[i];
    }
    return gx;
  }

 private:
  int kh_, kw_, sh_, sw_, ph_, pw_;
  std::vector<int64_t> in_shape_;
  std::vector<int64_t> argmax_;
};

// Averages over the whole remaining time axis ({N,C,H,W} -> {N,C,H,1}).
// This is VGG-M's "1xn" apool6 and, at the canonical 300-frame input,
// ResNet's 1x10 time pool.
template <typename T>
class GlobalTimeAvgPool {
 public:
  Tensor<T> Forward(const Tensor<T> &x, bool /*train*/) {
    in_shape_ = x.shape;
    const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    Tensor<T> y({N, C, H, 1});
    const T inv = T(1) / static_cast<T>(W);
    const int64_t rows = N * C * H;
    for (int64_t r = 0; r < rows; ++r) {
      const T *xr = x.ptr() + r * W;
      T acc = T(0);
      for (int64_t j = 0; j < W; ++j) acc += xr[j];
      y.data[static_cast<size_t>(r)] = acc * inv;
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T> &gy) {
    Tensor<T> gx(in_shape_);
    const int64_t W = in_shape_[3];
    const T inv = T(1) / static_cast<T>(W);
    const int64_t rows = in_shape_[0] * in_shape_[1] * in_shape_[2];
    for (int64_t r = 0; r < rows; ++r) {
      const T g = gy.data[static_cast<size_t>(r)] * inv;
      T *gxr = gx.ptr() + r * W;
      for (int64_t j = 0; j < W; ++j) gxr[j] = g;
    }
    return gx;
  }

 private:
  std::vector<int64_t> in_shape_;
};

template <typename T>
class BatchNorm2d {
 public:
  explicit BatchNorm2d(std::string name, int64_t channels, T momentum = T(0.1),
                       T eps = T(1e-5))
      : name_(std::move(name)), C_(channels), momentum_(momentum), eps_(eps) {
    gamma_.Resize({C_});
    beta_.Resize({C_});
    ggamma_.Resize({C_});
    gbeta_.Resize({C_});
    running_mean_.Resize({C_});
    running_var_.Resize({C_});
    for (auto &v : gamma_.data) v = T(1);
    for (auto &v : running_var_.data) v = T(1);
  }

  Tensor<T> Forward(const Tensor<T> &x, bool train) {
    FSSR_CHECK(x.ndim() == 4 && x.dim(1) == C_, ErrorCode::kShapeMismatch)
        << name_ << ": expected {N," << C_ << ",H,W}";
    const int64_t N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int64_t plane = H * W;
    const int64_t m = N * plane;
    Tensor<T> y(x.shape);
    if (train) {
      xhat_.Resize(x.shape);
      inv_std_.assign(static_cast<size_t>(C_), T(0));
      batch_m_ = m;
      for (int64_t c = 0; c < C_; ++c) {
        double mean = 0.0;
        for (int64_t n = 0; n < N; ++n) {
          const T *xp = x.ptr() + (n * C_ + c) * plane;
          for (int64_t i = 0; i < plane; ++i) mean += xp[i];
        }
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (int64_t n = 0; n < N; ++n) {
          const T *xp = x.ptr() + (n * C_ + c) * plane;
          for (int64_t i = 0; i < plane; ++i) {
            const double d = xp[i] - mean;
            var += d * d;
          }
        }
        var /= static_cast<double>(m);
        const T inv_std = T(1) / std::sqrt(static_cast<T>(var) + eps_);
        inv_std_[static_cast<size_t>(c)] = inv_std;
        const T g = gamma_.data[static_cast<size_t>(c)];
        const T b = beta_.data[static_cast<size_t>(c)];
        for (int64_t n = 0; n < N; ++n) {
          const T *xp = x.ptr() + (n * C_ + c) * plane;
          T *xh = xhat_.ptr() + (n * C_ + c) * plane;
          T *yp = y.ptr() + (n * C_ + c) * plane;
          for (int64_t i = 0; i < plane; ++i) {
            xh[i] = (xp[i] - static_cast<T>(mean)) * inv_std;
            yp[i] = g * xh[i] + b;
          }
        }
        running_mean_.data[static_cast<size_t>(c)] =
            (T(1) - momentum_) * running_mean_.data[static_cast<size_t>(c)] +
            momentum_ * static_cast<T>(mean);
        running_var_.data[static_cast<size_t>(c)] =
            (T(1) - momentum_) * running_var_.data[static_cast<size_t>(c)] +
            momentum_ * static_cast<T>(var);
      }
    } else {
      for (int64_t c = 0; c < C_; ++c) {
        const T mean = running_mean_.data[static_cast<size_t>(c)];
        const T inv_std =
            T(1) / std::sqrt(running_var_.data[static_cast<size_t>(c)] + eps_);
        const T g = gamma_.data[static_cast<size_t>(c)];
        const T b = beta_.data[static_cast<size_t>(c)];
        for (int64_t n = 0; n < N; ++n) {
          const T *xp = x.ptr() + (n * C_ + c) * plane;
          T *yp = y.ptr() + (n * C_ + c) * plane;
          for (int64_t i = 0; i < plane; ++i)
            yp[i] = g * (xp[i] - mean) * inv_std + b;
        }
      }
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T> &gy) {
    const int64_t N = gy.dim(0), H = gy.dim(2), W = gy.dim(3);
    const int64_t plane = H * W;
    const T m = static_cast<T>(batch_m_);
    Tensor<T> gx(gy.shape);
    for (int64_t c = 0; c < C_; ++c) {
      double sum_gy = 0.0, sum_gy_xhat = 0.0;
      for (int64_t n = 0; n < N; ++n) {
        const T *gyp = gy.ptr() + (n * C_ + c) * plane;
        const T *xh = xhat_.ptr() + (n * C_ + c) * plane;
        for (int64_t i = 0; i < plane; ++i) {
          sum_gy += gyp[i];
          sum_gy_xhat += gyp[i] * xh[i];
        }
      }
      ggamma_.data[static_cast<size_t>(c)] += static_cast<T>(sum_gy_xhat);
      gbeta_.data[static_cast<size_t>(c)] += static_cast<T>(sum_gy);
      const T g = gamma_.data[static_cast<size_t>(c)];
      const T inv_std = inv_std_[static_cast<size_t>(c)];
      const T k1 = static_cast<T>(sum_gy) / m;
      const T k2 = static_cast<T>(sum_gy_xhat) / m;
      for (int64_t n = 0; n < N; ++n) {
        const T *gyp = gy.ptr() + (n * C_ + c) * plane;
        const T *xh = xhat_.ptr() + (n * C_ + c) * plane;
        T *gxp = gx.ptr() + (n * C_ + c) * plane;
        for (int64_t i = 0; i < plane; ++i)
          gxp[i] = g * inv_std * (gyp[i] - k1 - xh[i] * k2);
      }
    }
    return gx;
  }

  void Collect(std::vector<ParamRef<T>> *out) {
    out->push_back({name_ + ".gamma", &gamma_, &ggamma_});
    out->push_back({name_ + ".beta", &beta_, &gbeta_});
  }
  // Running statistics ride along in checkpoints but are not trainable.
  void CollectBuffers(std::vector<ParamRef<T>> *out) {
    out->push_back({name_ + ".running_mean", &running_mean_, nullptr});
    out->push_back({name_ + ".running_var", &running_var_, nullptr});
  }

 private:
  std::string name_;
  int64_t C_;
  T momentum_, eps_;
  Tensor<T> gamma_, beta_, ggamma_, gbeta_;
  Tensor<T> running_mean_, running_var_;
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
  int64_t batch_m_ = 0;
};

template <typename T>
class ReLU {
 public:
  Tensor<T> Forward(const Tensor<T> &x, bool /*train*/) {
    y_ = x;
    for (T &v : y_.data) v = v > T(0) ? v : T(0);
    return y_;
  }
  Tensor<T> Backward(const Tensor<T> &gy) {
    Tensor<T> gx(gy.shape);
    for (int64_t i = 0; i < gy.numel(); ++i)
      gx.data[static_cast<size_t>(i)] =
          y_.data[static_cast<size_t>(i)] > T(0)
              ? gy.data[static_cast<size_t>(i)]
              : T(0);
    return gx;
  }

 private:
  Tensor<T> y_;
};

template <typename T>
class Tanh {
 public:
  Tensor<T> Forward(const Tensor<T> &x, bool /*train*/) {
    y_ = x;
    for (T &v : y_.data) v = std::tanh(v);
    return y_;
  }
  Tensor<T> Backward(const Tensor<T> &gy) {
    Tensor<T> gx(gy.shape);
    for (int64_t i = 0; i < gy.numel(); ++i) {
      const T y = y_.data[static_cast<size_t>(i)];
      gx.data[static_cast<size_t>(i)] =
          gy.data[static_cast<size_t>(i)] * (T(1) - y * y);
    }
    return gx;
  }

 private:
  Tensor<T> y_;
};

// Fully connected layer on {N, in} inputs.
template <typename T>
class Linear {
 public:
  Linear(std::string name, int64_t in, int64_t out, bool bias = true)
      : name_(std::move(name)), in_(in), out_(out), has_bias_(bias) {
    w_.Resize({out_, in_});
    gw_.Resize(w_.shape);
    if (has_bias_) {
      b_.Resize({out_});
      gb_.Resize(b_.shape);
    }
  }

  void Init(Rng *rng) {
    HeNormalInit(&w_, in_, rng);
    if (has_bias_) b_.Zero();
  }

  Tensor<T> Forward(const Tensor<T> &x, bool /*train*/) {
    FSSR_CHECK(x.ndim() == 2 && x.dim(1) == in_, ErrorCode::kShapeMismatch)
        << name_ << ": expected {N," << in_ << "}";
    x_ = x;
    const int64_t N = x.dim(0);
    Tensor<T> y({N, out_});
    GemmNT<T>(N, out_, in_, x.ptr(), in_, w_.ptr(), in_, y.ptr(), out_,
              /*accumulate=*/false);
    if (has_bias_) {
      for (int64_t n = 0; n < N; ++n)
        for (int64_t o = 0; o < out_; ++o)
          y.ptr()[n * out_ + o] += b_.data[static_cast<size_t>(o)];
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T> &gy) {
    const int64_t N = x_.dim(0);
    // dW += gy^T * x
    GemmTN<T>(out_, in_, N, gy.ptr(), out_, x_.ptr(), in_, gw_.ptr(), in_,
              /*accumulate=*/true);
    if (has_bias_) {
      for (int64_t n = 0; n < N; ++n)
        for (int64_t o = 0; o < out_; ++o)
          gb_.data[static_cast<size_t>(o)] += gy.ptr()[n * out_ + o];
    }
    Tensor<T> gx({N, in_});
    GemmNN<T>(N, in_, out_, gy.ptr(), out_, w_.ptr(), in_, gx.ptr(), in_,
              /*accumulate=*/false);
    return gx;
  }

  void Collect(std::vector<ParamRef<T>> *out) {
    out->push_back({name_ + ".weight", &w_, &gw_});
    if (has_bias_) out->push_back({name_ + ".bias", &b_, &gb_});
  }

  Tensor<T> *weight() { return &w_; }
  Tensor<T> *bias() { return has_bias_ ? &b_ : nullptr; }
  int64_t in_dim() const { return in_; }
  int64_t out_dim() const { return out_; }

 private:
  std::string name_;
  int64_t in_, out_;
  bool has_bias_;
  Tensor<T> w_, b_, gw_, gb_;
  Tensor<T> x_;
};

// Row-wise x / ||x||; embeddings are unit length so that prototype distances
// start in a narrow band and the first episodic losses sit near ln(n_way).
template <typename T>
class L2Normalize {
 public:
  Tensor<T> Forward(const Tensor<T> &x, bool /*train*/) {
    const int64_t N = x.dim(0), D = x.dim(1);
    y_ = Tensor<T>({N, D});
    inv_norm_.assign(static_cast<size_t>(N), T(0));
    for (int64_t n = 0; n < N; ++n) {
      const T *xr = x.ptr() + n * D;
      double s = 0.0;
      for (int64_t d = 0; d < D; ++d) s += static_cast<double>(xr[d]) * xr[d];
      const T inv = T(1) / static_cast<T>(std::sqrt(s + 1e-12));
      inv_norm_[static_cast<size_t>(n)] = inv;
      T *yr = y_.ptr() + n * D;
      for (int64_t d = 0; d < D; ++d) yr[d] = xr[d] * inv;
    }
    return y_;
  }

  Tensor<T> Backward(const Tensor<T> &gy) {
    const int64_t N = gy.dim(0), D = gy.dim(1);
    Tensor<T> gx({N, D});
    for (int64_t n = 0; n < N; ++n) {
      const T *yr = y_.ptr() + n * D;
      const T *gr = gy.ptr() + n * D;
      T dot = T(0);
      for (int64_t d = 0; d < D; ++d) dot += yr[d] * gr[d];
      const T inv = inv_norm_[static_cast<size_t>(n)];
      T *gxr = gx.ptr() + n * D;
      for (int64_t d = 0; d < D; ++d) gxr[d] = (gr[d] - yr[d] * dot) * inv;
    }
    return gx;
  }

 private:
  Tensor<T> y_;
  std::vector<T> inv_norm_;
};

}  // namespace nn
}  // namespace fssr

#endif  // FSSR_NN_LAYERS_H_
