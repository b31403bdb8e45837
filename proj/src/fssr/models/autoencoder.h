// fssr/models/autoencoder.h
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
// Contractive autoencoder projecting concatenated capsule class vectors into
// a common embedding space:
//
//   code  h = W2 act(W1 z + b1) + b2
//   recon z^ = W4 act(W3 h + b3) + b4
//
// Regularized by the squared Frobenius norm of the encoder Jacobian
//   J = W2 diag(act'(a1)) W1,
// which has a closed form for tanh (act' = 1 - t^2). With the identity
// activation the penalty reduces to ||W2 W1||_F^2, the purely linear case.

#ifndef FSSR_MODELS_AUTOENCODER_H_
#define FSSR_MODELS_AUTOENCODER_H_

#include <string>
#include <vector>

#include "fssr/common/error.h"
#include "fssr/common/rng.h"
#include "fssr/nn/gemm.h"
#include "fssr/nn/tensor.h"

namespace fssr {
namespace models {

template <typename T>
class ContractiveAutoencoder {
 public:
  enum class Activation { kTanh, kIdentity };

  ContractiveAutoencoder(std::string name, int64_t input_dim,
                         int64_t hidden_dim, int64_t code_dim,
                         Activation act = Activation::kTanh)
      : name_(std::move(name)),
        in_(input_dim),
        hid_(hidden_dim),
        code_(code_dim),
        act_(act) {
    w1_.Resize({hid_, in_});
    b1_.Resize({hid_});
    w2_.Resize({code_, hid_});
    b2_.Resize({code_});
    w3_.Resize({hid_, code_});
    b3_.Resize({hid_});
    w4_.Resize({in_, hid_});
    b4_.Resize({in_});
    gw1_.Resize(w1_.shape);
    gb1_.Resize(b1_.shape);
    gw2_.Resize(w2_.shape);
    gb2_.Resize(b2_.shape);
    gw3_.Resize(w3_.shape);
    gb3_.Resize(b3_.shape);
    gw4_.Resize(w4_.shape);
    gb4_.Resize(b4_.shape);
  }

  void Init(Rng *rng) {
    // Xavier-ish scaling keeps tanh units out of saturation at the start.
    auto init = [rng](nn::Tensor<T> *w, int64_t fan_in) {
      const double std = std::sqrt(1.0 / static_cast<double>(fan_in));
      for (T &v : w->data) v = static_cast<T>(rng->NextGaussian() * std);
    };
    init(&w1_, in_);
    init(&w2_, hid_);
    init(&w3_, code_);
    init(&w4_, hid_);
    b1_.Zero();
    b2_.Zero();
    b3_.Zero();
    b4_.Zero();
  }

  struct Out {
    nn::Tensor<T> code;   // {N, code_dim}
    nn::Tensor<T> recon;  // {N, input_dim}
    T recon_loss = T(0);          // mean_n ||z_n - recon_n||^2
    T contractive_penalty = T(0); // mean_n ||J(z_n)||_F^2
  };

  Out Forward(const nn::Tensor<T> &z, bool train) {
    FSSR_CHECK(z.ndim() == 2 && z.dim(1) == in_, ErrorCode::kShapeMismatch)
        << name_ << ": expected {N," << in_ << "}";
    const int64_t N = z.dim(0);
    z_ = z;

    a1_ = Affine(z, w1_, b1_);               // {N, hid}
    t1_ = a1_;
    ApplyAct(&t1_);
    Out out;
    out.code = Affine(t1_, w2_, b2_);        // {N, code}
    h_ = out.code;

    a3_ = Affine(out.code, w3_, b3_);        // {N, hid}
    t3_ = a3_;
    ApplyAct(&t3_);
    out.recon = Affine(t3_, w4_, b4_);       // {N, in}
    recon_ = out.recon;

    double total_recon = 0.0;
    for (int64_t i = 0; i < z.numel(); ++i) {
      const double d = static_cast<double>(z.data[static_cast<size_t>(i)]) -
                       out.recon.data[static_cast<size_t>(i)];
      total_recon += d * d;
    }
    out.recon_loss = static_cast<T>(total_recon / static_cast<double>(N));

    // J_n = W2 diag(d_n) W1 per sample; cached when training so the backward
    // pass does not recompute it.
    if (train) jac_.Resize({N, code_, in_});
    double total_pen = 0.0;
    std::vector<T> scaled(static_cast<size_t>(code_ * hid_));
    std::vector<T> jbuf;
    for (int64_t n = 0; n < N; ++n) {
      const T *t1n = t1_.ptr() + n * hid_;
      for (int64_t m = 0; m < code_; ++m)
        for (int64_t i = 0; i < hid_; ++i)
          scaled[static_cast<size_t>(m * hid_ + i)] =
              w2_.ptr()[m * hid_ + i] * ActPrime(t1n[i]);
      T *j = nullptr;
      if (train) {
        j = jac_.ptr() + n * code_ * in_;
      } else {
        jbuf.assign(static_cast<size_t>(code_ * in_), T(0));
        j = jbuf.data();
      }
      nn::GemmNN<T>(code_, in_, hid_, scaled.data(), hid_, w1_.ptr(), in_, j,
                    in_, /*accumulate=*/false);
      double pen = 0.0;
      for (int64_t i = 0; i < code_ * in_; ++i)
        pen += static_cast<double>(j[i]) * j[i];
      total_pen += pen;
    }
    out.contractive_penalty =
        static_cast<T>(total_pen / static_cast<double>(N));
    return out;
  }

  // gcode: downstream gradient on the code. w_recon and w_contractive are
  // the composite-loss weights on the reconstruction and penalty terms.
  // Returns the full dL/dz and accumulates parameter gradients.
  nn::Tensor<T> Backward(const nn::Tensor<T> &gcode, T w_recon,
                         T w_contractive) {
    const int64_t N = z_.dim(0);
    const T inv_n = T(1) / static_cast<T>(N);

    // Reconstruction: L_r = w_recon * mean ||z - recon||^2.
    nn::Tensor<T> grecon({N, in_});
    for (int64_t i = 0; i < grecon.numel(); ++i)
      grecon.data[static_cast<size_t>(i)] =
          T(2) * w_recon * inv_n *
          (recon_.data[static_cast<size_t>(i)] -
           z_.data[static_cast<size_t>(i)]);

    nn::Tensor<T> gt3 = AffineBackward(grecon, t3_, w4_, &gw4_, &gb4_);
    nn::Tensor<T> ga3 = ActBackward(gt3, t3_);
    nn::Tensor<T> gh = AffineBackward(ga3, h_, w3_, &gw3_, &gb3_);
    for (int64_t i = 0; i < gh.numel(); ++i)
      gh.data[static_cast<size_t>(i)] += gcode.data[static_cast<size_t>(i)];

    nn::Tensor<T> gt1 = AffineBackward(gh, t1_, w2_, &gw2_, &gb2_);
    nn::Tensor<T> ga1 = ActBackward(gt1, t1_);
    nn::Tensor<T> gz = AffineBackward(ga1, z_, w1_, &gw1_, &gb1_);

    // Direct reconstruction term on z.
    for (int64_t i = 0; i < gz.numel(); ++i)
      gz.data[static_cast<size_t>(i)] -=
          grecon.data[static_cast<size_t>(i)];

    if (w_contractive != T(0)) AddContractiveGrads(w_contractive, &gz);
    return gz;
  }

  std::vector<nn::ParamRef<T>> Params() {
    return {{name_ + ".enc1.weight", &w1_, &gw1_},
            {name_ + ".enc1.bias", &b1_, &gb1_},
            {name_ + ".enc2.weight", &w2_, &gw2_},
            {name_ + ".enc2.bias", &b2_, &gb2_},
            {name_ + ".dec1.weight", &w3_, &gw3_},
            {name_ + ".dec1.bias", &b3_, &gb3_},
            {name_ + ".dec2.weight", &w4_, &gw4_},
            {name_ + ".dec2.bias", &b4_, &gb4_}};
  }

  int64_t code_dim() const { return code_; }
  int64_t input_dim() const { return in_; }

 private:
  void ApplyAct(nn::Tensor<T> *x) const {
    if (act_ == Activation::kTanh)
      for (T &v : x->data) v = std::tanh(v);
  }
  // act' expressed through the activation output.
  T ActPrime(T t) const {
    return act_ == Activation::kTanh ? T(1) - t * t : T(1);
  }
  // d(act')/da expressed through the output: tanh -> -2 t (1 - t^2).
  T ActPrimeDeriv(T t) const {
    return act_ == Activation::kTanh ? T(-2) * t * (T(1) - t * t) : T(0);
  }

  nn::Tensor<T> Affine(const nn::Tensor<T> &x, const nn::Tensor<T> &w,
                       const nn::Tensor<T> &b) const {
    const int64_t N = x.dim(0), in = w.dim(1), out = w.dim(0);
    nn::Tensor<T> y({N, out});
    nn::GemmNT<T>(N, out, in, x.ptr(), in, w.ptr(), in, y.ptr(), out, false);
    for (int64_t n = 0; n < N; ++n)
      for (int64_t o = 0; o < out; ++o)
        y.ptr()[n * out + o] += b.data[static_cast<size_t>(o)];
    return y;
  }

  nn::Tensor<T> AffineBackward(const nn::Tensor<T> &gy, const nn::Tensor<T> &x,
                               const nn::Tensor<T> &w, nn::Tensor<T> *gw,
                               nn::Tensor<T> *gb) const {
    const int64_t N = x.dim(0), in = w.dim(1), out = w.dim(0);
    nn::GemmTN<T>(out, in, N, gy.ptr(), out, x.ptr(), in, gw->ptr(), in, true);
    for (int64_t n = 0; n < N; ++n)
      for (int64_t o = 0; o < out; ++o)
        gb->data[static_cast<size_t>(o)] += gy.ptr()[n * out + o];
    nn::Tensor<T> gx({N, in});
    nn::GemmNN<T>(N, in, out, gy.ptr(), out, w.ptr(), in, gx.ptr(), in, false);
    return gx;
  }

  nn::Tensor<T> ActBackward(const nn::Tensor<T> &gy,
                            const nn::Tensor<T> &t) const {
    nn::Tensor<T> g = gy;
    if (act_ == Activation::kTanh)
      for (int64_t i = 0; i < g.numel(); ++i)
        g.data[static_cast<size_t>(i)] *=
            ActPrime(t.data[static_cast<size_t>(i)]);
    return g;
  }

  // Gradient of w_c * mean_n ||J_n||_F^2 with respect to W1, b1, W2 and z.
  void AddContractiveGrads(T w_c, nn::Tensor<T> *gz) {
    const int64_t N = z_.dim(0);
    const T scale = w_c / static_cast<T>(N);
    std::vector<T> k(static_cast<size_t>(code_ * hid_));   // J W1^T
    std::vector<T> g(static_cast<size_t>(hid_ * in_));     // W2^T J
    std::vector<T> ga1c(static_cast<size_t>(hid_));
    for (int64_t n = 0; n < N; ++n) {
      const T *jn = jac_.ptr() + n * code_ * in_;
      const T *t1n = t1_.ptr() + n * hid_;
      const T *zn = z_.ptr() + n * in_;

      // dP/dW2 = 2 J W1^T diag(d).
      nn::GemmNT<T>(code_, hid_, in_, jn, in_, w1_.ptr(), in_, k.data(), hid_,
                    false);
      for (int64_t m = 0; m < code_; ++m)
        for (int64_t i = 0; i < hid_; ++i)
          gw2_.ptr()[m * hid_ + i] += scale * T(2) *
                                      k[static_cast<size_t>(m * hid_ + i)] *
                                      ActPrime(t1n[i]);

      // G = W2^T J; the direct W1 term is 2 diag(d) G, the activation term
      // routes through a1.
      nn::GemmTN<T>(hid_, in_, code_, w2_.ptr(), hid_, jn, in_, g.data(), in_,
                    false);
      for (int64_t i = 0; i < hid_; ++i) {
        T dot = T(0);
        for (int64_t kk = 0; kk < in_; ++kk)
          dot += g[static_cast<size_t>(i * in_ + kk)] * w1_.ptr()[i * in_ + kk];
        ga1c[static_cast<size_t>(i)] =
            scale * T(2) * dot * ActPrimeDeriv(t1n[i]);
        const T di = ActPrime(t1n[i]);
        for (int64_t kk = 0; kk < in_; ++kk)
          gw1_.ptr()[i * in_ + kk] +=
              scale * T(2) * di * g[static_cast<size_t>(i * in_ + kk)];
      }
      for (int64_t i = 0; i < hid_; ++i) {
        const T gi = ga1c[static_cast<size_t>(i)];
        if (gi == T(0)) continue;
        gb1_.data[static_cast<size_t>(i)] += gi;
        for (int64_t kk = 0; kk < in_; ++kk)
          gw1_.ptr()[i * in_ + kk] += gi * zn[kk];
        T *gzn = gz->ptr() + n * in_;
        for (int64_t kk = 0; kk < in_; ++kk)
          gzn[kk] += gi * w1_.ptr()[i * in_ + kk];
      }
    }
  }

  std::string name_;
  int64_t in_, hid_, code_;
  Activation act_;

  nn::Tensor<T> w1_, b1_, w2_, b2_, w3_, b3_, w4_, b4_;
  nn::Tensor<T> gw1_, gb1_, gw2_, gb2_, gw3_, gb3_, gw4_, gb4_;

  // Forward caches.
  nn::Tensor<T> z_, a1_, t1_, h_, a3_, t3_, recon_, jac_;
};

}  // namespace models
}  // namespace fssr

#endif  // FSSR_MODELS_AUTOENCODER_H_
