// fssr/models/capsnet.h
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
// CapsuleNet-M: conv 9x9/256/s6 + ReLU, primary capsule conv 9x9/s6 into
// 32 channels of 8-d capsules (squashed), then routing by agreement into
// 16-d class capsules. No reconstruction decoder. For a 128x300 input the
// primary grid is 2x7, i.e. 448 capsules.
//
// CapsuleNet-MA appends a contractive autoencoder over the concatenated
// class vectors; its code is the class-agnostic few-shot embedding.

#ifndef FSSR_MODELS_CAPSNET_H_
#define FSSR_MODELS_CAPSNET_H_

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "fssr/models/autoencoder.h"
#include "fssr/models/model.h"
#include "fssr/nn/capsule.h"
#include "fssr/nn/layers.h"

namespace fssr {
namespace models {

// The shared convolutional + routing core.
template <typename T>
class CapsnetCore {
 public:
  CapsnetCore(const ModelConfig &cfg, Rng *rng) : cfg_(cfg) {
    const CapsuleConfig &cc = cfg.capsule;
    conv1_ = std::make_unique<nn::Conv2d<T>>(
        "conv1", 1, cc.conv_channels, cc.conv_kernel, cc.conv_kernel,
        cc.conv_stride, cc.conv_stride, 0, 0, true);
    primary_ = std::make_unique<nn::Conv2d<T>>(
        "primary", cc.conv_channels,
        cc.primary_channels * cc.primary_capsule_dim, cc.primary_kernel,
        cc.primary_kernel, cc.primary_stride, cc.primary_stride, 0, 0, true);

    const int64_t h1 = nn::ConvOutDim(cfg.input_bins, cc.conv_kernel,
                                      cc.conv_stride, 0);
    const int64_t w1 = nn::ConvOutDim(cfg.input_frames, cc.conv_kernel,
                                      cc.conv_stride, 0);
    grid_h_ = nn::ConvOutDim(h1, cc.primary_kernel, cc.primary_stride, 0);
    grid_w_ = nn::ConvOutDim(w1, cc.primary_kernel, cc.primary_stride, 0);
    n_caps_ = cc.primary_channels * grid_h_ * grid_w_;

    routing_w_.Resize({cfg.n_classes, n_caps_,
                       static_cast<int64_t>(cc.class_capsule_dim),
                       static_cast<int64_t>(cc.primary_capsule_dim)});
    routing_gw_.Resize(routing_w_.shape);

    conv1_->Init(rng);
    primary_->Init(rng);
    InitRouting(rng);
  }

  // Returns class capsules {N, n_classes, class_capsule_dim}.
  nn::Tensor<T> Forward(const nn::Tensor<T> &x, bool train) {
    const CapsuleConfig &cc = cfg_.capsule;
    FSSR_CHECK(x.ndim() == 4 && x.dim(1) == 1 &&
                   x.dim(2) == cfg_.input_bins &&
                   x.dim(3) == cfg_.input_frames,
               ErrorCode::kShapeMismatch)
        << "capsnet expects {N,1," << cfg_.input_bins << ","
        << cfg_.input_frames << "}";
    const int64_t N = x.dim(0);
    const int64_t pd = cc.primary_capsule_dim;
    const int64_t cd = cc.class_capsule_dim;
    const int64_t C = cfg_.n_classes;

    nn::Tensor<T> h = relu1_.Forward(conv1_->Forward(x, train), train);
    nn::Tensor<T> p = primary_->Forward(h, train);
    // {N, groups*pd, gh, gw} -> capsules u {N, n_caps, pd}, then squash.
    pre_squash_ = GatherCapsules(p);
    u_ = pre_squash_;
    for (int64_t n = 0; n < N; ++n)
      for (int64_t i = 0; i < n_caps_; ++i)
        nn::SquashInPlace(u_.ptr() + (n * n_caps_ + i) * pd, pd);

    // Predictions u_hat[i][c] = W[c][i] u[i], then routing per sample.
    routing_states_.clear();
    u_hats_per_sample_.clear();
    routing_states_.reserve(static_cast<size_t>(N));
    u_hats_per_sample_.reserve(static_cast<size_t>(N));
    nn::Tensor<T> v({N, C, cd});
    for (int64_t n = 0; n < N; ++n) {
      const T *un = u_.ptr() + n * n_caps_ * pd;
      nn::Tensor<T> uh_n({n_caps_, C, cd});
      T *uh = uh_n.ptr();
#pragma omp parallel for schedule(static)
      for (int64_t i = 0; i < n_caps_; ++i) {
        const T *ui = un + i * pd;
        for (int64_t c = 0; c < C; ++c) {
          const T *w = routing_w_.ptr() + ((c * n_caps_ + i) * cd) * pd;
          T *out = uh + (i * C + c) * cd;
          for (int64_t k = 0; k < cd; ++k) {
            T acc = T(0);
            const T *wr = w + k * pd;
            for (int64_t j = 0; j < pd; ++j) acc += wr[j] * ui[j];
            out[k] = acc;
          }
        }
      }
      nn::RoutingState<T> st = nn::DynamicRouting(uh_n, cc.routing_iters);
      std::copy(st.output().ptr(), st.output().ptr() + C * cd,
                v.ptr() + n * C * cd);
      routing_states_.push_back(std::move(st));
      u_hats_per_sample_.push_back(std::move(uh_n));
    }
    return v;
  }

  // gv: {N, n_classes, class_capsule_dim}.
  void Backward(const nn::Tensor<T> &gv) {
    const CapsuleConfig &cc = cfg_.capsule;
    const int64_t N = gv.dim(0);
    const int64_t pd = cc.primary_capsule_dim;
    const int64_t cd = cc.class_capsule_dim;
    const int64_t C = cfg_.n_classes;

    nn::Tensor<T> gpre(pre_squash_.shape);
    for (int64_t n = 0; n < N; ++n) {
      nn::Tensor<T> gout({C, cd});
      std::copy(gv.ptr() + n * C * cd, gv.ptr() + (n + 1) * C * cd,
                gout.ptr());
      nn::Tensor<T> gu_hat = nn::DynamicRoutingBackward(
          u_hats_per_sample_[static_cast<size_t>(n)],
          routing_states_[static_cast<size_t>(n)], gout);

      // Through the prediction transform into W and u.
      const T *un = u_.ptr() + n * n_caps_ * pd;
      std::vector<T> gu(static_cast<size_t>(n_caps_ * pd), T(0));
#pragma omp parallel for schedule(static)
      for (int64_t i = 0; i < n_caps_; ++i) {
        const T *ui = un + i * pd;
        T *gui = gu.data() + i * pd;
        for (int64_t c = 0; c < C; ++c) {
          const T *guh = gu_hat.ptr() + (i * C + c) * cd;
          T *gw = routing_gw_.ptr() + ((c * n_caps_ + i) * cd) * pd;
          const T *w = routing_w_.ptr() + ((c * n_caps_ + i) * cd) * pd;
          for (int64_t k = 0; k < cd; ++k) {
            const T g = guh[k];
            if (g == T(0)) continue;
            for (int64_t j = 0; j < pd; ++j) {
              gw[k * pd + j] += g * ui[j];
              gui[j] += g * w[k * pd + j];
            }
          }
        }
      }
      // Squash backward per capsule into the pre-squash activations.
      for (int64_t i = 0; i < n_caps_; ++i)
        nn::SquashBackward(pre_squash_.ptr() + (n * n_caps_ + i) * pd,
                           gu.data() + i * pd, pd,
                           gpre.ptr() + (n * n_caps_ + i) * pd);
    }

    nn::Tensor<T> gp = ScatterCapsules(gpre);
    nn::Tensor<T> gh = primary_->Backward(gp);
    conv1_->Backward(relu1_.Backward(gh));
    routing_states_.clear();
    u_hats_per_sample_.clear();
  }

  void Collect(std::vector<nn::ParamRef<T>> *p) {
    conv1_->Collect(p);
    primary_->Collect(p);
    p->push_back({"routing.weight", &routing_w_, &routing_gw_});
  }

  void ReplaceRouting(int new_n_classes, Rng *rng) {
    cfg_.n_classes = new_n_classes;
    routing_w_.Resize({new_n_classes, n_caps_,
                       static_cast<int64_t>(cfg_.capsule.class_capsule_dim),
                       static_cast<int64_t>(cfg_.capsule.primary_capsule_dim)});
    routing_gw_.Resize(routing_w_.shape);
    InitRouting(rng);
  }

  // Small fixed scale: prediction vectors summed over hundreds of primary
  // capsules would saturate the squash right at initialization with
  // fan-in-scaled draws, freezing those capsules' gradients.
  void InitRouting(Rng *rng) {
    for (T &v : routing_w_.data)
      v = static_cast<T>(rng->NextGaussian() * 0.1);
  }

  int64_t n_caps() const { return n_caps_; }
  const std::vector<nn::RoutingState<T>> &routing_states() const {
    return routing_states_;
  }

 private:
  // {N, groups*pd, gh, gw} -> {N, n_caps, pd} with capsule index
  // i = (g * gh + y) * gw + x.
  nn::Tensor<T> GatherCapsules(const nn::Tensor<T> &p) const {
    const int64_t N = p.dim(0);
    const int64_t pd = cfg_.capsule.primary_capsule_dim;
    const int64_t groups = cfg_.capsule.primary_channels;
    nn::Tensor<T> u({N, n_caps_, pd});
    for (int64_t n = 0; n < N; ++n)
      for (int64_t g = 0; g < groups; ++g)
        for (int64_t y = 0; y < grid_h_; ++y)
          for (int64_t x = 0; x < grid_w_; ++x) {
            const int64_t i = (g * grid_h_ + y) * grid_w_ + x;
            for (int64_t k = 0; k < pd; ++k)
              u.ptr()[(n * n_caps_ + i) * pd + k] =
                  p.ptr()[((n * groups * pd + g * pd + k) * grid_h_ + y) *
                              grid_w_ +
                          x];
          }
    return u;
  }

  nn::Tensor<T> ScatterCapsules(const nn::Tensor<T> &gu) const {
    const int64_t N = gu.dim(0);
    const int64_t pd = cfg_.capsule.primary_capsule_dim;
    const int64_t groups = cfg_.capsule.primary_channels;
    nn::Tensor<T> gp({N, groups * pd, grid_h_, grid_w_});
    for (int64_t n = 0; n < N; ++n)
      for (int64_t g = 0; g < groups; ++g)
        for (int64_t y = 0; y < grid_h_; ++y)
          for (int64_t x = 0; x < grid_w_; ++x) {
            const int64_t i = (g * grid_h_ + y) * grid_w_ + x;
            for (int64_t k = 0; k < pd; ++k)
              gp.ptr()[((n * groups * pd + g * pd + k) * grid_h_ + y) *
                           grid_w_ +
                       x] = gu.ptr()[(n * n_caps_ + i) * pd + k];
          }
    return gp;
  }

  ModelConfig cfg_;
  int64_t grid_h_ = 0, grid_w_ = 0, n_caps_ = 0;

  std::unique_ptr<nn::Conv2d<T>> conv1_, primary_;
  nn::ReLU<T> relu1_;
  nn::Tensor<T> routing_w_, routing_gw_;

  // Forward caches.
  nn::Tensor<T> pre_squash_, u_;
  std::vector<nn::Tensor<T>> u_hats_per_sample_;
  std::vector<nn::RoutingState<T>> routing_states_;
};

template <typename T>
class CapsnetM : public Model<T> {
 public:
  CapsnetM(const ModelConfig &cfg, uint64_t seed) : cfg_(cfg) {
    FSSR_CHECK(cfg.n_classes >= 2, ErrorCode::kInvalidArgument)
        << "n_classes must be >= 2";
    Rng rng(seed);
    core_ = std::make_unique<CapsnetCore<T>>(cfg, &rng);
  }

  const ModelConfig &config() const override { return cfg_; }

  std::vector<nn::ParamRef<T>> Params() override {
    std::vector<nn::ParamRef<T>> p;
    core_->Collect(&p);
    return p;
  }

  // Class scores are the capsule norms, in [0, 1).
  nn::Tensor<T> ForwardLogits(const nn::Tensor<T> &x, bool train) override {
    v_ = core_->Forward(x, train);
    const int64_t N = v_.dim(0), C = v_.dim(1), d = v_.dim(2);
    nn::Tensor<T> norms({N, C});
    for (int64_t n = 0; n < N; ++n)
      for (int64_t c = 0; c < C; ++c) {
        const T *vc = v_.ptr() + (n * C + c) * d;
        double s = 0.0;
        for (int64_t k = 0; k < d; ++k) s += static_cast<double>(vc[k]) * vc[k];
        norms.ptr()[n * C + c] = static_cast<T>(std::sqrt(s));
      }
    norms_ = norms;
    return norms;
  }

  void BackwardLogits(const nn::Tensor<T> &gnorms) override {
    const int64_t N = v_.dim(0), C = v_.dim(1), d = v_.dim(2);
    nn::Tensor<T> gv(v_.shape);
    for (int64_t n = 0; n < N; ++n)
      for (int64_t c = 0; c < C; ++c) {
        const T norm = norms_.ptr()[n * C + c];
        if (norm < T(1e-12)) continue;
        const T g = gnorms.ptr()[n * C + c] / norm;
        const T *vc = v_.ptr() + (n * C + c) * d;
        T *gvc = gv.ptr() + (n * C + c) * d;
        for (int64_t k = 0; k < d; ++k) gvc[k] = g * vc[k];
      }
    core_->Backward(gv);
  }

  // The few-shot embedding is the flattened class-capsule matrix (what the
  // MA autoencoder consumes).
  EmbedOutput<T> ForwardEmbed(const nn::Tensor<T> &x, bool train) override {
    v_ = core_->Forward(x, train);
    const int64_t N = v_.dim(0);
    nn::Tensor<T> flat = v_.Reshaped({N, v_.dim(1) * v_.dim(2)});
    EmbedOutput<T> out;
    out.embeddings =
        cfg_.l2_normalize_embedding ? l2norm_.Forward(flat, train) : flat;
    out.aux_loss += EpisodeMarginLoss();
    return out;
  }

  void BackwardEmbed(const nn::Tensor<T> &gembed) override {
    nn::Tensor<T> g =
        cfg_.l2_normalize_embedding ? l2norm_.Backward(gembed) : gembed;
    nn::Tensor<T> gv = g.Reshaped(v_.shape);
    AddEpisodeMarginGrad(&gv);
    core_->Backward(gv);
  }

  void SetEpisodeMarginTargets(const std::vector<int> &targets,
                               double weight) override {
    margin_targets_ = targets;
    margin_weight_ = weight;
  }
  void ClearEpisodeMarginTargets() override {
    margin_targets_.clear();
    margin_weight_ = 0.0;
  }

  int embedding_dim() const override {
    return cfg_.n_classes * cfg_.capsule.class_capsule_dim;
  }

  void ReplaceHead(int new_n_classes, uint64_t seed) override {
    Rng rng(seed);
    core_->ReplaceRouting(new_n_classes, &rng);
    cfg_.n_classes = new_n_classes;
  }

  CapsnetCore<T> *core() { return core_.get(); }
  const nn::Tensor<T> &class_vectors() const { return v_; }

 protected:
  // Margin loss over class-capsule norms against stored episode targets;
  // contributes to aux_loss when enabled.
  T EpisodeMarginLoss() {
    if (margin_weight_ <= 0.0 || margin_targets_.empty()) return T(0);
    FSSR_CHECK(static_cast<int64_t>(margin_targets_.size()) == v_.dim(0),
               ErrorCode::kShapeMismatch)
        << "margin targets/batch mismatch";
    nn::Tensor<T> norms = NormsOf(v_);
    margin_gnorms_ = nn::Tensor<T>();
    const T loss = nn::MarginLossFromNorms<T>(norms, margin_targets_, {},
                                              &margin_gnorms_);
    margin_norms_ = std::move(norms);
    return static_cast<T>(margin_weight_) * loss;
  }

  void AddEpisodeMarginGrad(nn::Tensor<T> *gv) {
    if (margin_weight_ <= 0.0 || margin_targets_.empty()) return;
    const int64_t N = v_.dim(0), C = v_.dim(1), d = v_.dim(2);
    const T w = static_cast<T>(margin_weight_);
    for (int64_t n = 0; n < N; ++n)
      for (int64_t c = 0; c < C; ++c) {
        const T norm = margin_norms_.ptr()[n * C + c];
        if (norm < T(1e-12)) continue;
        const T g = w * margin_gnorms_.ptr()[n * C + c] / norm;
        const T *vc = v_.ptr() + (n * C + c) * d;
        T *gvc = gv->ptr() + (n * C + c) * d;
        for (int64_t k = 0; k < d; ++k) gvc[k] += g * vc[k];
      }
  }

  static nn::Tensor<T> NormsOf(const nn::Tensor<T> &v) {
    const int64_t N = v.dim(0), C = v.dim(1), d = v.dim(2);
    nn::Tensor<T> norms({N, C});
    for (int64_t n = 0; n < N; ++n)
      for (int64_t c = 0; c < C; ++c) {
        const T *vc = v.ptr() + (n * C + c) * d;
        double s = 0.0;
        for (int64_t k = 0; k < d; ++k) s += static_cast<double>(vc[k]) * vc[k];
        norms.ptr()[n * C + c] = static_cast<T>(std::sqrt(s));
      }
    return norms;
  }

  ModelConfig cfg_;
  std::unique_ptr<CapsnetCore<T>> core_;
  nn::Tensor<T> v_, norms_;
  nn::L2Normalize<T> l2norm_;
  std::vector<int> margin_targets_;
  double margin_weight_ = 0.0;
  nn::Tensor<T> margin_norms_, margin_gnorms_;
};

template <typename T>
class CapsnetMa : public CapsnetM<T> {
 public:
  CapsnetMa(const ModelConfig &cfg, uint64_t seed) : CapsnetM<T>(cfg, seed) {
    Rng rng(SplitMix64(seed ^ 0x61655f696e697469ULL));
    ae_ = std::make_unique<ContractiveAutoencoder<T>>(
        "autoencoder",
        static_cast<int64_t>(cfg.n_classes) * cfg.capsule.class_capsule_dim,
        cfg.autoencoder.hidden_dim, cfg.autoencoder.code_dim);
    ae_->Init(&rng);
  }

  std::vector<nn::ParamRef<T>> Params() override {
    std::vector<nn::ParamRef<T>> p;
    this->core_->Collect(&p);
    for (auto &pr : ae_->Params()) p.push_back(pr);
    return p;
  }

  EmbedOutput<T> ForwardEmbed(const nn::Tensor<T> &x, bool train) override {
    this->v_ = this->core_->Forward(x, train);
    const int64_t N = this->v_.dim(0);
    nn::Tensor<T> z =
        this->v_.Reshaped({N, this->v_.dim(1) * this->v_.dim(2)});
    auto ae_out = ae_->Forward(z, train);
    EmbedOutput<T> out;
    out.recon_loss = ae_out.recon_loss;
    out.contractive_penalty = ae_out.contractive_penalty;
    out.aux_loss =
        static_cast<T>(this->cfg_.autoencoder.recon_weight) * ae_out.recon_loss +
        static_cast<T>(this->cfg_.autoencoder.contractive_weight) *
            ae_out.contractive_penalty +
        this->EpisodeMarginLoss();
    out.embeddings = this->cfg_.l2_normalize_embedding
                         ? l2norm_ma_.Forward(ae_out.code, train)
                         : ae_out.code;
    return out;
  }

  void BackwardEmbed(const nn::Tensor<T> &gembed) override {
    nn::Tensor<T> gcode = this->cfg_.l2_normalize_embedding
                              ? l2norm_ma_.Backward(gembed)
                              : gembed;
    nn::Tensor<T> gz = ae_->Backward(
        gcode, static_cast<T>(this->cfg_.autoencoder.recon_weight),
        static_cast<T>(this->cfg_.autoencoder.contractive_weight));
    nn::Tensor<T> gv = gz.Reshaped(this->v_.shape);
    this->AddEpisodeMarginGrad(&gv);
    this->core_->Backward(gv);
  }

  int embedding_dim() const override {
    return this->cfg_.autoencoder.code_dim;
  }

  void ReplaceHead(int new_n_classes, uint64_t seed) override {
    const bool same_width = new_n_classes == this->cfg_.n_classes;
    CapsnetM<T>::ReplaceHead(new_n_classes, seed);
    if (!same_width) {
      // The autoencoder input is tied to the capsule head width; a different
      // class count forces a fresh projection.
      Rng rng(SplitMix64(seed ^ 0x61655f696e697469ULL));
      ae_ = std::make_unique<ContractiveAutoencoder<T>>(
          "autoencoder",
          static_cast<int64_t>(new_n_classes) *
              this->cfg_.capsule.class_capsule_dim,
          this->cfg_.autoencoder.hidden_dim, this->cfg_.autoencoder.code_dim);
      ae_->Init(&rng);
    }
  }

  ContractiveAutoencoder<T> *autoencoder() { return ae_.get(); }

 private:
  std::unique_ptr<ContractiveAutoencoder<T>> ae_;
  nn::L2Normalize<T> l2norm_ma_;
};

}  // namespace models
}  // namespace fssr

#endif  // FSSR_MODELS_CAPSNET_H_
