// fssr/models/resnet34.h
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
// ResNet-34 with basic blocks [3,4,6,3] at 64/128/256/512 channels, adapted
// to single-channel spectrograms: conv1 7x7/64/s2, 3x3 max pool /s2, the
// residual stages, then fc1 (a hx1/512 convolution collapsing the remaining
// frequency extent), average pooling over time and fc2 to n_classes. Block
// convolutions are bias-free with batch norm, as usual. The few-shot
// embedding is the 512-d fc1 activation after time pooling.

#ifndef FSSR_MODELS_RESNET34_H_
#define FSSR_MODELS_RESNET34_H_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fssr/models/model.h"
#include "fssr/nn/layers.h"

namespace fssr {
namespace models {

template <typename T>
class BasicBlock {
 public:
  BasicBlock(const std::string &name, int in_ch, int out_ch, int stride)
      : conv1_(name + ".conv1", in_ch, out_ch, 3, 3, stride, stride, 1, 1, false),
        bn1_(name + ".bn1", out_ch),
        conv2_(name + ".conv2", out_ch, out_ch, 3, 3, 1, 1, 1, 1, false),
        bn2_(name + ".bn2", out_ch),
        has_downsample_(stride != 1 || in_ch != out_ch) {
    if (has_downsample_) {
      dconv_ = std::make_unique<nn::Conv2d<T>>(
          name + ".downsample.conv", in_ch, out_ch, 1, 1, stride, stride, 0, 0,
          false);
      dbn_ = std::make_unique<nn::BatchNorm2d<T>>(name + ".downsample.bn",
                                                  out_ch);
    }
  }

  void Init(Rng *rng) {
    conv1_.Init(rng);
    conv2_.Init(rng);
    if (has_downsample_) dconv_->Init(rng);
  }

  nn::Tensor<T> Forward(const nn::Tensor<T> &x, bool train) {
    nn::Tensor<T> h = relu1_.Forward(bn1_.Forward(conv1_.Forward(x, train), train), train);
    h = bn2_.Forward(conv2_.Forward(h, train), train);
    nn::Tensor<T> idn =
        has_downsample_ ? dbn_->Forward(dconv_->Forward(x, train), train) : x;
    FSSR_CHECK(h.shape == idn.shape, ErrorCode::kShapeMismatch)
        << "residual branch shapes diverge";
    for (int64_t i = 0; i < h.numel(); ++i)
      h.data[static_cast<size_t>(i)] += idn.data[static_cast<size_t>(i)];
    return relu2_.Forward(h, train);
  }

  nn::Tensor<T> Backward(const nn::Tensor<T> &gy) {
    nn::Tensor<T> g = relu2_.Backward(gy);
    nn::Tensor<T> gmain = conv1_.Backward(
        bn1_.Backward(relu1_.Backward(conv2_.Backward(bn2_.Backward(g)))));
    if (has_downsample_) {
      nn::Tensor<T> gshort = dconv_->Backward(dbn_->Backward(g));
      for (int64_t i = 0; i < gmain.numel(); ++i)
        gmain.data[static_cast<size_t>(i)] +=
            gshort.data[static_cast<size_t>(i)];
      return gmain;
    }
    for (int64_t i = 0; i < gmain.numel(); ++i)
      gmain.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(i)];
    return gmain;
  }

  void Collect(std::vector<nn::ParamRef<T>> *p) {
    conv1_.Collect(p);
    bn1_.Collect(p);
    conv2_.Collect(p);
    bn2_.Collect(p);
    if (has_downsample_) {
      dconv_->Collect(p);
      dbn_->Collect(p);
    }
  }
  void CollectBuffers(std::vector<nn::ParamRef<T>> *p) {
    bn1_.CollectBuffers(p);
    bn2_.CollectBuffers(p);
    if (has_downsample_) dbn_->CollectBuffers(p);
  }

  nn::Conv2d<T> *conv2() { return &conv2_; }

 private:
  nn::Conv2d<T> conv1_, conv2_;
  nn::BatchNorm2d<T> bn1_, bn2_;
  nn::ReLU<T> relu1_, relu2_;
  bool has_downsample_;
  std::unique_ptr<nn::Conv2d<T>> dconv_;
  std::unique_ptr<nn::BatchNorm2d<T>> dbn_;
};

template <typename T>
class Resnet34 : public Model<T> {
 public:
  Resnet34(const ModelConfig &cfg, uint64_t seed) : cfg_(cfg) {
    FSSR_CHECK(cfg.n_classes >= 2, ErrorCode::kInvalidArgument)
        << "n_classes must be >= 2";
    conv1_ = std::make_unique<nn::Conv2d<T>>("conv1", 1, 64, 7, 7, 2, 2, 3, 3,
                                             false);
    bn1_ = std::make_unique<nn::BatchNorm2d<T>>("bn1", 64);
    pool1_ = std::make_unique<nn::MaxPool2d<T>>(3, 3, 2, 2, 1, 1);

    const int counts[4] = {3, 4, 6, 3};
    const int chans[4] = {64, 128, 256, 512};
    int in_ch = 64;
    for (int s = 0; s < 4; ++s) {
      for (int b = 0; b < counts[s]; ++b) {
        const int stride = (s > 0 && b == 0) ? 2 : 1;
        blocks_.push_back(std::make_unique<BasicBlock<T>>(
            "layer" + std::to_string(s + 1) + "." + std::to_string(b), in_ch,
            chans[s], stride));
        in_ch = chans[s];
      }
    }

    fc1_kh_ = static_cast<int>(HeightAfterStages(cfg.input_bins));
    fc1_ = std::make_unique<nn::Conv2d<T>>("fc1", 512, 512, fc1_kh_, 1, 1, 1,
                                           0, 0, true);
    bn_fc1_ = std::make_unique<nn::BatchNorm2d<T>>("bn_fc1", 512);
    fc2_ = std::make_unique<nn::Linear<T>>("fc2", 512, cfg.n_classes, true);

    Rng rng(seed);
    conv1_->Init(&rng);
    for (auto &b : blocks_) b->Init(&rng);
    fc1_->Init(&rng);
    fc2_->Init(&rng);
  }

  static int64_t HeightAfterStages(int64_t bins) {
    int64_t h = nn::ConvOutDim(bins, 7, 2, 3);  // conv1
    h = nn::ConvOutDim(h, 3, 2, 1);             // pool1
    h = nn::ConvOutDim(h, 3, 2, 1);             // stage2 first block
    h = nn::ConvOutDim(h, 3, 2, 1);             // stage3
    return nn::ConvOutDim(h, 3, 2, 1);          // stage4
  }

  const ModelConfig &config() const override { return cfg_; }

  std::vector<nn::ParamRef<T>> Params() override {
    std::vector<nn::ParamRef<T>> p;
    conv1_->Collect(&p);
    bn1_->Collect(&p);
    for (auto &b : blocks_) b->Collect(&p);
    fc1_->Collect(&p);
    bn_fc1_->Collect(&p);
    fc2_->Collect(&p);
    return p;
  }

  std::vector<nn::ParamRef<T>> Buffers() override {
    std::vector<nn::ParamRef<T>> p;
    bn1_->CollectBuffers(&p);
    for (auto &b : blocks_) b->CollectBuffers(&p);
    bn_fc1_->CollectBuffers(&p);
    return p;
  }

  nn::Tensor<T> ForwardLogits(const nn::Tensor<T> &x, bool train) override {
    nn::Tensor<T> h = Trunk(x, train);  // {N, 512}
    last_was_logits_ = true;
    return fc2_->Forward(h, train);
  }

  void BackwardLogits(const nn::Tensor<T> &glogits) override {
    FSSR_CHECK(last_was_logits_, ErrorCode::kInternal)
        << "BackwardLogits without matching forward";
    TrunkBackward(fc2_->Backward(glogits));
  }

  EmbedOutput<T> ForwardEmbed(const nn::Tensor<T> &x, bool train) override {
    nn::Tensor<T> h = Trunk(x, train);
    last_was_logits_ = false;
    EmbedOutput<T> out;
    out.embeddings =
        cfg_.l2_normalize_embedding ? l2norm_.Forward(h, train) : h;
    return out;
  }

  void BackwardEmbed(const nn::Tensor<T> &gembed) override {
    FSSR_CHECK(!last_was_logits_, ErrorCode::kInternal)
        << "BackwardEmbed without matching forward";
    TrunkBackward(cfg_.l2_normalize_embedding ? l2norm_.Backward(gembed)
                                              : gembed);
  }

  int embedding_dim() const override { return 512; }

  void ReplaceHead(int new_n_classes, uint64_t seed) override {
    cfg_.n_classes = new_n_classes;
    fc2_ = std::make_unique<nn::Linear<T>>("fc2", 512, new_n_classes, true);
    Rng rng(seed);
    fc2_->Init(&rng);
  }

  BasicBlock<T> *block(int i) { return blocks_[static_cast<size_t>(i)].get(); }
  int n_blocks() const { return static_cast<int>(blocks_.size()); }

 private:
  nn::Tensor<T> Trunk(const nn::Tensor<T> &x, bool train) {
    FSSR_CHECK(x.ndim() == 4 && x.dim(1) == 1 && x.dim(2) == cfg_.input_bins,
               ErrorCode::kShapeMismatch)
        << "resnet34 expects {N,1," << cfg_.input_bins << ",frames}";
    nn::Tensor<T> h = relu1_.Forward(bn1_->Forward(conv1_->Forward(x, train), train), train);
    h = pool1_->Forward(h, train);
    for (auto &b : blocks_) h = b->Forward(h, train);
    h = relu_fc1_.Forward(bn_fc1_->Forward(fc1_->Forward(h, train), train), train);
    h = timepool_.Forward(h, train);  // {N, 512, 1, 1}
    FSSR_CHECK(h.AllFinite(), ErrorCode::kNonFiniteActivation)
        << "resnet34 produced non-finite activations";
    return h.Reshaped({h.dim(0), int64_t(512)});
  }

  void TrunkBackward(const nn::Tensor<T> &gtop) {
    nn::Tensor<T> g = gtop.Reshaped({gtop.dim(0), int64_t(512), 1, 1});
    g = timepool_.Backward(g);
    g = fc1_->Backward(bn_fc1_->Backward(relu_fc1_.Backward(g)));
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it)
      g = (*it)->Backward(g);
    g = pool1_->Backward(g);
    conv1_->Backward(bn1_->Backward(relu1_.Backward(g)));
  }

  ModelConfig cfg_;
  int fc1_kh_ = 4;
  bool last_was_logits_ = false;

  std::unique_ptr<nn::Conv2d<T>> conv1_, fc1_;
  std::unique_ptr<nn::BatchNorm2d<T>> bn1_, bn_fc1_;
  std::unique_ptr<nn::MaxPool2d<T>> pool1_;
  std::vector<std::unique_ptr<BasicBlock<T>>> blocks_;
  nn::ReLU<T> relu1_, relu_fc1_;
  nn::GlobalTimeAvgPool<T> timepool_;
  std::unique_ptr<nn::Linear<T>> fc2_;
  nn::L2Normalize<T> l2norm_;
};

}  // namespace models
}  // namespace fssr

#endif  // FSSR_MODELS_RESNET34_H_
