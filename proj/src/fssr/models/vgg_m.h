// fssr/models/vgg_m.h
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
// VGG-M adapted to spectrogram input:
//   conv1 7x7/96/s2 - mpool1 3x3/s2 - conv2 5x5/256/s2 - mpool2 3x3/s2 -
//   conv3 3x3/384 - conv4 3x3/256 - conv5 3x3/256 - mpool5 5x3/s3x2 -
//   fc6 (hx1)/4096 - apool6 1xn - fc7 1024 - fc8 n_classes
// Convolutions carry biases and batch norm; fc6's kernel height follows the
// frequency extent left after mpool5 (1 for 128-bin input, 9 for 512-bin).
// The few-shot embedding is the fc7 activation.

#ifndef FSSR_MODELS_VGG_M_H_
#define FSSR_MODELS_VGG_M_H_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fssr/models/model.h"
#include "fssr/nn/layers.h"

namespace fssr {
namespace models {

template <typename T>
class VggM : public Model<T> {
 public:
  VggM(const ModelConfig &cfg, uint64_t seed) : cfg_(cfg) {
    FSSR_CHECK(cfg.n_classes >= 2, ErrorCode::kInvalidArgument)
        << "n_classes must be >= 2";
    const int64_t h5 = HeightAfterConvStack(cfg.input_bins);
    fc6_kh_ = static_cast<int>(h5);

    conv1_ = std::make_unique<nn::Conv2d<T>>("conv1", 1, 96, 7, 7, 2, 2, 0, 0, true);
    bn1_ = std::make_unique<nn::BatchNorm2d<T>>("bn1", 96);
    mpool1_ = std::make_unique<nn::MaxPool2d<T>>(3, 3, 2, 2);
    conv2_ = std::make_unique<nn::Conv2d<T>>("conv2", 96, 256, 5, 5, 2, 2, 0, 0, true);
    bn2_ = std::make_unique<nn::BatchNorm2d<T>>("bn2", 256);
    mpool2_ = std::make_unique<nn::MaxPool2d<T>>(3, 3, 2, 2);
    conv3_ = std::make_unique<nn::Conv2d<T>>("conv3", 256, 384, 3, 3, 1, 1, 1, 1, true);
    bn3_ = std::make_unique<nn::BatchNorm2d<T>>("bn3", 384);
    conv4_ = std::make_unique<nn::Conv2d<T>>("conv4", 384, 256, 3, 3, 1, 1, 1, 1, true);
    bn4_ = std::make_unique<nn::BatchNorm2d<T>>("bn4", 256);
    conv5_ = std::make_unique<nn::Conv2d<T>>("conv5", 256, 256, 3, 3, 1, 1, 1, 1, true);
    bn5_ = std::make_unique<nn::BatchNorm2d<T>>("bn5", 256);
    mpool5_ = std::make_unique<nn::MaxPool2d<T>>(5, 3, 3, 2);
    fc6_ = std::make_unique<nn::Conv2d<T>>("fc6", 256, 4096, fc6_kh_, 1, 1, 1, 0, 0, true);
    bn6_ = std::make_unique<nn::BatchNorm2d<T>>("bn6", 4096);
    fc7_ = std::make_unique<nn::Conv2d<T>>("fc7", 4096, 1024, 1, 1, 1, 1, 0, 0, true);
    bn7_ = std::make_unique<nn::BatchNorm2d<T>>("bn7", 1024);
    fc8_ = std::make_unique<nn::Conv2d<T>>("fc8", 1024, cfg.n_classes, 1, 1, 1, 1, 0, 0, true);

    Rng rng(seed);
    conv1_->Init(&rng);
    conv2_->Init(&rng);
    conv3_->Init(&rng);
    conv4_->Init(&rng);
    conv5_->Init(&rng);
    fc6_->Init(&rng);
    fc7_->Init(&rng);
    fc8_->Init(&rng);
  }

  static int64_t HeightAfterConvStack(int64_t bins) {
    int64_t h = nn::ConvOutDim(bins, 7, 2, 0);  // conv1
    h = nn::ConvOutDim(h, 3, 2, 0);             // mpool1
    h = nn::ConvOutDim(h, 5, 2, 0);             // conv2
    h = nn::ConvOutDim(h, 3, 2, 0);             // mpool2
    h = nn::ConvOutDim(h, 3, 1, 1);             // conv3..conv5 keep height
    h = nn::ConvOutDim(h, 3, 1, 1);
    h = nn::ConvOutDim(h, 3, 1, 1);
    return nn::ConvOutDim(h, 5, 3, 0);          // mpool5
  }

  const ModelConfig &config() const override { return cfg_; }

  std::vector<nn::ParamRef<T>> Params() override {
    std::vector<nn::ParamRef<T>> p;
    conv1_->Collect(&p);
    bn1_->Collect(&p);
    conv2_->Collect(&p);
    bn2_->Collect(&p);
    conv3_->Collect(&p);
    bn3_->Collect(&p);
    conv4_->Collect(&p);
    bn4_->Collect(&p);
    conv5_->Collect(&p);
    bn5_->Collect(&p);
    fc6_->Collect(&p);
    bn6_->Collect(&p);
    fc7_->Collect(&p);
    bn7_->Collect(&p);
    fc8_->Collect(&p);
    return p;
  }

  std::vector<nn::ParamRef<T>> Buffers() override {
    std::vector<nn::ParamRef<T>> p;
    bn1_->CollectBuffers(&p);
    bn2_->CollectBuffers(&p);
    bn3_->CollectBuffers(&p);
    bn4_->CollectBuffers(&p);
    bn5_->CollectBuffers(&p);
    bn6_->CollectBuffers(&p);
    bn7_->CollectBuffers(&p);
    return p;
  }

  nn::Tensor<T> ForwardLogits(const nn::Tensor<T> &x, bool train) override {
    nn::Tensor<T> h = Trunk(x, train);
    h = fc8_->Forward(h, train);  // {N, C, 1, 1}
    last_was_logits_ = true;
    const int64_t N = h.dim(0);
    return h.Reshaped({N, static_cast<int64_t>(cfg_.n_classes)});
  }

  void BackwardLogits(const nn::Tensor<T> &glogits) override {
    FSSR_CHECK(last_was_logits_, ErrorCode::kInternal)
        << "BackwardLogits without matching forward";
    nn::Tensor<T> g =
        glogits.Reshaped({glogits.dim(0), glogits.dim(1), 1, 1});
    g = fc8_->Backward(g);
    TrunkBackward(g);
  }

  EmbedOutput<T> ForwardEmbed(const nn::Tensor<T> &x, bool train) override {
    nn::Tensor<T> h = Trunk(x, train);  // {N, 1024, 1, 1}
    last_was_logits_ = false;
    const int64_t N = h.dim(0);
    nn::Tensor<T> flat = h.Reshaped({N, int64_t(1024)});
    EmbedOutput<T> out;
    out.embeddings =
        cfg_.l2_normalize_embedding ? l2norm_.Forward(flat, train) : flat;
    return out;
  }

  void BackwardEmbed(const nn::Tensor<T> &gembed) override {
    FSSR_CHECK(!last_was_logits_, ErrorCode::kInternal)
        << "BackwardEmbed without matching forward";
    nn::Tensor<T> g = cfg_.l2_normalize_embedding
                          ? l2norm_.Backward(gembed)
                          : gembed;
    TrunkBackward(g.Reshaped({g.dim(0), g.dim(1), 1, 1}));
  }

  int embedding_dim() const override { return 1024; }

  void ReplaceHead(int new_n_classes, uint64_t seed) override {
    cfg_.n_classes = new_n_classes;
    fc8_ = std::make_unique<nn::Conv2d<T>>("fc8", 1024, new_n_classes, 1, 1, 1,
                                           1, 0, 0, true);
    Rng rng(seed);
    fc8_->Init(&rng);
  }

 private:
  // Shared stack through fc7's activation, {N, 1024, 1, 1}.
  nn::Tensor<T> Trunk(const nn::Tensor<T> &x, bool train) {
    FSSR_CHECK(x.ndim() == 4 && x.dim(1) == 1 && x.dim(2) == cfg_.input_bins,
               ErrorCode::kShapeMismatch)
        << "vgg_m expects {N,1," << cfg_.input_bins << ",frames}";
    nn::Tensor<T> h = relu1_.Forward(bn1_->Forward(conv1_->Forward(x, train), train), train);
    h = mpool1_->Forward(h, train);
    h = relu2_.Forward(bn2_->Forward(conv2_->Forward(h, train), train), train);
    h = mpool2_->Forward(h, train);
    h = relu3_.Forward(bn3_->Forward(conv3_->Forward(h, train), train), train);
    h = relu4_.Forward(bn4_->Forward(conv4_->Forward(h, train), train), train);
    h = relu5_.Forward(bn5_->Forward(conv5_->Forward(h, train), train), train);
    h = mpool5_->Forward(h, train);
    h = relu6_.Forward(bn6_->Forward(fc6_->Forward(h, train), train), train);
    h = apool6_.Forward(h, train);
    h = relu7_.Forward(bn7_->Forward(fc7_->Forward(h, train), train), train);
    FSSR_CHECK(h.AllFinite(), ErrorCode::kNonFiniteActivation)
        << "vgg_m produced non-finite activations";
    return h;
  }

  void TrunkBackward(const nn::Tensor<T> &gtop) {
    nn::Tensor<T> g = fc7_->Backward(bn7_->Backward(relu7_.Backward(gtop)));
    g = apool6_.Backward(g);
    g = fc6_->Backward(bn6_->Backward(relu6_.Backward(g)));
    g = mpool5_->Backward(g);
    g = conv5_->Backward(bn5_->Backward(relu5_.Backward(g)));
    g = conv4_->Backward(bn4_->Backward(relu4_.Backward(g)));
    g = conv3_->Backward(bn3_->Backward(relu3_.Backward(g)));
    g = mpool2_->Backward(g);
    g = conv2_->Backward(bn2_->Backward(relu2_.Backward(g)));
    g = mpool1_->Backward(g);
    conv1_->Backward(bn1_->Backward(relu1_.Backward(g)));
  }

  ModelConfig cfg_;
  int fc6_kh_ = 1;
  bool last_was_logits_ = false;

  std::unique_ptr<nn::Conv2d<T>> conv1_, conv2_, conv3_, conv4_, conv5_, fc6_,
      fc7_, fc8_;
  std::unique_ptr<nn::BatchNorm2d<T>> bn1_, bn2_, bn3_, bn4_, bn5_, bn6_, bn7_;
  std::unique_ptr<nn::MaxPool2d<T>> mpool1_, mpool2_, mpool5_;
  nn::ReLU<T> relu1_, relu2_, relu3_, relu4_, relu5_, relu6_, relu7_;
  nn::GlobalTimeAvgPool<T> apool6_;
  nn::L2Normalize<T> l2norm_;
};

}  // namespace models
}  // namespace fssr

#endif  // FSSR_MODELS_VGG_M_H_
