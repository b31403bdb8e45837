// fssr/models/model.h
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

#ifndef FSSR_MODELS_MODEL_H_
#define FSSR_MODELS_MODEL_H_

#include <memory>
#include <string>
#include <vector>

#include "fssr/common/error.h"
#include "fssr/nn/optim.h"
#include "fssr/nn/tensor.h"

namespace fssr {
namespace models {

enum class Arch { kVggM, kResnet34, kCapsnetM, kCapsnetMa };

Arch ArchFromString(const std::string &s);
const char *ArchToString(Arch a);

struct CapsuleConfig {
  int primary_capsule_dim = 8;
  int class_capsule_dim = 16;
  int routing_iters = 3;
  int conv_stride = 6;     // first convolution layer
  int primary_stride = 6;  // primary capsule convolution
  int conv_channels = 256;
  int primary_channels = 32;  // capsule channel groups of primary_capsule_dim
  int conv_kernel = 9;
  int primary_kernel = 9;
};

struct AutoencoderConfig {
  int hidden_dim = 512;
  int code_dim = 256;  // M, the common embedding dimension
  double recon_weight = 1.0;
  double contractive_weight = 1e-4;
};

struct ModelConfig {
  Arch arch = Arch::kVggM;
  int n_classes = 0;
  // Networks are built for this input; VGG/ResNet pool over time and accept
  // any frame count their strides admit, the capsule nets require it.
  int input_bins = 128;
  int input_frames = 300;
  // Unit-normalize embeddings used for prototype distances.
  bool l2_normalize_embedding = true;
  CapsuleConfig capsule;
  AutoencoderConfig autoencoder;
};

std::string ModelConfigToJson(const ModelConfig &cfg);
ModelConfig ModelConfigFromJson(const std::string &json_text);

template <typename T>
struct EmbedOutput {
  nn::Tensor<T> embeddings;  // {N, M}
  // CapsuleNet-MA reports its autoencoder terms; zero for the other nets.
  T recon_loss = T(0);
  T contractive_penalty = T(0);
  T aux_loss = T(0);  // recon_weight * recon + contractive_weight * penalty
};

// Common interface over the four backbones. ForwardLogits yields class
// scores ({N, n_classes}; capsule norms for the capsule nets), ForwardEmbed
// yields the few-shot embedding. Backward passes consume the gradient of the
// matching forward and accumulate parameter gradients.
template <typename T>
class Model {
 public:
  virtual ~Model() = default;

  virtual const ModelConfig &config() const = 0;
  virtual std::vector<nn::ParamRef<T>> Params() = 0;
  // Non-trainable state (batch-norm running statistics).
  virtual std::vector<nn::ParamRef<T>> Buffers() { return {}; }

  virtual nn::Tensor<T> ForwardLogits(const nn::Tensor<T> &x, bool train) = 0;
  virtual void BackwardLogits(const nn::Tensor<T> &glogits) = 0;

  virtual EmbedOutput<T> ForwardEmbed(const nn::Tensor<T> &x, bool train) = 0;
  virtual void BackwardEmbed(const nn::Tensor<T> &gembed) = 0;

  // Optional episodic side loss. The capsule nets can keep the margin loss
  // on their class capsules during prototypical training (off by default;
  // targets are global class indices for the next ForwardEmbed batch).
  // Other architectures ignore it.
  virtual void SetEpisodeMarginTargets(const std::vector<int> & /*targets*/,
                                       double /*weight*/) {}
  virtual void ClearEpisodeMarginTargets() {}

  virtual int embedding_dim() const = 0;

  // Swaps the classification head for a new class count, keeping the
  // backbone; used by cross-corpus fine-tuning.
  virtual void ReplaceHead(int new_n_classes, uint64_t seed) = 0;

  void ZeroGrad() {
    auto params = Params();
    nn::ZeroGrads(params);
  }
};

template <typename T>
int64_t CountParameters(Model<T> *model) {
  auto params = model->Params();
  return nn::CountParameters(params);
}

}  // namespace models
}  // namespace fssr

#endif  // FSSR_MODELS_MODEL_H_
