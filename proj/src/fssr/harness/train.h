// fssr/harness/train.h
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

#ifndef FSSR_HARNESS_TRAIN_H_
#define FSSR_HARNESS_TRAIN_H_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fssr/data/cache.h"
#include "fssr/data/manifest.h"
#include "fssr/fewshot/evaluate.h"
#include "fssr/models/model.h"

namespace fssr {
namespace harness {

struct TrainConfig {
  enum class Optimizer { kSgdMomentum, kAdam };
  enum class LossKind { kCrossEntropy, kMargin, kPrototypical, kCapsmaComposite };

  Optimizer optimizer = Optimizer::kAdam;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  int batch_size = 32;
  int max_epochs = 10;
  int max_steps = 0;  // 0: bounded by epochs only
  uint64_t seed = 0;
  LossKind loss = LossKind::kCrossEntropy;

  // Composite weights for CapsuleNet-MA episodic training.
  double proto_weight = 1.0;
  double recon_weight = 0.1;
  double contractive_weight = 1e-4;
  // Optional margin loss on class-capsule norms during episodic training
  // (capsule nets only; 0 disables it).
  double margin_weight = 0.0;
  // Temperature on the unit-norm embeddings entering the prototypical loss.
  // Classification is scale-invariant; the scale only keeps the initial
  // distance logits in a narrow band so a fresh model starts near the
  // uniform distribution (loss ~ ln n_way).
  double embedding_scale = 0.5;

  // Episodic shape.
  int n_way = 5;
  int k_shot = 1;
  int n_query = 5;

  // Early stopping: stop once the running mean of train-episode accuracy
  // over monitor_window steps reaches early_stop_acc, or when the held-out
  // monitor fails to improve for `patience` evaluations.
  int monitor_window = 10;
  double early_stop_acc = 0.95;
  int val_every = 50;
  int val_episodes = 20;
  int patience = 5;
  double val_fraction = 0.1;

  // Re-crop training utterances each epoch instead of using the manifest's
  // frozen offsets (classification only).
  bool recrop_per_epoch = false;

  bool verbose = false;
};

struct ExperimentRecord {
  std::string experiment_tag;
  std::string arch;
  std::string dataset;
  std::map<std::string, double> metrics;
  int64_t parameter_count = 0;
  double wall_time_s = 0.0;
  std::string config_snapshot;  // resolved config, one "k = v" per line
};

std::string RecordToJson(const ExperimentRecord &r);
ExperimentRecord RecordFromJson(const std::string &line);
void AppendRecords(const std::string &path,
                   const std::vector<ExperimentRecord> &records);
std::vector<ExperimentRecord> ReadRecords(const std::string &path);

struct TrainResult {
  ExperimentRecord record;
  double final_loss = 0.0;
  double top1 = 0.0;
  double top5 = 0.0;
  int steps = 0;
};

struct EpisodicResult {
  ExperimentRecord record;
  double initial_loss = 0.0;  // first episode, before any update
  double final_train_acc = 0.0;
  double heldout_acc = 0.0;  // test-split episodes after training
  double heldout_ci95 = 0.0;
  int steps = 0;
};

// Fraction of rows whose true label ranks among the k best logits; ties are
// resolved by stable index order.
double TopkAccuracy(const nn::Tensor<float> &logits,
                    const std::vector<int> &labels, int k);

// Cross-entropy (VGG/ResNet) or margin (capsule nets) classification over
// the manifest's train split, then top-1/top-5 on the test split.
TrainResult TrainClassifier(const TrainConfig &cfg,
                            models::Model<float> *model,
                            const data::Manifest &manifest,
                            data::SpectrogramCache *cache);

// Prototypical-loss episodic training (plus the autoencoder terms for
// CapsuleNet-MA). Held-out accuracy is measured on test-split episodes with
// the trained, frozen model.
EpisodicResult EpisodicTrain(const TrainConfig &cfg,
                             models::Model<float> *model,
                             const data::Manifest &manifest,
                             data::SpectrogramCache *cache);

// Embeds every entry of the given split once (eval mode) and groups the
// vectors per speaker; episode evaluation then runs on cached embeddings.
fewshot::EmbeddingPool BuildEmbeddingPool(models::Model<float> *model,
                                          const data::Manifest &manifest,
                                          data::Split split,
                                          data::SpectrogramCache *cache,
                                          int batch_size = 8);

// Subsamples n train items per speaker (seeded), trains each architecture
// from scratch and records test accuracy per point of the sweep.
std::vector<ExperimentRecord> LimitedSamplesSweep(
    const TrainConfig &cfg, const std::vector<models::Arch> &archs,
    const data::Manifest &manifest, const std::vector<int> &samples_per_class,
    data::SpectrogramCache *cache, const std::string &dataset_tag);

// Seeded per-speaker subsample of train entries; test entries pass through.
data::Manifest SubsampleTrain(const data::Manifest &manifest,
                              int samples_per_class, uint64_t seed);

}  // namespace harness
}  // namespace fssr

#endif  // FSSR_HARNESS_TRAIN_H_
