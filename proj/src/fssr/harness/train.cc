// fssr/harness/train.cc
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

#include "fssr/harness/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <iostream>

#include "fssr/common/error.h"
#include "fssr/data/episode.h"
#include "fssr/models/factory.h"
#include "fssr/nn/capsule.h"
#include "fssr/nn/losses.h"
#include "fssr/nn/optim.h"
#include "json.hpp"

namespace fssr {
namespace harness {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// Stack spectrograms into an {N, 1, bins, frames} batch.
nn::Tensor<float> MakeBatch(
    const std::vector<const data::ManifestEntry *> &entries,
    const std::vector<int> &which, data::SpectrogramCache *cache, Rng *rng) {
  FSSR_CHECK(!which.empty(), ErrorCode::kEmptyInput) << "empty batch";
  std::shared_ptr<const dsp::Spectrogram> first =
      cache->Get(*entries[static_cast<size_t>(which[0])], rng);
  const int64_t bins = first->bins, frames = first->frames;
  nn::Tensor<float> batch(
      {static_cast<int64_t>(which.size()), 1, bins, frames});
  for (size_t i = 0; i < which.size(); ++i) {
    std::shared_ptr<const dsp::Spectrogram> spec =
        i == 0 ? first : cache->Get(*entries[static_cast<size_t>(which[i])], rng);
    FSSR_CHECK(spec->bins == bins && spec->frames == frames,
               ErrorCode::kShapeMismatch)
        << "spectrogram shapes differ within a batch";
    std::copy(spec->values.begin(), spec->values.end(),
              batch.ptr() + static_cast<int64_t>(i) * bins * frames);
  }
  return batch;
}

struct ParamSnapshot {
  std::vector<std::vector<float>> values;
  void Capture(models::Model<float> *model) {
    values.clear();
    for (const auto &p : model->Params()) values.push_back(p.value->data);
  }
  void Restore(models::Model<float> *model) const {
    auto params = model->Params();
    FSSR_CHECK(params.size() == values.size(), ErrorCode::kInternal)
        << "snapshot size mismatch";
    for (size_t i = 0; i < params.size(); ++i)
      params[i].value->data = values[i];
  }
  bool empty() const { return values.empty(); }
};

class OptimizerBox {
 public:
  OptimizerBox(const TrainConfig &cfg) {
    if (cfg.optimizer == TrainConfig::Optimizer::kAdam)
      adam_ = std::make_unique<nn::Adam<float>>(
          static_cast<float>(cfg.learning_rate));
    else
      sgd_ = std::make_unique<nn::SgdMomentum<float>>(
          static_cast<float>(cfg.learning_rate),
          static_cast<float>(cfg.momentum));
  }
  void Step(const std::vector<nn::ParamRef<float>> &params) {
    if (adam_)
      adam_->Step(params);
    else
      sgd_->Step(params);
  }

 private:
  std::unique_ptr<nn::Adam<float>> adam_;
  std::unique_ptr<nn::SgdMomentum<float>> sgd_;
};

bool IsCapsuleLoss(TrainConfig::LossKind k) {
  return k == TrainConfig::LossKind::kMargin;
}

}  // namespace

double TopkAccuracy(const nn::Tensor<float> &logits,
                    const std::vector<int> &labels, int k) {
  FSSR_CHECK(logits.ndim() == 2, ErrorCode::kShapeMismatch)
      << "logits must be {B, C}";
  const int64_t B = logits.dim(0), C = logits.dim(1);
  FSSR_CHECK(k >= 1 && k <= C, ErrorCode::kShapeMismatch)
      << "k " << k << " out of range for " << C << " classes";
  FSSR_CHECK(static_cast<int64_t>(labels.size()) == B,
             ErrorCode::kShapeMismatch)
      << "labels/batch mismatch";
  int hits = 0;
  for (int64_t b = 0; b < B; ++b) {
    const float *row = logits.ptr() + b * C;
    const int y = labels[static_cast<size_t>(b)];
    // Stable rank: entries strictly greater, plus equal entries at a lower
    // index, come first.
    int rank = 0;
    for (int64_t c = 0; c < C; ++c) {
      if (row[c] > row[y] || (row[c] == row[y] && c < y)) ++rank;
    }
    if (rank < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(B);
}

TrainResult TrainClassifier(const TrainConfig &cfg,
                            models::Model<float> *model,
                            const data::Manifest &manifest,
                            data::SpectrogramCache *cache) {
  const auto start = Clock::now();
  FSSR_CHECK(model->config().n_classes == manifest.n_speakers,
             ErrorCode::kConfigMismatch)
      << "model has " << model->config().n_classes << " classes, manifest "
      << manifest.n_speakers << " speakers";

  const auto train_entries = manifest.EntriesFor(data::Split::kTrain);
  FSSR_CHECK(!train_entries.empty(), ErrorCode::kInsufficientData)
      << "manifest has no train split";

  Rng rng(DeriveSeed(cfg.seed, 0xC1A55ULL));
  OptimizerBox opt(cfg);
  auto params = model->Params();

  ParamSnapshot last_good;
  last_good.Capture(model);

  std::vector<int> order(train_entries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  TrainResult result;
  double loss_value = 0.0;
  int steps = 0;
  bool stop = false;
  for (int epoch = 0; epoch < cfg.max_epochs && !stop; ++epoch) {
    rng.Shuffle(&order);
    for (size_t off = 0; off < order.size() && !stop;
         off += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(),
                                  off + static_cast<size_t>(cfg.batch_size));
      std::vector<int> idx(order.begin() + static_cast<int64_t>(off),
                           order.begin() + static_cast<int64_t>(end));
      std::vector<int> targets;
      for (int i : idx)
        targets.push_back(train_entries[static_cast<size_t>(i)]->speaker_index);

      nn::Tensor<float> batch = MakeBatch(
          train_entries, idx, cache, cfg.recrop_per_epoch ? &rng : nullptr);
      nn::Tensor<float> logits = model->ForwardLogits(batch, /*train=*/true);

      nn::Tensor<float> glogits;
      float loss;
      if (IsCapsuleLoss(cfg.loss)) {
        loss = nn::MarginLossFromNorms<float>(logits, targets, {}, &glogits);
      } else {
        loss = nn::CrossEntropyLoss<float>(logits, targets, &glogits);
      }
      if (!std::isfinite(loss)) {
        last_good.Restore(model);
        FSSR_RAISE(ErrorCode::kDivergenceDetected)
            << "loss became non-finite at step " << steps
            << "; parameters rolled back to the last stable epoch";
      }
      loss_value = loss;

      model->ZeroGrad();
      model->BackwardLogits(glogits);
      opt.Step(params);
      ++steps;
      if (cfg.verbose && steps % 10 == 0)
        std::cerr << "step " << steps << " loss " << loss << "\n";
      if (cfg.max_steps > 0 && steps >= cfg.max_steps) stop = true;
    }
    last_good.Capture(model);
  }

  // Test metrics.
  const auto test_entries = manifest.EntriesFor(data::Split::kTest);
  double top1 = 0.0, top5 = 0.0;
  int64_t n_test = 0;
  if (!test_entries.empty()) {
    std::vector<int> idx;
    std::vector<int> targets;
    const int eval_bs = std::max(1, cfg.batch_size);
    double hit1 = 0.0, hit5 = 0.0;
    for (size_t off = 0; off < test_entries.size();
         off += static_cast<size_t>(eval_bs)) {
      const size_t end =
          std::min(test_entries.size(), off + static_cast<size_t>(eval_bs));
      idx.clear();
      targets.clear();
      for (size_t i = off; i < end; ++i) {
        idx.push_back(static_cast<int>(i));
        targets.push_back(test_entries[i]->speaker_index);
      }
      nn::Tensor<float> batch = MakeBatch(test_entries, idx, cache, nullptr);
      nn::Tensor<float> logits = model->ForwardLogits(batch, /*train=*/false);
      const double n = static_cast<double>(idx.size());
      hit1 += TopkAccuracy(logits, targets, 1) * n;
      hit5 += TopkAccuracy(logits, targets,
                           std::min<int>(5, model->config().n_classes)) * n;
      n_test += static_cast<int64_t>(idx.size());
    }
    top1 = hit1 / static_cast<double>(n_test);
    top5 = hit5 / static_cast<double>(n_test);
  }

  result.final_loss = loss_value;
  result.top1 = top1;
  result.top5 = top5;
  result.steps = steps;
  result.record.arch = models::ArchToString(model->config().arch);
  result.record.dataset = manifest.protocol_tag;
  result.record.parameter_count = models::CountParameters(model);
  result.record.metrics["top1"] = top1;
  result.record.metrics["top5"] = top5;
  result.record.metrics["final_loss"] = loss_value;
  result.record.metrics["steps"] = steps;
  result.record.wall_time_s = Seconds(start, Clock::now());
  return result;
}

fewshot::EmbeddingPool BuildEmbeddingPool(models::Model<float> *model,
                                          const data::Manifest &manifest,
                                          data::Split split,
                                          data::SpectrogramCache *cache,
                                          int batch_size) {
  const auto entries = manifest.EntriesFor(split);
  FSSR_CHECK(!entries.empty(), ErrorCode::kInsufficientData)
      << "manifest has no entries for the requested split";

  fewshot::EmbeddingPool pool;
  pool.dim = model->embedding_dim();
  pool.per_class.resize(static_cast<size_t>(manifest.n_speakers));

  std::vector<int> idx;
  for (size_t off = 0; off < entries.size();
       off += static_cast<size_t>(batch_size)) {
    const size_t end =
        std::min(entries.size(), off + static_cast<size_t>(batch_size));
    idx.clear();
    for (size_t i = off; i < end; ++i) idx.push_back(static_cast<int>(i));
    nn::Tensor<float> batch = MakeBatch(entries, idx, cache, nullptr);
    models::EmbedOutput<float> out = model->ForwardEmbed(batch, /*train=*/false);
    const int64_t M = out.embeddings.dim(1);
    for (size_t i = 0; i < idx.size(); ++i) {
      const float *row = out.embeddings.ptr() + static_cast<int64_t>(i) * M;
      pool.per_class[static_cast<size_t>(entries[off + i]->speaker_index)]
          .emplace_back(row, row + M);
    }
  }
  return pool;
}

namespace {

// Train-split episode pool: per-speaker entry indices.
std::vector<std::vector<int>> GroupBySpeaker(
    const std::vector<const data::ManifestEntry *> &entries, int n_speakers) {
  std::vector<std::vector<int>> per_class(static_cast<size_t>(n_speakers));
  for (size_t i = 0; i < entries.size(); ++i)
    per_class[static_cast<size_t>(entries[i]->speaker_index)].push_back(
        static_cast<int>(i));
  return per_class;
}

}  // namespace

EpisodicResult EpisodicTrain(const TrainConfig &cfg,
                             models::Model<float> *model,
                             const data::Manifest &manifest,
                             data::SpectrogramCache *cache) {
  const auto start = Clock::now();
  const auto train_entries = manifest.EntriesFor(data::Split::kTrain);
  FSSR_CHECK(!train_entries.empty(), ErrorCode::kInsufficientData)
      << "manifest has no train split";

  std::vector<std::vector<int>> per_class =
      GroupBySpeaker(train_entries, manifest.n_speakers);

  // Hold out a validation slice per speaker when the pool is rich enough.
  const int need = cfg.k_shot + cfg.n_query;
  std::vector<std::vector<int>> train_pool(per_class.size());
  std::vector<std::vector<int>> val_pool(per_class.size());
  for (size_t c = 0; c < per_class.size(); ++c) {
    const auto &items = per_class[c];
    int n_val = static_cast<int>(
        std::floor(cfg.val_fraction * static_cast<double>(items.size())));
    if (static_cast<int>(items.size()) - n_val < need) n_val = 0;
    // The frozen manifests list items in a deterministic order; the tail
    // slice is as good as any and keeps the split stable across runs.
    for (size_t i = 0; i < items.size(); ++i) {
      if (static_cast<int>(i) >= static_cast<int>(items.size()) - n_val)
        val_pool[c].push_back(items[i]);
      else
        train_pool[c].push_back(items[i]);
    }
  }
  bool have_val = false;
  {
    int rich = 0;
    for (const auto &v : val_pool)
      if (static_cast<int>(v.size()) >= cfg.k_shot + 1) ++rich;
    have_val = rich >= cfg.n_way;
  }

  Rng rng(DeriveSeed(cfg.seed, 0xE915ULL));
  OptimizerBox opt(cfg);
  auto params = model->Params();
  const data::EpisodeSpec spec{cfg.n_way, cfg.k_shot, cfg.n_query};

  EpisodicResult result;
  std::deque<double> recent_acc;
  double best_val = -1.0;
  int bad_vals = 0;
  int steps = 0;
  const int max_steps = cfg.max_steps > 0 ? cfg.max_steps : 1000;
  double running_acc = 0.0;

  for (; steps < max_steps; ++steps) {
    const data::EpisodeItems ep = data::SampleEpisode(train_pool, spec, &rng);
    std::vector<int> all = ep.support;
    all.insert(all.end(), ep.query.begin(), ep.query.end());
    nn::Tensor<float> batch = MakeBatch(train_entries, all, cache, nullptr);

    if (cfg.margin_weight > 0.0) {
      std::vector<int> speaker_targets;
      for (int i : all)
        speaker_targets.push_back(
            train_entries[static_cast<size_t>(i)]->speaker_index);
      model->SetEpisodeMarginTargets(speaker_targets, cfg.margin_weight);
    }
    models::EmbedOutput<float> out = model->ForwardEmbed(batch, /*train=*/true);
    const float esc = static_cast<float>(cfg.embedding_scale);
    for (auto &v : out.embeddings.data) v *= esc;
    const int64_t M = out.embeddings.dim(1);
    const int64_t ns = static_cast<int64_t>(ep.support.size());
    const int64_t nq = static_cast<int64_t>(ep.query.size());
    nn::Tensor<float> support({ns, M}), query({nq, M});
    std::copy(out.embeddings.ptr(), out.embeddings.ptr() + ns * M,
              support.ptr());
    std::copy(out.embeddings.ptr() + ns * M,
              out.embeddings.ptr() + (ns + nq) * M, query.ptr());

    nn::Tensor<float> gs, gq;
    fewshot::EpisodeResult<float> er = fewshot::PrototypicalLoss<float>(
        support, ep.support_class, query, ep.query_class,
        fewshot::Distance::kSqEuclidean, &gs, &gq);

    const double total_loss =
        cfg.proto_weight * static_cast<double>(er.loss) +
        static_cast<double>(out.aux_loss);
    if (steps == 0) result.initial_loss = cfg.proto_weight * er.loss;
    if (!std::isfinite(total_loss))
      FSSR_RAISE(ErrorCode::kDivergenceDetected)
          << "episodic loss became non-finite at step " << steps;

    nn::Tensor<float> gemb({ns + nq, M});
    const float pw = static_cast<float>(cfg.proto_weight) * esc;
    for (int64_t i = 0; i < ns * M; ++i)
      gemb.data[static_cast<size_t>(i)] = pw * gs.data[static_cast<size_t>(i)];
    for (int64_t i = 0; i < nq * M; ++i)
      gemb.data[static_cast<size_t>(ns * M + i)] =
          pw * gq.data[static_cast<size_t>(i)];

    model->ZeroGrad();
    model->BackwardEmbed(gemb);
    model->ClearEpisodeMarginTargets();
    opt.Step(params);

    recent_acc.push_back(er.accuracy);
    if (static_cast<int>(recent_acc.size()) > cfg.monitor_window)
      recent_acc.pop_front();
    running_acc = 0.0;
    for (double a : recent_acc) running_acc += a;
    running_acc /= static_cast<double>(recent_acc.size());
    if (cfg.verbose)
      std::cerr << "episode " << steps << " loss " << er.loss << " acc "
                << er.accuracy << " (runavg " << running_acc << ")\n";

    if (static_cast<int>(recent_acc.size()) == cfg.monitor_window &&
        running_acc >= cfg.early_stop_acc) {
      ++steps;
      break;
    }

    if (have_val && cfg.val_every > 0 && (steps + 1) % cfg.val_every == 0) {
      // A small held-out probe; embeddings are recomputed because the model
      // just moved.
      fewshot::EmbeddingPool vp;
      vp.dim = model->embedding_dim();
      vp.per_class.resize(val_pool.size());
      for (size_t c = 0; c < val_pool.size(); ++c) {
        if (val_pool[c].empty()) continue;
        nn::Tensor<float> vbatch =
            MakeBatch(train_entries, val_pool[c], cache, nullptr);
        models::EmbedOutput<float> vout =
            model->ForwardEmbed(vbatch, /*train=*/false);
        const int64_t vm = vout.embeddings.dim(1);
        for (size_t i = 0; i < val_pool[c].size(); ++i) {
          const float *row = vout.embeddings.ptr() + static_cast<int64_t>(i) * vm;
          vp.per_class[c].emplace_back(row, row + vm);
        }
      }
      fewshot::FewShotEvalConfig vcfg;
      vcfg.n_way = cfg.n_way;
      vcfg.k_shot = cfg.k_shot;
      vcfg.n_query = 1;
      vcfg.n_episodes = cfg.val_episodes;
      vcfg.seed = DeriveSeed(cfg.seed, 0x7a1ULL + static_cast<uint64_t>(steps));
      fewshot::FewShotEvalResult vres = fewshot::EvaluateFewShot(vp, vcfg);
      if (cfg.verbose)
        std::cerr << "  val acc " << vres.mean_accuracy << "\n";
      if (vres.mean_accuracy > best_val + 1e-9) {
        best_val = vres.mean_accuracy;
        bad_vals = 0;
      } else if (++bad_vals >= cfg.patience) {
        ++steps;
        break;
      }
    }
  }

  result.final_train_acc = running_acc;
  result.steps = steps;

  // Held-out episodes over the test split with the trained, frozen model.
  fewshot::EmbeddingPool test_pool =
      BuildEmbeddingPool(model, manifest, data::Split::kTest, cache);
  fewshot::FewShotEvalConfig ecfg;
  ecfg.n_way = cfg.n_way;
  ecfg.k_shot = cfg.k_shot;
  ecfg.n_query = 1;
  int min_items = 1 << 30;
  for (const auto &v : test_pool.per_class)
    min_items = std::min(min_items, static_cast<int>(v.size()));
  ecfg.n_query = std::max(1, std::min(cfg.n_query, min_items - cfg.k_shot));
  ecfg.n_episodes = 400;
  ecfg.seed = DeriveSeed(cfg.seed, 0x7e57ULL);
  fewshot::FewShotEvalResult eres = fewshot::EvaluateFewShot(test_pool, ecfg);
  result.heldout_acc = eres.mean_accuracy;
  result.heldout_ci95 = eres.ci95_half_width;

  result.record.arch = models::ArchToString(model->config().arch);
  result.record.dataset = manifest.protocol_tag;
  result.record.parameter_count = models::CountParameters(model);
  result.record.metrics["initial_loss"] = result.initial_loss;
  result.record.metrics["train_acc"] = result.final_train_acc;
  result.record.metrics["heldout_acc"] = result.heldout_acc;
  result.record.metrics["heldout_ci95"] = result.heldout_ci95;
  result.record.metrics["steps"] = steps;
  result.record.metrics["n_way"] = cfg.n_way;
  result.record.metrics["k_shot"] = cfg.k_shot;
  result.record.wall_time_s = Seconds(start, Clock::now());
  return result;
}

data::Manifest SubsampleTrain(const data::Manifest &manifest,
                              int samples_per_class, uint64_t seed) {
  data::Manifest out;
  out.seed = manifest.seed;
  out.n_speakers = manifest.n_speakers;
  out.protocol_tag =
      manifest.protocol_tag + ":subsample" + std::to_string(samples_per_class);

  std::vector<std::vector<int>> per_class(
      static_cast<size_t>(manifest.n_speakers));
  for (size_t i = 0; i < manifest.entries.size(); ++i)
    if (manifest.entries[i].split == data::Split::kTrain)
      per_class[static_cast<size_t>(manifest.entries[i].speaker_index)]
          .push_back(static_cast<int>(i));

  Rng rng(DeriveSeed(seed, 0x5ab5ULL));
  std::vector<bool> keep(manifest.entries.size(), false);
  for (size_t c = 0; c < per_class.size(); ++c) {
    const auto &items = per_class[c];
    if (static_cast<int>(items.size()) < samples_per_class)
      FSSR_RAISE(ErrorCode::kInsufficientData)
          << "speaker index " << c << " has " << items.size()
          << " train items, need " << samples_per_class;
    const std::vector<int> pick = rng.SampleWithoutReplacement(
        static_cast<int>(items.size()), samples_per_class);
    for (int p : pick) keep[static_cast<size_t>(items[static_cast<size_t>(p)])] = true;
  }
  for (size_t i = 0; i < manifest.entries.size(); ++i)
    if (keep[i] || manifest.entries[i].split == data::Split::kTest)
      out.entries.push_back(manifest.entries[i]);
  return out;
}

std::vector<ExperimentRecord> LimitedSamplesSweep(
    const TrainConfig &cfg, const std::vector<models::Arch> &archs,
    const data::Manifest &manifest, const std::vector<int> &samples_per_class,
    data::SpectrogramCache *cache, const std::string &dataset_tag) {
  FSSR_CHECK(!archs.empty() && !samples_per_class.empty(),
             ErrorCode::kEmptyInput)
      << "sweep needs architectures and sample counts";
  std::vector<ExperimentRecord> records;
  for (models::Arch arch : archs) {
    for (int n : samples_per_class) {
      data::Manifest sub = SubsampleTrain(manifest, n, cfg.seed);
      models::ModelConfig mc;
      mc.arch = arch;
      mc.n_classes = manifest.n_speakers;
      auto model = models::MakeModel<float>(mc, DeriveSeed(cfg.seed, n));
      TrainConfig tc = cfg;
      tc.loss = (arch == models::Arch::kCapsnetM ||
                 arch == models::Arch::kCapsnetMa)
                    ? TrainConfig::LossKind::kMargin
                    : TrainConfig::LossKind::kCrossEntropy;
      TrainResult r = TrainClassifier(tc, model.get(), sub, cache);
      r.record.experiment_tag = "limited_samples";
      r.record.dataset = dataset_tag;
      r.record.metrics["samples_per_class"] = n;
      records.push_back(r.record);
    }
  }
  return records;
}

std::string RecordToJson(const ExperimentRecord &r) {
  nlohmann::json j;
  j["experiment_tag"] = r.experiment_tag;
  j["arch"] = r.arch;
  j["dataset"] = r.dataset;
  j["metrics"] = r.metrics;
  j["parameter_count"] = r.parameter_count;
  j["wall_time_s"] = r.wall_time_s;
  j["config"] = r.config_snapshot;
  return j.dump();
}

ExperimentRecord RecordFromJson(const std::string &line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const std::exception &e) {
    FSSR_RAISE(ErrorCode::kIo) << "bad experiment record: " << e.what();
  }
  ExperimentRecord r;
  r.experiment_tag = j.value("experiment_tag", "");
  r.arch = j.value("arch", "");
  r.dataset = j.value("dataset", "");
  if (j.contains("metrics"))
    r.metrics = j["metrics"].get<std::map<std::string, double>>();
  r.parameter_count = j.value("parameter_count", 0LL);
  r.wall_time_s = j.value("wall_time_s", 0.0);
  r.config_snapshot = j.value("config", "");
  return r;
}

void AppendRecords(const std::string &path,
                   const std::vector<ExperimentRecord> &records) {
  std::ofstream out(path, std::ios::app);
  if (!out) FSSR_RAISE(ErrorCode::kIo) << "cannot open records file: " << path;
  for (const auto &r : records) out << RecordToJson(r) << "\n";
  if (!out) FSSR_RAISE(ErrorCode::kIo) << "short write: " << path;
}

std::vector<ExperimentRecord> ReadRecords(const std::string &path) {
  std::ifstream in(path);
  if (!in) FSSR_RAISE(ErrorCode::kIo) << "cannot open records file: " << path;
  std::vector<ExperimentRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(RecordFromJson(line));
  }
  return out;
}

}  // namespace harness
}  // namespace fssr
