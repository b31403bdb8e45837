// fssr/harness/runner.cc
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

#include "fssr/harness/runner.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fssr/data/cache.h"
#include "fssr/data/manifest.h"
#include "fssr/data/toy_corpus.h"
#include "fssr/harness/report.h"
#include "fssr/harness/train.h"
#include "fssr/models/checkpoint.h"
#include "fssr/models/factory.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace fssr {
namespace harness {

namespace {

void Log(std::ostream *log, const std::string &msg) {
  if (log) *log << msg << "\n";
}

dsp::StftConfig StftFromConfig(const Config &cfg) {
  dsp::StftConfig sc;
  sc.fft_length = static_cast<int>(cfg.GetInt("dsp.fft_length", 512));
  sc.log_magnitude = cfg.GetBool("dsp.log_magnitude", false);
  const std::string red = cfg.Get("dsp.bin_reduction", "truncate_low_128");
  if (red == "truncate_low_128")
    sc.bin_reduction = dsp::BinReduction::kTruncateLow128;
  else if (red == "average_pairs")
    sc.bin_reduction = dsp::BinReduction::kAveragePairs;
  else
    FSSR_RAISE(ErrorCode::kInvalidArgument)
        << "dsp.bin_reduction must be truncate_low_128 or average_pairs";
  return sc;
}

TrainConfig TrainFromConfig(const Config &cfg, bool episodic) {
  TrainConfig tc;
  const std::string opt = cfg.Get("train.optimizer", "adam");
  if (opt == "adam")
    tc.optimizer = TrainConfig::Optimizer::kAdam;
  else if (opt == "sgd_momentum")
    tc.optimizer = TrainConfig::Optimizer::kSgdMomentum;
  else
    FSSR_RAISE(ErrorCode::kInvalidArgument)
        << "train.optimizer must be adam or sgd_momentum";
  tc.learning_rate = cfg.GetDouble("train.lr", episodic ? 1e-3 : 1e-4);
  tc.momentum = cfg.GetDouble("train.momentum", 0.9);
  tc.batch_size = static_cast<int>(cfg.GetInt("train.batch_size", 32));
  tc.max_epochs = static_cast<int>(cfg.GetInt("train.max_epochs", 10));
  tc.max_steps = static_cast<int>(cfg.GetInt("train.max_steps", 0));
  tc.seed = static_cast<uint64_t>(cfg.GetInt("seed", 0));
  tc.proto_weight = cfg.GetDouble("loss.proto_weight", 1.0);
  tc.recon_weight = cfg.GetDouble("loss.recon_weight", 0.1);
  tc.contractive_weight = cfg.GetDouble("loss.contractive_weight", 1e-4);
  tc.margin_weight = cfg.GetDouble("loss.margin_weight", 0.0);
  tc.embedding_scale = cfg.GetDouble("train.embedding_scale", 0.5);
  tc.n_way = static_cast<int>(cfg.GetInt("episode.n_way", 5));
  tc.k_shot = static_cast<int>(cfg.GetInt("episode.k_shot", 1));
  tc.n_query = static_cast<int>(cfg.GetInt("episode.n_query", 5));
  tc.monitor_window = static_cast<int>(cfg.GetInt("train.monitor_window", 10));
  tc.early_stop_acc = cfg.GetDouble("train.early_stop_acc", 0.95);
  tc.val_every = static_cast<int>(cfg.GetInt("train.val_every", 50));
  tc.val_episodes = static_cast<int>(cfg.GetInt("train.val_episodes", 20));
  tc.patience = static_cast<int>(cfg.GetInt("train.patience", 5));
  tc.val_fraction = cfg.GetDouble("train.val_fraction", 0.1);
  tc.recrop_per_epoch = cfg.GetBool("train.recrop_per_epoch", false);
  tc.verbose = cfg.GetBool("verbose", false);
  return tc;
}

models::ModelConfig ModelFromConfig(const Config &cfg, int n_classes) {
  models::ModelConfig mc;
  mc.arch = models::ArchFromString(cfg.GetRequired("arch"));
  mc.n_classes = n_classes;
  mc.l2_normalize_embedding = cfg.GetBool("model.l2_normalize_embedding", true);
  mc.capsule.routing_iters =
      static_cast<int>(cfg.GetInt("model.routing_iters", 3));
  mc.autoencoder.hidden_dim =
      static_cast<int>(cfg.GetInt("model.ae_hidden_dim", 512));
  mc.autoencoder.code_dim =
      static_cast<int>(cfg.GetInt("model.embedding_dim", 256));
  mc.autoencoder.recon_weight = cfg.GetDouble("loss.recon_weight", 0.1);
  mc.autoencoder.contractive_weight =
      cfg.GetDouble("loss.contractive_weight", 1e-4);
  return mc;
}

void WriteResolvedNextTo(const Config &cfg, const std::string &output) {
  const fs::path p(output);
  fs::path cfg_path;
  if (fs::is_directory(p))
    cfg_path = p / "fssr-run.config";
  else
    cfg_path = p.string() + ".config";
  cfg.WriteResolved(cfg_path.string());
}

std::string RequireOutDir(const Config &cfg) {
  const std::string out = cfg.GetRequired("out_dir");
  fs::create_directories(out);
  return out;
}

nlohmann::json MetaFor(const Config &cfg, int steps) {
  nlohmann::json meta;
  meta["seed"] = cfg.GetInt("seed", 0);
  meta["step"] = steps;
  return meta;
}

}  // namespace

std::string ResolveCacheDir(const Config &cfg) {
  if (cfg.Has("cache_dir")) return cfg.Get("cache_dir", "");
  const char *env = std::getenv("FSSR_CACHE_DIR");
  return env ? env : "";
}

void RunPrepareSplits(const Config &cfg, std::ostream *log) {
  const std::string dataset = cfg.GetRequired("dataset");
  const std::string out = cfg.GetRequired("out");
  const uint64_t seed = static_cast<uint64_t>(cfg.GetInt("seed", 0));

  data::Manifest manifest;
  if (dataset == "toy") {
    const std::string root = cfg.GetRequired("root");
    data::ToyCorpusConfig tc;
    tc.n_speakers = static_cast<int>(cfg.GetInt("toy.speakers", 20));
    tc.utts_per_speaker = static_cast<int>(cfg.GetInt("toy.utts", 30));
    tc.test_per_speaker = static_cast<int>(cfg.GetInt("toy.test_utts", 6));
    tc.duration_s = cfg.GetDouble("toy.duration_s", 4.0);
    tc.noise_level = cfg.GetDouble("toy.noise", 0.02);
    tc.seed = static_cast<uint64_t>(cfg.GetInt("toy.seed", 1234));
    if (!fs::exists(fs::path(root) / "iden_split.txt")) {
      Log(log, "generating toy corpus under " + root);
      data::GenerateToyCorpus(root, tc);
    }
    const int n_classes =
        static_cast<int>(cfg.GetInt("n_classes", tc.n_speakers));
    const int k = static_cast<int>(
        cfg.GetInt("k_per_class", tc.utts_per_speaker - tc.test_per_speaker));
    manifest = data::BuildVoxcelebSplit(root, n_classes, k, seed);
  } else if (dataset == "voxceleb") {
    manifest = data::BuildVoxcelebSplit(
        cfg.GetRequired("root"), static_cast<int>(cfg.GetInt("n_classes", 50)),
        static_cast<int>(cfg.GetInt("k_per_class", 5)), seed);
  } else if (dataset == "vctk") {
    manifest = data::BuildVctkSplit(cfg.GetRequired("root"),
                                    cfg.GetDouble("train_fraction", 0.7), seed);
  } else {
    FSSR_RAISE(ErrorCode::kInvalidArgument)
        << "dataset must be voxceleb, vctk or toy, got '" << dataset << "'";
  }
  data::WriteManifest(manifest, out);
  WriteResolvedNextTo(cfg, out);
  std::ostringstream os;
  os << "wrote " << manifest.entries.size() << " entries for "
     << manifest.n_speakers << " speakers to " << out;
  Log(log, os.str());
}

void RunSpectrogram(const Config &cfg, std::ostream *log) {
  if (cfg.Has("manifest")) {
    const data::Manifest manifest = data::ReadManifest(cfg.GetRequired("manifest"));
    const std::string dir = ResolveCacheDir(cfg);
    FSSR_CHECK(!dir.empty(), ErrorCode::kInvalidArgument)
        << "cache fill needs cache_dir (or FSSR_CACHE_DIR)";
    data::SpectrogramCache cache(dir, StftFromConfig(cfg));
    int done = 0;
    for (const auto &e : manifest.entries) {
      if (e.random_offset) continue;
      cache.Get(e);
      ++done;
    }
    Log(log, "cached " + std::to_string(done) + " spectrograms in " + dir);
    return;
  }
  const std::string input = cfg.GetRequired("input");
  const std::string output = cfg.GetRequired("output");
  dsp::AudioClip clip = dsp::LoadAndStandardize(input);
  if (cfg.Has("crop_offset_s"))
    clip = dsp::CropAt(clip, cfg.GetDouble("crop_offset_s", 0.0),
                       cfg.GetDouble("crop_duration_s", data::kCropSeconds),
                       /*pad_with_repeat=*/true);
  dsp::Spectrogram spec = dsp::ComputeSpectrogram(clip, StftFromConfig(cfg));
  if (cfg.GetBool("normalize", true)) spec = dsp::NormalizeBins(spec);
  dsp::SaveSpectrogram(spec, output);
  std::ostringstream os;
  os << "wrote " << spec.bins << "x" << spec.frames << " spectrogram to "
     << output;
  Log(log, os.str());
}

void RunTrain(const Config &cfg, std::ostream *log) {
  const std::string out_dir = RequireOutDir(cfg);
  const data::Manifest manifest =
      data::ReadManifest(cfg.GetRequired("manifest"));
  data::SpectrogramCache cache(ResolveCacheDir(cfg), StftFromConfig(cfg));

  models::ModelConfig mc = ModelFromConfig(cfg, manifest.n_speakers);
  auto model =
      models::MakeModel<float>(mc, static_cast<uint64_t>(cfg.GetInt("seed", 0)));

  TrainConfig tc = TrainFromConfig(cfg, /*episodic=*/false);
  const bool capsule = mc.arch == models::Arch::kCapsnetM ||
                       mc.arch == models::Arch::kCapsnetMa;
  const std::string loss = cfg.Get("train.loss", capsule ? "margin" : "cross_entropy");
  tc.loss = loss == "margin" ? TrainConfig::LossKind::kMargin
                             : TrainConfig::LossKind::kCrossEntropy;

  TrainResult result;
  try {
    result = TrainClassifier(tc, model.get(), manifest, &cache);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kDivergenceDetected) {
      // Parameters were rolled back to the last stable epoch; keep them.
      models::SaveCheckpoint((fs::path(out_dir) / "last_good.ckpt").string(),
                             model.get(), MetaFor(cfg, -1).dump());
      Log(log, std::string("training diverged: ") + e.what());
    }
    throw;
  }

  result.record.experiment_tag = cfg.Get("tag", "train");
  result.record.config_snapshot = cfg.Resolved();
  models::SaveCheckpoint((fs::path(out_dir) / "checkpoint.ckpt").string(),
                         model.get(), MetaFor(cfg, result.steps).dump());
  AppendRecords((fs::path(out_dir) / "records.jsonl").string(),
                {result.record});
  WriteResolvedNextTo(cfg, out_dir);
  std::ostringstream os;
  os << "trained " << models::ArchToString(mc.arch) << " for " << result.steps
     << " steps; top1 " << result.top1 << " top5 " << result.top5;
  Log(log, os.str());
}

void RunEpisodicTrain(const Config &cfg, std::ostream *log) {
  const std::string out_dir = RequireOutDir(cfg);
  const data::Manifest manifest =
      data::ReadManifest(cfg.GetRequired("manifest"));
  data::SpectrogramCache cache(ResolveCacheDir(cfg), StftFromConfig(cfg));

  std::unique_ptr<models::Model<float>> model;
  if (cfg.Has("init_checkpoint")) {
    model = models::LoadCheckpoint(cfg.GetRequired("init_checkpoint"), nullptr);
  } else {
    models::ModelConfig mc = ModelFromConfig(cfg, manifest.n_speakers);
    model = models::MakeModel<float>(
        mc, static_cast<uint64_t>(cfg.GetInt("seed", 0)));
  }

  TrainConfig tc = TrainFromConfig(cfg, /*episodic=*/true);
  if (tc.max_steps == 0) tc.max_steps = 1000;
  tc.loss = model->config().arch == models::Arch::kCapsnetMa
                ? TrainConfig::LossKind::kCapsmaComposite
                : TrainConfig::LossKind::kPrototypical;

  EpisodicResult result = EpisodicTrain(tc, model.get(), manifest, &cache);
  result.record.experiment_tag = cfg.Get("tag", "episodic_train");
  result.record.config_snapshot = cfg.Resolved();

  models::SaveCheckpoint((fs::path(out_dir) / "checkpoint.ckpt").string(),
                         model.get(), MetaFor(cfg, result.steps).dump());
  AppendRecords((fs::path(out_dir) / "records.jsonl").string(),
                {result.record});
  WriteResolvedNextTo(cfg, out_dir);
  std::ostringstream os;
  os << "episodic " << result.record.arch << ": " << result.steps
     << " steps, initial loss " << result.initial_loss << ", held-out "
     << tc.n_way << "-way " << tc.k_shot << "-shot acc " << result.heldout_acc
     << " (ci " << result.heldout_ci95 << ")";
  Log(log, os.str());
}

fewshot::FewShotEvalResult RunFewshotEval(const Config &cfg,
                                          std::ostream *log) {
  const data::Manifest manifest =
      data::ReadManifest(cfg.GetRequired("manifest"));
  data::SpectrogramCache cache(ResolveCacheDir(cfg), StftFromConfig(cfg));
  auto model = models::LoadCheckpoint(cfg.GetRequired("checkpoint"), nullptr);

  const std::string split_name = cfg.Get("split", "test");
  const data::Split split =
      split_name == "train" ? data::Split::kTrain : data::Split::kTest;
  fewshot::EmbeddingPool pool =
      BuildEmbeddingPool(model.get(), manifest, split, &cache);

  fewshot::FewShotEvalConfig ec;
  ec.n_way = static_cast<int>(cfg.GetInt("episode.n_way", 5));
  ec.k_shot = static_cast<int>(cfg.GetInt("episode.k_shot", 1));
  ec.n_query = static_cast<int>(cfg.GetInt("episode.n_query", 15));
  ec.n_episodes = static_cast<int>(cfg.GetInt("episode.count", 1000));
  ec.seed = static_cast<uint64_t>(cfg.GetInt("seed", 0));
  ec.distance =
      fewshot::DistanceFromString(cfg.Get("episode.distance", "sq_euclidean"));
  const fewshot::FewShotEvalResult res = fewshot::EvaluateFewShot(pool, ec);

  fewshot::EvalRecord record;
  record.arch = models::ArchToString(model->config().arch);
  record.n_way = ec.n_way;
  record.k_shot = ec.k_shot;
  record.n_query = ec.n_query;
  record.n_episodes = ec.n_episodes;
  record.seed = ec.seed;
  record.mean_acc = res.mean_accuracy;
  record.ci95 = res.ci95_half_width;
  if (cfg.Has("out")) {
    const std::string out = cfg.Get("out", "");
    std::ofstream f(out, std::ios::app);
    if (!f) FSSR_RAISE(ErrorCode::kIo) << "cannot append to " << out;
    f << fewshot::EvalRecordToJson(record) << "\n";
    WriteResolvedNextTo(cfg, out);
  }
  std::ostringstream os;
  os << record.arch << " " << ec.n_way << "-way " << ec.k_shot << "-shot ("
     << split_name << "): acc " << res.mean_accuracy << " +/- "
     << res.ci95_half_width << " over " << ec.n_episodes << " episodes";
  Log(log, os.str());
  return res;
}

void RunFinetune(const Config &cfg, std::ostream *log) {
  const std::string out_dir = RequireOutDir(cfg);
  const data::Manifest manifest =
      data::ReadManifest(cfg.GetRequired("manifest"));
  data::SpectrogramCache cache(ResolveCacheDir(cfg), StftFromConfig(cfg));

  auto model = models::LoadCheckpoint(cfg.GetRequired("checkpoint"), nullptr);
  model->ReplaceHead(manifest.n_speakers,
                     static_cast<uint64_t>(cfg.GetInt("seed", 0)));

  TrainConfig tc = TrainFromConfig(cfg, /*episodic=*/false);
  const bool capsule = model->config().arch == models::Arch::kCapsnetM ||
                       model->config().arch == models::Arch::kCapsnetMa;
  tc.loss = capsule ? TrainConfig::LossKind::kMargin
                    : TrainConfig::LossKind::kCrossEntropy;

  TrainResult result = TrainClassifier(tc, model.get(), manifest, &cache);
  result.record.experiment_tag = cfg.Get("tag", "finetune");
  result.record.config_snapshot = cfg.Resolved();
  models::SaveCheckpoint((fs::path(out_dir) / "checkpoint.ckpt").string(),
                         model.get(), MetaFor(cfg, result.steps).dump());
  AppendRecords((fs::path(out_dir) / "records.jsonl").string(),
                {result.record});
  WriteResolvedNextTo(cfg, out_dir);
  std::ostringstream os;
  os << "fine-tuned " << result.record.arch << " on " << manifest.n_speakers
     << " classes; top1 " << result.top1 << " top5 " << result.top5;
  Log(log, os.str());
}

void RunSweep(const Config &cfg, std::ostream *log) {
  const std::string out_dir = RequireOutDir(cfg);
  const data::Manifest manifest =
      data::ReadManifest(cfg.GetRequired("manifest"));
  data::SpectrogramCache cache(ResolveCacheDir(cfg), StftFromConfig(cfg));

  std::vector<models::Arch> archs;
  {
    std::istringstream is(cfg.Get("archs", "vgg_m,resnet34,capsnet_m"));
    std::string tok;
    while (std::getline(is, tok, ','))
      if (!tok.empty()) archs.push_back(models::ArchFromString(tok));
  }
  std::vector<int> counts;
  {
    std::istringstream is(cfg.GetRequired("samples_per_class"));
    std::string tok;
    while (std::getline(is, tok, ','))
      if (!tok.empty()) counts.push_back(std::stoi(tok));
  }

  TrainConfig tc = TrainFromConfig(cfg, /*episodic=*/false);
  std::vector<ExperimentRecord> records = LimitedSamplesSweep(
      tc, archs, manifest, counts, &cache, manifest.protocol_tag);
  for (auto &r : records) r.config_snapshot = cfg.Resolved();
  AppendRecords((fs::path(out_dir) / "records.jsonl").string(), records);
  WriteResolvedNextTo(cfg, out_dir);
  Log(log, "sweep wrote " + std::to_string(records.size()) + " records");
}

void RunReport(const Config &cfg, std::ostream *log) {
  // Accepts both record schemas: experiment records and the line-delimited
  // few-shot evaluation records, which are folded into the same table shape.
  const std::string path = cfg.GetRequired("records");
  std::ifstream in(path);
  if (!in) FSSR_RAISE(ErrorCode::kIo) << "cannot open records file: " << path;
  std::vector<ExperimentRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.find("\"mean_acc\"") != std::string::npos &&
        line.find("\"metrics\"") == std::string::npos) {
      const fewshot::EvalRecord er = fewshot::EvalRecordFromJson(line);
      ExperimentRecord r;
      r.experiment_tag = "fewshot_eval";
      r.arch = er.arch;
      r.metrics["n_way"] = er.n_way;
      r.metrics["k_shot"] = er.k_shot;
      r.metrics["n_episodes"] = er.n_episodes;
      r.metrics["mean_acc"] = er.mean_acc;
      r.metrics["ci95"] = er.ci95;
      records.push_back(std::move(r));
    } else {
      records.push_back(RecordFromJson(line));
    }
  }
  const ReportFormat format =
      ReportFormatFromString(cfg.Get("format", "table"));
  const std::string out = cfg.GetRequired("out");
  WriteReport(records, format, out);
  WriteResolvedNextTo(cfg, out);
  Log(log, "report written to " + out);
}

}  // namespace harness
}  // namespace fssr
