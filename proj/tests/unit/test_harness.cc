// tests/unit/test_harness.cc
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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fssr/common/config.h"
#include "fssr/data/toy_corpus.h"
#include "fssr/harness/report.h"
#include "fssr/harness/runner.h"
#include "fssr/harness/train.h"
#include "fssr/models/checkpoint.h"
#include "fssr/models/factory.h"
#include "testutil.h"

using namespace fssr;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

// A shared toy corpus + manifest for the training tests (built once; the
// corpus is a few hundred small wav files).
struct ToyFixture {
  TempDir dir{"fssr_harness_toy"};
  data::Manifest manifest;
  std::unique_ptr<data::SpectrogramCache> cache;

  ToyFixture() {
    data::ToyCorpusConfig cfg;
    cfg.n_speakers = 6;
    cfg.utts_per_speaker = 10;
    cfg.test_per_speaker = 3;
    cfg.duration_s = 3.2;
    data::GenerateToyCorpus(dir.path(), cfg);
    manifest = data::BuildVoxcelebSplit(dir.path(), 6, 7, 11);
    cache = std::make_unique<data::SpectrogramCache>("", dsp::StftConfig{});
  }
};

ToyFixture &Fixture() {
  static ToyFixture fixture;
  return fixture;
}

// Small capsule configuration so the trainer tests stay fast; contracts are
// architecture-independent.
models::ModelConfig TinyCapsConfig(int n_classes) {
  models::ModelConfig mc;
  mc.arch = models::Arch::kCapsnetM;
  mc.n_classes = n_classes;
  mc.capsule.conv_channels = 16;
  mc.capsule.primary_channels = 4;
  return mc;
}

}  // namespace

TEST_CASE("topk accuracy: perfect, exhaustive and hand-ranked cases") {
  nn::Tensor<float> logits({4, 4});
  // Row ranks (descending): [3,2,1,0] etc.
  const float rows[4][4] = {{0.1f, 0.2f, 0.3f, 0.9f},
                            {0.9f, 0.1f, 0.05f, 0.0f},
                            {0.2f, 0.8f, 0.3f, 0.1f},
                            {0.5f, 0.4f, 0.3f, 0.2f}};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) logits.ptr()[r * 4 + c] = rows[r][c];

  // Perfect logits: top-k is 1 for every k.
  std::vector<int> perfect = {3, 0, 1, 0};
  for (int k = 1; k <= 4; ++k)
    CHECK(harness::TopkAccuracy(logits, perfect, k) == 1.0);

  // k = C: exhaustive, always 1 whatever the labels.
  std::vector<int> labels = {0, 3, 2, 1};
  CHECK(harness::TopkAccuracy(logits, labels, 4) == 1.0);

  // Hand-ranked: with these labels, rows 1,2,3 have the label in the top 2
  // (ranks 3, 1, 1, 1) -> 0.75 at k = 2.
  std::vector<int> crafted = {0, 0, 1, 1};
  CHECK(harness::TopkAccuracy(logits, crafted, 2) == doctest::Approx(0.75));
  CHECK(harness::TopkAccuracy(logits, crafted, 1) == doctest::Approx(0.5));

  // Top-5 >= top-1 never violated on random data.
  Rng rng(7);
  nn::Tensor<float> rnd({16, 8});
  for (auto &v : rnd.data) v = static_cast<float>(rng.NextGaussian());
  std::vector<int> rl;
  for (int i = 0; i < 16; ++i) rl.push_back(static_cast<int>(rng.NextInt(8)));
  CHECK(harness::TopkAccuracy(rnd, rl, 5) >= harness::TopkAccuracy(rnd, rl, 1));

  // Stable tie handling: equal logits resolve by index order.
  nn::Tensor<float> ties({1, 3});
  ties.ptr()[0] = ties.ptr()[1] = ties.ptr()[2] = 1.0f;
  CHECK(harness::TopkAccuracy(ties, {0}, 1) == 1.0);
  CHECK(harness::TopkAccuracy(ties, {1}, 1) == 0.0);
  CHECK(harness::TopkAccuracy(ties, {1}, 2) == 1.0);
}

TEST_CASE("classifier training separates a 2-speaker sine corpus") {
  // Two widely separated tones; 50 steps must drive train accuracy to ~1.
  TempDir dir("fssr_two_speakers");
  data::ToyCorpusConfig cc;
  cc.n_speakers = 2;
  cc.utts_per_speaker = 10;
  cc.test_per_speaker = 3;
  cc.duration_s = 3.2;
  data::GenerateToyCorpus(dir.path(), cc);
  data::Manifest manifest = data::BuildVoxcelebSplit(dir.path(), 2, 7, 11);
  data::SpectrogramCache cache("", dsp::StftConfig{});

  auto model = models::MakeModel<float>(TinyCapsConfig(2), 3);
  harness::TrainConfig tc;
  tc.learning_rate = 3e-3;
  tc.batch_size = 8;
  tc.max_epochs = 100;
  tc.max_steps = 50;
  tc.seed = 5;
  tc.loss = harness::TrainConfig::LossKind::kMargin;
  harness::TrainResult r =
      harness::TrainClassifier(tc, model.get(), manifest, &cache);
  CHECK(r.steps == 50);
  CHECK(r.top5 >= r.top1);
  CHECK(r.record.parameter_count == models::CountParameters(model.get()));
  CHECK(r.record.metrics.at("top1") == doctest::Approx(r.top1));

  // Train accuracy through the frozen model.
  const auto train_entries = manifest.EntriesFor(data::Split::kTrain);
  std::vector<int> targets;
  nn::Tensor<float> batch({static_cast<int64_t>(train_entries.size()), 1, 128, 300});
  for (size_t i = 0; i < train_entries.size(); ++i) {
    auto spec = cache.Get(*train_entries[i]);
    std::copy(spec->values.begin(), spec->values.end(),
              batch.ptr() + static_cast<int64_t>(i) * 128 * 300);
    targets.push_back(train_entries[i]->speaker_index);
  }
  nn::Tensor<float> logits = model->ForwardLogits(batch, false);
  CHECK(harness::TopkAccuracy(logits, targets, 1) >= 0.95);
  CHECK(r.top1 >= 0.9);  // two far-apart tones generalize too
}

TEST_CASE("classifier training lifts 6-way test accuracy well over chance") {
  auto &fx = Fixture();
  auto model = models::MakeModel<float>(TinyCapsConfig(6), 3);
  harness::TrainConfig tc;
  tc.learning_rate = 3e-3;
  tc.batch_size = 12;
  tc.max_epochs = 60;
  tc.max_steps = 150;
  tc.seed = 5;
  tc.loss = harness::TrainConfig::LossKind::kMargin;
  harness::TrainResult r =
      harness::TrainClassifier(tc, model.get(), fx.manifest, fx.cache.get());
  CHECK(r.top5 >= r.top1);
  CHECK(r.top1 >= 0.6);  // chance is 1/6
}

TEST_CASE("classifier training is seed-deterministic") {
  auto &fx = Fixture();
  auto run = [&] {
    auto model = models::MakeModel<float>(TinyCapsConfig(6), 17);
    harness::TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.batch_size = 8;
    tc.max_epochs = 1;
    tc.max_steps = 6;
    tc.seed = 21;
    tc.loss = harness::TrainConfig::LossKind::kMargin;
    return harness::TrainClassifier(tc, model.get(), fx.manifest,
                                    fx.cache.get());
  };
  harness::TrainResult a = run();
  harness::TrainResult b = run();
  CHECK(std::abs(a.final_loss - b.final_loss) < 1e-6);
  CHECK(a.top1 == b.top1);
}

TEST_CASE("model/manifest class mismatch is a config error") {
  auto &fx = Fixture();
  auto model = models::MakeModel<float>(TinyCapsConfig(9), 3);
  harness::TrainConfig tc;
  try {
    harness::TrainClassifier(tc, model.get(), fx.manifest, fx.cache.get());
    FAIL("expected ConfigMismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kConfigMismatch);
  }
}

TEST_CASE("divergence detection rolls back and raises") {
  auto &fx = Fixture();
  auto model = models::MakeModel<float>(TinyCapsConfig(6), 23);
  harness::TrainConfig tc;
  tc.learning_rate = 1e10;  // blows up within a few steps
  tc.batch_size = 8;
  tc.max_epochs = 3;
  tc.seed = 2;
  tc.loss = harness::TrainConfig::LossKind::kMargin;
  try {
    harness::TrainClassifier(tc, model.get(), fx.manifest, fx.cache.get());
    WARN("run did not diverge; acceptable but unexpected");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDivergenceDetected);
    // Parameters were rolled back to a finite state.
    for (auto &p : model->Params()) CHECK(p.value->AllFinite());
  }
}

TEST_CASE("episodic training on the toy corpus lifts accuracy over chance") {
  auto &fx = Fixture();
  auto model = models::MakeModel<float>(TinyCapsConfig(6), 31);
  harness::TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.seed = 13;
  tc.n_way = 4;
  tc.k_shot = 1;
  tc.n_query = 2;
  tc.max_steps = 60;
  tc.early_stop_acc = 0.99;
  tc.val_every = 0;  // keep the test fast
  harness::EpisodicResult r =
      harness::EpisodicTrain(tc, model.get(), fx.manifest, fx.cache.get());
  // Unit-norm embeddings put the first episodic loss near ln(n_way).
  CHECK(std::abs(r.initial_loss - std::log(4.0)) < 0.2);
  CHECK(r.heldout_acc > 0.4);  // chance is 0.25
  CHECK(r.steps <= 60);
  CHECK(r.record.metrics.at("n_way") == 4);
}

TEST_CASE("zero-step episodic run equals frozen-model evaluation") {
  auto &fx = Fixture();
  auto model_a = models::MakeModel<float>(TinyCapsConfig(6), 77);
  auto model_b = models::MakeModel<float>(TinyCapsConfig(6), 77);

  harness::TrainConfig tc;
  tc.max_steps = 1;  // single no-op-ish step budget
  tc.learning_rate = 0.0;  // the step changes nothing
  tc.n_way = 4;
  tc.k_shot = 1;
  tc.n_query = 1;
  tc.val_every = 0;
  tc.seed = 4;
  harness::EpisodicResult r =
      harness::EpisodicTrain(tc, model_a.get(), fx.manifest, fx.cache.get());

  fewshot::EmbeddingPool pool = harness::BuildEmbeddingPool(
      model_b.get(), fx.manifest, data::Split::kTest, fx.cache.get());
  fewshot::FewShotEvalConfig ec;
  ec.n_way = 4;
  ec.k_shot = 1;
  ec.n_query = 1;
  ec.n_episodes = 400;
  ec.seed = DeriveSeed(4, 0x7e57ULL);
  fewshot::FewShotEvalResult frozen = fewshot::EvaluateFewShot(pool, ec);
  CHECK(r.heldout_acc == doctest::Approx(frozen.mean_accuracy).epsilon(1e-9));
}

TEST_CASE("subsampling train entries is seeded and checked") {
  auto &fx = Fixture();
  data::Manifest sub = harness::SubsampleTrain(fx.manifest, 3, 99);
  std::map<int, int> per_speaker;
  for (const auto &e : sub.entries)
    if (e.split == data::Split::kTrain) per_speaker[e.speaker_index]++;
  for (const auto &[spk, n] : per_speaker) CHECK(n == 3);
  CHECK(sub.EntriesFor(data::Split::kTest).size() ==
        fx.manifest.EntriesFor(data::Split::kTest).size());

  data::Manifest sub2 = harness::SubsampleTrain(fx.manifest, 3, 99);
  REQUIRE(sub.entries.size() == sub2.entries.size());
  for (size_t i = 0; i < sub.entries.size(); ++i)
    CHECK(sub.entries[i].utt.id == sub2.entries[i].utt.id);

  CHECK_THROWS_AS(harness::SubsampleTrain(fx.manifest, 100, 1), Error);
}

TEST_CASE("limited-samples sweep emits one record per (arch, count)") {
  auto &fx = Fixture();
  harness::TrainConfig tc;
  tc.learning_rate = 2e-3;
  tc.batch_size = 8;
  tc.max_epochs = 2;
  tc.max_steps = 8;
  tc.seed = 1;
  // One tiny arch keeps this a unit test; the arch list is exercised by the
  // record bookkeeping.
  std::vector<harness::ExperimentRecord> records;
  {
    data::Manifest sub3 = harness::SubsampleTrain(fx.manifest, 3, tc.seed);
    data::Manifest sub5 = harness::SubsampleTrain(fx.manifest, 5, tc.seed);
    for (int n : {3, 5}) {
      auto model = models::MakeModel<float>(TinyCapsConfig(6), 2);
      harness::TrainConfig tcc = tc;
      tcc.loss = harness::TrainConfig::LossKind::kMargin;
      harness::TrainResult r = harness::TrainClassifier(
          tcc, model.get(), n == 3 ? sub3 : sub5, fx.cache.get());
      r.record.experiment_tag = "limited_samples";
      r.record.metrics["samples_per_class"] = n;
      records.push_back(r.record);
    }
  }
  CHECK(records.size() == 2);
  CHECK(records[0].metrics.at("samples_per_class") == 3);
  CHECK(records[1].metrics.at("samples_per_class") == 5);

  // Rendering: table, csv, grid-free; svg needs top1+samples_per_class.
  const std::string table = harness::RenderTable(records);
  CHECK(table.find("capsnet_m") != std::string::npos);
  const std::string csv = harness::RenderCsv(records);
  CHECK(csv.find("samples_per_class") != std::string::npos);
  const std::string svg = harness::RenderSweepSvg(records);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("experiment records round trip through jsonl") {
  TempDir tmp("fssr_records");
  harness::ExperimentRecord r;
  r.experiment_tag = "unit";
  r.arch = "vgg_m";
  r.dataset = "toy";
  r.metrics["top1"] = 0.875;
  r.metrics["top5"] = 1.0;
  r.parameter_count = 12345;
  r.wall_time_s = 7.25;
  r.config_snapshot = "seed = 1\n";
  harness::AppendRecords(tmp.file("r.jsonl"), {r, r});
  const auto back = harness::ReadRecords(tmp.file("r.jsonl"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].arch == "vgg_m");
  CHECK(back[0].metrics.at("top1") == doctest::Approx(0.875));
  CHECK(back[0].parameter_count == 12345);
  CHECK(back[0].config_snapshot == "seed = 1\n");

  // CSV round trip of the numeric payload is lossless.
  harness::ExperimentRecord odd = r;
  odd.metrics["top1"] = 1.0 / 3.0;
  odd.wall_time_s = 0.1234567890123456;
  const std::string csv = harness::RenderCsv({odd});
  std::istringstream is(csv);
  std::string header, row;
  REQUIRE(std::getline(is, header));
  REQUIRE(std::getline(is, row));
  std::vector<std::string> hcols, cols;
  for (std::string line : {header, row}) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    (line == header ? hcols : cols) = out;
  }
  REQUIRE(hcols.size() == cols.size());
  for (size_t i = 0; i < hcols.size(); ++i) {
    if (hcols[i] == "top1") CHECK(std::stod(cols[i]) == odd.metrics["top1"]);
    if (hcols[i] == "wall_time_s") CHECK(std::stod(cols[i]) == odd.wall_time_s);
    if (hcols[i] == "parameter_count")
      CHECK(std::stoll(cols[i]) == odd.parameter_count);
  }
  CHECK_THROWS_AS(harness::RenderTable({}), Error);
}

TEST_CASE("few-shot grid renders the way/shot matrix") {
  std::vector<harness::ExperimentRecord> records;
  for (int way : {5, 20})
    for (int shot : {1, 5}) {
      harness::ExperimentRecord r;
      r.arch = "resnet34";
      r.experiment_tag = "fewshot";
      r.metrics["n_way"] = way;
      r.metrics["k_shot"] = shot;
      r.metrics["heldout_acc"] = 0.5 + 0.01 * way + 0.02 * shot;
      records.push_back(r);
    }
  const std::string grid = harness::RenderFewShotGrid(records);
  CHECK(grid.find("5-way 1-shot") != std::string::npos);
  CHECK(grid.find("20-way 5-shot") != std::string::npos);
  CHECK(grid.find("resnet34") != std::string::npos);
}

TEST_CASE("config layering and resolved dumps") {
  TempDir tmp("fssr_config");
  {
    std::ofstream f(tmp.file("base.config"));
    f << "# comment\n"
      << "train.lr = 0.001\n"
      << "seed = 7\n";
  }
  Config cfg;
  cfg.LoadFile(tmp.file("base.config"));
  cfg.Set("train.lr", "0.01");  // override wins
  CHECK(cfg.GetDouble("train.lr", 0.0) == doctest::Approx(0.01));
  CHECK(cfg.GetInt("seed", 0) == 7);
  CHECK(cfg.GetBool("missing", true));
  cfg.WriteResolved(tmp.file("resolved.config"));
  Config back;
  back.LoadFile(tmp.file("resolved.config"));
  CHECK(back.GetDouble("train.lr", 0.0) == doctest::Approx(0.01));
  CHECK_THROWS_AS(cfg.GetRequired("absent.key"), Error);
}

TEST_CASE("runner: prepare-splits + cache fill + report end to end") {
  TempDir tmp("fssr_runner");
  Config prep;
  prep.Set("dataset", "toy");
  prep.Set("root", tmp.file("corpus"));
  prep.Set("out", tmp.file("manifest.txt"));
  prep.Set("toy.speakers", "4");
  prep.Set("toy.utts", "6");
  prep.Set("toy.test_utts", "2");
  prep.Set("seed", "3");
  harness::RunPrepareSplits(prep, nullptr);
  CHECK(fs::exists(tmp.file("manifest.txt")));
  CHECK(fs::exists(tmp.file("manifest.txt") + ".config"));

  data::Manifest m = data::ReadManifest(tmp.file("manifest.txt"));
  CHECK(m.n_speakers == 4);
  CHECK(m.EntriesFor(data::Split::kTrain).size() == 16);

  Config spec;
  spec.Set("manifest", tmp.file("manifest.txt"));
  spec.Set("cache_dir", tmp.file("cache"));
  harness::RunSpectrogram(spec, nullptr);
  int n_files = 0;
  for (const auto &e : fs::directory_iterator(tmp.file("cache")))
    if (e.path().extension() == ".fssr") ++n_files;
  CHECK(n_files == 24);

  // Single-file extraction.
  Config one;
  one.Set("input", tmp.file("corpus") + "/spk000/utt000.wav");
  one.Set("output", tmp.file("one.fssr"));
  one.Set("crop_offset_s", "0.25");
  harness::RunSpectrogram(one, nullptr);
  dsp::Spectrogram s = dsp::LoadSpectrogram(tmp.file("one.fssr"), true);
  CHECK(s.bins == 128);
  CHECK(s.frames == 300);
}

TEST_CASE("runner: train, fewshot-eval and finetune round trip") {
  TempDir tmp("fssr_runner2");
  // Corpus + manifest.
  Config prep;
  prep.Set("dataset", "toy");
  prep.Set("root", tmp.file("corpus"));
  prep.Set("out", tmp.file("manifest.txt"));
  prep.Set("toy.speakers", "4");
  prep.Set("toy.utts", "6");
  prep.Set("toy.test_utts", "2");
  prep.Set("seed", "3");
  harness::RunPrepareSplits(prep, nullptr);

  // Short classifier run with a tiny capsule net via config knobs is not
  // exposed; use episodic training of capsnet_m shrunk through the factory
  // path instead. The runner is exercised with default-size models in the
  // acceptance suite; here a tiny net keeps the unit test quick.
  auto model = models::MakeModel<float>(TinyCapsConfig(4), 5);
  data::SpectrogramCache cache("", dsp::StftConfig{});
  data::Manifest m = data::ReadManifest(tmp.file("manifest.txt"));
  harness::TrainConfig tc;
  tc.loss = harness::TrainConfig::LossKind::kMargin;
  tc.max_steps = 10;
  tc.max_epochs = 2;
  tc.batch_size = 8;
  tc.learning_rate = 1e-3;
  harness::TrainClassifier(tc, model.get(), m, &cache);
  models::SaveCheckpoint(tmp.file("ckpt.ckpt"), model.get(), R"({"seed":5})");

  // fewshot-eval through the runner (frozen path).
  Config eval;
  eval.Set("checkpoint", tmp.file("ckpt.ckpt"));
  eval.Set("manifest", tmp.file("manifest.txt"));
  eval.Set("episode.n_way", "3");
  eval.Set("episode.k_shot", "1");
  eval.Set("episode.n_query", "1");
  eval.Set("episode.count", "50");
  eval.Set("seed", "9");
  eval.Set("out", tmp.file("eval.jsonl"));
  fewshot::FewShotEvalResult res = harness::RunFewshotEval(eval, nullptr);
  CHECK(res.n_episodes == 50);
  CHECK(res.mean_accuracy >= 0.0);
  CHECK(res.mean_accuracy <= 1.0);
  std::ifstream ej(tmp.file("eval.jsonl"));
  std::string line;
  REQUIRE(std::getline(ej, line));
  fewshot::EvalRecord rec = fewshot::EvalRecordFromJson(line);
  CHECK(rec.n_way == 3);
  CHECK(rec.mean_acc == doctest::Approx(res.mean_accuracy));

  // finetune: head replacement keeps the backbone.
  Config ft;
  ft.Set("checkpoint", tmp.file("ckpt.ckpt"));
  ft.Set("manifest", tmp.file("manifest.txt"));
  ft.Set("out_dir", tmp.file("ft"));
  ft.Set("train.max_steps", "4");
  ft.Set("train.max_epochs", "1");
  ft.Set("train.batch_size", "8");
  ft.Set("seed", "6");
  harness::RunFinetune(ft, nullptr);
  CHECK(fs::exists(tmp.file("ft") + "/checkpoint.ckpt"));
  CHECK(fs::exists(tmp.file("ft") + "/records.jsonl"));
  CHECK(fs::exists(tmp.file("ft") + "/fssr-run.config"));
}

TEST_CASE("training never writes inside the dataset root") {
  auto &fx = Fixture();
  auto snapshot = [&] {
    std::vector<std::pair<std::string, uintmax_t>> files;
    for (const auto &e : fs::recursive_directory_iterator(fx.dir.path()))
      if (e.is_regular_file())
        files.emplace_back(e.path().string(), e.file_size());
    std::sort(files.begin(), files.end());
    return files;
  };
  const auto before = snapshot();
  auto model = models::MakeModel<float>(TinyCapsConfig(6), 3);
  harness::TrainConfig tc;
  tc.loss = harness::TrainConfig::LossKind::kMargin;
  tc.max_steps = 4;
  tc.max_epochs = 1;
  tc.batch_size = 8;
  harness::TrainClassifier(tc, model.get(), fx.manifest, fx.cache.get());
  CHECK(snapshot() == before);
}

TEST_CASE("replace-head transfer keeps backbone weights until training") {
  auto &fx = Fixture();
  auto model = models::MakeModel<float>(TinyCapsConfig(6), 41);
  std::map<std::string, std::vector<float>> before;
  for (auto &p : model->Params()) before[p.name] = p.value->data;
  model->ReplaceHead(6, 999);
  for (auto &p : model->Params()) {
    if (p.name == "routing.weight") continue;
    CHECK(before.at(p.name) == p.value->data);
  }
}

TEST_CASE("episodic margin flag adds a capsule side loss and still learns") {
  auto &fx = Fixture();
  auto model = models::MakeModel<float>(TinyCapsConfig(6), 31);
  harness::TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.seed = 13;
  tc.n_way = 4;
  tc.k_shot = 1;
  tc.n_query = 2;
  tc.max_steps = 20;
  tc.val_every = 0;
  tc.margin_weight = 0.2;
  harness::EpisodicResult r =
      harness::EpisodicTrain(tc, model.get(), fx.manifest, fx.cache.get());
  CHECK(std::isfinite(r.initial_loss));
  CHECK(r.heldout_acc >= 0.0);

  // The aux loss really carries the margin term when targets are set.
  auto probe = models::MakeModel<float>(TinyCapsConfig(6), 31);
  nn::Tensor<float> x({2, 1, 128, 300});
  Rng rng(3);
  for (auto &v : x.data) v = static_cast<float>(rng.NextGaussian());
  auto plain = probe->ForwardEmbed(x, true);
  CHECK(plain.aux_loss == 0.0f);
  probe->SetEpisodeMarginTargets({0, 1}, 0.5);
  auto with_margin = probe->ForwardEmbed(x, true);
  CHECK(with_margin.aux_loss > 0.0f);
  probe->ClearEpisodeMarginTargets();
  auto cleared = probe->ForwardEmbed(x, true);
  CHECK(cleared.aux_loss == 0.0f);
}

TEST_CASE("per-epoch re-crop flag draws fresh offsets") {
  auto &fx = Fixture();
  const auto *entry = fx.manifest.EntriesFor(data::Split::kTrain)[0];
  Rng rng(8);
  auto a = fx.cache->Get(*entry, &rng);
  auto b = fx.cache->Get(*entry, &rng);
  CHECK(a->values != b->values);      // two rerolls differ
  auto frozen1 = fx.cache->Get(*entry);
  auto frozen2 = fx.cache->Get(*entry);
  CHECK(frozen1->values == frozen2->values);  // frozen path is stable
}

TEST_CASE("fine-tuning beats from-scratch on a transfer toy task") {
  // Source and target corpora share the synthesis family but use different
  // voices (different seeds). Equal step budgets after the head swap.
  TempDir src_dir("fssr_transfer_src"), dst_dir("fssr_transfer_dst");
  data::ToyCorpusConfig cc;
  cc.n_speakers = 6;
  cc.utts_per_speaker = 10;
  cc.test_per_speaker = 3;
  cc.duration_s = 3.2;
  cc.seed = 101;
  data::GenerateToyCorpus(src_dir.path(), cc);
  cc.seed = 707;  // different voices
  data::GenerateToyCorpus(dst_dir.path(), cc);
  data::Manifest src = data::BuildVoxcelebSplit(src_dir.path(), 6, 7, 1);
  data::Manifest dst = data::BuildVoxcelebSplit(dst_dir.path(), 6, 7, 1);
  data::SpectrogramCache cache("", dsp::StftConfig{});

  harness::TrainConfig pre;
  pre.learning_rate = 3e-3;
  pre.batch_size = 12;
  pre.max_epochs = 60;
  pre.max_steps = 120;
  pre.seed = 5;
  pre.loss = harness::TrainConfig::LossKind::kMargin;
  auto pretrained = models::MakeModel<float>(TinyCapsConfig(6), 3);
  harness::TrainClassifier(pre, pretrained.get(), src, &cache);

  harness::TrainConfig ft = pre;
  ft.max_steps = 25;
  pretrained->ReplaceHead(6, 77);
  harness::TrainResult tuned =
      harness::TrainClassifier(ft, pretrained.get(), dst, &cache);

  auto scratch = models::MakeModel<float>(TinyCapsConfig(6), 3);
  harness::TrainResult cold =
      harness::TrainClassifier(ft, scratch.get(), dst, &cache);

  // The backbone features transfer; allow a little slack for luck.
  CHECK(tuned.top1 + 0.10 >= cold.top1);
  CHECK(tuned.top1 >= 1.0 / 6.0);
}

TEST_CASE("sweep accuracy does not degrade with more training data") {
  auto &fx = Fixture();
  auto run_at = [&](int n) {
    data::Manifest sub = harness::SubsampleTrain(fx.manifest, n, 50);
    auto model = models::MakeModel<float>(TinyCapsConfig(6), 9);
    harness::TrainConfig tc;
    tc.learning_rate = 3e-3;
    tc.batch_size = 12;
    tc.max_epochs = 200;
    tc.max_steps = 80;
    tc.seed = 50;
    tc.loss = harness::TrainConfig::LossKind::kMargin;
    return harness::TrainClassifier(tc, model.get(), sub, fx.cache.get()).top1;
  };
  const double small = run_at(2);
  const double full = run_at(7);
  CHECK(full + 0.12 >= small);  // within a CI-sized slack
}
