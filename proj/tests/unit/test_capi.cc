// tests/unit/test_capi.cc
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
// The extern-C surface, exercised the way an FFI consumer would use it.

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "fssr.h"
#include "fssr/dsp/wav.h"
#include "testutil.h"

using testutil::TempDir;

TEST_CASE("version and status names") {
  CHECK(std::string(fssr_version_string()) == "1.0.0");
  CHECK(std::string(fssr_status_name(FSSR_OK)) == "Ok");
  CHECK(std::string(fssr_status_name(FSSR_ERR_CLIP_TOO_SHORT)) ==
        "ClipTooShort");
  CHECK(std::string(fssr_status_name(FSSR_ERR_POOL_TOO_SMALL)) ==
        "PoolTooSmall");
}

TEST_CASE("clip load, crop, spectrogram, save/load through the C API") {
  TempDir tmp("fssr_capi");
  fssr::dsp::WriteWav16(tmp.file("x.wav"),
                        testutil::SineWave(1000.0, 5.0, 16000), 16000, 1);

  fssr_clip *clip = nullptr;
  REQUIRE(fssr_clip_load(tmp.file("x.wav").c_str(), &clip) == FSSR_OK);
  CHECK(fssr_clip_sample_rate(clip) == 16000);
  CHECK(fssr_clip_n_samples(clip) == 80000);

  fssr_clip *crop = nullptr;
  REQUIRE(fssr_clip_random_crop(clip, 3.0, 7, 0, &crop) == FSSR_OK);
  CHECK(fssr_clip_n_samples(crop) == 48000);
  // Same seed, same crop.
  fssr_clip *crop2 = nullptr;
  REQUIRE(fssr_clip_random_crop(clip, 3.0, 7, 0, &crop2) == FSSR_OK);
  std::vector<float> a(48000), b(48000);
  fssr_clip_samples(crop, a.data(), 48000);
  fssr_clip_samples(crop2, b.data(), 48000);
  CHECK(a == b);

  fssr_spectrogram *spec = nullptr;
  REQUIRE(fssr_spectrogram_compute(crop, nullptr, &spec) == FSSR_OK);
  CHECK(fssr_spectrogram_bins(spec) == 128);
  CHECK(fssr_spectrogram_frames(spec) == 300);
  CHECK(fssr_spectrogram_is_normalized(spec) == 0);
  REQUIRE(fssr_spectrogram_normalize(spec) == FSSR_OK);
  CHECK(fssr_spectrogram_is_normalized(spec) == 1);
  // Double normalization is the documented error.
  CHECK(fssr_spectrogram_normalize(spec) == FSSR_ERR_ALREADY_NORMALIZED);
  CHECK(std::string(fssr_last_error()).find("normalized") !=
        std::string::npos);

  REQUIRE(fssr_spectrogram_save(spec, tmp.file("x.fssr").c_str()) == FSSR_OK);
  fssr_spectrogram *back = nullptr;
  REQUIRE(fssr_spectrogram_load(tmp.file("x.fssr").c_str(), 1, &back) ==
          FSSR_OK);
  CHECK(fssr_spectrogram_frames(back) == 300);
  std::vector<float> va(128 * 300), vb(128 * 300);
  CHECK(fssr_spectrogram_values(spec, va.data(), va.size()) == 128 * 300);
  CHECK(fssr_spectrogram_values(back, vb.data(), vb.size()) == 128 * 300);
  CHECK(va == vb);

  fssr_spectrogram_destroy(back);
  fssr_spectrogram_destroy(spec);
  fssr_clip_destroy(crop2);
  fssr_clip_destroy(crop);
  fssr_clip_destroy(clip);
}

TEST_CASE("error paths return codes and messages, not crashes") {
  fssr_clip *clip = nullptr;
  CHECK(fssr_clip_load("/no/such/file.wav", &clip) ==
        FSSR_ERR_UNREADABLE_FILE);
  CHECK(std::strlen(fssr_last_error()) > 0);
  CHECK(fssr_clip_load(nullptr, &clip) == FSSR_ERR_INVALID_ARGUMENT);

  fssr_model *model = nullptr;
  CHECK(fssr_model_create("not_an_arch", 10, 1, &model) ==
        FSSR_ERR_INVALID_ARGUMENT);

  fssr_config *cfg = fssr_config_create();
  CHECK(fssr_config_load_file(cfg, "/no/such/file.config") == FSSR_ERR_IO);
  CHECK(fssr_run_train(cfg) == FSSR_ERR_INVALID_ARGUMENT);  // missing keys
  fssr_config_destroy(cfg);
}

TEST_CASE("config set/get and typed parsing") {
  fssr_config *cfg = fssr_config_create();
  CHECK(fssr_config_get(cfg, "absent") == nullptr);
  REQUIRE(fssr_config_set(cfg, "train.lr", "0.005") == FSSR_OK);
  CHECK(std::string(fssr_config_get(cfg, "train.lr")) == "0.005");
  fssr_config_destroy(cfg);
}

TEST_CASE("model create/save/load/replace-head through the C API") {
  TempDir tmp("fssr_capi_model");
  fssr_model *model = nullptr;
  REQUIRE(fssr_model_create("capsnet_m", 4, 11, &model) == FSSR_OK);
  CHECK(std::string(fssr_model_arch(model)) == "capsnet_m");
  CHECK(fssr_model_n_classes(model) == 4);
  CHECK(fssr_model_parameter_count(model) ==
        5329664 + 4LL * 448 * 16 * 8);
  CHECK(fssr_model_embedding_dim(model) == 4 * 16);

  // Embed + logits on a synthetic normalized spectrogram.
  fssr::dsp::WriteWav16(tmp.file("t.wav"),
                        testutil::SineWave(500.0, 3.0, 16000), 16000, 1);
  fssr_clip *clip = nullptr;
  REQUIRE(fssr_clip_load(tmp.file("t.wav").c_str(), &clip) == FSSR_OK);
  fssr_spectrogram *spec = nullptr;
  REQUIRE(fssr_spectrogram_compute(clip, nullptr, &spec) == FSSR_OK);
  // Unnormalized input is rejected.
  std::vector<float> buf(1024);
  int64_t dim = 0;
  CHECK(fssr_model_embed(model, spec, buf.data(), 1024, &dim) ==
        FSSR_ERR_INVALID_ARGUMENT);
  REQUIRE(fssr_spectrogram_normalize(spec) == FSSR_OK);
  REQUIRE(fssr_model_embed(model, spec, buf.data(), 1024, &dim) == FSSR_OK);
  CHECK(dim == 64);
  double norm = 0.0;
  for (int i = 0; i < 64; ++i) norm += buf[i] * buf[i];
  CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-4));

  std::vector<float> logits_buf(16);
  REQUIRE(fssr_model_logits(model, spec, logits_buf.data(), 16, &dim) == FSSR_OK);
  CHECK(dim == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(logits_buf[i] >= 0.0f);
    CHECK(logits_buf[i] < 1.0f);
  }
  // Too-small buffer is an error, not a write.
  CHECK(fssr_model_embed(model, spec, buf.data(), 8, &dim) ==
        FSSR_ERR_DIMENSION_MISMATCH);

  REQUIRE(fssr_model_save(model, tmp.file("m.ckpt").c_str()) == FSSR_OK);
  fssr_model *back = nullptr;
  REQUIRE(fssr_model_load(tmp.file("m.ckpt").c_str(), &back) == FSSR_OK);
  std::vector<float> buf2(1024);
  REQUIRE(fssr_model_embed(back, spec, buf2.data(), 1024, &dim) == FSSR_OK);
  for (int i = 0; i < 64; ++i) CHECK(buf[i] == buf2[i]);

  REQUIRE(fssr_model_replace_head(back, 7, 5) == FSSR_OK);
  CHECK(fssr_model_n_classes(back) == 7);

  fssr_model_destroy(back);
  fssr_model_destroy(model);
  fssr_spectrogram_destroy(spec);
  fssr_clip_destroy(clip);
}

TEST_CASE("run-level API: prepare splits then evaluate a fresh model") {
  TempDir tmp("fssr_capi_run");
  fssr_config *prep = fssr_config_create();
  fssr_config_set(prep, "dataset", "toy");
  fssr_config_set(prep, "root", tmp.file("corpus").c_str());
  fssr_config_set(prep, "out", tmp.file("manifest.txt").c_str());
  fssr_config_set(prep, "toy.speakers", "4");
  fssr_config_set(prep, "toy.utts", "6");
  fssr_config_set(prep, "toy.test_utts", "2");
  fssr_config_set(prep, "seed", "3");
  fssr_config_set(prep, "quiet", "true");
  REQUIRE(fssr_run_prepare_splits(prep) == FSSR_OK);
  fssr_config_destroy(prep);

  // A fresh (untrained) tiny model, saved and evaluated frozen.
  fssr_model *model = nullptr;
  REQUIRE(fssr_model_create("capsnet_m", 4, 1, &model) == FSSR_OK);
  REQUIRE(fssr_model_save(model, tmp.file("m.ckpt").c_str()) == FSSR_OK);
  fssr_model_destroy(model);

  fssr_config *eval = fssr_config_create();
  fssr_config_set(eval, "checkpoint", tmp.file("m.ckpt").c_str());
  fssr_config_set(eval, "manifest", tmp.file("manifest.txt").c_str());
  fssr_config_set(eval, "episode.n_way", "3");
  fssr_config_set(eval, "episode.k_shot", "1");
  fssr_config_set(eval, "episode.n_query", "1");
  fssr_config_set(eval, "episode.count", "40");
  fssr_config_set(eval, "seed", "5");
  fssr_config_set(eval, "quiet", "true");
  fssr_fewshot_result res;
  REQUIRE(fssr_run_fewshot_eval(eval, &res) == FSSR_OK);
  CHECK(res.n_episodes == 40);
  CHECK(res.mean_accuracy >= 0.0);
  CHECK(res.mean_accuracy <= 1.0);
  fssr_config_destroy(eval);
}
