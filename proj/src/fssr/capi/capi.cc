// fssr/capi/capi.cc
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
// The extern-C surface. Opaque handles wrap the C++ core types; exceptions
// are caught at the boundary and mapped to status codes, with the message
// stored per thread for fssr_last_error().

#include "fssr.h"

#include <algorithm>
#include <cstring>
#include <iostream>
#include <memory>
#include <string>

#include "fssr/common/config.h"
#include "fssr/common/error.h"
#include "fssr/dsp/spectrogram.h"
#include "fssr/harness/runner.h"
#include "fssr/harness/selftest.h"
#include "fssr/models/checkpoint.h"
#include "fssr/models/factory.h"

using fssr::Config;
using fssr::Error;
using fssr::ErrorCode;

struct fssr_config {
  Config impl;
  std::string scratch;  // backs fssr_config_get
};

struct fssr_clip {
  fssr::dsp::AudioClip impl;
};

struct fssr_spectrogram {
  fssr::dsp::Spectrogram impl;
};

struct fssr_model {
  std::unique_ptr<fssr::models::Model<float>> impl;
};

namespace {

thread_local std::string g_last_error;

fssr_status StatusFromCode(ErrorCode code) {
  return static_cast<fssr_status>(static_cast<int>(code));
}

template <typename Fn>
fssr_status Guarded(Fn &&fn) {
  try {
    fn();
    g_last_error.clear();
    return FSSR_OK;
  } catch (const Error &e) {
    g_last_error = e.what();
    return StatusFromCode(e.code());
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return FSSR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FSSR_ERR_INTERNAL;
  }
}

fssr_status BadArg(const char *msg) {
  g_last_error = msg;
  return FSSR_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char *fssr_version_string(void) { return "1.0.0"; }

const char *fssr_status_name(fssr_status status) {
  return fssr::ErrorCodeName(static_cast<ErrorCode>(static_cast<int>(status)));
}

const char *fssr_last_error(void) { return g_last_error.c_str(); }

/* config ----------------------------------------------------------------- */

fssr_config *fssr_config_create(void) { return new fssr_config(); }

void fssr_config_destroy(fssr_config *cfg) { delete cfg; }

fssr_status fssr_config_load_file(fssr_config *cfg, const char *path) {
  if (!cfg || !path) return BadArg("null config or path");
  return Guarded([&] { cfg->impl.LoadFile(path); });
}

fssr_status fssr_config_set(fssr_config *cfg, const char *key,
                            const char *value) {
  if (!cfg || !key || !value) return BadArg("null config, key or value");
  return Guarded([&] { cfg->impl.Set(key, value); });
}

const char *fssr_config_get(fssr_config *cfg, const char *key) {
  if (!cfg || !key) return nullptr;
  if (!cfg->impl.Has(key)) return nullptr;
  cfg->scratch = cfg->impl.Get(key, "");
  return cfg->scratch.c_str();
}

/* audio ------------------------------------------------------------------ */

fssr_status fssr_clip_load(const char *path, fssr_clip **out) {
  if (!path || !out) return BadArg("null path or out");
  return Guarded([&] {
    auto clip = std::make_unique<fssr_clip>();
    clip->impl = fssr::dsp::LoadAndStandardize(path);
    *out = clip.release();
  });
}

void fssr_clip_destroy(fssr_clip *clip) { delete clip; }

int fssr_clip_sample_rate(const fssr_clip *clip) {
  return clip ? clip->impl.sample_rate_hz : 0;
}

int64_t fssr_clip_n_samples(const fssr_clip *clip) {
  return clip ? clip->impl.n_samples() : 0;
}

int64_t fssr_clip_samples(const fssr_clip *clip, float *buffer,
                          int64_t capacity) {
  if (!clip) return 0;
  const int64_t n = clip->impl.n_samples();
  if (buffer && capacity > 0)
    std::memcpy(buffer, clip->impl.samples.data(),
                sizeof(float) * static_cast<size_t>(std::min(n, capacity)));
  return n;
}

fssr_status fssr_clip_random_crop(const fssr_clip *clip, double duration_s,
                                  uint64_t seed, int pad_with_repeat,
                                  fssr_clip **out) {
  if (!clip || !out) return BadArg("null clip or out");
  return Guarded([&] {
    fssr::Rng rng(seed);
    auto crop = std::make_unique<fssr_clip>();
    crop->impl = fssr::dsp::RandomCrop(clip->impl, duration_s, &rng,
                                       pad_with_repeat != 0);
    *out = crop.release();
  });
}

fssr_status fssr_clip_crop_at(const fssr_clip *clip, double offset_s,
                              double duration_s, int pad_with_repeat,
                              fssr_clip **out) {
  if (!clip || !out) return BadArg("null clip or out");
  return Guarded([&] {
    auto crop = std::make_unique<fssr_clip>();
    crop->impl = fssr::dsp::CropAt(clip->impl, offset_s, duration_s,
                                   pad_with_repeat != 0);
    *out = crop.release();
  });
}

/* spectrograms ------------------------------------------------------------ */

fssr_status fssr_spectrogram_compute(const fssr_clip *clip, fssr_config *cfg,
                                     fssr_spectrogram **out) {
  if (!clip || !out) return BadArg("null clip or out");
  return Guarded([&] {
    fssr::dsp::StftConfig sc;
    if (cfg) {
      sc.fft_length = static_cast<int>(cfg->impl.GetInt("dsp.fft_length", 512));
      sc.log_magnitude = cfg->impl.GetBool("dsp.log_magnitude", false);
      const std::string red =
          cfg->impl.Get("dsp.bin_reduction", "truncate_low_128");
      sc.bin_reduction = red == "average_pairs"
                             ? fssr::dsp::BinReduction::kAveragePairs
                             : fssr::dsp::BinReduction::kTruncateLow128;
    }
    auto spec = std::make_unique<fssr_spectrogram>();
    spec->impl = fssr::dsp::ComputeSpectrogram(clip->impl, sc);
    *out = spec.release();
  });
}

fssr_status fssr_spectrogram_normalize(fssr_spectrogram *spec) {
  if (!spec) return BadArg("null spectrogram");
  return Guarded([&] { spec->impl = fssr::dsp::NormalizeBins(spec->impl); });
}

void fssr_spectrogram_destroy(fssr_spectrogram *spec) { delete spec; }

int fssr_spectrogram_bins(const fssr_spectrogram *spec) {
  return spec ? spec->impl.bins : 0;
}

int fssr_spectrogram_frames(const fssr_spectrogram *spec) {
  return spec ? spec->impl.frames : 0;
}

int fssr_spectrogram_is_normalized(const fssr_spectrogram *spec) {
  return spec && spec->impl.normalized ? 1 : 0;
}

int64_t fssr_spectrogram_values(const fssr_spectrogram *spec, float *buffer,
                                int64_t capacity) {
  if (!spec) return 0;
  const int64_t n = static_cast<int64_t>(spec->impl.values.size());
  if (buffer && capacity > 0)
    std::memcpy(buffer, spec->impl.values.data(),
                sizeof(float) * static_cast<size_t>(std::min(n, capacity)));
  return n;
}

fssr_status fssr_spectrogram_save(const fssr_spectrogram *spec,
                                  const char *path) {
  if (!spec || !path) return BadArg("null spectrogram or path");
  return Guarded([&] { fssr::dsp::SaveSpectrogram(spec->impl, path); });
}

fssr_status fssr_spectrogram_load(const char *path, int normalized,
                                  fssr_spectrogram **out) {
  if (!path || !out) return BadArg("null path or out");
  return Guarded([&] {
    auto spec = std::make_unique<fssr_spectrogram>();
    spec->impl = fssr::dsp::LoadSpectrogram(path, normalized != 0);
    *out = spec.release();
  });
}

/* models ------------------------------------------------------------------ */

fssr_status fssr_model_create(const char *arch, int n_classes, uint64_t seed,
                              fssr_model **out) {
  if (!arch || !out) return BadArg("null arch or out");
  return Guarded([&] {
    fssr::models::ModelConfig mc;
    mc.arch = fssr::models::ArchFromString(arch);
    mc.n_classes = n_classes;
    auto model = std::make_unique<fssr_model>();
    model->impl = fssr::models::MakeModel<float>(mc, seed);
    *out = model.release();
  });
}

fssr_status fssr_model_load(const char *checkpoint_path, fssr_model **out) {
  if (!checkpoint_path || !out) return BadArg("null path or out");
  return Guarded([&] {
    auto model = std::make_unique<fssr_model>();
    model->impl = fssr::models::LoadCheckpoint(checkpoint_path, nullptr);
    *out = model.release();
  });
}

fssr_status fssr_model_save(fssr_model *model, const char *path) {
  if (!model || !path) return BadArg("null model or path");
  return Guarded(
      [&] { fssr::models::SaveCheckpoint(path, model->impl.get(), ""); });
}

void fssr_model_destroy(fssr_model *model) { delete model; }

const char *fssr_model_arch(const fssr_model *model) {
  if (!model) return nullptr;
  return fssr::models::ArchToString(model->impl->config().arch);
}

int fssr_model_n_classes(const fssr_model *model) {
  return model ? model->impl->config().n_classes : 0;
}

int64_t fssr_model_parameter_count(fssr_model *model) {
  return model ? fssr::models::CountParameters(model->impl.get()) : 0;
}

int fssr_model_embedding_dim(const fssr_model *model) {
  return model ? model->impl->embedding_dim() : 0;
}

fssr_status fssr_model_replace_head(fssr_model *model, int n_classes,
                                    uint64_t seed) {
  if (!model) return BadArg("null model");
  return Guarded([&] { model->impl->ReplaceHead(n_classes, seed); });
}

namespace {

fssr::nn::Tensor<float> BatchOfOne(const fssr_spectrogram *spec) {
  const auto &s = spec->impl;
  FSSR_CHECK(s.normalized, ErrorCode::kInvalidArgument)
      << "spectrogram must be normalized before inference";
  fssr::nn::Tensor<float> batch({1, 1, s.bins, s.frames});
  std::copy(s.values.begin(), s.values.end(), batch.ptr());
  return batch;
}

}  // namespace

fssr_status fssr_model_embed(fssr_model *model, const fssr_spectrogram *spec,
                             float *buffer, int64_t capacity,
                             int64_t *out_dim) {
  if (!model || !spec || !buffer) return BadArg("null argument");
  return Guarded([&] {
    auto out = model->impl->ForwardEmbed(BatchOfOne(spec), /*train=*/false);
    const int64_t dim = out.embeddings.dim(1);
    FSSR_CHECK(capacity >= dim, ErrorCode::kDimensionMismatch)
        << "buffer capacity " << capacity << " < embedding dim " << dim;
    std::memcpy(buffer, out.embeddings.ptr(),
                sizeof(float) * static_cast<size_t>(dim));
    if (out_dim) *out_dim = dim;
  });
}

fssr_status fssr_model_logits(fssr_model *model, const fssr_spectrogram *spec,
                              float *buffer, int64_t capacity,
                              int64_t *out_dim) {
  if (!model || !spec || !buffer) return BadArg("null argument");
  return Guarded([&] {
    auto logits = model->impl->ForwardLogits(BatchOfOne(spec), /*train=*/false);
    const int64_t dim = logits.dim(1);
    FSSR_CHECK(capacity >= dim, ErrorCode::kDimensionMismatch)
        << "buffer capacity " << capacity << " < class count " << dim;
    std::memcpy(buffer, logits.ptr(),
                sizeof(float) * static_cast<size_t>(dim));
    if (out_dim) *out_dim = dim;
  });
}

/* operations --------------------------------------------------------------*/

namespace {

std::ostream *LogFor(fssr_config *cfg) {
  if (cfg && cfg->impl.GetBool("quiet", false)) return nullptr;
  return &std::cerr;
}

}  // namespace

fssr_status fssr_run_prepare_splits(fssr_config *cfg) {
  if (!cfg) return BadArg("null config");
  return Guarded(
      [&] { fssr::harness::RunPrepareSplits(cfg->impl, LogFor(cfg)); });
}

fssr_status fssr_run_spectrogram(fssr_config *cfg) {
  if (!cfg) return BadArg("null config");
  return Guarded(
      [&] { fssr::harness::RunSpectrogram(cfg->impl, LogFor(cfg)); });
}

fssr_status fssr_run_train(fssr_config *cfg) {
  if (!cfg) return BadArg("null config");
  return Guarded([&] { fssr::harness::RunTrain(cfg->impl, LogFor(cfg)); });
}

fssr_status fssr_run_episodic_train(fssr_config *cfg) {
  if (!cfg) return BadArg("null config");
  return Guarded(
      [&] { fssr::harness::RunEpisodicTrain(cfg->impl, LogFor(cfg)); });
}

fssr_status fssr_run_finetune(fssr_config *cfg) {
  if (!cfg) return BadArg("null config");
  return Guarded([&] { fssr::harness::RunFinetune(cfg->impl, LogFor(cfg)); });
}

fssr_status fssr_run_sweep(fssr_config *cfg) {
  if (!cfg) return BadArg("null config");
  return Guarded([&] { fssr::harness::RunSweep(cfg->impl, LogFor(cfg)); });
}

fssr_status fssr_run_report(fssr_config *cfg) {
  if (!cfg) return BadArg("null config");
  return Guarded([&] { fssr::harness::RunReport(cfg->impl, LogFor(cfg)); });
}

fssr_status fssr_run_fewshot_eval(fssr_config *cfg, fssr_fewshot_result *out) {
  if (!cfg) return BadArg("null config");
  return Guarded([&] {
    const auto res = fssr::harness::RunFewshotEval(cfg->impl, LogFor(cfg));
    if (out) {
      out->mean_accuracy = res.mean_accuracy;
      out->ci95_half_width = res.ci95_half_width;
      out->n_episodes = res.n_episodes;
    }
  });
}

fssr_status fssr_run_selftest(int *out_failed) {
  return Guarded([&] {
    const int failed = fssr::harness::RunSelfTest(&std::cerr);
    if (out_failed) *out_failed = failed;
  });
}

} /* extern "C" */
