/* fssr.h — public C API of libfssr.
 *
 * Copyright 2026  FSSR Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * Few-shot speaker identification toolkit: spectrogram extraction, deep
 * embedding backbones (vgg_m, resnet34, capsnet_m, capsnet_ma), episodic
 * prototypical-loss training and evaluation, dataset split tooling and the
 * experiment harness.
 *
 * Conventions: every function returning fssr_status yields FSSR_OK (0) on
 * success; on failure fssr_last_error() describes the problem for the
 * calling thread. Objects are opaque handles released with the matching
 * *_destroy/_close function. All heavier operations are driven by a
 * fssr_config holding "key = value" pairs (see the README for the key
 * reference).
 */

#ifndef FSSR_H_
#define FSSR_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define FSSR_VERSION_MAJOR 1
#define FSSR_VERSION_MINOR 0
#define FSSR_VERSION_PATCH 0

typedef enum fssr_status {
  FSSR_OK = 0,
  FSSR_ERR_INVALID_ARGUMENT = 1,
  FSSR_ERR_IO = 2,
  FSSR_ERR_UNREADABLE_FILE = 3,
  FSSR_ERR_EMPTY_AUDIO = 4,
  FSSR_ERR_CLIP_TOO_SHORT = 5,
  FSSR_ERR_ALREADY_NORMALIZED = 6,
  FSSR_ERR_MISSING_ROOT = 7,
  FSSR_ERR_INSUFFICIENT_DATA = 8,
  FSSR_ERR_POOL_TOO_SMALL = 9,
  FSSR_ERR_EMPTY_CLASS = 10,
  FSSR_ERR_SHAPE_MISMATCH = 11,
  FSSR_ERR_DIMENSION_MISMATCH = 12,
  FSSR_ERR_NON_FINITE = 13,
  FSSR_ERR_CONFIG_MISMATCH = 14,
  FSSR_ERR_DIVERGENCE = 15,
  FSSR_ERR_CHECKPOINT_INCOMPATIBLE = 16,
  FSSR_ERR_EMPTY_INPUT = 17,
  FSSR_ERR_INTERNAL = 18
} fssr_status;

const char *fssr_version_string(void);
const char *fssr_status_name(fssr_status status);
/* Message of the last failure on this thread; empty string if none. */
const char *fssr_last_error(void);

/* ---------------------------------------------------------------- config */

typedef struct fssr_config fssr_config;

fssr_config *fssr_config_create(void);
void fssr_config_destroy(fssr_config *cfg);
/* "key = value" lines, '#' comments; later loads/sets win. */
fssr_status fssr_config_load_file(fssr_config *cfg, const char *path);
fssr_status fssr_config_set(fssr_config *cfg, const char *key,
                            const char *value);
/* NULL when the key is unset; the pointer lives until the next call on cfg. */
const char *fssr_config_get(fssr_config *cfg, const char *key);

/* ----------------------------------------------------------------- audio */

typedef struct fssr_clip fssr_clip;
typedef struct fssr_spectrogram fssr_spectrogram;

/* Decode + standardize: mono, 16 kHz, amplitudes in [-1, 1]. */
fssr_status fssr_clip_load(const char *path, fssr_clip **out);
void fssr_clip_destroy(fssr_clip *clip);
int fssr_clip_sample_rate(const fssr_clip *clip);
int64_t fssr_clip_n_samples(const fssr_clip *clip);
/* Copies up to capacity samples; returns the clip length. */
int64_t fssr_clip_samples(const fssr_clip *clip, float *buffer,
                          int64_t capacity);
/* Seeded uniform crop; pad_with_repeat loops clips shorter than duration. */
fssr_status fssr_clip_random_crop(const fssr_clip *clip, double duration_s,
                                  uint64_t seed, int pad_with_repeat,
                                  fssr_clip **out);
fssr_status fssr_clip_crop_at(const fssr_clip *clip, double offset_s,
                              double duration_s, int pad_with_repeat,
                              fssr_clip **out);

/* 25 ms Hamming windows, 10 ms hop, 128 bins; a 3 s clip gives 300 frames.
 * cfg may be NULL for defaults (keys dsp.fft_length, dsp.bin_reduction,
 * dsp.log_magnitude). */
fssr_status fssr_spectrogram_compute(const fssr_clip *clip, fssr_config *cfg,
                                     fssr_spectrogram **out);
/* Per-bin mean/variance standardization; fails on a second call. */
fssr_status fssr_spectrogram_normalize(fssr_spectrogram *spec);
void fssr_spectrogram_destroy(fssr_spectrogram *spec);
int fssr_spectrogram_bins(const fssr_spectrogram *spec);
int fssr_spectrogram_frames(const fssr_spectrogram *spec);
int fssr_spectrogram_is_normalized(const fssr_spectrogram *spec);
/* Row-major copy; returns the element count. */
int64_t fssr_spectrogram_values(const fssr_spectrogram *spec, float *buffer,
                                int64_t capacity);
/* The "FSSR" binary tensor container. */
fssr_status fssr_spectrogram_save(const fssr_spectrogram *spec,
                                  const char *path);
fssr_status fssr_spectrogram_load(const char *path, int normalized,
                                  fssr_spectrogram **out);

/* ---------------------------------------------------------------- models */

typedef struct fssr_model fssr_model;

/* arch: vgg_m | resnet34 | capsnet_m | capsnet_ma. */
fssr_status fssr_model_create(const char *arch, int n_classes, uint64_t seed,
                              fssr_model **out);
fssr_status fssr_model_load(const char *checkpoint_path, fssr_model **out);
fssr_status fssr_model_save(fssr_model *model, const char *path);
void fssr_model_destroy(fssr_model *model);
const char *fssr_model_arch(const fssr_model *model);
int fssr_model_n_classes(const fssr_model *model);
int64_t fssr_model_parameter_count(fssr_model *model);
int fssr_model_embedding_dim(const fssr_model *model);
/* Re-initializes the classification head for a new class count. */
fssr_status fssr_model_replace_head(fssr_model *model, int n_classes,
                                    uint64_t seed);
/* Few-shot embedding of a normalized spectrogram (eval mode). */
fssr_status fssr_model_embed(fssr_model *model, const fssr_spectrogram *spec,
                             float *buffer, int64_t capacity,
                             int64_t *out_dim);
/* Class scores (logits; capsule norms for the capsule nets). */
fssr_status fssr_model_logits(fssr_model *model, const fssr_spectrogram *spec,
                              float *buffer, int64_t capacity,
                              int64_t *out_dim);

/* ------------------------------------------------------------ operations */

/* Each runner maps to one CLI subcommand and is driven entirely by config
 * keys; progress goes to stderr when "verbose = true". */
fssr_status fssr_run_prepare_splits(fssr_config *cfg);
fssr_status fssr_run_spectrogram(fssr_config *cfg);
fssr_status fssr_run_train(fssr_config *cfg);
fssr_status fssr_run_episodic_train(fssr_config *cfg);
fssr_status fssr_run_finetune(fssr_config *cfg);
fssr_status fssr_run_sweep(fssr_config *cfg);
fssr_status fssr_run_report(fssr_config *cfg);

typedef struct fssr_fewshot_result {
  double mean_accuracy;
  double ci95_half_width;
  int n_episodes;
} fssr_fewshot_result;

fssr_status fssr_run_fewshot_eval(fssr_config *cfg, fssr_fewshot_result *out);

/* Built-in property suite; returns the number of failed checks into
 * out_failed (0 == all green) and prints one line per check to stderr. */
fssr_status fssr_run_selftest(int *out_failed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FSSR_H_ */
