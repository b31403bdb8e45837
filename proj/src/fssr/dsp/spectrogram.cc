// fssr/dsp/spectrogram.cc
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

#include "fssr/dsp/spectrogram.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fssr/common/error.h"
#include "fssr/dsp/fft.h"
#include "fssr/dsp/resample.h"
#include "fssr/dsp/wav.h"

namespace fssr {
namespace dsp {

AudioClip LoadAndStandardize(const std::string &path) {
  const WavData wav = ReadWav(path);
  const int64_t frames = wav.frames();
  if (frames == 0) FSSR_RAISE(ErrorCode::kEmptyAudio) << "no audio: " << path;

  // Average channels to mono before any rate conversion.
  std::vector<float> mono(static_cast<size_t>(frames));
  if (wav.channels == 1) {
    mono = wav.samples;
  } else {
    const float inv = 1.0f / static_cast<float>(wav.channels);
    for (int64_t i = 0; i < frames; ++i) {
      float acc = 0.0f;
      for (int c = 0; c < wav.channels; ++c)
        acc += wav.samples[static_cast<size_t>(i) * wav.channels + c];
      mono[static_cast<size_t>(i)] = acc * inv;
    }
  }

  AudioClip clip;
  clip.sample_rate_hz = kStandardRateHz;
  clip.samples = Resample(mono, wav.sample_rate_hz, kStandardRateHz);
  if (clip.samples.empty())
    FSSR_RAISE(ErrorCode::kEmptyAudio) << "no samples after resample: " << path;
  // The resampler can overshoot slightly near sharp transients.
  for (float &s : clip.samples) s = std::clamp(s, -1.0f, 1.0f);
  return clip;
}

namespace {

AudioClip CropSamples(const AudioClip &clip, int64_t offset, int64_t want,
                      bool pad_with_repeat) {
  const int64_t n = clip.n_samples();
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.resize(static_cast<size_t>(want));
  if (n >= offset + want) {
    std::copy(clip.samples.begin() + offset,
              clip.samples.begin() + offset + want, out.samples.begin());
    return out;
  }
  FSSR_CHECK(pad_with_repeat, ErrorCode::kClipTooShort)
      << "clip has " << n << " samples, need " << offset + want;
  for (int64_t i = 0; i < want; ++i)
    out.samples[static_cast<size_t>(i)] =
        clip.samples[static_cast<size_t>((offset + i) % n)];
  return out;
}

}  // namespace

AudioClip RandomCrop(const AudioClip &clip, double duration_s, Rng *rng,
                     bool pad_with_repeat) {
  FSSR_CHECK(duration_s > 0, ErrorCode::kInvalidArgument)
      << "duration_s must be positive";
  const int64_t want = std::llround(duration_s * clip.sample_rate_hz);
  const int64_t n = clip.n_samples();
  if (n < want) {
    if (!pad_with_repeat)
      FSSR_RAISE(ErrorCode::kClipTooShort)
          << "clip of " << n << " samples is shorter than requested "
          << want;
    return CropSamples(clip, 0, want, /*pad_with_repeat=*/true);
  }
  const int64_t offset = rng->NextInt(n - want + 1);
  return CropSamples(clip, offset, want, /*pad_with_repeat=*/false);
}

AudioClip CropAt(const AudioClip &clip, double offset_s, double duration_s,
                 bool pad_with_repeat) {
  FSSR_CHECK(duration_s > 0 && offset_s >= 0, ErrorCode::kInvalidArgument)
      << "bad crop window";
  const int64_t want = std::llround(duration_s * clip.sample_rate_hz);
  const int64_t offset = std::llround(offset_s * clip.sample_rate_hz);
  if (!pad_with_repeat && clip.n_samples() < offset + want)
    FSSR_RAISE(ErrorCode::kClipTooShort)
        << "clip of " << clip.n_samples() << " samples cannot supply ["
        << offset << ", " << offset + want << ")";
  return CropSamples(clip, std::min<int64_t>(offset, clip.n_samples() - 1),
                     want, pad_with_repeat);
}

Spectrogram ComputeSpectrogram(const AudioClip &clip, const StftConfig &cfg) {
  FSSR_CHECK(clip.sample_rate_hz == kStandardRateHz,
             ErrorCode::kInvalidArgument)
      << "clip must be standardized to " << kStandardRateHz << " Hz";
  const int window = cfg.window_samples();
  const int hop = cfg.hop_samples();
  FSSR_CHECK(cfg.fft_length >= window, ErrorCode::kInvalidArgument)
      << "fft_length " << cfg.fft_length << " < window " << window;
  const int64_t n = clip.n_samples();
  if (n < window)
    FSSR_RAISE(ErrorCode::kClipTooShort)
        << "clip of " << n << " samples is shorter than one " << window
        << "-sample window";

  // Center alignment: reflect (window - hop) / 2 samples at each edge, so a
  // clip whose length is a hop multiple yields exactly n / hop frames
  // (48000 samples -> 300).
  const int pad = (window - hop) / 2;
  const int64_t padded_n = n + 2 * pad;
  std::vector<double> padded(static_cast<size_t>(padded_n));
  for (int64_t i = 0; i < padded_n; ++i) {
    int64_t src = i - pad;
    if (src < 0) src = -src;                      // reflect left
    if (src >= n) src = 2 * (n - 1) - src;        // reflect right
    padded[static_cast<size_t>(i)] = clip.samples[static_cast<size_t>(src)];
  }

  const int frames = static_cast<int>((padded_n - window) / hop) + 1;

  std::vector<double> hamming(static_cast<size_t>(window));
  for (int i = 0; i < window; ++i)
    hamming[static_cast<size_t>(i)] =
        0.54 - 0.46 * std::cos(2.0 * 3.14159265358979323846 * i / (window - 1));

  Spectrogram spec;
  spec.bins = kSpectrogramBins;
  spec.frames = frames;
  spec.normalized = false;
  spec.values.assign(static_cast<size_t>(spec.bins) * frames, 0.0f);

  std::vector<double> frame(static_cast<size_t>(window));
  for (int t = 0; t < frames; ++t) {
    const double *src = &padded[static_cast<size_t>(t) * hop];
    for (int i = 0; i < window; ++i)
      frame[static_cast<size_t>(i)] = src[i] * hamming[static_cast<size_t>(i)];
    const std::vector<double> mag =
        RealMagnitudeSpectrum(frame.data(), window, cfg.fft_length);

    for (int b = 0; b < spec.bins; ++b) {
      double v;
      if (cfg.bin_reduction == BinReduction::kTruncateLow128) {
        v = mag[static_cast<size_t>(b) + 1];
      } else {
        v = 0.5 * (mag[static_cast<size_t>(2 * b) + 1] +
                   mag[static_cast<size_t>(2 * b) + 2]);
      }
      if (cfg.log_magnitude) v = std::log(v + 1e-10);
      spec.values[static_cast<size_t>(b) * frames + t] =
          static_cast<float>(v);
    }
  }
  return spec;
}

Spectrogram NormalizeBins(const Spectrogram &spec) {
  FSSR_CHECK(!spec.normalized, ErrorCode::kAlreadyNormalized)
      << "spectrogram is already normalized";
  FSSR_CHECK(spec.frames > 0, ErrorCode::kShapeMismatch) << "empty spectrogram";

  Spectrogram out = spec;
  out.normalized = true;
  const int frames = spec.frames;
  for (int b = 0; b < spec.bins; ++b) {
    float *row = &out.values[static_cast<size_t>(b) * frames];
    double mean = 0.0;
    for (int t = 0; t < frames; ++t) mean += row[t];
    mean /= frames;
    double var = 0.0;
    for (int t = 0; t < frames; ++t) {
      const double d = row[t] - mean;
      var += d * d;
    }
    var /= frames;  // population variance
    if (var < 1e-12) {
      std::fill(row, row + frames, 0.0f);
      continue;
    }
    const double inv_std = 1.0 / std::sqrt(var);
    for (int t = 0; t < frames; ++t)
      row[t] = static_cast<float>((row[t] - mean) * inv_std);
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'F', 'S', 'S', 'R'};
constexpr uint32_t kTensorVersion = 1;

void PutU32(std::ofstream &o, uint32_t v) {
  uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                  static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  o.write(reinterpret_cast<char *>(b), 4);
}

uint32_t GetU32(std::ifstream &in, const std::string &path) {
  uint8_t b[4];
  in.read(reinterpret_cast<char *>(b), 4);
  if (in.gcount() != 4)
    FSSR_RAISE(ErrorCode::kIo) << "truncated tensor file: " << path;
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

}  // namespace

void SaveSpectrogram(const Spectrogram &spec, const std::string &path) {
  std::ofstream o(path, std::ios::binary);
  if (!o) FSSR_RAISE(ErrorCode::kIo) << "cannot write: " << path;
  o.write(kMagic, 4);
  PutU32(o, kTensorVersion);
  PutU32(o, static_cast<uint32_t>(spec.bins));
  PutU32(o, static_cast<uint32_t>(spec.frames));
  o.write(reinterpret_cast<const char *>(spec.values.data()),
          static_cast<std::streamsize>(spec.values.size() * sizeof(float)));
  if (!o) FSSR_RAISE(ErrorCode::kIo) << "short write: " << path;
}

Spectrogram LoadSpectrogram(const std::string &path, bool normalized) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FSSR_RAISE(ErrorCode::kIo) << "cannot open: " << path;
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    FSSR_RAISE(ErrorCode::kIo) << "not a spectrogram tensor file: " << path;
  const uint32_t version = GetU32(in, path);
  if (version != kTensorVersion)
    FSSR_RAISE(ErrorCode::kIo)
        << "unsupported tensor version " << version << ": " << path;
  Spectrogram spec;
  spec.bins = static_cast<int>(GetU32(in, path));
  spec.frames = static_cast<int>(GetU32(in, path));
  spec.normalized = normalized;
  FSSR_CHECK(spec.bins > 0 && spec.frames > 0, ErrorCode::kIo)
      << "bad tensor dims in " << path;
  spec.values.resize(static_cast<size_t>(spec.bins) * spec.frames);
  in.read(reinterpret_cast<char *>(spec.values.data()),
          static_cast<std::streamsize>(spec.values.size() * sizeof(float)));
  if (static_cast<size_t>(in.gcount()) != spec.values.size() * sizeof(float))
    FSSR_RAISE(ErrorCode::kIo) << "truncated tensor file: " << path;
  return spec;
}

}  // namespace dsp
}  // namespace fssr
