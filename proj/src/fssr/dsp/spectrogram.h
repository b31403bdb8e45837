// fssr/dsp/spectrogram.h
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

#ifndef FSSR_DSP_SPECTROGRAM_H_
#define FSSR_DSP_SPECTROGRAM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fssr/common/rng.h"

namespace fssr {
namespace dsp {

constexpr int kStandardRateHz = 16000;
constexpr int kSpectrogramBins = 128;

// Mono waveform at a known rate, amplitudes in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate_hz = kStandardRateHz;

  int64_t n_samples() const { return static_cast<int64_t>(samples.size()); }
  double duration_s() const {
    return static_cast<double>(n_samples()) / sample_rate_hz;
  }
};

enum class BinReduction {
  // Keep FFT bins 1..128 (~31 Hz to 4 kHz), dropping DC and the upper band.
  kTruncateLow128,
  // Average adjacent pairs of bins 1..256 down to 128.
  kAveragePairs,
};

struct StftConfig {
  int window_ms = 25;
  int hop_ms = 10;
  int fft_length = 512;
  BinReduction bin_reduction = BinReduction::kTruncateLow128;
  bool log_magnitude = false;

  int window_samples() const { return kStandardRateHz * window_ms / 1000; }
  int hop_samples() const { return kStandardRateHz * hop_ms / 1000; }
};

// Magnitude spectrogram, 128 frequency rows by `frames` time columns,
// row-major storage (values[bin * frames + frame]).
struct Spectrogram {
  int bins = kSpectrogramBins;
  int frames = 0;
  bool normalized = false;
  std::vector<float> values;

  float At(int bin, int frame) const {
    return values[static_cast<size_t>(bin) * frames + frame];
  }
};

// Decodes an audio file and standardizes it: channels averaged to mono,
// resampled to 16 kHz, amplitudes clamped to [-1, 1]. No silence removal or
// any other preprocessing.
AudioClip LoadAndStandardize(const std::string &path);

// Contiguous random crop of duration_s seconds. The offset is drawn
// uniformly from the valid range; the same rng state yields the same crop.
// Clips shorter than the requested duration raise kClipTooShort unless
// pad_with_repeat is set, in which case the clip is looped.
AudioClip RandomCrop(const AudioClip &clip, double duration_s, Rng *rng,
                     bool pad_with_repeat = false);

// Crop at a fixed offset (seconds); used to materialize manifest entries
// whose offsets were frozen at split time.
AudioClip CropAt(const AudioClip &clip, double offset_s, double duration_s,
                 bool pad_with_repeat = false);

// Hamming-window STFT magnitudes reduced to 128 bins. Frames are centered
// by reflecting (window - hop) / 2 samples at each edge, which lands a
// 3-second clip on exactly 300 frames. Raises kClipTooShort when the clip is
// shorter than one window.
Spectrogram ComputeSpectrogram(const AudioClip &clip,
                               const StftConfig &cfg = StftConfig());

// Standardizes every frequency row to zero mean and unit variance across
// time; rows with variance below 1e-12 become all-zero. Normalizing twice is
// a contract violation and raises kAlreadyNormalized.
Spectrogram NormalizeBins(const Spectrogram &spec);

// Binary tensor container: little-endian {magic "FSSR", version u32,
// bins u32, frames u32} followed by row-major float32 values.
void SaveSpectrogram(const Spectrogram &spec, const std::string &path);
Spectrogram LoadSpectrogram(const std::string &path, bool normalized);

}  // namespace dsp
}  // namespace fssr

#endif  // FSSR_DSP_SPECTROGRAM_H_
