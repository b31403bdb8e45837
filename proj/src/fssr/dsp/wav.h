// fssr/dsp/wav.h
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

#ifndef FSSR_DSP_WAV_H_
#define FSSR_DSP_WAV_H_

#include <cstdint>
#include <string>
#include <vector>

namespace fssr {
namespace dsp {

// Interleaved multi-channel audio as decoded from a RIFF/WAVE container.
struct WavData {
  int sample_rate_hz = 0;
  int channels = 0;
  // samples.size() == frames * channels, values scaled to [-1, 1].
  std::vector<float> samples;

  int64_t frames() const {
    return channels == 0 ? 0 : static_cast<int64_t>(samples.size()) / channels;
  }
};

// Supports PCM 16/24/32-bit and IEEE float32/float64, plus the WAVE_FORMAT_
// EXTENSIBLE wrappers around those. Throws kUnreadableFile on anything it
// cannot parse and kEmptyAudio when the data chunk decodes to zero frames.
WavData ReadWav(const std::string &path);

// Reads only the header, enough to know duration; used when building
// manifests so thousands of files can be scanned cheaply.
struct WavInfo {
  int sample_rate_hz = 0;
  int channels = 0;
  int64_t frames = 0;
  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(frames) / sample_rate_hz
                              : 0.0;
  }
};
WavInfo ReadWavInfo(const std::string &path);

// 16-bit PCM writer (interleaved input). Values are clamped to [-1, 1].
void WriteWav16(const std::string &path, const std::vector<float> &interleaved,
                int sample_rate_hz, int channels);

// IEEE float32 writer, used by tests to round-trip exact values.
void WriteWavFloat(const std::string &path,
                   const std::vector<float> &interleaved, int sample_rate_hz,
                   int channels);

}  // namespace dsp
}  // namespace fssr

#endif  // FSSR_DSP_WAV_H_
