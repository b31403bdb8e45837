// fssr/data/toy_corpus.cc
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

#include "fssr/data/toy_corpus.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "fssr/common/error.h"
#include "fssr/common/rng.h"
#include "fssr/dsp/spectrogram.h"
#include "fssr/dsp/wav.h"

namespace fs = std::filesystem;

namespace fssr {
namespace data {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct SpeakerVoice {
  double f0;         // fundamental, Hz
  double formant1;   // resonance centers, Hz
  double formant2;
  double tilt;       // harmonic rolloff exponent
};

SpeakerVoice VoiceFor(int speaker, int n_speakers, Rng *rng) {
  SpeakerVoice v;
  // Fundamentals spread geometrically over 90..400 Hz so neighbours stay
  // separable for any speaker count.
  const double ratio = n_speakers > 1
                           ? std::pow(400.0 / 90.0, 1.0 / (n_speakers - 1))
                           : 1.0;
  v.f0 = 90.0 * std::pow(ratio, speaker) * (1.0 + rng->NextUniform(-0.005, 0.005));
  v.formant1 = 350.0 + 55.0 * ((speaker * 3) % 7) + rng->NextUniform(-15.0, 15.0);
  v.formant2 = 1100.0 + 140.0 * ((speaker * 5) % 6) + rng->NextUniform(-30.0, 30.0);
  v.tilt = 0.7 + 0.05 * (speaker % 4);
  return v;
}

std::vector<float> Synthesize(const SpeakerVoice &v, double duration_s,
                              double noise_level, Rng *rng) {
  const int rate = dsp::kStandardRateHz;
  const int n = static_cast<int>(duration_s * rate);
  std::vector<float> out(static_cast<size_t>(n), 0.0f);

  // Per-utterance character: slight pitch offset, vibrato and a slow
  // amplitude contour.
  const double f0 = v.f0 * (1.0 + rng->NextUniform(-0.01, 0.01));
  const double vib_rate = rng->NextUniform(4.5, 6.5);
  const double vib_depth = rng->NextUniform(0.004, 0.012);
  const double vib_phase = rng->NextUniform(0.0, kTwoPi);
  const double env_rate = rng->NextUniform(0.5, 1.5);
  const double env_phase = rng->NextUniform(0.0, kTwoPi);

  const int n_harm = static_cast<int>(7600.0 / f0);
  std::vector<double> amp(static_cast<size_t>(n_harm) + 1, 0.0);
  std::vector<double> phase(static_cast<size_t>(n_harm) + 1, 0.0);
  for (int h = 1; h <= n_harm; ++h) {
    const double f = f0 * h;
    const double res =
        1.0 + 2.2 * std::exp(-std::pow((f - v.formant1) / 170.0, 2)) +
        1.6 * std::exp(-std::pow((f - v.formant2) / 260.0, 2));
    amp[static_cast<size_t>(h)] = res / std::pow(h, v.tilt);
    phase[static_cast<size_t>(h)] = rng->NextUniform(0.0, kTwoPi);
  }

  std::vector<double> theta(static_cast<size_t>(n_harm) + 1, 0.0);
  double peak = 1e-9;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double f_inst =
        f0 * (1.0 + vib_depth * std::sin(kTwoPi * vib_rate * t + vib_phase));
    double s = 0.0;
    for (int h = 1; h <= n_harm; ++h) {
      theta[static_cast<size_t>(h)] += kTwoPi * f_inst * h / rate;
      s += amp[static_cast<size_t>(h)] *
           std::sin(theta[static_cast<size_t>(h)] + phase[static_cast<size_t>(h)]);
    }
    const double env = 0.75 + 0.25 * std::sin(kTwoPi * env_rate * t + env_phase);
    s = s * env + noise_level * rng->NextGaussian();
    out[static_cast<size_t>(i)] = static_cast<float>(s);
    peak = std::max(peak, std::abs(s));
  }
  const float scale = static_cast<float>(0.5 / peak);
  for (float &s : out) s *= scale;
  return out;
}

}  // namespace

void GenerateToyCorpus(const std::string &root, const ToyCorpusConfig &cfg) {
  FSSR_CHECK(cfg.n_speakers >= 2 && cfg.utts_per_speaker >= 2 &&
                 cfg.test_per_speaker >= 1 &&
                 cfg.test_per_speaker < cfg.utts_per_speaker,
             ErrorCode::kInvalidArgument)
      << "bad toy corpus shape";
  fs::create_directories(root);

  std::ofstream list(fs::path(root) / "iden_split.txt");
  if (!list)
    FSSR_RAISE(ErrorCode::kIo) << "cannot write iden_split.txt under " << root;

  for (int s = 0; s < cfg.n_speakers; ++s) {
    Rng voice_rng(DeriveSeed(cfg.seed, static_cast<uint64_t>(s)));
    const SpeakerVoice voice = VoiceFor(s, cfg.n_speakers, &voice_rng);

    std::ostringstream spk;
    spk << "spk" << std::setw(3) << std::setfill('0') << s;
    fs::create_directories(fs::path(root) / spk.str());

    for (int u = 0; u < cfg.utts_per_speaker; ++u) {
      Rng utt_rng(DeriveSeed(cfg.seed,
                             (static_cast<uint64_t>(s) << 20) ^
                                 static_cast<uint64_t>(u) ^ 0x746f79ULL));
      const std::vector<float> samples =
          Synthesize(voice, cfg.duration_s, cfg.noise_level, &utt_rng);
      std::ostringstream utt;
      utt << "utt" << std::setw(3) << std::setfill('0') << u << ".wav";
      const std::string rel = spk.str() + "/" + utt.str();
      dsp::WriteWav16((fs::path(root) / rel).string(), samples,
                      dsp::kStandardRateHz, 1);
      const bool is_test = u >= cfg.utts_per_speaker - cfg.test_per_speaker;
      list << (is_test ? 3 : 1) << " " << rel << "\n";
    }
  }
  if (!list) FSSR_RAISE(ErrorCode::kIo) << "short write: iden_split.txt";
}

}  // namespace data
}  // namespace fssr
