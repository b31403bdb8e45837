// fssr/data/toy_corpus.h
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

#ifndef FSSR_DATA_TOY_CORPUS_H_
#define FSSR_DATA_TOY_CORPUS_H_

#include <cstdint>
#include <string>

namespace fssr {
namespace data {

// Synthetic speakers for CI and smoke runs: each "speaker" is a harmonic
// tone with a characteristic fundamental and two formant-like resonances;
// utterances vary in phase, vibrato, drift and noise. The generator writes
// 16 kHz 16-bit wavs under root/<speaker>/ plus a VoxCeleb-style
// iden_split.txt so both split builders work on the result.
struct ToyCorpusConfig {
  int n_speakers = 20;
  int utts_per_speaker = 30;
  int test_per_speaker = 6;  // listed as split 3 in iden_split.txt
  double duration_s = 4.0;
  double noise_level = 0.02;
  uint64_t seed = 1234;
};

void GenerateToyCorpus(const std::string &root, const ToyCorpusConfig &cfg);

}  // namespace data
}  // namespace fssr

#endif  // FSSR_DATA_TOY_CORPUS_H_
