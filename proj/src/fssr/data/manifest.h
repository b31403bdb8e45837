// fssr/data/manifest.h
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

#ifndef FSSR_DATA_MANIFEST_H_
#define FSSR_DATA_MANIFEST_H_

#include <cstdint>
#include <string>
#include <vector>

namespace fssr {
namespace data {

enum class Split { kTrain, kTest };

struct SpeakerLabel {
  std::string name;
  int index = 0;  // dense 0..K-1 within a manifest
};

struct Utterance {
  std::string id;       // relative path, unique within a manifest
  std::string speaker;  // speaker name (directory component)
  std::string path;     // absolute or root-relative audio path
  double duration_s = 0.0;
};

struct ManifestEntry {
  Utterance utt;
  int speaker_index = 0;
  Split split = Split::kTrain;
  // Offset of the frozen 3 s crop; ignored when random_offset is set (the
  // loader then re-crops per epoch).
  double crop_offset_s = 0.0;
  bool random_offset = false;
};

struct Manifest {
  std::string protocol_tag;
  uint64_t seed = 0;
  int n_speakers = 0;
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry *> EntriesFor(Split s) const {
    std::vector<const ManifestEntry *> out;
    for (const auto &e : entries)
      if (e.split == s) out.push_back(&e);
    return out;
  }
  std::vector<std::string> SpeakerNames() const;
};

// Duration of the frozen per-utterance crops in every protocol.
constexpr double kCropSeconds = 3.0;

// Builds the few-shot protocol over a VoxCeleb-style tree: `root` holds
// per-speaker directories plus the standard file list `iden_split.txt`
// (lines "<1|2|3> <speaker>/<file>.wav"; 1 and 2 count as training, 3 as
// test). Takes the first n_classes speakers in lexicographic id order, draws
// k_per_class distinct training files per speaker (one random 3 s crop
// each; the paper's overlap-avoidance rule), and one random 3 s crop per
// test file.
Manifest BuildVoxcelebSplit(const std::string &root, int n_classes,
                            int k_per_class, uint64_t seed);

// Per-speaker utterance-level split of a VCTK-style tree (`root/<speaker>/
// *.wav`, or `root/wav48/<speaker>/*.wav`): floor(train_fraction * n) files
// to train, the rest to test, one random 3 s crop per utterance.
Manifest BuildVctkSplit(const std::string &root, double train_fraction,
                        uint64_t seed);

// Line format: header "#fssr-manifest v1 seed=<n> protocol=<tag>", then
// utterance_id<TAB>speaker_name<TAB>speaker_index<TAB>path<TAB>split<TAB>
// crop_offset_s (the literal "random" for re-cropped entries).
void WriteManifest(const Manifest &m, const std::string &path);
Manifest ReadManifest(const std::string &path);

// Train/test id-set disjointness; every generated manifest satisfies it and
// readers re-check.
void ValidateManifest(const Manifest &m);

}  // namespace data
}  // namespace fssr

#endif  // FSSR_DATA_MANIFEST_H_
