// fssr/data/cache.h
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

#ifndef FSSR_DATA_CACHE_H_
#define FSSR_DATA_CACHE_H_

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>

#include "fssr/data/manifest.h"
#include "fssr/dsp/spectrogram.h"

namespace fssr {
namespace data {

// Normalized spectrograms keyed by utterance id + crop offset, held in
// memory and optionally mirrored to a directory of tensor files (the
// FSSR_CACHE_DIR layout). Reads are concurrent; the first computation of a
// key takes the writer lock.
class SpectrogramCache {
 public:
  // dir may be empty for a memory-only cache.
  SpectrogramCache(std::string dir, dsp::StftConfig cfg,
                   double crop_seconds = kCropSeconds);

  // Materializes the entry's frozen crop. With reroll_rng a fresh offset is
  // drawn instead (per-epoch re-crop; never cached); entries flagged
  // random_offset require an rng.
  std::shared_ptr<const dsp::Spectrogram> Get(const ManifestEntry &entry,
                                              Rng *reroll_rng = nullptr);

  int64_t memory_entries() const;

 private:
  std::shared_ptr<const dsp::Spectrogram> Compute(const ManifestEntry &entry,
                                                  double offset_s) const;
  std::shared_ptr<const dsp::Spectrogram> ComputeRerolled(
      const ManifestEntry &entry, Rng *rng) const;
  std::string DiskPath(const std::string &utt_id, double offset_s) const;

  std::string dir_;
  dsp::StftConfig cfg_;
  double crop_seconds_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const dsp::Spectrogram>> memory_;
};

}  // namespace data
}  // namespace fssr

#endif  // FSSR_DATA_CACHE_H_
