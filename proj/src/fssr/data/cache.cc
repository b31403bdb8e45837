// fssr/data/cache.cc
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

#include "fssr/data/cache.h"

#include <cstdio>
#include <filesystem>
#include <mutex>
#include <sstream>

#include "fssr/common/error.h"

namespace fs = std::filesystem;

namespace fssr {
namespace data {

SpectrogramCache::SpectrogramCache(std::string dir, dsp::StftConfig cfg,
                                   double crop_seconds)
    : dir_(std::move(dir)), cfg_(cfg), crop_seconds_(crop_seconds) {
  if (!dir_.empty()) fs::create_directories(dir_);
}

std::shared_ptr<const dsp::Spectrogram> SpectrogramCache::Compute(
    const ManifestEntry &entry, double offset_s) const {
  dsp::AudioClip clip = dsp::LoadAndStandardize(entry.utt.path);
  dsp::AudioClip crop =
      dsp::CropAt(clip, offset_s, crop_seconds_, /*pad_with_repeat=*/true);
  dsp::Spectrogram spec = dsp::NormalizeBins(dsp::ComputeSpectrogram(crop, cfg_));
  return std::make_shared<dsp::Spectrogram>(std::move(spec));
}

std::shared_ptr<const dsp::Spectrogram> SpectrogramCache::ComputeRerolled(
    const ManifestEntry &entry, Rng *rng) const {
  dsp::AudioClip clip = dsp::LoadAndStandardize(entry.utt.path);
  dsp::AudioClip crop =
      dsp::RandomCrop(clip, crop_seconds_, rng, /*pad_with_repeat=*/true);
  dsp::Spectrogram spec = dsp::NormalizeBins(dsp::ComputeSpectrogram(crop, cfg_));
  return std::make_shared<dsp::Spectrogram>(std::move(spec));
}

std::string SpectrogramCache::DiskPath(const std::string &utt_id,
                                       double offset_s) const {
  std::string key = utt_id;
  for (char &c : key)
    if (c == '/' || c == '\\') c = '_';
  std::ostringstream name;
  name << key << "@" << std::fixed;
  name.precision(4);
  name << offset_s << ".fssr";
  return (fs::path(dir_) / name.str()).string();
}

std::shared_ptr<const dsp::Spectrogram> SpectrogramCache::Get(
    const ManifestEntry &entry, Rng *reroll_rng) {
  // A fresh crop is drawn either when the manifest says so (random_offset)
  // or when the caller passes an rng (the per-epoch re-crop training flag).
  // Rerolled crops bypass both cache levels.
  if (entry.random_offset || reroll_rng != nullptr) {
    FSSR_CHECK(reroll_rng != nullptr, ErrorCode::kInvalidArgument)
        << "entry " << entry.utt.id
        << " wants a per-epoch crop but no rng was supplied";
    return ComputeRerolled(entry, reroll_rng);
  }

  std::ostringstream key_os;
  key_os << entry.utt.id << "@" << std::fixed;
  key_os.precision(4);
  key_os << entry.crop_offset_s;
  const std::string key = key_os.str();

  {
    std::shared_lock<std::shared_mutex> lock(mu_);
    auto it = memory_.find(key);
    if (it != memory_.end()) return it->second;
  }

  std::shared_ptr<const dsp::Spectrogram> spec;
  if (!dir_.empty()) {
    const std::string file = DiskPath(entry.utt.id, entry.crop_offset_s);
    if (fs::exists(file))
      spec = std::make_shared<dsp::Spectrogram>(
          dsp::LoadSpectrogram(file, /*normalized=*/true));
  }
  if (!spec) {
    spec = Compute(entry, entry.crop_offset_s);
    if (!dir_.empty()) {
      const std::string file = DiskPath(entry.utt.id, entry.crop_offset_s);
      const std::string tmp = file + ".tmp";
      dsp::SaveSpectrogram(*spec, tmp);
      fs::rename(tmp, file);
    }
  }

  std::unique_lock<std::shared_mutex> lock(mu_);
  auto [it, inserted] = memory_.emplace(key, spec);
  return it->second;
}

int64_t SpectrogramCache::memory_entries() const {
  std::shared_lock<std::shared_mutex> lock(mu_);
  return static_cast<int64_t>(memory_.size());
}

}  // namespace data
}  // namespace fssr
