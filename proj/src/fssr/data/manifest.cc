// fssr/data/manifest.cc
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

#include "fssr/data/manifest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fssr/common/error.h"
#include "fssr/common/rng.h"
#include "fssr/dsp/spectrogram.h"
#include "fssr/dsp/wav.h"

namespace fs = std::filesystem;

namespace fssr {
namespace data {

std::vector<std::string> Manifest::SpeakerNames() const {
  std::vector<std::string> names(static_cast<size_t>(n_speakers));
  for (const auto &e : entries)
    names[static_cast<size_t>(e.speaker_index)] = e.utt.speaker;
  return names;
}

namespace {

double OffsetFor(const std::string &path, Rng *rng) {
  const dsp::WavInfo info = dsp::ReadWavInfo(path);
  const double dur = info.duration_s();
  if (dur <= kCropSeconds) return 0.0;  // short clips loop at load time
  return rng->NextUniform(0.0, dur - kCropSeconds);
}

}  // namespace

Manifest BuildVoxcelebSplit(const std::string &root, int n_classes,
                            int k_per_class, uint64_t seed) {
  FSSR_CHECK(n_classes >= 2 && k_per_class >= 1, ErrorCode::kInvalidArgument)
      << "need n_classes >= 2 and k_per_class >= 1";
  if (!fs::is_directory(root))
    FSSR_RAISE(ErrorCode::kMissingRoot) << "no such directory: " << root;
  const fs::path list_path = fs::path(root) / "iden_split.txt";
  std::ifstream list(list_path);
  if (!list)
    FSSR_RAISE(ErrorCode::kMissingRoot)
        << "dataset file list not found: " << list_path.string();

  // speaker -> (train files, test files), file paths relative to root.
  std::map<std::string, std::pair<std::vector<std::string>,
                                  std::vector<std::string>>> speakers;
  std::string line;
  while (std::getline(list, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    int split_id = 0;
    std::string rel;
    if (!(is >> split_id >> rel))
      FSSR_RAISE(ErrorCode::kIo) << "bad line in " << list_path.string()
                                 << ": " << line;
    const size_t slash = rel.find('/');
    if (slash == std::string::npos)
      FSSR_RAISE(ErrorCode::kIo)
          << "file list entry lacks a speaker directory: " << rel;
    const std::string speaker = rel.substr(0, slash);
    if (split_id == 3)
      speakers[speaker].second.push_back(rel);
    else
      speakers[speaker].first.push_back(rel);
  }
  if (static_cast<int>(speakers.size()) < n_classes)
    FSSR_RAISE(ErrorCode::kInsufficientData)
        << "requested " << n_classes << " classes, dataset lists only "
        << speakers.size() << " speakers";

  Manifest m;
  m.seed = seed;
  m.n_speakers = n_classes;
  m.protocol_tag = "voxceleb-fewshot:first-" + std::to_string(n_classes) +
                   "-lex:k=" + std::to_string(k_per_class);
  Rng rng(seed);

  // std::map iterates speakers in lexicographic order; "first N classes"
  // means the first N ids under that order.
  int index = 0;
  for (auto &[name, files] : speakers) {
    if (index >= n_classes) break;
    auto &train_files = files.first;
    auto &test_files = files.second;
    std::sort(train_files.begin(), train_files.end());
    std::sort(test_files.begin(), test_files.end());
    if (static_cast<int>(train_files.size()) < k_per_class)
      FSSR_RAISE(ErrorCode::kInsufficientData)
          << "speaker " << name << " has " << train_files.size()
          << " training files, need " << k_per_class << " distinct ones";
    if (test_files.empty())
      FSSR_RAISE(ErrorCode::kInsufficientData)
          << "speaker " << name << " has no test files";

    const std::vector<int> picks = rng.SampleWithoutReplacement(
        static_cast<int>(train_files.size()), k_per_class);
    std::vector<int> sorted_picks = picks;
    std::sort(sorted_picks.begin(), sorted_picks.end());
    for (int p : sorted_picks) {
      const std::string &rel = train_files[static_cast<size_t>(p)];
      const std::string full = (fs::path(root) / rel).string();
      ManifestEntry e;
      e.utt = {rel, name, full, dsp::ReadWavInfo(full).duration_s()};
      e.speaker_index = index;
      e.split = Split::kTrain;
      e.crop_offset_s = OffsetFor(full, &rng);
      m.entries.push_back(std::move(e));
    }
    for (const std::string &rel : test_files) {
      const std::string full = (fs::path(root) / rel).string();
      ManifestEntry e;
      e.utt = {rel, name, full, dsp::ReadWavInfo(full).duration_s()};
      e.speaker_index = index;
      e.split = Split::kTest;
      e.crop_offset_s = OffsetFor(full, &rng);
      m.entries.push_back(std::move(e));
    }
    ++index;
  }
  ValidateManifest(m);
  return m;
}

Manifest BuildVctkSplit(const std::string &root, double train_fraction,
                        uint64_t seed) {
  FSSR_CHECK(train_fraction > 0.0 && train_fraction < 1.0,
             ErrorCode::kInvalidArgument)
      << "train_fraction must lie in (0, 1)";
  fs::path base(root);
  if (!fs::is_directory(base))
    FSSR_RAISE(ErrorCode::kMissingRoot) << "no such directory: " << root;
  if (fs::is_directory(base / "wav48")) base /= "wav48";

  std::vector<std::string> speaker_dirs;
  for (const auto &entry : fs::directory_iterator(base))
    if (entry.is_directory())
      speaker_dirs.push_back(entry.path().filename().string());
  std::sort(speaker_dirs.begin(), speaker_dirs.end());
  if (speaker_dirs.empty())
    FSSR_RAISE(ErrorCode::kMissingRoot)
        << "no speaker directories under " << base.string();

  Manifest m;
  m.seed = seed;
  m.n_speakers = static_cast<int>(speaker_dirs.size());
  std::ostringstream tag;
  tag << "vctk:" << train_fraction;
  m.protocol_tag = tag.str();
  Rng rng(seed);

  int index = 0;
  for (const std::string &name : speaker_dirs) {
    std::vector<std::string> files;
    for (const auto &f : fs::directory_iterator(base / name))
      if (f.is_regular_file() && f.path().extension() == ".wav")
        files.push_back(f.path().filename().string());
    std::sort(files.begin(), files.end());
    if (files.size() < 2)
      FSSR_RAISE(ErrorCode::kInsufficientData)
          << "speaker " << name << " has " << files.size()
          << " utterances, need at least 2 to split";

    std::vector<std::string> shuffled = files;
    rng.Shuffle(&shuffled);
    const int n_train = static_cast<int>(
        std::floor(train_fraction * static_cast<double>(files.size())));
    FSSR_CHECK(n_train >= 1 && n_train < static_cast<int>(files.size()),
               ErrorCode::kInsufficientData)
        << "speaker " << name << ": split " << train_fraction << " of "
        << files.size() << " utterances leaves an empty side";

    for (size_t i = 0; i < shuffled.size(); ++i) {
      const std::string rel = name + "/" + shuffled[i];
      const std::string full = (base / name / shuffled[i]).string();
      ManifestEntry e;
      e.utt = {rel, name, full, dsp::ReadWavInfo(full).duration_s()};
      e.speaker_index = index;
      e.split = static_cast<int>(i) < n_train ? Split::kTrain : Split::kTest;
      e.crop_offset_s = OffsetFor(full, &rng);
      m.entries.push_back(std::move(e));
    }
    ++index;
  }
  ValidateManifest(m);
  return m;
}

void ValidateManifest(const Manifest &m) {
  std::set<std::string> train_ids, test_ids;
  std::set<std::pair<std::string, std::string>> speaker_ids;
  for (const auto &e : m.entries) {
    FSSR_CHECK(e.speaker_index >= 0 && e.speaker_index < m.n_speakers,
               ErrorCode::kInternal)
        << "speaker index out of range in manifest";
    if (!speaker_ids.insert({e.utt.speaker, e.utt.id}).second)
      FSSR_RAISE(ErrorCode::kInternal)
          << "duplicate utterance id " << e.utt.id << " for speaker "
          << e.utt.speaker;
    (e.split == Split::kTrain ? train_ids : test_ids).insert(e.utt.id);
  }
  for (const auto &id : train_ids)
    if (test_ids.count(id))
      FSSR_RAISE(ErrorCode::kInternal)
          << "utterance " << id << " appears in both train and test";
}

void WriteManifest(const Manifest &m, const std::string &path) {
  std::ofstream out(path);
  if (!out) FSSR_RAISE(ErrorCode::kIo) << "cannot write manifest: " << path;
  out << "#fssr-manifest v1 seed=" << m.seed << " protocol=" << m.protocol_tag
      << "\n";
  out.precision(8);
  for (const auto &e : m.entries) {
    out << e.utt.id << '\t' << e.utt.speaker << '\t' << e.speaker_index << '\t'
        << e.utt.path << '\t'
        << (e.split == Split::kTrain ? "train" : "test") << '\t';
    if (e.random_offset)
      out << "random";
    else
      out << e.crop_offset_s;
    out << '\n';
  }
  if (!out) FSSR_RAISE(ErrorCode::kIo) << "short write: " << path;
}

Manifest ReadManifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) FSSR_RAISE(ErrorCode::kIo) << "cannot open manifest: " << path;
  std::string header;
  if (!std::getline(in, header) || header.rfind("#fssr-manifest v1", 0) != 0)
    FSSR_RAISE(ErrorCode::kIo) << "not a manifest file: " << path;

  Manifest m;
  {
    const size_t seed_pos = header.find("seed=");
    const size_t proto_pos = header.find("protocol=");
    if (seed_pos == std::string::npos || proto_pos == std::string::npos)
      FSSR_RAISE(ErrorCode::kIo) << "bad manifest header: " << header;
    m.seed = std::stoull(header.substr(seed_pos + 5));
    m.protocol_tag = header.substr(proto_pos + 9);
  }

  int max_speaker = -1;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    size_t start = 0;
    for (;;) {
      const size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos
                                            ? std::string::npos
                                            : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 6)
      FSSR_RAISE(ErrorCode::kIo)
          << path << ":" << lineno << ": expected 6 tab-separated columns";
    ManifestEntry e;
    e.utt.id = cols[0];
    e.utt.speaker = cols[1];
    e.speaker_index = std::stoi(cols[2]);
    e.utt.path = cols[3];
    if (cols[4] == "train")
      e.split = Split::kTrain;
    else if (cols[4] == "test")
      e.split = Split::kTest;
    else
      FSSR_RAISE(ErrorCode::kIo)
          << path << ":" << lineno << ": bad split '" << cols[4] << "'";
    if (cols[5] == "random") {
      e.random_offset = true;
    } else {
      e.crop_offset_s = std::stod(cols[5]);
    }
    max_speaker = std::max(max_speaker, e.speaker_index);
    m.entries.push_back(std::move(e));
  }
  m.n_speakers = max_speaker + 1;
  ValidateManifest(m);
  return m;
}

}  // namespace data
}  // namespace fssr
