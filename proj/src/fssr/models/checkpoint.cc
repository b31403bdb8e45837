// fssr/models/checkpoint.cc
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

#include "fssr/models/checkpoint.h"

#include <cstring>
#include <fstream>
#include <map>

#include "fssr/models/factory.h"
#include "json.hpp"

namespace fssr {
namespace models {

namespace {

constexpr char kMagic[8] = {'F', 'S', 'S', 'R', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void PutU32(std::ofstream &o, uint32_t v) {
  uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                  static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  o.write(reinterpret_cast<char *>(b), 4);
}
void PutU64(std::ofstream &o, uint64_t v) {
  PutU32(o, static_cast<uint32_t>(v));
  PutU32(o, static_cast<uint32_t>(v >> 32));
}
uint32_t GetU32(std::ifstream &in, const std::string &path) {
  uint8_t b[4];
  in.read(reinterpret_cast<char *>(b), 4);
  if (in.gcount() != 4)
    FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
        << "truncated checkpoint: " << path;
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}
uint64_t GetU64(std::ifstream &in, const std::string &path) {
  const uint64_t lo = GetU32(in, path);
  const uint64_t hi = GetU32(in, path);
  return lo | hi << 32;
}

std::vector<nn::ParamRef<float>> AllTensors(Model<float> *model) {
  std::vector<nn::ParamRef<float>> all = model->Params();
  for (auto &b : model->Buffers()) all.push_back(b);
  return all;
}

}  // namespace

void SaveCheckpoint(const std::string &path, Model<float> *model,
                    const std::string &meta_json) {
  nlohmann::json meta = meta_json.empty()
                            ? nlohmann::json::object()
                            : nlohmann::json::parse(meta_json);
  meta["model_config"] = nlohmann::json::parse(ModelConfigToJson(model->config()));
  const std::string blob = meta.dump();

  std::ofstream o(path, std::ios::binary);
  if (!o) FSSR_RAISE(ErrorCode::kIo) << "cannot write checkpoint: " << path;
  o.write(kMagic, 8);
  PutU32(o, kVersion);
  PutU64(o, blob.size());
  o.write(blob.data(), static_cast<std::streamsize>(blob.size()));

  auto tensors = AllTensors(model);
  PutU32(o, static_cast<uint32_t>(tensors.size()));
  for (const auto &t : tensors) {
    PutU32(o, static_cast<uint32_t>(t.name.size()));
    o.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    PutU32(o, static_cast<uint32_t>(t.value->shape.size()));
    for (int64_t d : t.value->shape) PutU64(o, static_cast<uint64_t>(d));
    o.write(reinterpret_cast<const char *>(t.value->ptr()),
            static_cast<std::streamsize>(t.value->data.size() * sizeof(float)));
  }
  if (!o) FSSR_RAISE(ErrorCode::kIo) << "short write: " << path;
}

std::unique_ptr<Model<float>> LoadCheckpoint(const std::string &path,
                                             std::string *meta_json_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FSSR_RAISE(ErrorCode::kIo) << "cannot open checkpoint: " << path;
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
    FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
        << "not a checkpoint file: " << path;
  const uint32_t version = GetU32(in, path);
  if (version != kVersion)
    FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
        << "unsupported checkpoint version " << version;

  const uint64_t blob_len = GetU64(in, path);
  std::string blob(blob_len, '\0');
  in.read(blob.data(), static_cast<std::streamsize>(blob_len));
  if (static_cast<uint64_t>(in.gcount()) != blob_len)
    FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
        << "truncated checkpoint: " << path;

  nlohmann::json meta = nlohmann::json::parse(blob);
  if (!meta.contains("model_config"))
    FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
        << "checkpoint missing model_config: " << path;
  const ModelConfig cfg = ModelConfigFromJson(meta["model_config"].dump());
  const uint64_t seed = meta.value("seed", 0ULL);
  auto model = MakeModel<float>(cfg, seed);

  std::map<std::string, nn::ParamRef<float>> by_name;
  for (auto &t : AllTensors(model.get())) by_name[t.name] = t;

  const uint32_t count = GetU32(in, path);
  size_t restored = 0;
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = GetU32(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const uint32_t ndim = GetU32(in, path);
    std::vector<int64_t> dims(ndim);
    for (uint32_t d = 0; d < ndim; ++d)
      dims[d] = static_cast<int64_t>(GetU64(in, path));
    const int64_t numel = nn::Tensor<float>::Numel(dims);

    auto it = by_name.find(name);
    if (it == by_name.end())
      FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
          << "checkpoint tensor '" << name << "' has no home in a "
          << ArchToString(cfg.arch) << " model";
    if (it->second.value->shape != dims)
      FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
          << "shape mismatch for tensor '" << name << "'";
    in.read(reinterpret_cast<char *>(it->second.value->ptr()),
            static_cast<std::streamsize>(numel * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(numel * sizeof(float)))
      FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
          << "truncated tensor '" << name << "' in " << path;
    ++restored;
  }
  if (restored != by_name.size())
    FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
        << "checkpoint restored " << restored << " of " << by_name.size()
        << " tensors";
  if (meta_json_out) *meta_json_out = blob;
  return model;
}

}  // namespace models
}  // namespace fssr
