// fssr/models/model.cc
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

#include "fssr/models/model.h"

#include "json.hpp"

namespace fssr {
namespace models {

Arch ArchFromString(const std::string &s) {
  if (s == "vgg_m") return Arch::kVggM;
  if (s == "resnet34") return Arch::kResnet34;
  if (s == "capsnet_m") return Arch::kCapsnetM;
  if (s == "capsnet_ma") return Arch::kCapsnetMa;
  FSSR_RAISE(ErrorCode::kInvalidArgument)
      << "unknown architecture '" << s
      << "' (expected vgg_m, resnet34, capsnet_m or capsnet_ma)";
}

const char *ArchToString(Arch a) {
  switch (a) {
    case Arch::kVggM: return "vgg_m";
    case Arch::kResnet34: return "resnet34";
    case Arch::kCapsnetM: return "capsnet_m";
    case Arch::kCapsnetMa: return "capsnet_ma";
  }
  return "unknown";
}

std::string ModelConfigToJson(const ModelConfig &cfg) {
  nlohmann::json j;
  j["arch"] = ArchToString(cfg.arch);
  j["n_classes"] = cfg.n_classes;
  j["input_bins"] = cfg.input_bins;
  j["input_frames"] = cfg.input_frames;
  j["l2_normalize_embedding"] = cfg.l2_normalize_embedding;
  j["capsule"] = {{"primary_capsule_dim", cfg.capsule.primary_capsule_dim},
                  {"class_capsule_dim", cfg.capsule.class_capsule_dim},
                  {"routing_iters", cfg.capsule.routing_iters},
                  {"conv_stride", cfg.capsule.conv_stride},
                  {"primary_stride", cfg.capsule.primary_stride},
                  {"conv_channels", cfg.capsule.conv_channels},
                  {"primary_channels", cfg.capsule.primary_channels},
                  {"conv_kernel", cfg.capsule.conv_kernel},
                  {"primary_kernel", cfg.capsule.primary_kernel}};
  j["autoencoder"] = {{"hidden_dim", cfg.autoencoder.hidden_dim},
                      {"code_dim", cfg.autoencoder.code_dim},
                      {"recon_weight", cfg.autoencoder.recon_weight},
                      {"contractive_weight", cfg.autoencoder.contractive_weight}};
  return j.dump();
}

ModelConfig ModelConfigFromJson(const std::string &json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception &e) {
    FSSR_RAISE(ErrorCode::kCheckpointIncompatible)
        << "bad model config json: " << e.what();
  }
  ModelConfig cfg;
  cfg.arch = ArchFromString(j.at("arch").get<std::string>());
  cfg.n_classes = j.at("n_classes").get<int>();
  cfg.input_bins = j.value("input_bins", 128);
  cfg.input_frames = j.value("input_frames", 300);
  cfg.l2_normalize_embedding = j.value("l2_normalize_embedding", true);
  if (j.contains("capsule")) {
    const auto &c = j["capsule"];
    cfg.capsule.primary_capsule_dim = c.value("primary_capsule_dim", 8);
    cfg.capsule.class_capsule_dim = c.value("class_capsule_dim", 16);
    cfg.capsule.routing_iters = c.value("routing_iters", 3);
    cfg.capsule.conv_stride = c.value("conv_stride", 6);
    cfg.capsule.primary_stride = c.value("primary_stride", 6);
    cfg.capsule.conv_channels = c.value("conv_channels", 256);
    cfg.capsule.primary_channels = c.value("primary_channels", 32);
    cfg.capsule.conv_kernel = c.value("conv_kernel", 9);
    cfg.capsule.primary_kernel = c.value("primary_kernel", 9);
  }
  if (j.contains("autoencoder")) {
    const auto &a = j["autoencoder"];
    cfg.autoencoder.hidden_dim = a.value("hidden_dim", 512);
    cfg.autoencoder.code_dim = a.value("code_dim", 256);
    cfg.autoencoder.recon_weight = a.value("recon_weight", 1.0);
    cfg.autoencoder.contractive_weight = a.value("contractive_weight", 1e-4);
  }
  return cfg;
}

}  // namespace models
}  // namespace fssr
