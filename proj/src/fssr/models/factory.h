// fssr/models/factory.h
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

#ifndef FSSR_MODELS_FACTORY_H_
#define FSSR_MODELS_FACTORY_H_

#include <memory>

#include "fssr/models/capsnet.h"
#include "fssr/models/model.h"
#include "fssr/models/resnet34.h"
#include "fssr/models/vgg_m.h"

namespace fssr {
namespace models {

template <typename T>
std::unique_ptr<Model<T>> MakeModel(const ModelConfig &cfg, uint64_t seed) {
  switch (cfg.arch) {
    case Arch::kVggM:
      return std::make_unique<VggM<T>>(cfg, seed);
    case Arch::kResnet34:
      return std::make_unique<Resnet34<T>>(cfg, seed);
    case Arch::kCapsnetM:
      return std::make_unique<CapsnetM<T>>(cfg, seed);
    case Arch::kCapsnetMa:
      return std::make_unique<CapsnetMa<T>>(cfg, seed);
  }
  FSSR_RAISE(ErrorCode::kInvalidArgument) << "unknown architecture";
}

}  // namespace models
}  // namespace fssr

#endif  // FSSR_MODELS_FACTORY_H_
