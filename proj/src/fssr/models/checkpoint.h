// fssr/models/checkpoint.h
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

#ifndef FSSR_MODELS_CHECKPOINT_H_
#define FSSR_MODELS_CHECKPOINT_H_

#include <memory>
#include <string>

#include "fssr/models/model.h"

namespace fssr {
namespace models {

// Self-describing checkpoint: versioned header, a JSON block holding the
// model config plus training metadata (step, seed, ...), then the named
// parameter and buffer tensors as float32.
void SaveCheckpoint(const std::string &path, Model<float> *model,
                    const std::string &meta_json);

// Rebuilds the model from the stored config and restores every tensor.
// Loading never adapts shapes; changing the class count afterwards is the
// caller's job via ReplaceHead.
std::unique_ptr<Model<float>> LoadCheckpoint(const std::string &path,
                                             std::string *meta_json_out);

}  // namespace models
}  // namespace fssr

#endif  // FSSR_MODELS_CHECKPOINT_H_
