// fssr/fewshot/evaluate.h
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

#ifndef FSSR_FEWSHOT_EVALUATE_H_
#define FSSR_FEWSHOT_EVALUATE_H_

#include <string>
#include <vector>

#include "fssr/fewshot/protonet.h"

namespace fssr {
namespace fewshot {

// Embeddings grouped by class. The model is applied to the evaluation pool
// once up front (it is read-only during evaluation), so the episode loop
// runs on cached vectors.
struct EmbeddingPool {
  int dim = 0;
  std::vector<std::vector<std::vector<float>>> per_class;

  int n_classes() const { return static_cast<int>(per_class.size()); }
};

struct FewShotEvalConfig {
  int n_way = 5;
  int k_shot = 1;
  int n_query = 15;
  int n_episodes = 1000;
  uint64_t seed = 0;
  Distance distance = Distance::kSqEuclidean;
};

struct FewShotEvalResult {
  double mean_accuracy = 0.0;
  double ci95_half_width = 0.0;  // normal approximation
  int n_episodes = 0;
};

// Runs n_episodes independent N-way K-shot episodes. Every episode consumes
// its own seed derived from (seed, episode index), so the result does not
// depend on evaluation order. Raises kPoolTooSmall when the pool cannot
// supply n_way classes with k_shot + n_query items each.
FewShotEvalResult EvaluateFewShot(const EmbeddingPool &pool,
                                  const FewShotEvalConfig &cfg);

// One evaluation line, emitted as line-delimited JSON by the harness.
struct EvalRecord {
  std::string arch;
  int n_way = 0;
  int k_shot = 0;
  int n_query = 0;
  int n_episodes = 0;
  uint64_t seed = 0;
  double mean_acc = 0.0;
  double ci95 = 0.0;
};

std::string EvalRecordToJson(const EvalRecord &r);
EvalRecord EvalRecordFromJson(const std::string &line);

}  // namespace fewshot
}  // namespace fssr

#endif  // FSSR_FEWSHOT_EVALUATE_H_
