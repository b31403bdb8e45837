// fssr/data/episode.h
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

#ifndef FSSR_DATA_EPISODE_H_
#define FSSR_DATA_EPISODE_H_

#include <vector>

#include "fssr/common/rng.h"

namespace fssr {
namespace data {

struct EpisodeSpec {
  int n_way = 5;
  int k_shot = 1;
  int n_query = 5;
};

// One sampled N-way K-shot task: item handles (indices into whatever pool
// the caller keeps) plus within-episode class ids 0..n_way-1. Support and
// query draws never share an item.
struct EpisodeItems {
  std::vector<int> class_ids;      // pool class of each way
  std::vector<int> support;        // n_way * k_shot pool item handles
  std::vector<int> support_class;  // way index per support item
  std::vector<int> query;          // n_way * n_query pool item handles
  std::vector<int> query_class;
};

// Draws n_way classes uniformly without replacement among classes holding at
// least k_shot + n_query items, then k_shot + n_query distinct items per
// class. items_per_class maps class -> pool item handles. Raises
// kPoolTooSmall naming the violated constraint.
EpisodeItems SampleEpisode(const std::vector<std::vector<int>> &items_per_class,
                           const EpisodeSpec &spec, Rng *rng);

}  // namespace data
}  // namespace fssr

#endif  // FSSR_DATA_EPISODE_H_
