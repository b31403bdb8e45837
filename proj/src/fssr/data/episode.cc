// fssr/data/episode.cc
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

#include "fssr/data/episode.h"

#include "fssr/common/error.h"

namespace fssr {
namespace data {

EpisodeItems SampleEpisode(const std::vector<std::vector<int>> &items_per_class,
                           const EpisodeSpec &spec, Rng *rng) {
  FSSR_CHECK(spec.n_way >= 2 && spec.k_shot >= 1 && spec.n_query >= 1,
             ErrorCode::kInvalidArgument)
      << "episode spec must have n_way >= 2, k_shot >= 1, n_query >= 1";
  const int need = spec.k_shot + spec.n_query;

  std::vector<int> eligible;
  for (size_t c = 0; c < items_per_class.size(); ++c)
    if (static_cast<int>(items_per_class[c].size()) >= need)
      eligible.push_back(static_cast<int>(c));
  if (static_cast<int>(eligible.size()) < spec.n_way)
    FSSR_RAISE(ErrorCode::kPoolTooSmall)
        << "need " << spec.n_way << " classes with >= " << need
        << " items (k_shot " << spec.k_shot << " + n_query " << spec.n_query
        << "), pool supplies " << eligible.size() << " of "
        << items_per_class.size();

  EpisodeItems ep;
  const std::vector<int> ways = rng->SampleWithoutReplacement(
      static_cast<int>(eligible.size()), spec.n_way);
  for (int w = 0; w < spec.n_way; ++w) {
    const int cls = eligible[static_cast<size_t>(ways[static_cast<size_t>(w)])];
    ep.class_ids.push_back(cls);
    const auto &items = items_per_class[static_cast<size_t>(cls)];
    const std::vector<int> pick =
        rng->SampleWithoutReplacement(static_cast<int>(items.size()), need);
    for (int j = 0; j < spec.k_shot; ++j) {
      ep.support.push_back(items[static_cast<size_t>(pick[static_cast<size_t>(j)])]);
      ep.support_class.push_back(w);
    }
    for (int j = spec.k_shot; j < need; ++j) {
      ep.query.push_back(items[static_cast<size_t>(pick[static_cast<size_t>(j)])]);
      ep.query_class.push_back(w);
    }
  }
  return ep;
}

}  // namespace data
}  // namespace fssr
