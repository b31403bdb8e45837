// fssr/fewshot/evaluate.cc
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

#include "fssr/fewshot/evaluate.h"

#include <cmath>
#include <utility>

#include "fssr/data/episode.h"
#include "json.hpp"

namespace fssr {
namespace fewshot {

Distance DistanceFromString(const std::string &s) {
  if (s == "sq_euclidean") return Distance::kSqEuclidean;
  if (s == "euclidean") return Distance::kEuclidean;
  if (s == "cosine") return Distance::kCosine;
  FSSR_RAISE(ErrorCode::kInvalidArgument)
      << "unknown distance '" << s
      << "' (expected sq_euclidean, euclidean or cosine)";
}

const char *DistanceToString(Distance d) {
  switch (d) {
    case Distance::kSqEuclidean: return "sq_euclidean";
    case Distance::kEuclidean: return "euclidean";
    case Distance::kCosine: return "cosine";
  }
  return "unknown";
}

FewShotEvalResult EvaluateFewShot(const EmbeddingPool &pool,
                                  const FewShotEvalConfig &cfg) {
  FSSR_CHECK(cfg.n_way >= 2 && cfg.k_shot >= 1 && cfg.n_query >= 1 &&
                 cfg.n_episodes >= 1,
             ErrorCode::kInvalidArgument)
      << "bad few-shot evaluation shape";

  // Flat handles (class, item) so the shared episode sampler can be used.
  std::vector<std::pair<int, int>> flat;
  std::vector<std::vector<int>> items_per_class(
      static_cast<size_t>(pool.n_classes()));
  for (int c = 0; c < pool.n_classes(); ++c)
    for (size_t i = 0; i < pool.per_class[static_cast<size_t>(c)].size(); ++i) {
      items_per_class[static_cast<size_t>(c)].push_back(
          static_cast<int>(flat.size()));
      flat.emplace_back(c, static_cast<int>(i));
    }

  const int64_t M = pool.dim;
  const data::EpisodeSpec spec{cfg.n_way, cfg.k_shot, cfg.n_query};
  std::vector<double> per_episode(static_cast<size_t>(cfg.n_episodes));

  auto vec_of = [&](int handle) -> const std::vector<float> & {
    const auto &[c, i] = flat[static_cast<size_t>(handle)];
    return pool.per_class[static_cast<size_t>(c)][static_cast<size_t>(i)];
  };

  for (int e = 0; e < cfg.n_episodes; ++e) {
    Rng rng(DeriveSeed(cfg.seed, static_cast<uint64_t>(e)));
    const data::EpisodeItems ep = data::SampleEpisode(items_per_class, spec, &rng);

    nn::Tensor<float> support({static_cast<int64_t>(ep.support.size()), M});
    nn::Tensor<float> query({static_cast<int64_t>(ep.query.size()), M});
    for (size_t i = 0; i < ep.support.size(); ++i) {
      const auto &v = vec_of(ep.support[i]);
      std::copy(v.begin(), v.end(), support.ptr() + static_cast<int64_t>(i) * M);
    }
    for (size_t i = 0; i < ep.query.size(); ++i) {
      const auto &v = vec_of(ep.query[i]);
      std::copy(v.begin(), v.end(), query.ptr() + static_cast<int64_t>(i) * M);
    }

    EpisodeResult<float> res =
        PrototypicalLoss<float>(support, ep.support_class, query,
                                ep.query_class, cfg.distance, nullptr, nullptr,
                                &rng);
    per_episode[static_cast<size_t>(e)] = res.accuracy;
  }

  FewShotEvalResult out;
  out.n_episodes = cfg.n_episodes;
  double mean = 0.0;
  for (double a : per_episode) mean += a;
  mean /= cfg.n_episodes;
  double var = 0.0;
  for (double a : per_episode) var += (a - mean) * (a - mean);
  var = cfg.n_episodes > 1 ? var / (cfg.n_episodes - 1) : 0.0;
  out.mean_accuracy = mean;
  out.ci95_half_width = 1.96 * std::sqrt(var / cfg.n_episodes);
  return out;
}

std::string EvalRecordToJson(const EvalRecord &r) {
  nlohmann::json j;
  j["arch"] = r.arch;
  j["n_way"] = r.n_way;
  j["k_shot"] = r.k_shot;
  j["n_query"] = r.n_query;
  j["n_episodes"] = r.n_episodes;
  j["seed"] = r.seed;
  j["mean_acc"] = r.mean_acc;
  j["ci95"] = r.ci95;
  return j.dump();
}

EvalRecord EvalRecordFromJson(const std::string &line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const std::exception &e) {
    FSSR_RAISE(ErrorCode::kIo) << "bad eval record: " << e.what();
  }
  EvalRecord r;
  r.arch = j.value("arch", "");
  r.n_way = j.value("n_way", 0);
  r.k_shot = j.value("k_shot", 0);
  r.n_query = j.value("n_query", 0);
  r.n_episodes = j.value("n_episodes", 0);
  r.seed = j.value("seed", 0ULL);
  r.mean_acc = j.value("mean_acc", 0.0);
  r.ci95 = j.value("ci95", 0.0);
  return r;
}

}  // namespace fewshot
}  // namespace fssr
