// fssr/harness/runner.h
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
//
// Config-driven entry points, one per CLI subcommand. Every run resolves
// its configuration (defaults < config file < overrides) and writes the
// resolved view next to its outputs.

#ifndef FSSR_HARNESS_RUNNER_H_
#define FSSR_HARNESS_RUNNER_H_

#include <ostream>
#include <string>

#include "fssr/common/config.h"
#include "fssr/fewshot/evaluate.h"

namespace fssr {
namespace harness {

// dataset = voxceleb | vctk | toy. Builds (for toy: generates, then builds)
// the split manifest at cfg "out".
void RunPrepareSplits(const Config &cfg, std::ostream *log);

// Single file ("input" -> "output") or whole-manifest cache fill
// ("manifest" + cache dir).
void RunSpectrogram(const Config &cfg, std::ostream *log);

void RunTrain(const Config &cfg, std::ostream *log);
void RunEpisodicTrain(const Config &cfg, std::ostream *log);
fewshot::FewShotEvalResult RunFewshotEval(const Config &cfg, std::ostream *log);
void RunFinetune(const Config &cfg, std::ostream *log);
void RunSweep(const Config &cfg, std::ostream *log);
void RunReport(const Config &cfg, std::ostream *log);

// Resolves the cache directory: config key "cache_dir", else FSSR_CACHE_DIR,
// else empty (memory-only).
std::string ResolveCacheDir(const Config &cfg);

}  // namespace harness
}  // namespace fssr

#endif  // FSSR_HARNESS_RUNNER_H_
