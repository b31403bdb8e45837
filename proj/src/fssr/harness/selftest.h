// fssr/harness/selftest.h
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

#ifndef FSSR_HARNESS_SELFTEST_H_
#define FSSR_HARNESS_SELFTEST_H_

#include <ostream>
#include <string>
#include <vector>

namespace fssr {
namespace harness {

struct SelfTestCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// The built-in property suite behind the `selftest` subcommand: shape and
// normalization contracts, capsule invariants, loss oracles, gradient
// checks, the model parameter counts and a determinism probe. Prints one
// line per check to `out` when given. Returns the failing checks' count.
int RunSelfTest(std::ostream *out, std::vector<SelfTestCheck> *results = nullptr);

}  // namespace harness
}  // namespace fssr

#endif  // FSSR_HARNESS_SELFTEST_H_
