// fssr/nn/losses.h
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

#ifndef FSSR_NN_LOSSES_H_
#define FSSR_NN_LOSSES_H_

#include <cmath>
#include <vector>

#include "fssr/common/error.h"
#include "fssr/nn/tensor.h"

namespace fssr {
namespace nn {

// Softmax cross-entropy, mean over the batch. logits {N, C}. When glogits is
// non-null the batch-mean gradient (softmax - onehot) / N is written there.
template <typename T>
T CrossEntropyLoss(const Tensor<T> &logits, const std::vector<int> &targets,
                   Tensor<T> *glogits = nullptr) {
  FSSR_CHECK(logits.ndim() == 2, ErrorCode::kShapeMismatch)
      << "logits must be {N, C}";
  const int64_t N = logits.dim(0), C = logits.dim(1);
  FSSR_CHECK(static_cast<int64_t>(targets.size()) == N,
             ErrorCode::kShapeMismatch)
      << "targets size " << targets.size() << " != batch " << N;
  if (glogits) glogits->Resize(logits.shape);

  double total = 0.0;
  for (int64_t n = 0; n < N; ++n) {
    const T *row = logits.ptr() + n * C;
    const int y = targets[static_cast<size_t>(n)];
    FSSR_CHECK(y >= 0 && y < C, ErrorCode::kShapeMismatch)
        << "target " << y << " out of range [0," << C << ")";
    T mx = row[0];
    for (int64_t c = 1; c < C; ++c) mx = std::max(mx, row[c]);
    double z = 0.0;
    for (int64_t c = 0; c < C; ++c) z += std::exp(static_cast<double>(row[c] - mx));
    const double log_z = std::log(z) + static_cast<double>(mx);
    total += log_z - static_cast<double>(row[y]);
    if (glogits) {
      T *grow = glogits->ptr() + n * C;
      for (int64_t c = 0; c < C; ++c) {
        const double p = std::exp(static_cast<double>(row[c]) - log_z);
        grow[c] = static_cast<T>((p - (c == y ? 1.0 : 0.0)) /
                                 static_cast<double>(N));
      }
    }
  }
  return static_cast<T>(total / static_cast<double>(N));
}

}  // namespace nn
}  // namespace fssr

#endif  // FSSR_NN_LOSSES_H_
