// fssr/nn/tensor.h
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

#ifndef FSSR_NN_TENSOR_H_
#define FSSR_NN_TENSOR_H_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "fssr/common/error.h"
#include "fssr/common/rng.h"

namespace fssr {
namespace nn {

// Dense row-major tensor. Training code is instantiated with float; the
// gradient-check suites instantiate double.
template <typename T>
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) { Resize(std::move(s)); }
  Tensor(std::initializer_list<int64_t> s) {
    Resize(std::vector<int64_t>(s));
  }

  void Resize(std::vector<int64_t> s) {
    shape = std::move(s);
    data.assign(static_cast<size_t>(Numel(shape)), T(0));
  }

  static int64_t Numel(const std::vector<int64_t> &s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }
  int64_t numel() const { return static_cast<int64_t>(data.size()); }

  int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape.size()); }

  T *ptr() { return data.data(); }
  const T *ptr() const { return data.data(); }

  void Zero() { std::fill(data.begin(), data.end(), T(0)); }

  // Reinterprets the buffer with a new shape of the same element count.
  Tensor<T> Reshaped(std::vector<int64_t> s) const {
    FSSR_CHECK(Numel(s) == numel(), ErrorCode::kShapeMismatch)
        << "reshape from " << numel() << " to " << Numel(s) << " elements";
    Tensor<T> out;
    out.shape = std::move(s);
    out.data = data;
    return out;
  }

  bool AllFinite() const {
    for (const T &v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }
};

// Named (value, grad) pair; models expose these for optimizers, parameter
// counting and checkpointing.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T> *value = nullptr;
  Tensor<T> *grad = nullptr;
};

template <typename T>
void HeNormalInit(Tensor<T> *w, int64_t fan_in, Rng *rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (T &v : w->data) v = static_cast<T>(rng->NextGaussian() * std);
}

}  // namespace nn
}  // namespace fssr

#endif  // FSSR_NN_TENSOR_H_
