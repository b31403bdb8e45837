// fssr/nn/optim.h
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

#ifndef FSSR_NN_OPTIM_H_
#define FSSR_NN_OPTIM_H_

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fssr/nn/tensor.h"

namespace fssr {
namespace nn {

template <typename T>
void ZeroGrads(const std::vector<ParamRef<T>> &params) {
  for (const auto &p : params)
    if (p.grad) p.grad->Zero();
}

template <typename T>
int64_t CountParameters(const std::vector<ParamRef<T>> &params) {
  int64_t n = 0;
  for (const auto &p : params) n += p.value->numel();
  return n;
}

template <typename T>
class Adam {
 public:
  explicit Adam(T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void Step(const std::vector<ParamRef<T>> &params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(static_cast<double>(beta1_), t_);
    const double bc2 = 1.0 - std::pow(static_cast<double>(beta2_), t_);
    for (const auto &p : params) {
      if (!p.grad) continue;
      auto &m = m_[p.name];
      auto &v = v_[p.name];
      if (m.size() != p.value->data.size()) {
        m.assign(p.value->data.size(), T(0));
        v.assign(p.value->data.size(), T(0));
      }
      T *w = p.value->ptr();
      const T *g = p.grad->ptr();
      for (size_t i = 0; i < p.value->data.size(); ++i) {
        m[i] = beta1_ * m[i] + (T(1) - beta1_) * g[i];
        v[i] = beta2_ * v[i] + (T(1) - beta2_) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        w[i] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  void set_lr(T lr) { lr_ = lr; }

 private:
  T lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::map<std::string, std::vector<T>> m_, v_;
};

template <typename T>
class SgdMomentum {
 public:
  explicit SgdMomentum(T lr, T momentum = T(0.9)) : lr_(lr), mu_(momentum) {}

  void Step(const std::vector<ParamRef<T>> &params) {
    for (const auto &p : params) {
      if (!p.grad) continue;
      auto &v = v_[p.name];
      if (v.size() != p.value->data.size()) v.assign(p.value->data.size(), T(0));
      T *w = p.value->ptr();
      const T *g = p.grad->ptr();
      for (size_t i = 0; i < p.value->data.size(); ++i) {
        v[i] = mu_ * v[i] - lr_ * g[i];
        w[i] += v[i];
      }
    }
  }

  void set_lr(T lr) { lr_ = lr; }

 private:
  T lr_, mu_;
  std::map<std::string, std::vector<T>> v_;
};

}  // namespace nn
}  // namespace fssr

#endif  // FSSR_NN_OPTIM_H_
