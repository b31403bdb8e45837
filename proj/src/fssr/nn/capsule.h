// fssr/nn/capsule.h
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
// Capsule primitives: the squash nonlinearity, routing by agreement with an
// exact backward pass through the unrolled iterations, and the margin loss
// on class-capsule norms.

#ifndef FSSR_NN_CAPSULE_H_
#define FSSR_NN_CAPSULE_H_

#include <cmath>
#include <vector>

#include "fssr/common/error.h"
#include "fssr/nn/tensor.h"

namespace fssr {
namespace nn {

// v = s * ||s|| / (1 + ||s||^2); keeps direction, maps norms into [0, 1).
template <typename T>
void SquashInPlace(T *s, int64_t d) {
  double n2 = 0.0;
  for (int64_t i = 0; i < d; ++i) n2 += static_cast<double>(s[i]) * s[i];
  if (n2 < 1e-30) {
    for (int64_t i = 0; i < d; ++i) s[i] = T(0);
    return;
  }
  const double n = std::sqrt(n2);
  const double factor = n / (1.0 + n2);
  for (int64_t i = 0; i < d; ++i) s[i] = static_cast<T>(s[i] * factor);
}

template <typename T>
std::vector<T> Squash(const std::vector<T> &s) {
  std::vector<T> v = s;
  SquashInPlace(v.data(), static_cast<int64_t>(v.size()));
  return v;
}

// gs = J_squash(s)^T gv with J = a*I + b*s*s^T,
// a = n/(1+n^2), b = (1-n^2) / (n (1+n^2)^2).
template <typename T>
void SquashBackward(const T *s, const T *gv, int64_t d, T *gs) {
  double n2 = 0.0;
  for (int64_t i = 0; i < d; ++i) n2 += static_cast<double>(s[i]) * s[i];
  if (n2 < 1e-30) {
    for (int64_t i = 0; i < d; ++i) gs[i] = T(0);
    return;
  }
  const double n = std::sqrt(n2);
  const double denom = 1.0 + n2;
  const double a = n / denom;
  const double b = (1.0 - n2) / (n * denom * denom);
  double s_dot_gv = 0.0;
  for (int64_t i = 0; i < d; ++i) s_dot_gv += static_cast<double>(s[i]) * gv[i];
  for (int64_t i = 0; i < d; ++i)
    gs[i] = static_cast<T>(a * gv[i] + b * s_dot_gv * s[i]);
}

// Forward state kept for the backward pass and for invariant checks: the
// coupling coefficients of every iteration are exposed so tests can verify
// that each input capsule's couplings sum to one.
template <typename T>
struct RoutingState {
  int64_t n_in = 0, n_out = 0, d = 0;
  int iters = 0;
  std::vector<Tensor<T>> couplings;  // per iter, {n_in, n_out}
  std::vector<Tensor<T>> s;          // per iter, {n_out, d} (pre-squash)
  std::vector<Tensor<T>> v;          // per iter, {n_out, d}
  const Tensor<T> &output() const { return v.back(); }
};

// Routing by agreement over prediction vectors u_hat {n_in, n_out, d}:
// logits start at zero, couplings are softmax over output capsules, outputs
// are squashed weighted sums, and logits grow by u_hat . v agreement.
template <typename T>
RoutingState<T> DynamicRouting(const Tensor<T> &u_hat, int iters) {
  FSSR_CHECK(u_hat.ndim() == 3, ErrorCode::kShapeMismatch)
      << "u_hat must be {n_in, n_out, d}";
  FSSR_CHECK(iters >= 1, ErrorCode::kInvalidArgument) << "iters must be >= 1";
  const int64_t n_in = u_hat.dim(0), n_out = u_hat.dim(1), d = u_hat.dim(2);

  RoutingState<T> st;
  st.n_in = n_in;
  st.n_out = n_out;
  st.d = d;
  st.iters = iters;

  Tensor<T> b({n_in, n_out});
  for (int r = 0; r < iters; ++r) {
    // c = softmax_j(b), stabilized per input capsule.
    Tensor<T> c({n_in, n_out});
    for (int64_t i = 0; i < n_in; ++i) {
      const T *bi = b.ptr() + i * n_out;
      T *ci = c.ptr() + i * n_out;
      T mx = bi[0];
      for (int64_t j = 1; j < n_out; ++j) mx = std::max(mx, bi[j]);
      double z = 0.0;
      for (int64_t j = 0; j < n_out; ++j) {
        ci[j] = std::exp(bi[j] - mx);
        z += ci[j];
      }
      const T inv = static_cast<T>(1.0 / z);
      for (int64_t j = 0; j < n_out; ++j) ci[j] *= inv;
    }

    Tensor<T> s({n_out, d});
    for (int64_t i = 0; i < n_in; ++i) {
      const T *ci = c.ptr() + i * n_out;
      const T *ui = u_hat.ptr() + i * n_out * d;
      for (int64_t j = 0; j < n_out; ++j) {
        const T cij = ci[j];
        T *sj = s.ptr() + j * d;
        const T *uij = ui + j * d;
        for (int64_t k = 0; k < d; ++k) sj[k] += cij * uij[k];
      }
    }
    Tensor<T> v = s;
    for (int64_t j = 0; j < n_out; ++j) SquashInPlace(v.ptr() + j * d, d);

    FSSR_CHECK(v.AllFinite(), ErrorCode::kNonFiniteActivation)
        << "routing iteration " << r << " produced non-finite activations";

    st.couplings.push_back(std::move(c));
    st.s.push_back(std::move(s));
    st.v.push_back(std::move(v));

    if (r + 1 < iters) {
      const Tensor<T> &vr = st.v.back();
      for (int64_t i = 0; i < n_in; ++i) {
        T *bi = b.ptr() + i * n_out;
        const T *ui = u_hat.ptr() + i * n_out * d;
        for (int64_t j = 0; j < n_out; ++j) {
          const T *uij = ui + j * d;
          const T *vj = vr.ptr() + j * d;
          T dot = T(0);
          for (int64_t k = 0; k < d; ++k) dot += uij[k] * vj[k];
          bi[j] += dot;
        }
      }
    }
  }
  return st;
}

// Exact gradient through the unrolled routing loop. g_out is the gradient
// with respect to the final output capsules {n_out, d}; returns the gradient
// with respect to u_hat.
template <typename T>
Tensor<T> DynamicRoutingBackward(const Tensor<T> &u_hat,
                                 const RoutingState<T> &st,
                                 const Tensor<T> &g_out) {
  const int64_t n_in = st.n_in, n_out = st.n_out, d = st.d;
  Tensor<T> gu({n_in, n_out, d});
  Tensor<T> gb({n_in, n_out});       // grad into the running logit state
  Tensor<T> gv = g_out;              // grad into v^r for the current r
  std::vector<T> gs(static_cast<size_t>(d));

  for (int r = st.iters - 1; r >= 0; --r) {
    const Tensor<T> &c = st.couplings[static_cast<size_t>(r)];
    const Tensor<T> &s = st.s[static_cast<size_t>(r)];

    // v^r = squash(s^r); s^r_j = sum_i c_ij u_hat_ij.
    Tensor<T> gs_all({n_out, d});
    for (int64_t j = 0; j < n_out; ++j) {
      SquashBackward(s.ptr() + j * d, gv.ptr() + j * d, d, gs.data());
      std::copy(gs.begin(), gs.end(), gs_all.ptr() + j * d);
    }

    Tensor<T> gc({n_in, n_out});
    for (int64_t i = 0; i < n_in; ++i) {
      const T *ci = c.ptr() + i * n_out;
      const T *ui = u_hat.ptr() + i * n_out * d;
      T *gci = gc.ptr() + i * n_out;
      T *gui = gu.ptr() + i * n_out * d;
      for (int64_t j = 0; j < n_out; ++j) {
        const T *uij = ui + j * d;
        const T *gsj = gs_all.ptr() + j * d;
        T dot = T(0);
        for (int64_t k = 0; k < d; ++k) {
          gui[j * d + k] += ci[j] * gsj[k];
          dot += uij[k] * gsj[k];
        }
        gci[j] = dot;
      }
    }

    // c_i = softmax(b_i): gb_i += c_i * (gc_i - <c_i, gc_i>).
    for (int64_t i = 0; i < n_in; ++i) {
      const T *ci = c.ptr() + i * n_out;
      const T *gci = gc.ptr() + i * n_out;
      T *gbi = gb.ptr() + i * n_out;
      T dot = T(0);
      for (int64_t j = 0; j < n_out; ++j) dot += ci[j] * gci[j];
      for (int64_t j = 0; j < n_out; ++j) gbi[j] += ci[j] * (gci[j] - dot);
    }

    if (r >= 1) {
      // b^r = b^{r-1} + u_hat . v^{r-1}: split gb into u_hat and v^{r-1}
      // contributions; gb itself carries on to iteration r-1.
      const Tensor<T> &v_prev = st.v[static_cast<size_t>(r - 1)];
      Tensor<T> gv_prev({n_out, d});
      for (int64_t i = 0; i < n_in; ++i) {
        const T *gbi = gb.ptr() + i * n_out;
        const T *ui = u_hat.ptr() + i * n_out * d;
        T *gui = gu.ptr() + i * n_out * d;
        for (int64_t j = 0; j < n_out; ++j) {
          const T g = gbi[j];
          const T *uij = ui + j * d;
          const T *vj = v_prev.ptr() + j * d;
          T *gvj = gv_prev.ptr() + j * d;
          for (int64_t k = 0; k < d; ++k) {
            gui[j * d + k] += g * vj[k];
            gvj[k] += g * uij[k];
          }
        }
      }
      gv = std::move(gv_prev);
    }
  }
  return gu;
}

template <typename T>
struct MarginLossParams {
  T m_plus = T(0.9);
  T m_minus = T(0.1);
  T lambda = T(0.5);
};

// Margin loss summed over classes for one sample of class capsules
// {n_classes, d}. target_onehot must contain exactly one 1. When grad is
// non-null the gradient with respect to the class vectors is written there.
template <typename T>
T MarginLoss(const Tensor<T> &class_vectors, const std::vector<T> &target_onehot,
             const MarginLossParams<T> &p = MarginLossParams<T>(),
             Tensor<T> *grad = nullptr) {
  FSSR_CHECK(class_vectors.ndim() == 2, ErrorCode::kShapeMismatch)
      << "class vectors must be {n_classes, d}";
  const int64_t C = class_vectors.dim(0), d = class_vectors.dim(1);
  FSSR_CHECK(static_cast<int64_t>(target_onehot.size()) == C,
             ErrorCode::kShapeMismatch)
      << "target length " << target_onehot.size() << " != n_classes " << C;
  int ones = 0;
  for (const T &t : target_onehot) {
    FSSR_CHECK(t == T(0) || t == T(1), ErrorCode::kShapeMismatch)
        << "target must be one-hot";
    if (t == T(1)) ++ones;
  }
  FSSR_CHECK(ones == 1, ErrorCode::kShapeMismatch)
      << "target must have exactly one active class, got " << ones;

  if (grad) grad->Resize(class_vectors.shape);
  T loss = T(0);
  for (int64_t c = 0; c < C; ++c) {
    const T *vc = class_vectors.ptr() + c * d;
    double n2 = 0.0;
    for (int64_t k = 0; k < d; ++k) n2 += static_cast<double>(vc[k]) * vc[k];
    const T n = static_cast<T>(std::sqrt(n2));
    const bool is_target = target_onehot[static_cast<size_t>(c)] == T(1);
    if (is_target) {
      const T hinge = std::max(T(0), p.m_plus - n);
      loss += hinge * hinge;
      if (grad && hinge > T(0) && n > T(1e-12)) {
        const T scale = T(-2) * hinge / n;
        T *gc = grad->ptr() + c * d;
        for (int64_t k = 0; k < d; ++k) gc[k] = scale * vc[k];
      }
    } else {
      const T hinge = std::max(T(0), n - p.m_minus);
      loss += p.lambda * hinge * hinge;
      if (grad && hinge > T(0) && n > T(1e-12)) {
        const T scale = T(2) * p.lambda * hinge / n;
        T *gc = grad->ptr() + c * d;
        for (int64_t k = 0; k < d; ++k) gc[k] = scale * vc[k];
      }
    }
  }
  return loss;
}

// Batch variant on precomputed capsule norms {N, C}; mean over the batch,
// used by the classifier trainer. Gradients (if requested) are with respect
// to the norms.
template <typename T>
T MarginLossFromNorms(const Tensor<T> &norms, const std::vector<int> &targets,
                      const MarginLossParams<T> &p, Tensor<T> *gnorms) {
  const int64_t N = norms.dim(0), C = norms.dim(1);
  FSSR_CHECK(static_cast<int64_t>(targets.size()) == N,
             ErrorCode::kShapeMismatch)
      << "targets/batch mismatch";
  if (gnorms) gnorms->Resize(norms.shape);
  double total = 0.0;
  const T inv_n = T(1) / static_cast<T>(N);
  for (int64_t n = 0; n < N; ++n) {
    const T *row = norms.ptr() + n * C;
    T *grow = gnorms ? gnorms->ptr() + n * C : nullptr;
    for (int64_t c = 0; c < C; ++c) {
      FSSR_CHECK(targets[static_cast<size_t>(n)] >= 0 &&
                     targets[static_cast<size_t>(n)] < C,
                 ErrorCode::kShapeMismatch)
          << "target class out of range";
      if (c == targets[static_cast<size_t>(n)]) {
        const T hinge = std::max(T(0), p.m_plus - row[c]);
        total += hinge * hinge;
        if (grow && hinge > T(0)) grow[c] = T(-2) * hinge * inv_n;
      } else {
        const T hinge = std::max(T(0), row[c] - p.m_minus);
        total += p.lambda * hinge * hinge;
        if (grow && hinge > T(0)) grow[c] = T(2) * p.lambda * hinge * inv_n;
      }
    }
  }
  return static_cast<T>(total / static_cast<double>(N));
}

}  // namespace nn
}  // namespace fssr

#endif  // FSSR_NN_CAPSULE_H_
