// fssr/fewshot/protonet.h
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
// Prototype construction and the distance-softmax classifier: a class
// prototype is the mean of its support embeddings, and a query's class
// distribution is softmax over negative distances to the prototypes. The
// episodic loss is the mean negative log-probability of the true class.

#ifndef FSSR_FEWSHOT_PROTONET_H_
#define FSSR_FEWSHOT_PROTONET_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fssr/common/error.h"
#include "fssr/common/rng.h"
#include "fssr/nn/tensor.h"

namespace fssr {
namespace fewshot {

enum class Distance { kSqEuclidean, kEuclidean, kCosine };

Distance DistanceFromString(const std::string &s);
const char *DistanceToString(Distance d);

template <typename T>
struct PrototypeSet {
  nn::Tensor<T> prototypes;  // {K, M}, row k is the class-k prototype
  std::vector<int> labels;   // original label of each row, ascending
  Distance distance = Distance::kSqEuclidean;
};

namespace internal {

template <typename T>
T PairDistance(const T *a, const T *b, int64_t m, Distance d) {
  switch (d) {
    case Distance::kSqEuclidean:
    case Distance::kEuclidean: {
      double s = 0.0;
      for (int64_t i = 0; i < m; ++i) {
        const double diff = static_cast<double>(a[i]) - b[i];
        s += diff * diff;
      }
      return d == Distance::kSqEuclidean ? static_cast<T>(s)
                                         : static_cast<T>(std::sqrt(s));
    }
    case Distance::kCosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (int64_t i = 0; i < m; ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
      }
      const double denom = std::sqrt(na * nb);
      return static_cast<T>(denom < 1e-30 ? 1.0 : 1.0 - dot / denom);
    }
  }
  return T(0);
}

// d(dist)/dq and d(dist)/da for one (query, prototype) pair.
template <typename T>
void PairDistanceGrad(const T *q, const T *a, int64_t m, Distance d, T coeff,
                      T *gq, T *ga) {
  switch (d) {
    case Distance::kSqEuclidean: {
      for (int64_t i = 0; i < m; ++i) {
        const T diff = q[i] - a[i];
        gq[i] += coeff * T(2) * diff;
        ga[i] -= coeff * T(2) * diff;
      }
      return;
    }
    case Distance::kEuclidean: {
      double s = 0.0;
      for (int64_t i = 0; i < m; ++i) {
        const double diff = static_cast<double>(q[i]) - a[i];
        s += diff * diff;
      }
      const double dist = std::sqrt(s);
      if (dist < 1e-12) return;  // subgradient 0 at the kink
      const T inv = static_cast<T>(1.0 / dist);
      for (int64_t i = 0; i < m; ++i) {
        const T diff = q[i] - a[i];
        gq[i] += coeff * diff * inv;
        ga[i] -= coeff * diff * inv;
      }
      return;
    }
    case Distance::kCosine: {
      double dot = 0.0, nq2 = 0.0, na2 = 0.0;
      for (int64_t i = 0; i < m; ++i) {
        dot += static_cast<double>(q[i]) * a[i];
        nq2 += static_cast<double>(q[i]) * q[i];
        na2 += static_cast<double>(a[i]) * a[i];
      }
      const double nq = std::sqrt(nq2), na = std::sqrt(na2);
      if (nq < 1e-12 || na < 1e-12) return;
      const double inv = 1.0 / (nq * na);
      const double cos = dot * inv;
      // d = 1 - cos: dd/dq = -(a/(|q||a|) - cos q/|q|^2).
      for (int64_t i = 0; i < m; ++i) {
        gq[i] -= coeff * static_cast<T>(a[i] * inv - cos * q[i] / nq2);
        ga[i] -= coeff * static_cast<T>(q[i] * inv - cos * a[i] / na2);
      }
      return;
    }
  }
}

}  // namespace internal

// a_k = mean of the support embeddings labeled k. Classes are the distinct
// labels present, in ascending order. If n_expected_classes is positive,
// labels must cover 0..n_expected_classes-1 and a missing class raises
// kEmptyClass.
template <typename T>
PrototypeSet<T> ComputePrototypes(const nn::Tensor<T> &support,
                                  const std::vector<int> &labels,
                                  Distance distance = Distance::kSqEuclidean,
                                  int n_expected_classes = -1) {
  FSSR_CHECK(support.ndim() == 2, ErrorCode::kShapeMismatch)
      << "support must be {N, M}";
  const int64_t N = support.dim(0), M = support.dim(1);
  FSSR_CHECK(static_cast<int64_t>(labels.size()) == N,
             ErrorCode::kShapeMismatch)
      << "labels size " << labels.size() << " != support count " << N;
  FSSR_CHECK(N > 0, ErrorCode::kEmptyClass) << "no support embeddings";

  std::map<int, std::pair<std::vector<double>, int>> acc;  // label -> (sum, n)
  for (int64_t n = 0; n < N; ++n) {
    auto &slot = acc[labels[static_cast<size_t>(n)]];
    if (slot.first.empty()) slot.first.assign(static_cast<size_t>(M), 0.0);
    const T *row = support.ptr() + n * M;
    for (int64_t i = 0; i < M; ++i) slot.first[static_cast<size_t>(i)] += row[i];
    slot.second += 1;
  }
  if (n_expected_classes > 0) {
    for (int c = 0; c < n_expected_classes; ++c)
      if (!acc.count(c))
        FSSR_RAISE(ErrorCode::kEmptyClass)
            << "class " << c << " has no support embeddings";
  }

  PrototypeSet<T> out;
  out.distance = distance;
  out.prototypes.Resize({static_cast<int64_t>(acc.size()), M});
  int64_t k = 0;
  for (const auto &[label, slot] : acc) {
    out.labels.push_back(label);
    T *row = out.prototypes.ptr() + k * M;
    for (int64_t i = 0; i < M; ++i)
      row[i] = static_cast<T>(slot.first[static_cast<size_t>(i)] / slot.second);
    ++k;
  }
  return out;
}

// log p(y = k | q) for every prototype, stabilized with log-sum-exp.
template <typename T>
std::vector<T> ClassifyQuery(const T *q, int64_t m,
                             const PrototypeSet<T> &protos) {
  FSSR_CHECK(m == protos.prototypes.dim(1), ErrorCode::kDimensionMismatch)
      << "query dim " << m << " != prototype dim " << protos.prototypes.dim(1);
  const int64_t K = protos.prototypes.dim(0);
  std::vector<T> logits(static_cast<size_t>(K));
  for (int64_t k = 0; k < K; ++k)
    logits[static_cast<size_t>(k)] = -internal::PairDistance(
        q, protos.prototypes.ptr() + k * m, m, protos.distance);
  T mx = logits[0];
  for (int64_t k = 1; k < K; ++k) mx = std::max(mx, logits[static_cast<size_t>(k)]);
  double z = 0.0;
  for (int64_t k = 0; k < K; ++k)
    z += std::exp(static_cast<double>(logits[static_cast<size_t>(k)] - mx));
  const double log_z = std::log(z) + static_cast<double>(mx);
  for (int64_t k = 0; k < K; ++k)
    logits[static_cast<size_t>(k)] =
        static_cast<T>(static_cast<double>(logits[static_cast<size_t>(k)]) - log_z);
  return logits;
}

template <typename T>
struct EpisodeResult {
  T loss = T(0);
  nn::Tensor<T> log_probs;  // {n_queries, K}
  double accuracy = 0.0;
};

// Returns the index of the maximal entry; exact ties are broken uniformly at
// random when rng is given (stable lowest index otherwise), so a constant
// embedder scores chance level rather than class 0 every time.
template <typename T>
int ArgmaxWithTies(const T *row, int64_t k, Rng *rng) {
  T best = row[0];
  for (int64_t i = 1; i < k; ++i) best = std::max(best, row[i]);
  if (!rng) {
    for (int64_t i = 0; i < k; ++i)
      if (row[i] == best) return static_cast<int>(i);
  }
  std::vector<int> tied;
  for (int64_t i = 0; i < k; ++i)
    if (row[i] == best) tied.push_back(static_cast<int>(i));
  if (tied.size() == 1) return tied[0];
  return tied[static_cast<size_t>(rng->NextInt(static_cast<int64_t>(tied.size())))];
}

// Episodic loss: builds prototypes from the support set, classifies each
// query and averages the negative log-probability of the true class.
// Gradients with respect to the support and query embeddings are emitted
// when requested.
template <typename T>
EpisodeResult<T> PrototypicalLoss(const nn::Tensor<T> &support,
                                  const std::vector<int> &support_labels,
                                  const nn::Tensor<T> &query,
                                  const std::vector<int> &query_labels,
                                  Distance distance = Distance::kSqEuclidean,
                                  nn::Tensor<T> *gsupport = nullptr,
                                  nn::Tensor<T> *gquery = nullptr,
                                  Rng *tie_rng = nullptr) {
  const int64_t M = support.dim(1);
  FSSR_CHECK(query.ndim() == 2 && query.dim(1) == M,
             ErrorCode::kDimensionMismatch)
      << "query dim " << query.dim(1) << " != support dim " << M;
  const int64_t Nq = query.dim(0);
  FSSR_CHECK(static_cast<int64_t>(query_labels.size()) == Nq,
             ErrorCode::kShapeMismatch)
      << "query labels size mismatch";

  PrototypeSet<T> protos = ComputePrototypes(support, support_labels, distance);
  const int64_t K = protos.prototypes.dim(0);

  // Map raw labels to prototype rows.
  std::map<int, int> row_of;
  for (size_t k = 0; k < protos.labels.size(); ++k)
    row_of[protos.labels[k]] = static_cast<int>(k);
  // Support row counts per class, for distributing prototype gradients.
  std::vector<int> class_count(static_cast<size_t>(K), 0);
  for (int lbl : support_labels) ++class_count[static_cast<size_t>(row_of.at(lbl))];

  EpisodeResult<T> result;
  result.log_probs.Resize({Nq, K});
  nn::Tensor<T> gproto({K, M});
  if (gquery) gquery->Resize(query.shape);

  double total_loss = 0.0;
  int correct = 0;
  for (int64_t n = 0; n < Nq; ++n) {
    const int lbl = query_labels[static_cast<size_t>(n)];
    auto it = row_of.find(lbl);
    FSSR_CHECK(it != row_of.end(), ErrorCode::kInvalidArgument)
        << "query label " << lbl << " has no support class";
    const int y = it->second;

    const T *q = query.ptr() + n * M;
    std::vector<T> logp = ClassifyQuery(q, M, protos);
    std::copy(logp.begin(), logp.end(), result.log_probs.ptr() + n * K);
    total_loss -= static_cast<double>(logp[static_cast<size_t>(y)]);
    if (ArgmaxWithTies(logp.data(), K, tie_rng) == y) ++correct;

    if (gquery || gsupport) {
      // dloss/dd_k = (1[k=y] - p_k) / Nq.
      T *gq = gquery ? gquery->ptr() + n * M : nullptr;
      std::vector<T> gq_local;
      if (!gq) {
        gq_local.assign(static_cast<size_t>(M), T(0));
        gq = gq_local.data();
      }
      for (int64_t k = 0; k < K; ++k) {
        const double p = std::exp(static_cast<double>(logp[static_cast<size_t>(k)]));
        const T coeff = static_cast<T>(
            (((k == y) ? 1.0 : 0.0) - p) / static_cast<double>(Nq));
        internal::PairDistanceGrad(q, protos.prototypes.ptr() + k * M, M,
                                   distance, coeff, gq,
                                   gproto.ptr() + k * M);
      }
    }
  }

  if (gsupport) {
    gsupport->Resize(support.shape);
    // a_k is the class mean; spread its gradient over the class supports.
    for (int64_t n = 0; n < support.dim(0); ++n) {
      const int k = row_of.at(support_labels[static_cast<size_t>(n)]);
      const T inv = T(1) / static_cast<T>(class_count[static_cast<size_t>(k)]);
      const T *gp = gproto.ptr() + k * M;
      T *gs = gsupport->ptr() + n * M;
      for (int64_t i = 0; i < M; ++i) gs[i] = gp[i] * inv;
    }
  }

  result.loss = static_cast<T>(total_loss / static_cast<double>(Nq));
  result.accuracy = static_cast<double>(correct) / static_cast<double>(Nq);
  return result;
}

}  // namespace fewshot
}  // namespace fssr

#endif  // FSSR_FEWSHOT_PROTONET_H_
