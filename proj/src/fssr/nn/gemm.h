// fssr/nn/gemm.h
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

#ifndef FSSR_NN_GEMM_H_
#define FSSR_NN_GEMM_H_

#include <cstdint>
#include <cstring>

namespace fssr {
namespace nn {

// Row-major matrix kernels used by the convolution and linear layers.
// Each output element is accumulated by exactly one thread in a fixed k
// order, so results are bitwise reproducible for any thread count.

// C (+)= A * B, A: M x K (lda), B: K x N (ldb), C: M x N (ldc).
// Four output rows share each streamed B row.
template <typename T>
void GemmNN(int64_t M, int64_t N, int64_t K, const T *A, int64_t lda,
            const T *B, int64_t ldb, T *C, int64_t ldc, bool accumulate) {
  const int64_t m4 = M / 4 * 4;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m4; i += 4) {
    T *c0 = C + i * ldc, *c1 = c0 + ldc, *c2 = c1 + ldc, *c3 = c2 + ldc;
    if (!accumulate) {
      std::memset(c0, 0, sizeof(T) * static_cast<size_t>(N));
      std::memset(c1, 0, sizeof(T) * static_cast<size_t>(N));
      std::memset(c2, 0, sizeof(T) * static_cast<size_t>(N));
      std::memset(c3, 0, sizeof(T) * static_cast<size_t>(N));
    }
    const T *a0 = A + i * lda, *a1 = a0 + lda, *a2 = a1 + lda, *a3 = a2 + lda;
    for (int64_t k = 0; k < K; ++k) {
      const T v0 = a0[k], v1 = a1[k], v2 = a2[k], v3 = a3[k];
      if (v0 == T(0) && v1 == T(0) && v2 == T(0) && v3 == T(0)) continue;
      const T *b_row = B + k * ldb;
      for (int64_t j = 0; j < N; ++j) {
        const T b = b_row[j];
        c0[j] += v0 * b;
        c1[j] += v1 * b;
        c2[j] += v2 * b;
        c3[j] += v3 * b;
      }
    }
  }
  for (int64_t i = m4; i < M; ++i) {
    T *c_row = C + i * ldc;
    if (!accumulate) std::memset(c_row, 0, sizeof(T) * static_cast<size_t>(N));
    const T *a_row = A + i * lda;
    for (int64_t k = 0; k < K; ++k) {
      const T a = a_row[k];
      if (a == T(0)) continue;
      const T *b_row = B + k * ldb;
      for (int64_t j = 0; j < N; ++j) c_row[j] += a * b_row[j];
    }
  }
}

// C (+)= A^T * B, A stored K x M (lda), B: K x N (ldb), C: M x N (ldc).
template <typename T>
void GemmTN(int64_t M, int64_t N, int64_t K, const T *A, int64_t lda,
            const T *B, int64_t ldb, T *C, int64_t ldc, bool accumulate) {
  const int64_t m4 = M / 4 * 4;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m4; i += 4) {
    T *c0 = C + i * ldc, *c1 = c0 + ldc, *c2 = c1 + ldc, *c3 = c2 + ldc;
    if (!accumulate) {
      std::memset(c0, 0, sizeof(T) * static_cast<size_t>(N));
      std::memset(c1, 0, sizeof(T) * static_cast<size_t>(N));
      std::memset(c2, 0, sizeof(T) * static_cast<size_t>(N));
      std::memset(c3, 0, sizeof(T) * static_cast<size_t>(N));
    }
    for (int64_t k = 0; k < K; ++k) {
      const T *a_row = A + k * lda + i;
      const T v0 = a_row[0], v1 = a_row[1], v2 = a_row[2], v3 = a_row[3];
      if (v0 == T(0) && v1 == T(0) && v2 == T(0) && v3 == T(0)) continue;
      const T *b_row = B + k * ldb;
      for (int64_t j = 0; j < N; ++j) {
        const T b = b_row[j];
        c0[j] += v0 * b;
        c1[j] += v1 * b;
        c2[j] += v2 * b;
        c3[j] += v3 * b;
      }
    }
  }
  for (int64_t i = m4; i < M; ++i) {
    T *c_row = C + i * ldc;
    if (!accumulate) std::memset(c_row, 0, sizeof(T) * static_cast<size_t>(N));
    for (int64_t k = 0; k < K; ++k) {
      const T a = A[k * lda + i];
      if (a == T(0)) continue;
      const T *b_row = B + k * ldb;
      for (int64_t j = 0; j < N; ++j) c_row[j] += a * b_row[j];
    }
  }
}

// C (+)= A * B^T, A: M x K (lda), B stored N x K (ldb), C: M x N (ldc).
// 2x2 blocks of dot products share their operand rows.
template <typename T>
void GemmNT(int64_t M, int64_t N, int64_t K, const T *A, int64_t lda,
            const T *B, int64_t ldb, T *C, int64_t ldc, bool accumulate) {
  const int64_t m2 = M / 2 * 2, n2 = N / 2 * 2;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m2; i += 2) {
    const T *a0 = A + i * lda, *a1 = a0 + lda;
    T *c0 = C + i * ldc, *c1 = c0 + ldc;
    for (int64_t j = 0; j < n2; j += 2) {
      const T *b0 = B + j * ldb, *b1 = b0 + ldb;
      T s00 = T(0), s01 = T(0), s10 = T(0), s11 = T(0);
      T t00 = T(0), t01 = T(0), t10 = T(0), t11 = T(0);
      const int64_t k2 = K / 2 * 2;
      for (int64_t k = 0; k < k2; k += 2) {
        const T x0 = a0[k], x1 = a1[k], y0 = b0[k], y1 = b1[k];
        s00 += x0 * y0;
        s01 += x0 * y1;
        s10 += x1 * y0;
        s11 += x1 * y1;
        const T x0b = a0[k + 1], x1b = a1[k + 1];
        const T y0b = b0[k + 1], y1b = b1[k + 1];
        t00 += x0b * y0b;
        t01 += x0b * y1b;
        t10 += x1b * y0b;
        t11 += x1b * y1b;
      }
      for (int64_t k = k2; k < K; ++k) {
        const T x0 = a0[k], x1 = a1[k], y0 = b0[k], y1 = b1[k];
        s00 += x0 * y0;
        s01 += x0 * y1;
        s10 += x1 * y0;
        s11 += x1 * y1;
      }
      s00 += t00;
      s01 += t01;
      s10 += t10;
      s11 += t11;
      if (accumulate) {
        c0[j] += s00;
        c0[j + 1] += s01;
        c1[j] += s10;
        c1[j + 1] += s11;
      } else {
        c0[j] = s00;
        c0[j + 1] = s01;
        c1[j] = s10;
        c1[j + 1] = s11;
      }
    }
    for (int64_t j = n2; j < N; ++j) {
      const T *b0 = B + j * ldb;
      T s0 = T(0), s1 = T(0);
      for (int64_t k = 0; k < K; ++k) {
        s0 += a0[k] * b0[k];
        s1 += a1[k] * b0[k];
      }
      if (accumulate) {
        c0[j] += s0;
        c1[j] += s1;
      } else {
        c0[j] = s0;
        c1[j] = s1;
      }
    }
  }
  for (int64_t i = m2; i < M; ++i) {
    const T *a_row = A + i * lda;
    T *c_row = C + i * ldc;
    for (int64_t j = 0; j < N; ++j) {
      const T *b_row = B + j * ldb;
      T acc = accumulate ? c_row[j] : T(0);
      for (int64_t k = 0; k < K; ++k) acc += a_row[k] * b_row[k];
      c_row[j] = acc;
    }
  }
}

}  // namespace nn
}  // namespace fssr

#endif  // FSSR_NN_GEMM_H_
