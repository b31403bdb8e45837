// fssr/dsp/fft.cc
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

#include "fssr/dsp/fft.h"

#include <cmath>

#include "fssr/common/error.h"

namespace fssr {
namespace dsp {

void Fft(std::vector<std::complex<double>> *data) {
  auto &a = *data;
  const size_t n = a.size();
  FSSR_CHECK(n != 0 && (n & (n - 1)) == 0, ErrorCode::kInvalidArgument)
      << "FFT length must be a power of two, got " << n;

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const double kTwoPi = 6.283185307179586476925286766559;
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -kTwoPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> RealMagnitudeSpectrum(const double *frame, int frame_len,
                                          int fft_length) {
  FSSR_CHECK(fft_length >= frame_len, ErrorCode::kInvalidArgument)
      << "fft_length " << fft_length << " < frame length " << frame_len;
  std::vector<std::complex<double>> buf(static_cast<size_t>(fft_length));
  for (int i = 0; i < frame_len; ++i) buf[i] = frame[i];
  Fft(&buf);
  std::vector<double> mag(static_cast<size_t>(fft_length / 2 + 1));
  for (size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

}  // namespace dsp
}  // namespace fssr
