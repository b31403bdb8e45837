// fssr/dsp/resample.cc
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

#include "fssr/dsp/resample.h"

#include <cmath>
#include <numeric>

#include "fssr/common/error.h"

namespace fssr {
namespace dsp {

namespace {

constexpr double kBeta = 8.6;       // Kaiser shape, ~90 dB stopband
constexpr int kZeroCrossings = 16;  // sinc half-width in output-band zeros

double BesselI0(double x) {
  // Power series; converges quickly for the argument range used here.
  double sum = 1.0, term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double KaiserSinc(double t, double cutoff, double half_width) {
  // t in input-sample units; cutoff as a fraction of the input Nyquist.
  if (std::abs(t) >= half_width) return 0.0;
  const double x = t / half_width;
  const double window = BesselI0(kBeta * std::sqrt(1.0 - x * x)) /
                        BesselI0(kBeta);
  const double arg = 3.14159265358979323846 * cutoff * t;
  const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
  return cutoff * sinc * window;
}

}  // namespace

std::vector<float> Resample(const std::vector<float> &input, int in_rate_hz,
                            int out_rate_hz) {
  FSSR_CHECK(in_rate_hz > 0 && out_rate_hz > 0, ErrorCode::kInvalidArgument)
      << "rates must be positive";
  if (in_rate_hz == out_rate_hz) return input;
  if (input.empty()) return {};

  const int g = std::gcd(in_rate_hz, out_rate_hz);
  const int64_t up = out_rate_hz / g;    // L
  const int64_t down = in_rate_hz / g;   // M

  // Cutoff slightly below the narrower Nyquist; the margin is the filter's
  // transition band.
  const double cutoff =
      0.95 * std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  const double half_width = kZeroCrossings / cutoff;
  const int reach = static_cast<int>(std::ceil(half_width));

  const int64_t n_in = static_cast<int64_t>(input.size());
  const int64_t n_out = n_in * up / down;
  std::vector<float> out(static_cast<size_t>(n_out));

  // Polyphase tap table: phase p corresponds to fractional offset p/up.
  // taps[p][j] multiplies input[i0 + j - reach + 1].
  const int taps_per_phase = 2 * reach;
  std::vector<double> taps(static_cast<size_t>(up) * taps_per_phase);
  for (int64_t p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    for (int j = 0; j < taps_per_phase; ++j) {
      const double t = static_cast<double>(j - reach + 1) - frac;
      taps[static_cast<size_t>(p) * taps_per_phase + j] =
          KaiserSinc(t, cutoff, half_width);
    }
  }

  for (int64_t m = 0; m < n_out; ++m) {
    const int64_t num = m * down;
    const int64_t i0 = num / up;
    const int64_t phase = num % up;
    const double *h = &taps[static_cast<size_t>(phase) * taps_per_phase];
    double acc = 0.0;
    for (int j = 0; j < taps_per_phase; ++j) {
      const int64_t idx = i0 + j - reach + 1;
      if (idx < 0 || idx >= n_in) continue;  // zero-padded edges
      acc += h[j] * static_cast<double>(input[static_cast<size_t>(idx)]);
    }
    out[static_cast<size_t>(m)] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace dsp
}  // namespace fssr
