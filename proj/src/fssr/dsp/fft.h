// fssr/dsp/fft.h
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

#ifndef FSSR_DSP_FFT_H_
#define FSSR_DSP_FFT_H_

#include <complex>
#include <vector>

namespace fssr {
namespace dsp {

// In-place iterative radix-2 FFT. n must be a power of two.
void Fft(std::vector<std::complex<double>> *data);

// One-sided magnitude spectrum of a real frame zero-padded to fft_length:
// returns fft_length/2 + 1 values |X_k|, k = 0..n/2.
std::vector<double> RealMagnitudeSpectrum(const double *frame, int frame_len,
                                          int fft_length);

}  // namespace dsp
}  // namespace fssr

#endif  // FSSR_DSP_FFT_H_
