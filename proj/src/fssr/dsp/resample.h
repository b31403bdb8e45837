// fssr/dsp/resample.h
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

#ifndef FSSR_DSP_RESAMPLE_H_
#define FSSR_DSP_RESAMPLE_H_

#include <vector>

namespace fssr {
namespace dsp {

// Rational-rate polyphase resampler with a Kaiser-windowed sinc prototype
// (beta 8.6, 16 zero crossings per side). The design is fixed so that
// resampled golden files stay stable across releases. Equal rates pass the
// input through untouched.
std::vector<float> Resample(const std::vector<float> &input, int in_rate_hz,
                            int out_rate_hz);

}  // namespace dsp
}  // namespace fssr

#endif  // FSSR_DSP_RESAMPLE_H_
