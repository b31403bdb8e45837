// tests/testutil.h
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
// Shared helpers for the test suites. The oracles here are deliberately
// naive, independent implementations of what the library computes.

#ifndef FSSR_TESTS_TESTUTIL_H_
#define FSSR_TESTS_TESTUTIL_H_

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace testutil {

// Self-deleting temp directory.
class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / (tag + ".XXXXXX")).string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string &path() const { return path_; }
  std::string file(const std::string &name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

// Direct O(N^2) DFT magnitude at bin k of an n-point transform.
inline double DftMagnitude(const std::vector<double> &x, int n, int k) {
  std::complex<double> acc(0.0, 0.0);
  const double w = -2.0 * 3.14159265358979323846 * k / n;
  for (size_t i = 0; i < x.size(); ++i)
    acc += x[i] * std::complex<double>(std::cos(w * static_cast<double>(i)),
                                       std::sin(w * static_cast<double>(i)));
  return std::abs(acc);
}

// Full one-sided magnitude spectrum by direct summation.
inline std::vector<double> DftOneSided(const std::vector<double> &x, int n) {
  std::vector<double> mag(static_cast<size_t>(n / 2 + 1));
  for (int k = 0; k <= n / 2; ++k) mag[static_cast<size_t>(k)] = DftMagnitude(x, n, k);
  return mag;
}

// Central-difference gradient check; returns the worst relative error over
// the listed coordinates.
inline double MaxRelGradError(const std::vector<double *> &theta,
                              const std::vector<double> &analytic,
                              const std::function<double()> &eval,
                              double h = 1e-6) {
  double worst = 0.0;
  for (size_t i = 0; i < theta.size(); ++i) {
    const double keep = *theta[i];
    *theta[i] = keep + h;
    const double up = eval();
    *theta[i] = keep - h;
    const double dn = eval();
    *theta[i] = keep;
    const double fd = (up - dn) / (2.0 * h);
    const double denom =
        std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
  }
  return worst;
}

inline std::vector<float> SineWave(double freq_hz, double seconds, int rate,
                                   double amplitude = 0.5) {
  const int n = static_cast<int>(seconds * rate);
  std::vector<float> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = static_cast<float>(
        amplitude * std::sin(2.0 * 3.14159265358979323846 * freq_hz * i / rate));
  return out;
}

}  // namespace testutil

#endif  // FSSR_TESTS_TESTUTIL_H_
