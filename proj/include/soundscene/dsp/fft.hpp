// Copyright 2026 The soundscene authors
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

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "soundscene/common.hpp"

namespace soundscene::dsp {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 FFT. Size must be a power of two.
/// The inverse transform includes the 1/n scaling.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false) {
  const std::size_t n = a.size();
  check(is_pow2(n), "fft size must be a power of two");
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double pi = 3.14159265358979323846;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

/// Forward FFT of a real signal. Input is zero padded (or truncated) to n
/// samples; returns the n/2+1 non-redundant bins.
inline std::vector<std::complex<double>> rfft(const double* x, std::size_t len, std::size_t n) {
  check(is_pow2(n), "rfft size must be a power of two");
  std::vector<std::complex<double>> a(n, {0.0, 0.0});
  const std::size_t m = len < n ? len : n;
  for (std::size_t i = 0; i < m; ++i) a[i] = {x[i], 0.0};
  fft_inplace(a, false);
  a.resize(n / 2 + 1);
  return a;
}

inline std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t n) {
  return rfft(x.data(), x.size(), n);
}

/// Inverse of rfft: expands the half spectrum by conjugate symmetry and
/// returns the n real samples.
inline std::vector<double> irfft(const std::vector<std::complex<double>>& spec, std::size_t n) {
  check(is_pow2(n), "irfft size must be a power of two");
  check(spec.size() == n / 2 + 1, "irfft expects n/2+1 bins");
  std::vector<std::complex<double>> a(n);
  for (std::size_t k = 0; k <= n / 2; ++k) a[k] = spec[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) a[k] = std::conj(spec[n - k]);
  fft_inplace(a, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i].real();
  return out;
}

}  // namespace soundscene::dsp
