// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace distaug {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::vector<std::complex<double>>* data, bool inverse) {
  auto& a = *data;
  const size_t n = a.size();
  if (!is_power_of_two(static_cast<int>(n)))
    throw std::invalid_argument("fft: size must be a power of two");

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> t = a[i + k + len / 2] * w;
        a[i + k] = u + t;
        a[i + k + len / 2] = u - t;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& c : a) c *= inv_n;
  }
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x, int n) {
  std::vector<std::complex<double>> buf(static_cast<size_t>(n));
  const size_t m = std::min(x.size(), static_cast<size_t>(n));
  for (size_t i = 0; i < m; ++i) buf[i] = {x[i], 0.0};
  fft_inplace(&buf, false);
  buf.resize(static_cast<size_t>(n) / 2 + 1);
  return buf;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& bins, int n) {
  if (bins.size() != static_cast<size_t>(n) / 2 + 1)
    throw std::invalid_argument("irfft: bin count does not match fft size");
  std::vector<std::complex<double>> buf(static_cast<size_t>(n));
  for (size_t i = 0; i < bins.size(); ++i) buf[i] = bins[i];
  // Hermitian completion of the upper half.
  for (int i = 1; i < n / 2; ++i) buf[n - i] = std::conj(bins[i]);
  fft_inplace(&buf, true);
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace distaug
