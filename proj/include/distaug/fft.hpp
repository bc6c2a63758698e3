// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_FFT_HPP_
#define DISTAUG_FFT_HPP_

#include <complex>
#include <vector>

namespace distaug {

// In-place iterative radix-2 FFT. n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>* data, bool inverse);

// Real-input forward transform returning the n/2+1 non-redundant bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& x, int n);

// Inverse of rfft; returns n real samples.
std::vector<double> irfft(const std::vector<std::complex<double>>& bins, int n);

bool is_power_of_two(int n);

}  // namespace distaug

#endif  // DISTAUG_FFT_HPP_
