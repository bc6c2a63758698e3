// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_DSP_HPP_
#define DISTAUG_DSP_HPP_

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "distaug/matrix.hpp"

namespace distaug {

struct DspError : std::runtime_error {
  explicit DspError(const std::string& msg) : std::runtime_error(msg) {}
};
struct EmptySignal : DspError {
  EmptySignal() : DspError("empty input signal") {}
};
struct NonColaConfig : DspError {
  explicit NonColaConfig(const std::string& msg) : DspError(msg) {}
};
struct DimMismatch : DspError {
  explicit DimMismatch(const std::string& msg) : DspError(msg) {}
};
struct FactorOutOfRange : DspError {
  explicit FactorOutOfRange(double f)
      : DspError("speed factor " + std::to_string(f) +
                 " outside [0.5, 2.0]") {}
};
struct SampleRateMismatch : DspError {
  SampleRateMismatch(int a, int b)
      : DspError("sample rate mismatch: " + std::to_string(a) + " vs " +
                 std::to_string(b)) {}
};
struct ZeroPowerInput : DspError {
  explicit ZeroPowerInput(const std::string& which)
      : DspError("zero-power " + which + " input") {}
};

struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

struct StftConfig {
  int win_length = 400;   // 25 ms at 16 kHz
  int hop_length = 160;   // 10 ms
  int fft_size = 512;
  // Hann window sampled at half-integer points, w[i] = sin^2(pi(i+0.5)/N).
  // Every sample gets nonzero analysis weight, so overlap-add with
  // window-square normalization reconstructs all samples.

  void validate() const;
  int num_bins() const { return fft_size / 2 + 1; }
  // Frames start at t*hop; the signal is zero-padded at the end to full
  // frame coverage: T = 1 + ceil(max(0, len - win) / hop).
  int num_frames(size_t num_samples) const;
  std::vector<double> window() const;
};

struct ComplexSpectrogram {
  // frames[t * num_bins + f], t in [0, T), f in [0, F).
  std::vector<std::complex<double>> frames;
  int num_frames = 0;
  int num_bins = 0;
  StftConfig config;
  int sample_rate_hz = 16000;

  std::complex<double>& at(int t, int f) {
    return frames[static_cast<size_t>(t) * num_bins + f];
  }
  std::complex<double> at(int t, int f) const {
    return frames[static_cast<size_t>(t) * num_bins + f];
  }
};

// Per-bin normalization statistics. std entries are floored at 1e-5 so
// silent bins cannot blow up the division.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  static constexpr double kStdFloor = 1e-5;
  static NormStats identity(int num_bins);
};

// ---- short-time analysis ----
ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg);
Waveform istft(const ComplexSpectrogram& spec);

Matrix magnitude(const ComplexSpectrogram& spec);
// log(mag + eps); exp-inverse is exact up to rounding.
Matrix log_magnitude(const ComplexSpectrogram& spec, double eps = 1e-6);

NormStats compute_norm_stats(const std::vector<const Matrix*>& mats);
Matrix normalize(const Matrix& m, const NormStats& stats);
Matrix denormalize(const Matrix& m, const NormStats& stats);

// ---- waveform-level augmentation ----
// Band-limited resampling; tempo and pitch both scale by `factor`.
Waveform speed_perturb(const Waveform& w, double factor);

// Full linear convolution (len(w)+len(rir)-1 samples), peak-normalized
// to at most 1 to avoid clipping.
Waveform convolve_rir(const Waveform& w, const Waveform& rir);

// speech + g*noise with g set so that the speech-to-scaled-noise power
// ratio equals snr_db. Noise is tiled or truncated to the speech length.
// snr_db = +inf returns the speech unchanged.
Waveform mix_at_snr(const Waveform& speech, const Waveform& noise,
                    double snr_db);

double signal_power(const std::vector<double>& x);

}  // namespace distaug

#endif  // DISTAUG_DSP_HPP_
