// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "distaug/fft.hpp"

namespace distaug {

void StftConfig::validate() const {
  if (hop_length <= 0 || win_length <= 0 || fft_size <= 0)
    throw DspError("stft config: lengths must be positive");
  if (!(hop_length <= win_length && win_length <= fft_size))
    throw DspError("stft config: need hop <= win <= fft");
  if (!is_power_of_two(fft_size))
    throw DspError("stft config: fft_size must be a power of two");
}

int StftConfig::num_frames(size_t num_samples) const {
  const long n = static_cast<long>(num_samples);
  if (n <= win_length) return 1;
  const long tail = n - win_length;
  return static_cast<int>(1 + (tail + hop_length - 1) / hop_length);
}

std::vector<double> StftConfig::window() const {
  std::vector<double> w(static_cast<size_t>(win_length));
  for (int i = 0; i < win_length; ++i) {
    const double s = std::sin(M_PI * (i + 0.5) / win_length);
    w[i] = s * s;
  }
  return w;
}

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  if (w.samples.empty()) throw EmptySignal();

  const int T = cfg.num_frames(w.samples.size());
  const int F = cfg.num_bins();
  const std::vector<double> win = cfg.window();

  ComplexSpectrogram spec;
  spec.num_frames = T;
  spec.num_bins = F;
  spec.config = cfg;
  spec.sample_rate_hz = w.sample_rate_hz;
  spec.frames.resize(static_cast<size_t>(T) * F);

  std::vector<double> frame(static_cast<size_t>(cfg.win_length));
  for (int t = 0; t < T; ++t) {
    const long start = static_cast<long>(t) * cfg.hop_length;
    for (int i = 0; i < cfg.win_length; ++i) {
      const long idx = start + i;
      const double s =
          (idx < static_cast<long>(w.samples.size())) ? w.samples[idx] : 0.0;
      frame[i] = s * win[i];
    }
    std::vector<std::complex<double>> bins = rfft(frame, cfg.fft_size);
    std::copy(bins.begin(), bins.end(),
              spec.frames.begin() + static_cast<size_t>(t) * F);
  }
  return spec;
}

Waveform istft(const ComplexSpectrogram& spec) {
  const StftConfig& cfg = spec.config;
  cfg.validate();
  if (cfg.hop_length * 2 > cfg.win_length)
    throw NonColaConfig("istft: hop must be at most win/2 for overlap-add");
  if (spec.num_bins != cfg.num_bins())
    throw DimMismatch("istft: bin count inconsistent with config");

  const int T = spec.num_frames;
  const std::vector<double> win = cfg.window();
  const long out_len =
      static_cast<long>(T) * cfg.hop_length + (cfg.win_length - cfg.hop_length);

  std::vector<double> acc(static_cast<size_t>(out_len), 0.0);
  std::vector<double> wsum(static_cast<size_t>(out_len), 0.0);
  std::vector<std::complex<double>> bins(static_cast<size_t>(spec.num_bins));
  for (int t = 0; t < T; ++t) {
    std::copy(spec.frames.begin() + static_cast<size_t>(t) * spec.num_bins,
              spec.frames.begin() + static_cast<size_t>(t + 1) * spec.num_bins,
              bins.begin());
    std::vector<double> frame = irfft(bins, cfg.fft_size);
    const long start = static_cast<long>(t) * cfg.hop_length;
    for (int i = 0; i < cfg.win_length; ++i) {
      acc[start + i] += frame[i] * win[i];
      wsum[start + i] += win[i] * win[i];
    }
  }

  Waveform out;
  out.sample_rate_hz = spec.sample_rate_hz;
  out.samples.resize(static_cast<size_t>(out_len));
  for (long i = 0; i < out_len; ++i)
    out.samples[i] = (wsum[i] > 1e-12) ? acc[i] / wsum[i] : 0.0;
  return out;
}

Matrix magnitude(const ComplexSpectrogram& spec) {
  Matrix m(spec.num_frames, spec.num_bins);
  for (size_t i = 0; i < spec.frames.size(); ++i) m.v[i] = std::abs(spec.frames[i]);
  return m;
}

Matrix log_magnitude(const ComplexSpectrogram& spec, double eps) {
  Matrix m(spec.num_frames, spec.num_bins);
  for (size_t i = 0; i < spec.frames.size(); ++i)
    m.v[i] = std::log(std::abs(spec.frames[i]) + eps);
  return m;
}

NormStats NormStats::identity(int num_bins) {
  NormStats s;
  s.mean.assign(static_cast<size_t>(num_bins), 0.0);
  s.std.assign(static_cast<size_t>(num_bins), 1.0);
  return s;
}

NormStats compute_norm_stats(const std::vector<const Matrix*>& mats) {
  if (mats.empty()) throw DspError("compute_norm_stats: no input");
  const int F = mats.front()->cols;
  std::vector<double> sum(static_cast<size_t>(F), 0.0);
  std::vector<double> sumsq(static_cast<size_t>(F), 0.0);
  long n = 0;
  for (const Matrix* m : mats) {
    if (m->cols != F) throw DimMismatch("compute_norm_stats: column mismatch");
    for (int t = 0; t < m->rows; ++t)
      for (int f = 0; f < F; ++f) {
        const double v = m->at(t, f);
        sum[f] += v;
        sumsq[f] += v * v;
      }
    n += m->rows;
  }
  if (n == 0) throw DspError("compute_norm_stats: no frames");
  NormStats st;
  st.mean.resize(static_cast<size_t>(F));
  st.std.resize(static_cast<size_t>(F));
  for (int f = 0; f < F; ++f) {
    st.mean[f] = sum[f] / n;
    const double var = std::max(0.0, sumsq[f] / n - st.mean[f] * st.mean[f]);
    st.std[f] = std::max(std::sqrt(var), NormStats::kStdFloor);
  }
  return st;
}

Matrix normalize(const Matrix& m, const NormStats& stats) {
  if (static_cast<size_t>(m.cols) != stats.mean.size())
    throw DimMismatch("normalize: bin count mismatch");
  Matrix out(m.rows, m.cols);
  for (int t = 0; t < m.rows; ++t)
    for (int f = 0; f < m.cols; ++f)
      out.at(t, f) = (m.at(t, f) - stats.mean[f]) / stats.std[f];
  return out;
}

Matrix denormalize(const Matrix& m, const NormStats& stats) {
  if (static_cast<size_t>(m.cols) != stats.mean.size())
    throw DimMismatch("denormalize: bin count mismatch");
  Matrix out(m.rows, m.cols);
  for (int t = 0; t < m.rows; ++t)
    for (int f = 0; f < m.cols; ++f)
      out.at(t, f) = m.at(t, f) * stats.std[f] + stats.mean[f];
  return out;
}

Waveform speed_perturb(const Waveform& w, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0)) throw FactorOutOfRange(factor);
  if (w.samples.empty()) throw EmptySignal();
  if (factor == 1.0) return w;

  const long in_len = static_cast<long>(w.samples.size());
  const long out_len = std::llround(static_cast<double>(in_len) / factor);

  // Windowed-sinc interpolation; cutoff slightly below the narrower
  // Nyquist so downsampling (factor > 1) does not alias.
  const double cutoff = 0.475 * std::min(1.0, 1.0 / factor);
  const int num_zeros = 8;
  const double support = num_zeros / (2.0 * cutoff);

  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples.resize(static_cast<size_t>(out_len));
  for (long n = 0; n < out_len; ++n) {
    const double center = n * factor;
    const long k0 = std::max(0L, static_cast<long>(std::ceil(center - support)));
    const long k1 =
        std::min(in_len - 1, static_cast<long>(std::floor(center + support)));
    double acc = 0.0;
    for (long k = k0; k <= k1; ++k) {
      const double t = center - k;
      double h;
      if (std::abs(t) < 1e-12) {
        h = 2.0 * cutoff;
      } else {
        const double x = 2.0 * M_PI * cutoff * t;
        h = 2.0 * cutoff * std::sin(x) / x;
      }
      const double hann = 0.5 * (1.0 + std::cos(M_PI * t / support));
      acc += w.samples[k] * h * hann;
    }
    out.samples[n] = acc;
  }
  return out;
}

namespace {

std::vector<double> direct_convolve(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
  }
  return out;
}

std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  const size_t out_len = a.size() + b.size() - 1;
  int n = 1;
  while (static_cast<size_t>(n) < out_len) n <<= 1;
  std::vector<std::complex<double>> fa = rfft(a, n), fb = rfft(b, n);
  for (size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  std::vector<double> full = irfft(fa, n);
  full.resize(out_len);
  return full;
}

}  // namespace

Waveform convolve_rir(const Waveform& w, const Waveform& rir) {
  if (w.sample_rate_hz != rir.sample_rate_hz)
    throw SampleRateMismatch(w.sample_rate_hz, rir.sample_rate_hz);
  if (w.samples.empty() || rir.samples.empty()) throw EmptySignal();

  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  if (w.samples.size() * rir.samples.size() <= (1u << 20))
    out.samples = direct_convolve(w.samples, rir.samples);
  else
    out.samples = fft_convolve(w.samples, rir.samples);

  double peak = 0.0;
  for (double s : out.samples) peak = std::max(peak, std::abs(s));
  if (peak > 1.0) {
    const double scale = 1.0 / peak;
    for (double& s : out.samples) s *= scale;
  }
  return out;
}

double signal_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double s : x) acc += s * s;
  return acc / static_cast<double>(x.size());
}

Waveform mix_at_snr(const Waveform& speech, const Waveform& noise,
                    double snr_db) {
  if (speech.sample_rate_hz != noise.sample_rate_hz)
    throw SampleRateMismatch(speech.sample_rate_hz, noise.sample_rate_hz);
  if (speech.samples.empty()) throw EmptySignal();
  if (std::isinf(snr_db) && snr_db > 0) return speech;
  if (noise.samples.empty()) throw EmptySignal();

  // Tile or truncate the noise to the speech length.
  std::vector<double> n(speech.samples.size());
  for (size_t i = 0; i < n.size(); ++i)
    n[i] = noise.samples[i % noise.samples.size()];

  const double p_s = signal_power(speech.samples);
  const double p_n = signal_power(n);
  if (p_s <= 0.0) throw ZeroPowerInput("speech");
  if (p_n <= 0.0) throw ZeroPowerInput("noise");

  const double gain = std::sqrt(p_s / (p_n * std::pow(10.0, snr_db / 10.0)));
  Waveform out;
  out.sample_rate_hz = speech.sample_rate_hz;
  out.samples.resize(speech.samples.size());
  for (size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = speech.samples[i] + gain * n[i];
  return out;
}

}  // namespace distaug
