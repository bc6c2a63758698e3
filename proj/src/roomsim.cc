// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/roomsim.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace distaug {

namespace {

constexpr int kSincHalfWidth = 4;  // 8-tap fractional-delay kernel

struct AxisImage {
  double pos;
  int reflections;
};

// Images of a 1-D source between mirrors at 0 and L:
//   2nL + s with 2|n| reflections, 2nL - s with |2n - 1| reflections.
std::vector<AxisImage> axis_images(double s, double L, int max_order) {
  std::vector<AxisImage> out;
  for (int n = -(max_order / 2 + 1); n <= max_order / 2 + 1; ++n) {
    const int even_refl = 2 * std::abs(n);
    if (even_refl <= max_order)
      out.push_back({2.0 * n * L + s, even_refl});
    const int odd_refl = std::abs(2 * n - 1);
    if (odd_refl <= max_order)
      out.push_back({2.0 * n * L - s, odd_refl});
  }
  return out;
}

}  // namespace

void RoomConfig::validate() const {
  for (double d : dims_m)
    if (!(d > 0.0)) throw InvalidGeometry("room dimension must be positive");
  if (!(absorption > 0.0 && absorption <= 1.0))
    throw InvalidGeometry("absorption must be in (0, 1]");
  if (max_order < 0 || max_order > 30)
    throw InvalidGeometry("max_order must be in [0, 30]");
  for (int i = 0; i < 3; ++i) {
    if (!(source_pos_m[i] > 0.0 && source_pos_m[i] < dims_m[i]))
      throw InvalidGeometry("source position outside room");
    if (!(mic_pos_m[i] > 0.0 && mic_pos_m[i] < dims_m[i]))
      throw InvalidGeometry("mic position outside room");
  }
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = source_pos_m[i] - mic_pos_m[i];
    d2 += d * d;
  }
  if (d2 < 1e-6) throw InvalidGeometry("source and mic coincide");
  if (sample_rate_hz <= 0) throw InvalidGeometry("sample rate must be positive");
  if (!(speed_of_sound_mps > 0.0))
    throw InvalidGeometry("speed of sound must be positive");
}

double RoomConfig::reflection_coeff() const {
  return std::sqrt(1.0 - absorption);
}

Waveform simulate_rir(const RoomConfig& cfg) {
  cfg.validate();
  const double beta = cfg.reflection_coeff();
  const double fs = cfg.sample_rate_hz;
  const double c = cfg.speed_of_sound_mps;

  const auto xi = axis_images(cfg.source_pos_m[0], cfg.dims_m[0], cfg.max_order);
  const auto yi = axis_images(cfg.source_pos_m[1], cfg.dims_m[1], cfg.max_order);
  const auto zi = axis_images(cfg.source_pos_m[2], cfg.dims_m[2], cfg.max_order);

  struct Tap {
    double delay_samples;
    double amplitude;
  };
  std::vector<Tap> taps;
  double max_delay = 0.0;
  for (const auto& ix : xi)
    for (const auto& iy : yi)
      for (const auto& iz : zi) {
        const int order = ix.reflections + iy.reflections + iz.reflections;
        if (order > cfg.max_order) continue;
        const double dx = ix.pos - cfg.mic_pos_m[0];
        const double dy = iy.pos - cfg.mic_pos_m[1];
        const double dz = iz.pos - cfg.mic_pos_m[2];
        const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
        const double amp = std::pow(beta, order) / (4.0 * M_PI * dist);
        if (amp == 0.0) continue;
        const double delay = fs * dist / c;
        taps.push_back({delay, amp});
        max_delay = std::max(max_delay, delay);
      }

  const long len =
      static_cast<long>(std::ceil(max_delay)) + kSincHalfWidth + 1;
  Waveform rir;
  rir.sample_rate_hz = cfg.sample_rate_hz;
  rir.samples.assign(static_cast<size_t>(len), 0.0);

  std::array<double, 2 * kSincHalfWidth + 1> kernel;
  for (const Tap& tap : taps) {
    const long base = std::lround(tap.delay_samples);
    const double frac = static_cast<double>(base) - tap.delay_samples;
    double ksum = 0.0;
    for (int j = -kSincHalfWidth; j <= kSincHalfWidth; ++j) {
      const double t = j + frac;
      double sinc;
      if (std::abs(t) < 1e-9) {
        sinc = 1.0;
      } else if (std::abs(t) >= kSincHalfWidth) {
        sinc = 0.0;
      } else {
        sinc = std::sin(M_PI * t) / (M_PI * t);
      }
      const double hann =
          (std::abs(t) >= kSincHalfWidth)
              ? 0.0
              : 0.5 * (1.0 + std::cos(M_PI * t / kSincHalfWidth));
      kernel[j + kSincHalfWidth] = sinc * hann;
      ksum += kernel[j + kSincHalfWidth];
    }
    for (int j = -kSincHalfWidth; j <= kSincHalfWidth; ++j) {
      const long idx = base + j;
      if (idx < 0 || idx >= len) continue;
      rir.samples[idx] += tap.amplitude * kernel[j + kSincHalfWidth] / ksum;
    }
  }
  return rir;
}

void RoomRanges::validate() const {
  for (int i = 0; i < 3; ++i)
    if (dims_min[i] > dims_max[i]) throw EmptyRange("dims_m");
  if (absorption_min > absorption_max) throw EmptyRange("absorption");
  if (max_order_min > max_order_max) throw EmptyRange("max_order");
  for (int i = 0; i < 3; ++i)
    if (!(dims_min[i] > 0.0)) throw InvalidGeometry("dims range not positive");
  if (!(absorption_min > 0.0 && absorption_max <= 1.0))
    throw InvalidGeometry("absorption range outside (0, 1]");
  if (max_order_min < 0 || max_order_max > 30)
    throw InvalidGeometry("max_order range outside [0, 30]");
}

RoomConfig sample_room(uint64_t rng_seed, const RoomRanges& ranges) {
  ranges.validate();
  std::mt19937_64 rng(rng_seed);
  auto uni = [&rng](double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  RoomConfig cfg;
  cfg.sample_rate_hz = ranges.sample_rate_hz;
  cfg.speed_of_sound_mps = ranges.speed_of_sound_mps;
  for (int i = 0; i < 3; ++i)
    cfg.dims_m[i] = uni(ranges.dims_min[i], ranges.dims_max[i]);
  cfg.absorption = uni(ranges.absorption_min, ranges.absorption_max);
  cfg.max_order = (ranges.max_order_min == ranges.max_order_max)
                      ? ranges.max_order_min
                      : std::uniform_int_distribution<int>(
                            ranges.max_order_min, ranges.max_order_max)(rng);

  auto sample_pos = [&](std::array<double, 3>* pos) {
    for (int i = 0; i < 3; ++i) {
      double margin = std::min(ranges.wall_margin_m, cfg.dims_m[i] / 4.0);
      (*pos)[i] = uni(margin, cfg.dims_m[i] - margin);
    }
  };
  sample_pos(&cfg.source_pos_m);
  // Redraw the mic until it is far enough from the source; bounded so a
  // degenerate range cannot loop forever.
  for (int attempt = 0; attempt < 64; ++attempt) {
    sample_pos(&cfg.mic_pos_m);
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double d = cfg.source_pos_m[i] - cfg.mic_pos_m[i];
      d2 += d * d;
    }
    if (d2 >= ranges.min_src_mic_dist_m * ranges.min_src_mic_dist_m) break;
    if (attempt == 63)
      throw InvalidGeometry("cannot place mic away from source in given ranges");
  }
  cfg.validate();
  return cfg;
}

}  // namespace distaug
