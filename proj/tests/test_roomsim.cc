// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <vector>

#include "doctest.h"
#include "support/testutil.hpp"

#include "distaug/roomsim.hpp"
#include "distaug/seeding.hpp"

using namespace distaug;

namespace {

double dist3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

// Sum of taps in a window around the expected delay; the fractional
// delay filter is normalized to unit tap sum, so this recovers the
// image amplitude when no other image overlaps.
double tap_sum_around(const Waveform& rir, int center, int radius = 6) {
  double acc = 0.0;
  for (int i = std::max(0, center - radius);
       i <= center + radius && i < static_cast<int>(rir.samples.size()); ++i)
    acc += rir.samples[i];
  return acc;
}

double energy(const Waveform& w) {
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return acc;
}

}  // namespace

TEST_CASE("simulate_rir: direct path delay and amplitude") {
  RoomConfig cfg;
  cfg.max_order = 0;
  cfg.source_pos_m = {1.0, 1.0, 1.5};
  cfg.mic_pos_m = {3.0, 2.0, 1.5};
  const double d = dist3(cfg.source_pos_m, cfg.mic_pos_m);
  const int delay = static_cast<int>(
      std::llround(cfg.sample_rate_hz * d / cfg.speed_of_sound_mps));
  const Waveform rir = simulate_rir(cfg);

  int peak = 0;
  double peak_val = -1.0;
  for (size_t i = 0; i < rir.samples.size(); ++i)
    if (std::abs(rir.samples[i]) > peak_val) {
      peak_val = std::abs(rir.samples[i]);
      peak = static_cast<int>(i);
    }
  CHECK(std::abs(peak - delay) <= 1);

  const double want_amp = 1.0 / (4.0 * M_PI * d);
  CHECK(std::abs(tap_sum_around(rir, delay) - want_amp) <= 0.01 * want_amp);
}

TEST_CASE("simulate_rir: absorption 1.0 collapses to the direct path") {
  RoomConfig full;
  full.absorption = 1.0;
  full.max_order = 8;
  RoomConfig direct = full;
  direct.max_order = 0;
  const Waveform a = simulate_rir(full);
  const Waveform b = simulate_rir(direct);
  const size_t n = std::min(a.samples.size(), b.samples.size());
  for (size_t i = 0; i < n; ++i) CHECK(a.samples[i] == b.samples[i]);
  for (size_t i = n; i < a.samples.size(); ++i) CHECK(a.samples[i] == 0.0);
}

TEST_CASE("simulate_rir: doubling distance halves the direct amplitude") {
  RoomConfig near;
  near.dims_m = {20.0, 10.0, 8.0};
  near.max_order = 0;
  near.source_pos_m = {2.0, 5.0, 4.0};
  near.mic_pos_m = {4.0, 5.0, 4.0};  // 2 m
  RoomConfig far = near;
  far.mic_pos_m = {6.0, 5.0, 4.0};  // 4 m

  const double a_near = tap_sum_around(
      simulate_rir(near), static_cast<int>(std::llround(16000 * 2.0 / 343.0)));
  const double a_far = tap_sum_around(
      simulate_rir(far), static_cast<int>(std::llround(16000 * 4.0 / 343.0)));
  CHECK(std::abs(a_near / a_far - 2.0) <= 0.02);
}

TEST_CASE("simulate_rir: energy monotone non-increasing in absorption") {
  RoomConfig cfg;
  cfg.max_order = 6;
  double prev = std::numeric_limits<double>::infinity();
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    cfg.absorption = a;
    const double e = energy(simulate_rir(cfg));
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
}

TEST_CASE("simulate_rir: raising max_order only adds taps") {
  RoomConfig cfg;
  cfg.dims_m = {5.1, 3.7, 2.9};
  cfg.absorption = 0.4;
  cfg.source_pos_m = {1.3, 1.1, 1.0};
  cfg.mic_pos_m = {3.9, 2.6, 1.7};

  const double d = dist3(cfg.source_pos_m, cfg.mic_pos_m);
  const int direct = static_cast<int>(std::llround(16000 * d / 343.0));

  double prev_sum = 0.0;
  std::vector<double> prev_head;
  for (int order = 0; order <= 4; ++order) {
    cfg.max_order = order;
    const Waveform rir = simulate_rir(cfg);

    // Every reflected path is strictly longer than the straight line, so
    // the response before the direct tap cluster never changes.
    std::vector<double> head(rir.samples.begin(),
                             rir.samples.begin() + (direct - 6));
    if (order > 0) {
      REQUIRE(head.size() == prev_head.size());
      for (size_t i = 0; i < head.size(); ++i)
        CHECK(head[i] == prev_head[i]);
    }
    prev_head = std::move(head);

    // All image amplitudes are positive and each tap cluster sums to its
    // amplitude, so the total tap sum strictly grows with order.
    double sum = 0.0;
    for (double s : rir.samples) sum += s;
    if (order > 0) CHECK(sum > prev_sum);
    prev_sum = sum;
  }
}

TEST_CASE("simulate_rir: invalid geometry rejected") {
  RoomConfig cfg;
  cfg.source_pos_m = {7.0, 1.0, 1.0};  // outside the 5 m room
  CHECK_THROWS_AS(cfg.validate(), InvalidGeometry);
  cfg = RoomConfig{};
  cfg.absorption = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidGeometry);
  cfg = RoomConfig{};
  cfg.max_order = 31;
  CHECK_THROWS_AS(cfg.validate(), InvalidGeometry);
}

TEST_CASE("simulate_rir: delay within one sample on random geometries") {
  RoomRanges ranges;
  for (int i = 0; i < 100; ++i) {
    RoomConfig cfg = sample_room(stable_hash64(123, std::to_string(i)), ranges);
    cfg.max_order = 0;
    const Waveform rir = simulate_rir(cfg);
    const double d = dist3(cfg.source_pos_m, cfg.mic_pos_m);
    const int want = static_cast<int>(
        std::llround(cfg.sample_rate_hz * d / cfg.speed_of_sound_mps));
    int peak = 0;
    double peak_val = -1.0;
    for (size_t k = 0; k < rir.samples.size(); ++k)
      if (std::abs(rir.samples[k]) > peak_val) {
        peak_val = std::abs(rir.samples[k]);
        peak = static_cast<int>(k);
      }
    CHECK(std::abs(peak - want) <= 1);
  }
}

TEST_CASE("sample_room: degenerate ranges pin exact values") {
  RoomRanges r;
  r.dims_min = r.dims_max = {6.0, 5.0, 3.0};
  r.absorption_min = r.absorption_max = 0.42;
  r.max_order_min = r.max_order_max = 7;
  const RoomConfig cfg = sample_room(99, r);
  CHECK(cfg.dims_m == std::array<double, 3>{6.0, 5.0, 3.0});
  CHECK(cfg.absorption == 0.42);
  CHECK(cfg.max_order == 7);
}

TEST_CASE("sample_room: deterministic and invariant-preserving") {
  RoomRanges ranges;
  const RoomConfig a = sample_room(7, ranges);
  const RoomConfig b = sample_room(7, ranges);
  CHECK(a.dims_m == b.dims_m);
  CHECK(a.absorption == b.absorption);
  CHECK(a.source_pos_m == b.source_pos_m);
  CHECK(a.mic_pos_m == b.mic_pos_m);
  CHECK(a.max_order == b.max_order);

  for (int i = 0; i < 1000; ++i) {
    const RoomConfig cfg = sample_room(stable_hash64(5, std::to_string(i)),
                                       ranges);
    CHECK_NOTHROW(cfg.validate());
    for (int k = 0; k < 3; ++k) {
      CHECK(cfg.source_pos_m[k] >= ranges.wall_margin_m - 1e-12);
      CHECK(cfg.source_pos_m[k] <= cfg.dims_m[k] - ranges.wall_margin_m + 1e-12);
      CHECK(cfg.mic_pos_m[k] >= ranges.wall_margin_m - 1e-12);
      CHECK(cfg.mic_pos_m[k] <= cfg.dims_m[k] - ranges.wall_margin_m + 1e-12);
    }
    const double d = dist3(cfg.source_pos_m, cfg.mic_pos_m);
    CHECK(d >= ranges.min_src_mic_dist_m - 1e-12);
  }
}

TEST_CASE("sample_room: empty range rejected") {
  RoomRanges r;
  r.absorption_min = 0.8;
  r.absorption_max = 0.2;
  CHECK_THROWS_AS(sample_room(1, r), EmptyRange);
}
