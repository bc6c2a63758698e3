// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_ROOMSIM_HPP_
#define DISTAUG_ROOMSIM_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "distaug/dsp.hpp"

namespace distaug {

struct InvalidGeometry : std::runtime_error {
  explicit InvalidGeometry(const std::string& msg) : std::runtime_error(msg) {}
};
struct EmptyRange : std::runtime_error {
  explicit EmptyRange(const std::string& field)
      : std::runtime_error("empty range for " + field) {}
};

// Rectangular shoebox room with uniform wall absorption.
struct RoomConfig {
  std::array<double, 3> dims_m = {5.0, 4.0, 3.0};
  double absorption = 0.3;  // energy absorption in (0, 1]
  int max_order = 10;
  std::array<double, 3> source_pos_m = {1.0, 1.0, 1.5};
  std::array<double, 3> mic_pos_m = {3.0, 2.0, 1.5};
  int sample_rate_hz = 16000;
  double speed_of_sound_mps = 343.0;

  void validate() const;
  // sqrt(1 - absorption): amplitude reflection per wall bounce.
  double reflection_coeff() const;
};

// Min/max bounds for sample_room. Degenerate ranges (min == max) pin the
// value exactly.
struct RoomRanges {
  std::array<double, 3> dims_min = {3.0, 3.0, 2.2};
  std::array<double, 3> dims_max = {10.0, 8.0, 4.0};
  double absorption_min = 0.1;
  double absorption_max = 0.9;
  int max_order_min = 4;
  int max_order_max = 12;
  int sample_rate_hz = 16000;
  double speed_of_sound_mps = 343.0;
  double wall_margin_m = 0.3;       // positions kept this far from walls
  double min_src_mic_dist_m = 0.2;

  void validate() const;
};

// Image-source RIR: one fractional-delay tap per image up to max_order,
// amplitude reflection_coeff^order / (4*pi*distance). Fractional delays
// use an 8-tap Hann-windowed sinc normalized to unit tap sum, so the tap
// cluster integrates to the image amplitude exactly and an on-grid delay
// collapses to a single tap.
Waveform simulate_rir(const RoomConfig& cfg);

RoomConfig sample_room(uint64_t rng_seed, const RoomRanges& ranges);

}  // namespace distaug

#endif  // DISTAUG_ROOMSIM_HPP_
