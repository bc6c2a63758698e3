// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_SPECAUG_HPP_
#define DISTAUG_SPECAUG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

#include "distaug/matrix.hpp"

namespace distaug {

struct PolicyShapeMismatch : std::runtime_error {
  explicit PolicyShapeMismatch(const std::string& msg)
      : std::runtime_error(msg) {}
};

enum class MaskFill { zero, mean };

struct MaskPolicy {
  int num_freq_masks = 2;
  int max_freq_width = 27;   // bins
  int num_time_masks = 2;
  int max_time_width = 40;   // frames
  int warp_window = 5;       // frames; 0 disables warping
  MaskFill fill = MaskFill::zero;

  void validate(int num_frames, int num_bins) const;
};

// Time warp (single-anchor piecewise-linear), then frequency masks, then
// time masks. Mask widths are drawn uniformly from [0, max_width] and
// positions uniformly over the valid range. Deterministic given seed.
Matrix apply_specaugment(const Matrix& feat, const MaskPolicy& policy,
                         uint64_t rng_seed);

MaskFill mask_fill_from_string(const std::string& s);

}  // namespace distaug

#endif  // DISTAUG_SPECAUG_HPP_
