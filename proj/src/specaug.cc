// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/specaug.hpp"

#include <cmath>
#include <random>

namespace distaug {

void MaskPolicy::validate(int num_frames, int num_bins) const {
  if (num_freq_masks < 0 || num_time_masks < 0 || max_freq_width < 0 ||
      max_time_width < 0 || warp_window < 0)
    throw PolicyShapeMismatch("mask policy fields must be non-negative");
  if (max_freq_width > num_bins)
    throw PolicyShapeMismatch("max_freq_width exceeds bin count");
  if (max_time_width > num_frames)
    throw PolicyShapeMismatch("max_time_width exceeds frame count");
  if (warp_window > 0 && 2 * warp_window + 1 > num_frames)
    throw PolicyShapeMismatch("warp_window too large for frame count");
}

MaskFill mask_fill_from_string(const std::string& s) {
  if (s == "zero") return MaskFill::zero;
  if (s == "mean") return MaskFill::mean;
  throw PolicyShapeMismatch("unknown fill: " + s);
}

Matrix apply_specaugment(const Matrix& feat, const MaskPolicy& policy,
                         uint64_t rng_seed) {
  policy.validate(feat.rows, feat.cols);
  const int T = feat.rows, F = feat.cols;
  std::mt19937_64 rng(rng_seed);

  double fill = 0.0;
  if (policy.fill == MaskFill::mean && !feat.v.empty()) {
    double acc = 0.0;
    for (double x : feat.v) acc += x;
    fill = acc / static_cast<double>(feat.v.size());
  }

  Matrix out = feat;

  // Piecewise-linear time warp anchored at one interior frame; first and
  // last frames are fixed points.
  if (policy.warp_window > 0 && T > 2) {
    const int w = policy.warp_window;
    const int src = std::uniform_int_distribution<int>(w, T - 1 - w)(rng);
    const int shift = std::uniform_int_distribution<int>(-w, w)(rng);
    const int dst = src + shift;
    if (shift != 0) {
      Matrix warped(T, F);
      for (int t = 0; t < T; ++t) {
        double pos;
        if (t == 0)
          pos = 0.0;
        else if (t == T - 1)
          pos = static_cast<double>(T - 1);
        else if (t <= dst)
          pos = static_cast<double>(t) * src / dst;
        else
          pos = src + static_cast<double>(t - dst) * (T - 1 - src) / (T - 1 - dst);
        const int lo = static_cast<int>(std::floor(pos));
        const int hi = std::min(lo + 1, T - 1);
        const double a = pos - lo;
        for (int f = 0; f < F; ++f)
          warped.at(t, f) = (1.0 - a) * out.at(lo, f) + a * out.at(hi, f);
      }
      out = std::move(warped);
    }
  }

  for (int m = 0; m < policy.num_freq_masks; ++m) {
    const int width =
        std::uniform_int_distribution<int>(0, policy.max_freq_width)(rng);
    const int start = std::uniform_int_distribution<int>(0, F - width)(rng);
    for (int t = 0; t < T; ++t)
      for (int f = start; f < start + width; ++f) out.at(t, f) = fill;
  }

  for (int m = 0; m < policy.num_time_masks; ++m) {
    const int width =
        std::uniform_int_distribution<int>(0, policy.max_time_width)(rng);
    const int start = std::uniform_int_distribution<int>(0, T - width)(rng);
    for (int t = start; t < start + width; ++t)
      for (int f = 0; f < F; ++f) out.at(t, f) = fill;
  }

  return out;
}

}  // namespace distaug
