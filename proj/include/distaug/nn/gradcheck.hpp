// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_NN_GRADCHECK_HPP_
#define DISTAUG_NN_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "distaug/nn/layers.hpp"

namespace distaug {
namespace nn {

struct GradCheckEntry {
  LayerKind kind;
  double max_rel_error = 0.0;
  size_t checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> per_kind;
  double input_max_rel_error = 0.0;
  double max_rel_error = 0.0;  // over parameters and input

  bool passed(double tolerance) const { return max_rel_error <= tolerance; }
  std::string to_string() const;
};

// Compares reverse-mode gradients of a random-projection loss
// L = sum_i r_i * net(x)_i against central finite differences
// (h = 1e-5) over a random subsample of each parameter tensor.
GradCheckReport grad_check(Network* net, const Tensor& x,
                           size_t max_checks_per_tensor = 8,
                           uint64_t seed = 7);

}  // namespace nn
}  // namespace distaug

#endif  // DISTAUG_NN_GRADCHECK_HPP_
