// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_NN_ADAM_HPP_
#define DISTAUG_NN_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "distaug/nn/tensor.hpp"

namespace distaug {
namespace nn {

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment optimizer with bias correction. Bound once to a fixed
// parameter/gradient list; moment buffers are exposed so checkpoints can
// persist the full state.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Tensor*> params, std::vector<Tensor*> grads,
       AdamConfig cfg = {});

  // One update from the currently accumulated gradients.
  void step();

  uint64_t step_count() const { return t_; }
  void set_step_count(uint64_t t) { t_ = t; }
  const AdamConfig& config() const { return cfg_; }

  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor*> params_;
  std::vector<Tensor*> grads_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  uint64_t t_ = 0;
};

}  // namespace nn
}  // namespace distaug

#endif  // DISTAUG_NN_ADAM_HPP_
