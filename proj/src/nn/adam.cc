// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/nn/adam.hpp"

#include <cmath>

namespace distaug {
namespace nn {

Adam::Adam(std::vector<Tensor*> params, std::vector<Tensor*> grads,
           AdamConfig cfg)
    : cfg_(cfg), params_(std::move(params)), grads_(std::move(grads)) {
  if (params_.size() != grads_.size())
    throw ShapeMismatch("adam: parameter/gradient list size mismatch");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i]->same_shape(*grads_[i]))
      throw ShapeMismatch("adam: parameter/gradient shape mismatch");
    m_.push_back(Tensor::zeros_like(*params_[i]));
    v_.push_back(Tensor::zeros_like(*params_[i]));
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = *params_[i];
    const Tensor& g = *grads_[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (size_t j = 0; j < p.data.size(); ++j) {
      m.data[j] = cfg_.beta1 * m.data[j] + (1.0 - cfg_.beta1) * g.data[j];
      v.data[j] =
          cfg_.beta2 * v.data[j] + (1.0 - cfg_.beta2) * g.data[j] * g.data[j];
      const double mhat = m.data[j] / bc1;
      const double vhat = v.data[j] / bc2;
      p.data[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

}  // namespace nn
}  // namespace distaug
