// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/nn/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace distaug {
namespace nn {

Tensor::Tensor(std::vector<int> s, double fill) : shape(std::move(s)) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeMismatch("negative tensor dimension");
    n *= static_cast<size_t>(d);
  }
  data.assign(n, fill);
}

Tensor Tensor::zeros_like(const Tensor& t) { return Tensor(t.shape); }

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i)
    os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill_normal(std::mt19937_64* rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : data) v = dist(*rng);
}

}  // namespace nn
}  // namespace distaug
