// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_NN_TENSOR_HPP_
#define DISTAUG_NN_TENSOR_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace distaug {
namespace nn {

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& msg) : std::runtime_error(msg) {}
};
struct NonFiniteActivation : std::runtime_error {
  explicit NonFiniteActivation(const std::string& where)
      : std::runtime_error("non-finite values after " + where) {}
};
struct NoForwardTrace : std::runtime_error {
  NoForwardTrace() : std::runtime_error("backward called without a forward trace") {}
};

// Dense double-precision tensor, row-major. 4-d tensors are NCHW.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;
  bool requires_grad = false;  // set on parameter tensors

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0);

  static Tensor zeros_like(const Tensor& t);

  size_t numel() const { return data.size(); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape.size()); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const;

  double& at4(int n, int c, int h, int w) {
    return data[((static_cast<size_t>(n) * shape[1] + c) * shape[2] + h) *
                    shape[3] + w];
  }
  double at4(int n, int c, int h, int w) const {
    return data[((static_cast<size_t>(n) * shape[1] + c) * shape[2] + h) *
                    shape[3] + w];
  }

  bool all_finite() const;
  void fill_normal(std::mt19937_64* rng, double stddev);
};

}  // namespace nn
}  // namespace distaug

#endif  // DISTAUG_NN_TENSOR_HPP_
