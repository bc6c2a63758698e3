// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_NN_LAYERS_HPP_
#define DISTAUG_NN_LAYERS_HPP_

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "distaug/nn/tensor.hpp"

namespace distaug {
namespace nn {

enum class LayerKind {
  conv2d,
  transposed_conv2d,
  instance_norm,
  relu,
  leaky_relu,
  tanh,
  sigmoid,
  residual_block,
};

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_string(const std::string& s);

// Declarative layer description; networks are built from spec lists and
// checkpoints store them verbatim.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int padding = 0;
  int output_pad_h = 0;  // transposed_conv2d only
  int output_pad_w = 0;
  double negative_slope = 0.2;  // leaky_relu only

  static LayerSpec conv(int in_c, int out_c, int k, int stride = 1, int pad = 0);
  static LayerSpec tconv(int in_c, int out_c, int k, int stride, int pad,
                         int out_pad_h, int out_pad_w);
  static LayerSpec inorm(int channels);
  static LayerSpec activation(LayerKind kind, double slope = 0.2);
  static LayerSpec resblock(int channels, int k = 3);
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual LayerKind kind() const = 0;
  virtual const LayerSpec& spec() const = 0;
  // Appends whatever backward() will need to `cache` (may be null for
  // inference-only calls).
  virtual Tensor forward(const Tensor& x, std::vector<Tensor>* cache) const = 0;
  // Number of cache entries forward() appends.
  virtual size_t cache_arity() const = 0;
  // Reads cache entries [base, base + cache_arity()), accumulates
  // parameter gradients, returns the input gradient.
  virtual Tensor backward(const Tensor& grad_out,
                          const std::vector<Tensor>& cache, size_t base) = 0;
  virtual std::vector<Tensor*> params() { return {}; }
  virtual std::vector<Tensor*> grads() { return {}; }
};

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, std::mt19937_64* rng);

struct Trace {
  std::vector<std::vector<Tensor>> per_layer;
  std::vector<int> input_shape;
  bool valid = false;
};

// Sequential container. An empty layer list is the identity map.
class Network {
 public:
  Network() = default;
  Network(const std::vector<LayerSpec>& specs, std::mt19937_64* init_rng);

  Tensor forward(const Tensor& x, Trace* trace = nullptr) const;
  // Requires a trace produced by forward() on this network.
  Tensor backward(const Trace& trace, const Tensor& grad_out);

  std::vector<Tensor*> params();
  std::vector<Tensor*> grads();
  void zero_grad();
  size_t num_params() const;

  const std::vector<LayerSpec>& specs() const { return specs_; }
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
  bool empty() const { return layers_.empty(); }

 private:
  std::vector<LayerSpec> specs_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace nn
}  // namespace distaug

#endif  // DISTAUG_NN_LAYERS_HPP_
