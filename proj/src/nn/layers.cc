// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace distaug {
namespace nn {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::transposed_conv2d: return "transposed_conv2d";
    case LayerKind::instance_norm: return "instance_norm";
    case LayerKind::relu: return "relu";
    case LayerKind::leaky_relu: return "leaky_relu";
    case LayerKind::tanh: return "tanh";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::residual_block: return "residual_block";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
  for (LayerKind k :
       {LayerKind::conv2d, LayerKind::transposed_conv2d,
        LayerKind::instance_norm, LayerKind::relu, LayerKind::leaky_relu,
        LayerKind::tanh, LayerKind::sigmoid, LayerKind::residual_block})
    if (s == layer_kind_name(k)) return k;
  throw ShapeMismatch("unknown layer kind: " + s);
}

LayerSpec LayerSpec::conv(int in_c, int out_c, int k, int stride, int pad) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.in_channels = in_c;
  s.out_channels = out_c;
  s.kernel = k;
  s.stride = stride;
  s.padding = pad;
  return s;
}

LayerSpec LayerSpec::tconv(int in_c, int out_c, int k, int stride, int pad,
                           int out_pad_h, int out_pad_w) {
  LayerSpec s;
  s.kind = LayerKind::transposed_conv2d;
  s.in_channels = in_c;
  s.out_channels = out_c;
  s.kernel = k;
  s.stride = stride;
  s.padding = pad;
  s.output_pad_h = out_pad_h;
  s.output_pad_w = out_pad_w;
  return s;
}

LayerSpec LayerSpec::inorm(int channels) {
  LayerSpec s;
  s.kind = LayerKind::instance_norm;
  s.in_channels = channels;
  s.out_channels = channels;
  return s;
}

LayerSpec LayerSpec::activation(LayerKind kind, double slope) {
  LayerSpec s;
  s.kind = kind;
  s.negative_slope = slope;
  return s;
}

LayerSpec LayerSpec::resblock(int channels, int k) {
  LayerSpec s;
  s.kind = LayerKind::residual_block;
  s.in_channels = channels;
  s.out_channels = channels;
  s.kernel = k;
  s.stride = 1;
  s.padding = k / 2;
  return s;
}

namespace {

void require_4d(const Tensor& x, const char* who) {
  if (x.ndim() != 4)
    throw ShapeMismatch(std::string(who) + ": expected NCHW input, got " +
                        x.shape_str());
}

// ---------------------------------------------------------------- Conv2d

class Conv2d : public Layer {
 public:
  Conv2d(const LayerSpec& spec, std::mt19937_64* rng) : spec_(spec) {
    weight_ = Tensor({spec.out_channels, spec.in_channels, spec.kernel,
                      spec.kernel});
    bias_ = Tensor({spec.out_channels});
    const double fan_in =
        static_cast<double>(spec.in_channels) * spec.kernel * spec.kernel;
    if (rng) weight_.fill_normal(rng, std::sqrt(2.0 / fan_in));
    weight_.requires_grad = bias_.requires_grad = true;
    dweight_ = Tensor::zeros_like(weight_);
    dbias_ = Tensor::zeros_like(bias_);
  }

  LayerKind kind() const override { return LayerKind::conv2d; }
  const LayerSpec& spec() const override { return spec_; }
  size_t cache_arity() const override { return 1; }

  Tensor forward(const Tensor& x, std::vector<Tensor>* cache) const override {
    require_4d(x, "conv2d");
    if (x.dim(1) != spec_.in_channels)
      throw ShapeMismatch("conv2d: channel mismatch, input " + x.shape_str());
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int k = spec_.kernel, s = spec_.stride, p = spec_.padding;
    const int OH = (H + 2 * p - k) / s + 1;
    const int OW = (W + 2 * p - k) / s + 1;
    if (OH <= 0 || OW <= 0)
      throw ShapeMismatch("conv2d: input too small for kernel/stride");
    Tensor y({N, spec_.out_channels, OH, OW});
    for (int n = 0; n < N; ++n)
      for (int co = 0; co < spec_.out_channels; ++co)
        for (int oh = 0; oh < OH; ++oh)
          for (int ow = 0; ow < OW; ++ow) {
            double acc = bias_.data[co];
            for (int ci = 0; ci < spec_.in_channels; ++ci)
              for (int kh = 0; kh < k; ++kh) {
                const int ih = oh * s - p + kh;
                if (ih < 0 || ih >= H) continue;
                for (int kw = 0; kw < k; ++kw) {
                  const int iw = ow * s - p + kw;
                  if (iw < 0 || iw >= W) continue;
                  acc += x.at4(n, ci, ih, iw) * weight_.at4(co, ci, kh, kw);
                }
              }
            y.at4(n, co, oh, ow) = acc;
          }
    if (cache) cache->push_back(x);
    return y;
  }

  Tensor backward(const Tensor& grad_out, const std::vector<Tensor>& cache,
                  size_t base) override {
    const Tensor& x = cache[base];
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int k = spec_.kernel, s = spec_.stride, p = spec_.padding;
    const int OH = grad_out.dim(2), OW = grad_out.dim(3);
    Tensor dx = Tensor::zeros_like(x);
    for (int n = 0; n < N; ++n)
      for (int co = 0; co < spec_.out_channels; ++co)
        for (int oh = 0; oh < OH; ++oh)
          for (int ow = 0; ow < OW; ++ow) {
            const double g = grad_out.at4(n, co, oh, ow);
            if (g == 0.0) continue;
            dbias_.data[co] += g;
            for (int ci = 0; ci < spec_.in_channels; ++ci)
              for (int kh = 0; kh < k; ++kh) {
                const int ih = oh * s - p + kh;
                if (ih < 0 || ih >= H) continue;
                for (int kw = 0; kw < k; ++kw) {
                  const int iw = ow * s - p + kw;
                  if (iw < 0 || iw >= W) continue;
                  dweight_.at4(co, ci, kh, kw) += g * x.at4(n, ci, ih, iw);
                  dx.at4(n, ci, ih, iw) += g * weight_.at4(co, ci, kh, kw);
                }
              }
          }
    return dx;
  }

  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
  std::vector<Tensor*> grads() override { return {&dweight_, &dbias_}; }

 private:
  LayerSpec spec_;
  Tensor weight_, bias_, dweight_, dbias_;
};

// ------------------------------------------------------ TransposedConv2d

class TransposedConv2d : public Layer {
 public:
  TransposedConv2d(const LayerSpec& spec, std::mt19937_64* rng) : spec_(spec) {
    weight_ = Tensor({spec.in_channels, spec.out_channels, spec.kernel,
                      spec.kernel});
    bias_ = Tensor({spec.out_channels});
    const double fan_in =
        static_cast<double>(spec.in_channels) * spec.kernel * spec.kernel;
    if (rng) weight_.fill_normal(rng, std::sqrt(2.0 / fan_in));
    weight_.requires_grad = bias_.requires_grad = true;
    dweight_ = Tensor::zeros_like(weight_);
    dbias_ = Tensor::zeros_like(bias_);
  }

  LayerKind kind() const override { return LayerKind::transposed_conv2d; }
  const LayerSpec& spec() const override { return spec_; }
  size_t cache_arity() const override { return 1; }

  Tensor forward(const Tensor& x, std::vector<Tensor>* cache) const override {
    require_4d(x, "transposed_conv2d");
    if (x.dim(1) != spec_.in_channels)
      throw ShapeMismatch("transposed_conv2d: channel mismatch");
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int k = spec_.kernel, s = spec_.stride, p = spec_.padding;
    const int OH = (H - 1) * s - 2 * p + k + spec_.output_pad_h;
    const int OW = (W - 1) * s - 2 * p + k + spec_.output_pad_w;
    if (OH <= 0 || OW <= 0)
      throw ShapeMismatch("transposed_conv2d: degenerate output shape");
    Tensor y({N, spec_.out_channels, OH, OW});
    for (int n = 0; n < N; ++n)
      for (int co = 0; co < spec_.out_channels; ++co)
        for (int oh = 0; oh < OH; ++oh)
          for (int ow = 0; ow < OW; ++ow)
            y.at4(n, co, oh, ow) = bias_.data[co];
    for (int n = 0; n < N; ++n)
      for (int ci = 0; ci < spec_.in_channels; ++ci)
        for (int ih = 0; ih < H; ++ih)
          for (int iw = 0; iw < W; ++iw) {
            const double v = x.at4(n, ci, ih, iw);
            for (int co = 0; co < spec_.out_channels; ++co)
              for (int kh = 0; kh < k; ++kh) {
                const int oh = ih * s - p + kh;
                if (oh < 0 || oh >= OH) continue;
                for (int kw = 0; kw < k; ++kw) {
                  const int ow = iw * s - p + kw;
                  if (ow < 0 || ow >= OW) continue;
                  y.at4(n, co, oh, ow) += v * weight_.at4(ci, co, kh, kw);
                }
              }
          }
    if (cache) cache->push_back(x);
    return y;
  }

  Tensor backward(const Tensor& grad_out, const std::vector<Tensor>& cache,
                  size_t base) override {
    const Tensor& x = cache[base];
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int k = spec_.kernel, s = spec_.stride, p = spec_.padding;
    const int OH = grad_out.dim(2), OW = grad_out.dim(3);
    Tensor dx = Tensor::zeros_like(x);
    for (int n = 0; n < N; ++n) {
      for (int co = 0; co < spec_.out_channels; ++co)
        for (int oh = 0; oh < OH; ++oh)
          for (int ow = 0; ow < OW; ++ow)
            dbias_.data[co] += grad_out.at4(n, co, oh, ow);
      for (int ci = 0; ci < spec_.in_channels; ++ci)
        for (int ih = 0; ih < H; ++ih)
          for (int iw = 0; iw < W; ++iw) {
            const double v = x.at4(n, ci, ih, iw);
            double acc = 0.0;
            for (int co = 0; co < spec_.out_channels; ++co)
              for (int kh = 0; kh < k; ++kh) {
                const int oh = ih * s - p + kh;
                if (oh < 0 || oh >= OH) continue;
                for (int kw = 0; kw < k; ++kw) {
                  const int ow = iw * s - p + kw;
                  if (ow < 0 || ow >= OW) continue;
                  const double g = grad_out.at4(n, co, oh, ow);
                  acc += g * weight_.at4(ci, co, kh, kw);
                  dweight_.at4(ci, co, kh, kw) += g * v;
                }
              }
            dx.at4(n, ci, ih, iw) = acc;
          }
    }
    return dx;
  }

  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
  std::vector<Tensor*> grads() override { return {&dweight_, &dbias_}; }

 private:
  LayerSpec spec_;
  Tensor weight_, bias_, dweight_, dbias_;
};

// --------------------------------------------------------- InstanceNorm

class InstanceNorm : public Layer {
 public:
  static constexpr double kEps = 1e-8;

  InstanceNorm(const LayerSpec& spec, std::mt19937_64*) : spec_(spec) {
    gamma_ = Tensor({spec.in_channels}, 1.0);
    beta_ = Tensor({spec.in_channels}, 0.0);
    gamma_.requires_grad = beta_.requires_grad = true;
    dgamma_ = Tensor::zeros_like(gamma_);
    dbeta_ = Tensor::zeros_like(beta_);
  }

  LayerKind kind() const override { return LayerKind::instance_norm; }
  const LayerSpec& spec() const override { return spec_; }
  size_t cache_arity() const override { return 2; }  // xhat, istd

  Tensor forward(const Tensor& x, std::vector<Tensor>* cache) const override {
    require_4d(x, "instance_norm");
    if (x.dim(1) != spec_.in_channels)
      throw ShapeMismatch("instance_norm: channel mismatch");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int HW = H * W;
    Tensor xhat = Tensor::zeros_like(x);
    Tensor istd({N, C});
    Tensor y = Tensor::zeros_like(x);
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        double sum = 0.0, sumsq = 0.0;
        for (int h = 0; h < H; ++h)
          for (int w = 0; w < W; ++w) {
            const double v = x.at4(n, c, h, w);
            sum += v;
            sumsq += v * v;
          }
        const double mean = sum / HW;
        const double var = std::max(0.0, sumsq / HW - mean * mean);
        const double is = 1.0 / std::sqrt(var + kEps);
        istd.data[static_cast<size_t>(n) * C + c] = is;
        for (int h = 0; h < H; ++h)
          for (int w = 0; w < W; ++w) {
            const double xh = (x.at4(n, c, h, w) - mean) * is;
            xhat.at4(n, c, h, w) = xh;
            y.at4(n, c, h, w) = gamma_.data[c] * xh + beta_.data[c];
          }
      }
    if (cache) {
      cache->push_back(std::move(xhat));
      cache->push_back(std::move(istd));
    }
    return y;
  }

  Tensor backward(const Tensor& grad_out, const std::vector<Tensor>& cache,
                  size_t base) override {
    const Tensor& xhat = cache[base];
    const Tensor& istd = cache[base + 1];
    const int N = xhat.dim(0), C = xhat.dim(1), H = xhat.dim(2),
              W = xhat.dim(3);
    const int HW = H * W;
    Tensor dx = Tensor::zeros_like(xhat);
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int h = 0; h < H; ++h)
          for (int w = 0; w < W; ++w) {
            const double dy = grad_out.at4(n, c, h, w);
            sum_dy += dy;
            sum_dy_xhat += dy * xhat.at4(n, c, h, w);
          }
        dgamma_.data[c] += sum_dy_xhat;
        dbeta_.data[c] += sum_dy;
        const double is = istd.data[static_cast<size_t>(n) * C + c];
        const double g = gamma_.data[c];
        const double mean_dy = sum_dy / HW;
        const double mean_dy_xhat = sum_dy_xhat / HW;
        for (int h = 0; h < H; ++h)
          for (int w = 0; w < W; ++w) {
            const double dy = grad_out.at4(n, c, h, w);
            dx.at4(n, c, h, w) =
                g * is * (dy - mean_dy - xhat.at4(n, c, h, w) * mean_dy_xhat);
          }
      }
    return dx;
  }

  std::vector<Tensor*> params() override { return {&gamma_, &beta_}; }
  std::vector<Tensor*> grads() override { return {&dgamma_, &dbeta_}; }

 private:
  LayerSpec spec_;
  Tensor gamma_, beta_, dgamma_, dbeta_;
};

// ---------------------------------------------------------- activations

class Activation : public Layer {
 public:
  Activation(const LayerSpec& spec, std::mt19937_64*) : spec_(spec) {}

  LayerKind kind() const override { return spec_.kind; }
  const LayerSpec& spec() const override { return spec_; }
  size_t cache_arity() const override { return 1; }

  Tensor forward(const Tensor& x, std::vector<Tensor>* cache) const override {
    Tensor y = x;
    switch (spec_.kind) {
      case LayerKind::relu:
        for (double& v : y.data) v = v > 0.0 ? v : 0.0;
        break;
      case LayerKind::leaky_relu:
        for (double& v : y.data) v = v > 0.0 ? v : spec_.negative_slope * v;
        break;
      case LayerKind::tanh:
        for (double& v : y.data) v = std::tanh(v);
        break;
      case LayerKind::sigmoid:
        for (double& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
        break;
      default:
        throw ShapeMismatch("not an activation");
    }
    if (cache) {
      // relu variants differentiate from the input, the saturating pair
      // from their output.
      if (spec_.kind == LayerKind::relu || spec_.kind == LayerKind::leaky_relu)
        cache->push_back(x);
      else
        cache->push_back(y);
    }
    return y;
  }

  Tensor backward(const Tensor& grad_out, const std::vector<Tensor>& cache,
                  size_t base) override {
    const Tensor& saved = cache[base];
    Tensor dx = grad_out;
    switch (spec_.kind) {
      case LayerKind::relu:
        for (size_t i = 0; i < dx.data.size(); ++i)
          dx.data[i] = saved.data[i] > 0.0 ? dx.data[i] : 0.0;
        break;
      case LayerKind::leaky_relu:
        for (size_t i = 0; i < dx.data.size(); ++i)
          dx.data[i] =
              saved.data[i] > 0.0 ? dx.data[i] : spec_.negative_slope * dx.data[i];
        break;
      case LayerKind::tanh:
        for (size_t i = 0; i < dx.data.size(); ++i)
          dx.data[i] *= 1.0 - saved.data[i] * saved.data[i];
        break;
      case LayerKind::sigmoid:
        for (size_t i = 0; i < dx.data.size(); ++i)
          dx.data[i] *= saved.data[i] * (1.0 - saved.data[i]);
        break;
      default:
        throw ShapeMismatch("not an activation");
    }
    return dx;
  }

 private:
  LayerSpec spec_;
};

// -------------------------------------------------------- ResidualBlock

// conv-norm-relu-conv-norm with an additive skip, following the usual
// image-translation residual layout.
class ResidualBlock : public Layer {
 public:
  ResidualBlock(const LayerSpec& spec, std::mt19937_64* rng) : spec_(spec) {
    const int c = spec.in_channels, k = spec.kernel, p = spec.kernel / 2;
    sub_.push_back(make_layer(LayerSpec::conv(c, c, k, 1, p), rng));
    sub_.push_back(make_layer(LayerSpec::inorm(c), rng));
    sub_.push_back(make_layer(LayerSpec::activation(LayerKind::relu), rng));
    sub_.push_back(make_layer(LayerSpec::conv(c, c, k, 1, p), rng));
    sub_.push_back(make_layer(LayerSpec::inorm(c), rng));
  }

  LayerKind kind() const override { return LayerKind::residual_block; }
  const LayerSpec& spec() const override { return spec_; }
  size_t cache_arity() const override {
    size_t n = 0;
    for (const auto& l : sub_) n += l->cache_arity();
    return n;
  }

  Tensor forward(const Tensor& x, std::vector<Tensor>* cache) const override {
    require_4d(x, "residual_block");
    Tensor y = x;
    for (const auto& l : sub_) y = l->forward(y, cache);
    if (!y.same_shape(x))
      throw ShapeMismatch("residual_block: branch changed shape");
    for (size_t i = 0; i < y.data.size(); ++i) y.data[i] += x.data[i];
    return y;
  }

  Tensor backward(const Tensor& grad_out, const std::vector<Tensor>& cache,
                  size_t base) override {
    // Offsets of each sub-layer's cache within [base, base+arity).
    std::vector<size_t> offs(sub_.size());
    size_t pos = base;
    for (size_t i = 0; i < sub_.size(); ++i) {
      offs[i] = pos;
      pos += sub_[i]->cache_arity();
    }
    Tensor g = grad_out;
    for (size_t i = sub_.size(); i-- > 0;)
      g = sub_[i]->backward(g, cache, offs[i]);
    for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += grad_out.data[i];
    return g;
  }

  std::vector<Tensor*> params() override {
    std::vector<Tensor*> all;
    for (auto& l : sub_)
      for (Tensor* t : l->params()) all.push_back(t);
    return all;
  }
  std::vector<Tensor*> grads() override {
    std::vector<Tensor*> all;
    for (auto& l : sub_)
      for (Tensor* t : l->grads()) all.push_back(t);
    return all;
  }

 private:
  LayerSpec spec_;
  std::vector<std::unique_ptr<Layer>> sub_;
};

}  // namespace

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, std::mt19937_64* rng) {
  switch (spec.kind) {
    case LayerKind::conv2d:
      if (spec.kernel <= 0 || spec.stride <= 0 || spec.in_channels <= 0 ||
          spec.out_channels <= 0)
        throw ShapeMismatch("conv2d spec: bad hyperparameters");
      return std::make_unique<Conv2d>(spec, rng);
    case LayerKind::transposed_conv2d:
      if (spec.kernel <= 0 || spec.stride <= 0)
        throw ShapeMismatch("transposed_conv2d spec: bad hyperparameters");
      return std::make_unique<TransposedConv2d>(spec, rng);
    case LayerKind::instance_norm:
      if (spec.in_channels <= 0)
        throw ShapeMismatch("instance_norm spec: bad channels");
      return std::make_unique<InstanceNorm>(spec, rng);
    case LayerKind::relu:
    case LayerKind::leaky_relu:
    case LayerKind::tanh:
    case LayerKind::sigmoid:
      return std::make_unique<Activation>(spec, rng);
    case LayerKind::residual_block:
      if (spec.in_channels <= 0 || spec.kernel <= 0)
        throw ShapeMismatch("residual_block spec: bad hyperparameters");
      return std::make_unique<ResidualBlock>(spec, rng);
  }
  throw ShapeMismatch("unknown layer kind");
}

Network::Network(const std::vector<LayerSpec>& specs, std::mt19937_64* rng)
    : specs_(specs) {
  for (const LayerSpec& s : specs_) layers_.push_back(make_layer(s, rng));
}

Tensor Network::forward(const Tensor& x, Trace* trace) const {
  if (trace) {
    trace->per_layer.assign(layers_.size(), {});
    trace->input_shape = x.shape;
    trace->valid = true;
  }
  Tensor y = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    y = layers_[i]->forward(y, trace ? &trace->per_layer[i] : nullptr);
    if (!y.all_finite())
      throw NonFiniteActivation(std::string(layer_kind_name(layers_[i]->kind())) +
                                " (layer " + std::to_string(i) + ")");
  }
  return y;
}

Tensor Network::backward(const Trace& trace, const Tensor& grad_out) {
  if (!trace.valid || trace.per_layer.size() != layers_.size())
    throw NoForwardTrace();
  Tensor g = grad_out;
  for (size_t i = layers_.size(); i-- > 0;)
    g = layers_[i]->backward(g, trace.per_layer[i], 0);
  return g;
}

std::vector<Tensor*> Network::params() {
  std::vector<Tensor*> all;
  for (auto& l : layers_)
    for (Tensor* t : l->params()) all.push_back(t);
  return all;
}

std::vector<Tensor*> Network::grads() {
  std::vector<Tensor*> all;
  for (auto& l : layers_)
    for (Tensor* t : l->grads()) all.push_back(t);
  return all;
}

void Network::zero_grad() {
  for (Tensor* g : grads()) std::fill(g->data.begin(), g->data.end(), 0.0);
}

size_t Network::num_params() const {
  size_t n = 0;
  for (const auto& l : layers_)
    for (const Tensor* t : const_cast<Layer*>(l.get())->params())
      n += t->numel();
  return n;
}

}  // namespace nn
}  // namespace distaug
