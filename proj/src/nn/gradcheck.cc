// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace distaug {
namespace nn {

namespace {

constexpr double kStep = 1e-5;

double rel_error(double analytic, double fd) {
  const double diff = std::abs(analytic - fd);
  // Some gradients are exactly zero (a conv bias feeding an instance
  // norm); the finite difference then carries only rounding noise, so
  // tiny absolute differences count as matches.
  if (diff <= 1e-8) return 0.0;
  return diff / std::max(1e-6, std::abs(analytic) + std::abs(fd));
}

double projected_loss(const Network& net, const Tensor& x,
                      const std::vector<double>& r) {
  const Tensor y = net.forward(x, nullptr);
  double loss = 0.0;
  for (size_t i = 0; i < y.data.size(); ++i) loss += r[i] * y.data[i];
  return loss;
}

}  // namespace

std::string GradCheckReport::to_string() const {
  std::string out;
  char buf[128];
  for (const GradCheckEntry& e : per_kind) {
    std::snprintf(buf, sizeof(buf), "%-18s max_rel_err %.3e (%zu checked)\n",
                  layer_kind_name(e.kind), e.max_rel_error, e.checked);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-18s max_rel_err %.3e\n", "input",
                input_max_rel_error);
  out += buf;
  return out;
}

GradCheckReport grad_check(Network* net, const Tensor& x,
                           size_t max_checks_per_tensor, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Trace trace;
  const Tensor y = net->forward(x, &trace);
  std::vector<double> r(y.data.size());
  for (double& v : r) v = normal(rng);

  net->zero_grad();
  Tensor grad_out = Tensor::zeros_like(y);
  grad_out.data = r;
  const Tensor dx = net->backward(trace, grad_out);

  GradCheckReport report;
  auto entry_for = [&report](LayerKind k) -> GradCheckEntry& {
    for (GradCheckEntry& e : report.per_kind)
      if (e.kind == k) return e;
    report.per_kind.push_back({k, 0.0, 0});
    return report.per_kind.back();
  };

  for (const auto& layer : net->layers()) {
    auto params = layer->params();
    auto grads = layer->grads();
    GradCheckEntry& entry = entry_for(layer->kind());
    for (size_t pi = 0; pi < params.size(); ++pi) {
      Tensor* p = params[pi];
      const Tensor* g = grads[pi];
      const size_t n = p->data.size();
      std::vector<size_t> idx(n);
      for (size_t j = 0; j < n; ++j) idx[j] = j;
      std::shuffle(idx.begin(), idx.end(), rng);
      const size_t take = std::min(max_checks_per_tensor, n);
      for (size_t j = 0; j < take; ++j) {
        const size_t k = idx[j];
        const double orig = p->data[k];
        p->data[k] = orig + kStep;
        const double lp = projected_loss(*net, x, r);
        p->data[k] = orig - kStep;
        const double lm = projected_loss(*net, x, r);
        p->data[k] = orig;
        const double fd = (lp - lm) / (2.0 * kStep);
        const double err = rel_error(g->data[k], fd);
        entry.max_rel_error = std::max(entry.max_rel_error, err);
        ++entry.checked;
        report.max_rel_error = std::max(report.max_rel_error, err);
      }
    }
  }

  {
    Tensor xp = x;
    const size_t n = xp.data.size();
    std::vector<size_t> idx(n);
    for (size_t j = 0; j < n; ++j) idx[j] = j;
    std::shuffle(idx.begin(), idx.end(), rng);
    const size_t take = std::min(max_checks_per_tensor, n);
    for (size_t j = 0; j < take; ++j) {
      const size_t k = idx[j];
      const double orig = xp.data[k];
      xp.data[k] = orig + kStep;
      const double lp = projected_loss(*net, xp, r);
      xp.data[k] = orig - kStep;
      const double lm = projected_loss(*net, xp, r);
      xp.data[k] = orig;
      const double fd = (lp - lm) / (2.0 * kStep);
      const double err = rel_error(dx.data[k], fd);
      report.input_max_rel_error = std::max(report.input_max_rel_error, err);
      report.max_rel_error = std::max(report.max_rel_error, err);
    }
  }

  return report;
}

}  // namespace nn
}  // namespace distaug
