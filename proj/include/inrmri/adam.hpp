#pragma once

#include <cmath>
#include <cstddef>

#include "inrmri/siren.hpp"

namespace inrmri {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class T>
struct AdamState {
  long step = 0;
  GradientBuffer<T> m;
  GradientBuffer<T> v;
  AdamOptions options;
};

template <class T>
AdamState<T> make_adam_state(const SirenNetwork<T>& net, const AdamOptions& options = {}) {
  detail::require(options.lr > 0.0, "adam: lr must be > 0");
  detail::require(options.beta1 > 0.0 && options.beta1 < 1.0, "adam: beta1 must be in (0, 1)");
  detail::require(options.beta2 > 0.0 && options.beta2 < 1.0, "adam: beta2 must be in (0, 1)");
  detail::require(options.eps > 0.0, "adam: eps must be > 0");
  return {0, net.zero_gradient(), net.zero_gradient(), options};
}

namespace detail {

template <class P, class G, class M>
void adam_update(P& p, const G& g, M& m, M& v, double b1, double b2, double step_size,
                 double v_correction, double eps) {
  using T = typename P::Scalar;
  m = T(b1) * m + T(1.0 - b1) * g;
  v = T(b2) * v + T(1.0 - b2) * g.cwiseProduct(g);
  p.array() -= T(step_size) * m.array() / ((v.array() / T(v_correction)).sqrt() + T(eps));
}

}  // namespace detail

/// One bias-corrected Adam update of every parameter of `net`.
template <class T>
void adam_step(SirenNetwork<T>& net, const GradientBuffer<T>& grads, AdamState<T>& state) {
  detail::require(grads.layers.size() == net.layers.size() && state.m.layers.size() == net.layers.size(),
                  "adam_step: layer count mismatch");
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    const auto& g = grads.layers[i];
    detail::require(g.weight.rows() == l.weight.rows() && g.weight.cols() == l.weight.cols() &&
                        g.bias.size() == l.bias.size() &&
                        state.m.layers[i].weight.rows() == l.weight.rows() &&
                        state.m.layers[i].weight.cols() == l.weight.cols(),
                    "adam_step: gradient shape does not match layer " + std::to_string(i));
  }
  const auto& o = state.options;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  // p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
  const double step_size = o.lr / (1.0 - std::pow(o.beta1, t));
  const double v_correction = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    auto& l = net.layers[i];
    const auto& g = grads.layers[i];
    detail::adam_update(l.weight, g.weight, state.m.layers[i].weight, state.v.layers[i].weight,
                        o.beta1, o.beta2, step_size, v_correction, o.eps);
    detail::adam_update(l.bias, g.bias, state.m.layers[i].bias, state.v.layers[i].bias, o.beta1,
                        o.beta2, step_size, v_correction, o.eps);
  }
}

}  // namespace inrmri
