#pragma once

// Coordinate network f(x, y) -> scalar intensity with sine (SIREN) or ReLU
// hidden activations and a linear output layer. Evaluation is full-batch:
// activations are (features x pixels) column-major matrices.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inrmri/data_model.hpp"
#include "inrmri/fastmath.hpp"
#include "inrmri/random.hpp"

namespace inrmri {

enum class Activation { Sine, ReLU };

inline std::string to_string(Activation a) { return a == Activation::Sine ? "sine" : "relu"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "sine") return Activation::Sine;
  if (s == "relu") return Activation::ReLU;
  detail::invalid("unknown activation '" + s + "' (expected sine or relu)");
}

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
struct DenseLayer {
  Mat<T> weight;  // out x in
  Vec<T> bias;    // out

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
           a.bias.size() == b.bias.size() && a.weight == b.weight && a.bias == b.bias;
  }
};

/// Per-layer weight and bias gradients, shaped like the owning network.
template <class T>
struct GradientBuffer {
  std::vector<DenseLayer<T>> layers;
};

template <class T>
struct SirenNetwork {
  static constexpr double kDefaultHiddenFrequency = 30.0;

  std::vector<DenseLayer<T>> layers;
  double w0 = kDefaultHiddenFrequency;
  double hidden_w = kDefaultHiddenFrequency;
  Activation activation = Activation::Sine;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layers.front().in_dim(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  /// Frequency applied before the sine of hidden layer i.
  T frequency(std::size_t i) const { return static_cast<T>(i == 0 ? w0 : hidden_w); }

  void validate() const {
    detail::require(!layers.empty(), "SirenNetwork: no layers");
    detail::require(layers.back().out_dim() == 1, "SirenNetwork: output layer must have one unit");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      detail::require(l.bias.size() == l.weight.rows(), "SirenNetwork: bias/weight size mismatch");
      detail::require(i == 0 || l.in_dim() == layers[i - 1].out_dim(),
                      "SirenNetwork: layer " + std::to_string(i) + " does not chain");
      detail::require(l.weight.allFinite() && l.bias.allFinite(), "SirenNetwork: non-finite weight");
    }
  }

  GradientBuffer<T> zero_gradient() const {
    GradientBuffer<T> g;
    g.layers.reserve(layers.size());
    for (const auto& l : layers)
      g.layers.push_back({Mat<T>::Zero(l.weight.rows(), l.weight.cols()), Vec<T>::Zero(l.bias.size())});
    return g;
  }

  template <class U>
  SirenNetwork<U> cast() const {
    SirenNetwork<U> out;
    out.w0 = w0;
    out.hidden_w = hidden_w;
    out.activation = activation;
    out.seed = seed;
    for (const auto& l : layers) out.layers.push_back({l.weight.template cast<U>(), l.bias.template cast<U>()});
    return out;
  }

  friend bool operator==(const SirenNetwork& a, const SirenNetwork& b) {
    return a.layers == b.layers && a.w0 == b.w0 && a.hidden_w == b.hidden_w &&
           a.activation == b.activation && a.seed == b.seed;
  }
};

/// Saved activations of one forward pass.
template <class T>
struct ActivationTape {
  std::vector<Mat<T>> inputs;  // inputs[i]: input to layer i, (in_dim x batch)
  std::vector<Mat<T>> slopes;  // slopes[i]: d activation / d preactivation of hidden layer i
  const void* owner = nullptr;
  std::size_t count = 0;   // real coordinates; the matrices may carry padding columns
  mutable Mat<T> scratch;  // backward workspace, reused across calls

  std::size_t batch() const { return count; }
};

namespace detail {

// Batches are padded to whole GEMM panels. Eigen handles a ragged last panel
// with a different kernel, which would make a pixel's value depend on its
// position in the batch.
inline constexpr Eigen::Index kBatchQuantum = 8;

inline Eigen::Index padded_batch(Eigen::Index n) { return (n + kBatchQuantum - 1) / kBatchQuantum * kBatchQuantum; }

}  // namespace detail

/// Builds a network with `layer_count` dense layers (the last one linear).
/// Sine: first layer U(-1/in, 1/in), later layers U(-sqrt(6/in)/hidden_w, +).
/// ReLU: He-uniform U(-sqrt(6/in), +) everywhere. Biases start at zero.
template <class T = double>
SirenNetwork<T> init_siren(int layer_count, int hidden_neurons, double w0, std::uint64_t seed,
                           Activation activation = Activation::Sine,
                           double hidden_w = SirenNetwork<T>::kDefaultHiddenFrequency,
                           int input_dim = 2) {
  detail::require(layer_count >= 2, "init_siren: layer_count must be >= 2");
  detail::require(hidden_neurons >= 1, "init_siren: hidden_neurons must be >= 1");
  detail::require(std::isfinite(w0) && std::isfinite(hidden_w) && hidden_w != 0.0,
                  "init_siren: frequencies must be finite and hidden_w nonzero");

  SirenNetwork<T> net;
  net.w0 = w0;
  net.hidden_w = hidden_w;
  net.activation = activation;
  net.seed = seed;

  const Philox4x32 rng(seed);
  std::uint64_t counter = 0;
  for (int i = 0; i < layer_count; ++i) {
    const int in = i == 0 ? input_dim : hidden_neurons;
    const int out = i + 1 == layer_count ? 1 : hidden_neurons;
    double bound = 0.0;
    if (activation == Activation::ReLU) {
      bound = std::sqrt(6.0 / in);
    } else if (i == 0) {
      bound = 1.0 / in;
    } else {
      bound = std::sqrt(6.0 / in) / hidden_w;
    }
    DenseLayer<T> layer{Mat<T>(out, in), Vec<T>::Zero(out)};
    // row-major draw order so the stream does not depend on storage layout
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c)
        layer.weight(r, c) = static_cast<T>(bound * (2.0 * rng.uniform(counter++) - 1.0));
    net.layers.push_back(std::move(layer));
  }
  return net;
}

/// 2 x N matrix of (x, y) columns in row-major pixel order.
template <class T>
Mat<T> coordinate_matrix(const CoordinateGrid& grid) {
  Mat<T> m(2, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t p = 0; p < grid.size(); ++p) {
    m(0, static_cast<Eigen::Index>(p)) = static_cast<T>(grid[p][0]);
    m(1, static_cast<Eigen::Index>(p)) = static_cast<T>(grid[p][1]);
  }
  return m;
}

/// Evaluates the network at every column of `coords`; returns one value per column.
template <class T>
Vec<T> forward_batch(const SirenNetwork<T>& net, const Mat<T>& coords, ActivationTape<T>& tape) {
  detail::require(!net.layers.empty(), "forward_batch: empty network");
  detail::require(static_cast<std::size_t>(coords.rows()) == net.input_dim(),
                  "forward_batch: coordinate dimension does not match network input");
  detail::require(coords.cols() > 0, "forward_batch: no coordinates");
  const std::size_t hidden = net.layers.size() - 1;
  tape.inputs.resize(net.layers.size());
  tape.slopes.resize(hidden);
  tape.owner = &net;
  tape.count = static_cast<std::size_t>(coords.cols());
  const Eigen::Index padded = detail::padded_batch(coords.cols());
  tape.inputs[0].setZero(coords.rows(), padded);
  tape.inputs[0].leftCols(coords.cols()) = coords;
  for (std::size_t i = 0; i < hidden; ++i) {
    const auto& layer = net.layers[i];
    Mat<T>& z = tape.inputs[i + 1];
    z.noalias() = layer.weight * tape.inputs[i];
    Mat<T>& slope = tape.slopes[i];
    slope.resize(z.rows(), z.cols());
    if (net.activation == Activation::Sine) {
      fastmath::sine_activation_biased(z.data(), layer.bias.data(), static_cast<std::size_t>(z.rows()),
                                       static_cast<std::size_t>(z.cols()), net.frequency(i), slope.data());
    } else {
      z.colwise() += layer.bias;
      T* zd = z.data();
      T* sd = slope.data();
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        const bool on = zd[k] > T(0);
        sd[k] = on ? T(1) : T(0);
        zd[k] = on ? zd[k] : T(0);
      }
    }
  }
  const auto& out_layer = net.layers.back();
  const Mat<T> row = out_layer.weight * tape.inputs[hidden];
  Vec<T> out = row.leftCols(coords.cols()).transpose();
  out.array() += out_layer.bias(0);
  return out;
}

template <class T>
Vec<T> forward_batch(const SirenNetwork<T>& net, const Mat<T>& coords) {
  ActivationTape<T> tape;
  return forward_batch(net, coords, tape);
}

template <class T>
Vec<T> forward_batch(const SirenNetwork<T>& net, const CoordinateGrid& grid, ActivationTape<T>& tape) {
  return forward_batch(net, coordinate_matrix<T>(grid), tape);
}

/// Reverse-mode gradient of sum_p output_grad[p] * output[p] with respect to
/// every weight and bias.
template <class T>
GradientBuffer<T> backward_batch(const SirenNetwork<T>& net, const ActivationTape<T>& tape,
                                 const Vec<T>& output_grad) {
  detail::require(tape.owner == &net && tape.inputs.size() == net.layers.size() &&
                      tape.slopes.size() + 1 == net.layers.size(),
                  "backward_batch: tape was not produced by this network");
  detail::require(static_cast<std::size_t>(output_grad.size()) == tape.batch(),
                  "backward_batch: output_grad length does not match the batch");
  GradientBuffer<T> grad;
  grad.layers.resize(net.layers.size());
  const std::size_t last = net.layers.size() - 1;

  const Eigen::Index padded = tape.inputs[0].cols();
  Mat<T> g_row = Mat<T>::Zero(1, padded);
  g_row.leftCols(output_grad.size()) = output_grad.transpose();

  auto& g_out = grad.layers[last];
  g_out.weight.noalias() = g_row * tape.inputs[last].transpose();
  g_out.bias = Vec<T>::Constant(1, output_grad.sum());
  if (last == 0) return grad;

  // delta_i = (W_{i+1}^T delta_{i+1}) .* slope_i, ping-ponging between two buffers
  Mat<T> delta = net.layers[last].weight.transpose() * g_row;
  Mat<T>& spare = tape.scratch;
  for (std::size_t i = last; i-- > 0;) {
    delta.array() *= tape.slopes[i].array();
    auto& g = grad.layers[i];
    g.weight.noalias() = delta * tape.inputs[i].transpose();
    g.bias = delta.rowwise().sum();
    if (i > 0) {
      spare.resize(net.layers[i].weight.cols(), delta.cols());
      spare.noalias() = net.layers[i].weight.transpose() * delta;
      delta.swap(spare);
    }
  }
  return grad;
}

}  // namespace inrmri
