#pragma once

// Scan-specific reconstruction: two coordinate networks (real and imaginary
// parts) are fitted to the acquired k-space through the encoding operator,
// then the predicted k-space is merged with the acquired samples and the
// coil images are combined with SENSE-1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "inrmri/adam.hpp"
#include "inrmri/data_model.hpp"
#include "inrmri/forward_model.hpp"
#include "inrmri/fourier.hpp"
#include "inrmri/objective.hpp"
#include "inrmri/siren.hpp"

namespace inrmri {

enum class Precision { Float64, Float32 };

inline std::string to_string(Precision p) { return p == Precision::Float64 ? "float64" : "float32"; }

inline Precision precision_from_string(const std::string& s) {
  if (s == "float64") return Precision::Float64;
  if (s == "float32") return Precision::Float32;
  detail::invalid("unknown precision '" + s + "' (expected float64 or float32)");
}

/// All reconstruction hyperparameters. Defaults are the knee-dataset settings.
struct ReconConfig {
  double w0 = 25.0;
  double lambda_tv = 3.0;
  int layer_count = 8;
  int hidden_neurons = 256;
  int iterations = 4000;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  Activation activation = Activation::Sine;
  bool kspace_consistency = true;
  std::optional<double> data_norm;  // multiplier applied to the data; nullopt = "auto"
  int log_every = 100;

  double hidden_w = SirenNetwork<double>::kDefaultHiddenFrequency;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  DcNorm dc_norm = DcNorm::L1;
  Precision precision = Precision::Float64;

  static ReconConfig knee() { return ReconConfig{}; }

  static ReconConfig brain() {
    ReconConfig c;
    c.w0 = 10.0;
    c.lambda_tv = 0.05;
    c.layer_count = 10;
    return c;
  }

  void validate() const {
    detail::require(iterations >= 1, "ReconConfig: iterations must be >= 1");
    detail::require(lr > 0.0, "ReconConfig: lr must be > 0");
    detail::require(lambda_tv >= 0.0, "ReconConfig: lambda_tv must be >= 0");
    detail::require(log_every >= 1, "ReconConfig: log_every must be >= 1");
    detail::require(layer_count >= 2, "ReconConfig: layer_count must be >= 2");
    detail::require(hidden_neurons >= 1, "ReconConfig: hidden_neurons must be >= 1");
    detail::require(!data_norm || (std::isfinite(*data_norm) && *data_norm > 0.0),
                    "ReconConfig: data_norm must be positive or auto");
  }

  AdamOptions adam() const { return {lr, beta1, beta2, eps}; }

  friend bool operator==(const ReconConfig&, const ReconConfig&) = default;
};

/// Ablation variants; each one switches off a single component.
enum class Ablation { None, Sine, Tv, Kc };

inline Ablation ablation_from_string(const std::string& s) {
  if (s == "none") return Ablation::None;
  if (s == "sine") return Ablation::Sine;
  if (s == "tv") return Ablation::Tv;
  if (s == "kc") return Ablation::Kc;
  detail::invalid("unknown ablation '" + s + "' (expected none, sine, tv or kc)");
}

inline ReconConfig apply_ablation(ReconConfig cfg, Ablation a) {
  switch (a) {
    case Ablation::None: break;
    case Ablation::Sine: cfg.activation = Activation::ReLU; break;
    case Ablation::Tv: cfg.lambda_tv = 0.0; break;
    case Ablation::Kc: cfg.kspace_consistency = false; break;
  }
  return cfg;
}

struct LossRecord {
  int iteration = 0;
  LossReport loss;

  friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

template <class T>
struct TrainedNetworks {
  SirenNetwork<T> real;
  SirenNetwork<T> imag;
  double data_scale = 1.0;  // acquired data was multiplied by this before fitting
};

template <class T>
struct TrainResult {
  TrainedNetworks<T> networks;
  LossReport first;  // iteration 1, before any update
  std::vector<LossRecord> history;
};

struct ReconResult {
  ComplexImage combined;
  std::vector<ComplexImage> coil_images;
  KSpaceGrid final_kspace;
  std::vector<LossRecord> loss_history;
  LossReport first_loss;
};

using ProgressFn = std::function<void(const LossRecord&)>;

/// (sum_j conj(C_j) x_j) / (sum_j |C_j|^2), zero where the denominator < 1e-12.
inline ComplexImage sense1_combine(const CoilStack& coil_images, const SensitivityMaps& smaps) {
  detail::require(coil_images.coils() == smaps.coils() &&
                      smaps.same_grid(coil_images.height(), coil_images.width()),
                  "sense1_combine: coil images and maps differ in shape");
  constexpr double kFloor = 1e-12;
  ComplexImage out(coil_images.height(), coil_images.width());
  auto o = out.values();
  for (std::size_t p = 0; p < o.size(); ++p) {
    cplx num{};
    double den = 0.0;
    for (std::size_t c = 0; c < smaps.coils(); ++c) {
      const cplx s = smaps.plane(c)[p];
      num += std::conj(s) * coil_images.plane(c)[p];
      den += std::norm(s);
    }
    o[p] = den < kFloor ? cplx{} : num / den;
  }
  return out;
}

inline ComplexImage sense1_combine(const std::vector<ComplexImage>& coil_images,
                                   const SensitivityMaps& smaps) {
  detail::require(coil_images.size() == smaps.coils(), "sense1_combine: coil count mismatch");
  CoilStack stack(smaps.coils(), smaps.height(), smaps.width());
  for (std::size_t c = 0; c < coil_images.size(); ++c) stack.set_plane(c, coil_images[c]);
  return sense1_combine(stack, smaps);
}

/// Per-coil inverse transform of `k`, returned as a stack of coil images.
inline CoilStack coil_images_of(const KSpaceGrid& k) {
  CoilStack out(k.coils(), k.height(), k.width(),
                std::vector<cplx>(k.values().begin(), k.values().end()));
  const Fft2c plan(k.height(), k.width());
  for (std::size_t c = 0; c < k.coils(); ++c) plan.inverse(out.plane(c));
  return out;
}

/// ifft2c + SENSE-1 of the zero-filled acquired data.
inline ComplexImage zero_filled(const KSpaceGrid& acquired, const SensitivityMaps& smaps) {
  return sense1_combine(coil_images_of(acquired), smaps);
}

inline double auto_data_scale(const KSpaceGrid& acquired) {
  double peak = 0.0;
  for (const cplx& z : acquired.values()) peak = std::max(peak, std::abs(z));
  return peak > 0.0 ? 1.0 / peak : 1.0;
}

namespace detail {

inline void check_recon_inputs(const KSpaceGrid& acquired, const SensitivityMaps& smaps,
                               const SamplingMask& mask) {
  check_encoding_dims(acquired.height(), acquired.width(), smaps, mask, "reconstruct");
  require(acquired.coils() == smaps.coils(), "reconstruct: coil count mismatch");
}

template <class T>
bool fill_image(const Vec<T>& re, const Vec<T>& im, ComplexImage& img) {
  auto v = img.values();
  bool finite = true;
  for (std::size_t p = 0; p < v.size(); ++p) {
    const auto i = static_cast<Eigen::Index>(p);
    v[p] = cplx{static_cast<double>(re(i)), static_cast<double>(im(i))};
    finite = finite && std::isfinite(v[p].real()) && std::isfinite(v[p].imag());
  }
  return finite;
}

}  // namespace detail

/// Network estimate of the image, in the normalized data units.
template <class T>
ComplexImage predict_image(const TrainedNetworks<T>& nets, std::size_t height, std::size_t width) {
  const Mat<T> coords = coordinate_matrix<T>(make_coordinate_grid(height, width));
  ComplexImage img(height, width);
  detail::fill_image(forward_batch(nets.real, coords), forward_batch(nets.imag, coords), img);
  return img;
}

template <class T>
TrainedNetworks<T> init_networks(const ReconConfig& cfg) {
  return {init_siren<T>(cfg.layer_count, cfg.hidden_neurons, cfg.w0, cfg.seed, cfg.activation, cfg.hidden_w),
          init_siren<T>(cfg.layer_count, cfg.hidden_neurons, cfg.w0, cfg.seed + 1, cfg.activation,
                        cfg.hidden_w),
          1.0};
}

/// Full-batch Adam fit of both networks to the acquired k-space.
template <class T>
TrainResult<T> train(const KSpaceGrid& acquired, const SensitivityMaps& smaps, const SamplingMask& mask,
                     const ReconConfig& cfg, const ProgressFn& progress = {}) {
  cfg.validate();
  detail::check_recon_inputs(acquired, smaps, mask);
  const std::size_t h = acquired.height(), w = acquired.width();

  TrainResult<T> result{init_networks<T>(cfg), {}, {}};
  auto& nets = result.networks;
  nets.data_scale = cfg.data_norm ? *cfg.data_norm : auto_data_scale(acquired);
  KSpaceGrid data = apply_mask(acquired, mask);
  for (cplx& z : data.values()) z *= nets.data_scale;

  const Fft2c plan(h, w);
  const Mat<T> coords = coordinate_matrix<T>(make_coordinate_grid(h, w));
  AdamState<T> opt_re = make_adam_state(nets.real, cfg.adam());
  AdamState<T> opt_im = make_adam_state(nets.imag, cfg.adam());
  ActivationTape<T> tape_re, tape_im;
  ComplexImage img(h, w);
  Vec<T> g_re(static_cast<Eigen::Index>(h * w)), g_im(static_cast<Eigen::Index>(h * w));
  double last_finite = 0.0;

  for (int it = 1; it <= cfg.iterations; ++it) {
    const Vec<T> out_re = forward_batch(nets.real, coords, tape_re);
    const Vec<T> out_im = forward_batch(nets.imag, coords, tape_im);
    if (!detail::fill_image(out_re, out_im, img)) throw DivergedError(it, last_finite);

    const TotalLoss loss = total_loss(img, data, smaps, mask, cfg.lambda_tv, plan, cfg.dc_norm);
    if (!std::isfinite(loss.report.total)) throw DivergedError(it, last_finite);
    last_finite = loss.report.total;
    if (it == 1) result.first = loss.report;
    if (it % cfg.log_every == 0 || it == cfg.iterations) {
      result.history.push_back({it, loss.report});
      if (progress) progress(result.history.back());
    }

    const auto grad = loss.gradient.values();
    for (std::size_t p = 0; p < grad.size(); ++p) {
      g_re(static_cast<Eigen::Index>(p)) = static_cast<T>(grad[p].real());
      g_im(static_cast<Eigen::Index>(p)) = static_cast<T>(grad[p].imag());
    }
    const GradientBuffer<T> d_re = backward_batch(nets.real, tape_re, g_re);
    const GradientBuffer<T> d_im = backward_batch(nets.imag, tape_im, g_im);
    adam_step(nets.real, d_re, opt_re);
    adam_step(nets.imag, d_im, opt_im);
  }
  return result;
}

/// Predicts full k-space from the networks, optionally restores the acquired
/// samples, and combines the coil images.
template <class T>
ReconResult infer(const TrainedNetworks<T>& nets, const KSpaceGrid& acquired,
                  const SensitivityMaps& smaps, const SamplingMask& mask, const ReconConfig& cfg) {
  detail::check_recon_inputs(acquired, smaps, mask);
  const std::size_t h = acquired.height(), w = acquired.width();
  const ComplexImage estimate = predict_image(nets, h, w);
  KSpaceGrid composite = forward_unmasked(estimate, smaps);
  const double unscale = 1.0 / nets.data_scale;
  for (std::size_t c = 0; c < composite.coils(); ++c) {
    auto dst = composite.plane(c);
    const auto src = acquired.plane(c);
    for (std::size_t p = 0; p < dst.size(); ++p) {
      if (cfg.kspace_consistency && mask.row_sampled(p / w)) {
        dst[p] = src[p];
      } else {
        dst[p] *= unscale;
      }
    }
  }
  const CoilStack coils = coil_images_of(composite);
  ReconResult out;
  out.combined = sense1_combine(coils, smaps);
  out.coil_images.reserve(coils.coils());
  for (std::size_t c = 0; c < coils.coils(); ++c) out.coil_images.push_back(coils.image(c));
  out.final_kspace = std::move(composite);
  return out;
}

template <class T>
ReconResult reconstruct_as(const KSpaceGrid& acquired, const SensitivityMaps& smaps,
                           const SamplingMask& mask, const ReconConfig& cfg,
                           const ProgressFn& progress = {}) {
  TrainResult<T> trained = train<T>(acquired, smaps, mask, cfg, progress);
  ReconResult out = infer(trained.networks, acquired, smaps, mask, cfg);
  out.loss_history = std::move(trained.history);
  out.first_loss = trained.first;
  return out;
}

/// train + infer at the precision selected in `cfg`.
inline ReconResult reconstruct(const KSpaceGrid& acquired, const SensitivityMaps& smaps,
                               const SamplingMask& mask, const ReconConfig& cfg,
                               const ProgressFn& progress = {}) {
  if (cfg.precision == Precision::Float32) return reconstruct_as<float>(acquired, smaps, mask, cfg, progress);
  return reconstruct_as<double>(acquired, smaps, mask, cfg, progress);
}

}  // namespace inrmri
