#pragma once

// Training loss L_tot = L_DC + lambda * L_TV and its gradient with respect to
// the predicted complex image. For a real-valued loss of a complex image the
// "gradient" packs dL/d(re) + i dL/d(im) into one ComplexImage.

#include <cmath>
#include <cstddef>
#include <string>

#include "inrmri/data_model.hpp"
#include "inrmri/forward_model.hpp"

namespace inrmri {

/// How the k-space residual is measured.
enum class DcNorm {
  L1,          // sum |re| + |im|
  L1Modulus,   // sum |z|
  L2Squared,   // 1/2 sum |z|^2
};

inline std::string to_string(DcNorm n) {
  switch (n) {
    case DcNorm::L1: return "l1";
    case DcNorm::L1Modulus: return "l1_modulus";
    case DcNorm::L2Squared: return "l2_squared";
  }
  return "l1";
}

inline DcNorm dc_norm_from_string(const std::string& s) {
  if (s == "l1") return DcNorm::L1;
  if (s == "l1_modulus") return DcNorm::L1Modulus;
  if (s == "l2_squared") return DcNorm::L2Squared;
  detail::invalid("unknown dc_norm '" + s + "' (expected l1, l1_modulus or l2_squared)");
}

struct LossReport {
  double dc = 0.0;
  double tv = 0.0;
  double total = 0.0;
  double lambda = 0.0;

  friend bool operator==(const LossReport&, const LossReport&) = default;
};

struct LossValue {
  double value = 0.0;
  ComplexImage gradient;
};

struct TotalLoss {
  LossReport report;
  ComplexImage gradient;
};

namespace detail {

inline double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

}  // namespace detail

inline LossValue dc_loss(const ComplexImage& pred, const KSpaceGrid& acquired,
                         const SensitivityMaps& smaps, const SamplingMask& mask, const Fft2c& plan,
                         DcNorm norm = DcNorm::L1) {
  detail::check_encoding_dims(pred.height(), pred.width(), smaps, mask, "dc_loss");
  detail::require(acquired.same_grid(pred.height(), pred.width()) && acquired.coils() == smaps.coils(),
                  "dc_loss: acquired k-space does not match maps/image");
  KSpaceGrid residual = forward_unmasked(pred, smaps, plan);
  auto r = residual.values();
  const auto s = acquired.values();
  const std::size_t w = pred.width(), plane = residual.plane_size();
  double loss = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const std::size_t row = (i % plane) / w;
    if (!mask.row_sampled(row)) {
      r[i] = cplx{};
      continue;
    }
    const cplx d = r[i] - s[i];
    switch (norm) {
      case DcNorm::L1:
        loss += std::abs(d.real()) + std::abs(d.imag());
        r[i] = {detail::sgn(d.real()), detail::sgn(d.imag())};
        break;
      case DcNorm::L1Modulus: {
        const double a = std::abs(d);
        loss += a;
        r[i] = a > 0.0 ? d / a : cplx{};
        break;
      }
      case DcNorm::L2Squared:
        loss += 0.5 * std::norm(d);
        r[i] = d;
        break;
    }
  }
  return {loss, adjoint(residual, smaps, mask, plan)};
}

inline LossValue dc_loss(const ComplexImage& pred, const KSpaceGrid& acquired,
                         const SensitivityMaps& smaps, const SamplingMask& mask,
                         DcNorm norm = DcNorm::L1) {
  return dc_loss(pred, acquired, smaps, mask, Fft2c(pred.height(), pred.width()), norm);
}

/// Anisotropic TV: L1 of forward differences along x and y, separately for
/// the real and imaginary channels; the last column/row difference is zero.
inline LossValue tv_loss(const ComplexImage& img) {
  const std::size_t h = img.height(), w = img.width();
  detail::require(h * w >= 2, "tv_loss: image must have at least two pixels");
  ComplexImage grad(h, w);
  double loss = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const cplx u = img(y, x);
      if (x + 1 < w) {
        const cplx d = img(y, x + 1) - u;
        loss += std::abs(d.real()) + std::abs(d.imag());
        const cplx sd{detail::sgn(d.real()), detail::sgn(d.imag())};
        grad(y, x) -= sd;
        grad(y, x + 1) += sd;
      }
      if (y + 1 < h) {
        const cplx d = img(y + 1, x) - u;
        loss += std::abs(d.real()) + std::abs(d.imag());
        const cplx sd{detail::sgn(d.real()), detail::sgn(d.imag())};
        grad(y, x) -= sd;
        grad(y + 1, x) += sd;
      }
    }
  }
  return {loss, std::move(grad)};
}

inline TotalLoss total_loss(const ComplexImage& pred, const KSpaceGrid& acquired,
                            const SensitivityMaps& smaps, const SamplingMask& mask, double lambda,
                            const Fft2c& plan, DcNorm norm = DcNorm::L1) {
  detail::require(lambda >= 0.0, "total_loss: lambda must be >= 0");
  LossValue dc = dc_loss(pred, acquired, smaps, mask, plan, norm);
  TotalLoss out;
  out.report.dc = dc.value;
  out.report.lambda = lambda;
  out.gradient = std::move(dc.gradient);
  if (lambda > 0.0) {
    const LossValue tv = tv_loss(pred);
    out.report.tv = tv.value;
    auto g = out.gradient.values();
    const auto t = tv.gradient.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += lambda * t[i];
  } else {
    out.report.tv = tv_loss(pred).value;
  }
  out.report.total = out.report.dc + lambda * out.report.tv;
  return out;
}

inline TotalLoss total_loss(const ComplexImage& pred, const KSpaceGrid& acquired,
                            const SensitivityMaps& smaps, const SamplingMask& mask, double lambda,
                            DcNorm norm = DcNorm::L1) {
  return total_loss(pred, acquired, smaps, mask, lambda, Fft2c(pred.height(), pred.width()), norm);
}

}  // namespace inrmri
