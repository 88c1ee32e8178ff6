#pragma once

// Image-quality metrics on magnitude images. The reference image sets the
// peak (PSNR) and the dynamic range (SSIM).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "inrmri/data_model.hpp"

namespace inrmri {

inline constexpr double kPsnrCap = 999.0;

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

namespace detail {

inline std::vector<double> magnitudes(const ComplexImage& img) {
  std::vector<double> m(img.size());
  std::transform(img.values().begin(), img.values().end(), m.begin(),
                 [](const cplx& z) { return std::abs(z); });
  return m;
}

inline std::vector<double> gaussian_window(std::size_t n, double sigma) {
  std::vector<double> g(n);
  const double c = 0.5 * static_cast<double>(n - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - c;
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Separable "valid" correlation with a 1D kernel along both axes.
inline std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                        const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t oh = h - n + 1, ow = w - n + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += k[t] * img[y * w + x + t];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += k[t] * rows[(y + t) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace detail

/// PSNR in dB of |test| against |reference|; kPsnrCap when the images agree.
inline double psnr(const ComplexImage& test, const ComplexImage& reference) {
  detail::require(test.same_shape(reference), "psnr: dimension mismatch");
  detail::require(reference.size() > 0, "psnr: empty image");
  const auto t = detail::magnitudes(test);
  const auto r = detail::magnitudes(reference);
  const double peak = *std::max_element(r.begin(), r.end());
  detail::require(peak > 0.0, "psnr: reference image is identically zero");
  double sse = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) sse += (t[i] - r[i]) * (t[i] - r[i]);
  const double mse = sse / static_cast<double>(t.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

/// Mean SSIM over all fully-contained Gaussian windows of the magnitude images.
inline double ssim(const ComplexImage& test, const ComplexImage& reference,
                   const SsimOptions& opt = {}) {
  detail::require(test.same_shape(reference), "ssim: dimension mismatch");
  detail::require(opt.window >= 1 && test.height() >= opt.window && test.width() >= opt.window,
                  "ssim: image is smaller than the window");
  const std::size_t h = test.height(), w = test.width();
  const auto x = detail::magnitudes(test);
  const auto y = detail::magnitudes(reference);
  const double range = *std::max_element(y.begin(), y.end());
  const double c1 = (opt.k1 * range) * (opt.k1 * range);
  const double c2 = (opt.k2 * range) * (opt.k2 * range);

  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto g = detail::gaussian_window(opt.window, opt.sigma);
  const auto mx = detail::filter_valid(x, h, w, g);
  const auto my = detail::filter_valid(y, h, w, g);
  const auto sxx = detail::filter_valid(xx, h, w, g);
  const auto syy = detail::filter_valid(yy, h, w, g);
  const auto sxy = detail::filter_valid(xy, h, w, g);

  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cxy = sxy[i] - mx[i] * my[i];
    const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
    total += num / den;
  }
  return total / static_cast<double>(mx.size());
}

}  // namespace inrmri
