#pragma once

// Ground-truth test data: Shepp-Logan phantom, smooth coil sensitivities,
// and noisy multi-coil acquisitions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "inrmri/data_model.hpp"
#include "inrmri/forward_model.hpp"
#include "inrmri/random.hpp"

namespace inrmri {

struct Ellipse {
  double intensity;
  double semi_x;  // semi-axis along the ellipse's own x direction
  double semi_y;
  double center_x;
  double center_y;
  double angle_deg;  // counter-clockwise rotation
};

/// Modified (Toft) Shepp-Logan table; intensities sum into [0, 1].
inline constexpr std::array<Ellipse, 10> kSheppLoganEllipses{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

/// Pixel-center position of column x (left to right, in (-1, 1)).
inline double phantom_x(std::size_t x, std::size_t width) {
  return (2.0 * static_cast<double>(x) + 1.0) / static_cast<double>(width) - 1.0;
}

/// Pixel-center position of row y (top row is +y).
inline double phantom_y(std::size_t y, std::size_t height) {
  return 1.0 - (2.0 * static_cast<double>(y) + 1.0) / static_cast<double>(height);
}

inline ComplexImage ellipse_phantom(std::size_t height, std::size_t width,
                                    std::span<const Ellipse> ellipses) {
  ComplexImage img(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    const double py = phantom_y(y, height);
    for (std::size_t x = 0; x < width; ++x) {
      const double px = phantom_x(x, width);
      double v = 0.0;
      for (const Ellipse& e : ellipses) {
        const double t = e.angle_deg * std::numbers::pi / 180.0;
        const double dx = px - e.center_x, dy = py - e.center_y;
        const double u = dx * std::cos(t) + dy * std::sin(t);
        const double w = -dx * std::sin(t) + dy * std::cos(t);
        if ((u * u) / (e.semi_x * e.semi_x) + (w * w) / (e.semi_y * e.semi_y) <= 1.0) v += e.intensity;
      }
      img(y, x) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

inline ComplexImage shepp_logan(std::size_t height, std::size_t width) {
  detail::require(height >= 16 && width >= 16, "shepp_logan: dimensions must be >= 16");
  return ellipse_phantom(height, width, kSheppLoganEllipses);
}

/// Smooth coil profiles on a ring outside the field of view, normalized so
/// that sum_j |C_j|^2 = 1 at every pixel.
inline SensitivityMaps synth_smaps(std::size_t coils, std::size_t height, std::size_t width,
                                   std::uint64_t seed) {
  detail::require(coils >= 1, "synth_smaps: coils must be >= 1");
  detail::require(height >= 1 && width >= 1, "synth_smaps: empty grid");
  constexpr double kRingRadius = 1.5;
  constexpr double kProfileWidth = 0.9;
  const Philox4x32 rng(seed);

  std::vector<cplx> values(coils * height * width);
  for (std::size_t c = 0; c < coils; ++c) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(coils);
    const double cx = kRingRadius * std::cos(theta), cy = kRingRadius * std::sin(theta);
    const auto b = rng.block(c, /*stream=*/1);
    const double phase0 = std::numbers::pi * (2.0 * Philox4x32::to_unit(b[0], b[1]) - 1.0);
    const double gx = 0.5 * std::numbers::pi * (2.0 * Philox4x32::to_unit(b[2], b[3]) - 1.0);
    const double gy = 0.5 * std::numbers::pi * (2.0 * rng.uniform(c, /*stream=*/2) - 1.0);
    for (std::size_t y = 0; y < height; ++y) {
      const double py = phantom_y(y, height);
      for (std::size_t x = 0; x < width; ++x) {
        const double px = phantom_x(x, width);
        const double d2 = (px - cx) * (px - cx) + (py - cy) * (py - cy);
        const double mag = std::exp(-d2 / (2.0 * kProfileWidth * kProfileWidth));
        values[(c * height + y) * width + x] = std::polar(mag, phase0 + gx * px + gy * py);
      }
    }
  }
  const std::size_t plane = height * width;
  for (std::size_t p = 0; p < plane; ++p) {
    double ss = 0.0;
    for (std::size_t c = 0; c < coils; ++c) ss += std::norm(values[c * plane + p]);
    const double inv = 1.0 / std::sqrt(ss);
    for (std::size_t c = 0; c < coils; ++c) values[c * plane + p] *= inv;
  }
  return SensitivityMaps(coils, height, width, std::move(values));
}

/// forward model on the full grid, plus complex white Gaussian noise drawn
/// per (coil, ky, kx) from a counter-based stream, then masked.
inline KSpaceGrid simulate_acquisition(const ComplexImage& img, const SensitivityMaps& smaps,
                                       const SamplingMask& mask, double noise_sigma,
                                       std::uint64_t seed) {
  detail::check_encoding_dims(img.height(), img.width(), smaps, mask, "simulate_acquisition");
  detail::require(noise_sigma >= 0.0, "simulate_acquisition: noise_sigma must be >= 0");
  KSpaceGrid k = forward_unmasked(img, smaps);
  if (noise_sigma > 0.0) {
    const Philox4x32 rng(seed);
    auto v = k.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto [re, im] = rng.normal_pair(i);
      v[i] += cplx{noise_sigma * re, noise_sigma * im};
    }
  }
  return apply_mask(k, mask);
}

}  // namespace inrmri
