#pragma once

// GRAPPA: linear k-space interpolation kernels calibrated on the ACS band.
//
// For a missing row y at distance delta = (y - offset) mod R past the last
// acquired modular row, the kernel reads ky_taps acquired rows
//   y - delta + (k - (ky_taps - 1) / 2) * R,   k = 0 .. ky_taps - 1
// and kx_extent columns centered on the target column (circular in kx).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inrmri/data_model.hpp"
#include "inrmri/reconstructor.hpp"

namespace inrmri {

using CMat = Eigen::MatrixXcd;

struct GrappaKernel {
  int R = 2;
  int kx_extent = 5;
  int ky_taps = 4;
  double tikhonov = 1e-6;
  std::size_t coils = 1;
  // weights[delta - 1] is (coils * ky_taps * kx_extent) x coils; source index
  // = (coil_in * ky_taps + tap) * kx_extent + column.
  std::vector<CMat> weights;
  double fit_residual = 0.0;  // max relative calibration residual over offsets

  std::size_t sources() const {
    return coils * static_cast<std::size_t>(ky_taps) * static_cast<std::size_t>(kx_extent);
  }

  /// weight for (coil_out, delta in 1..R-1, coil_in, tap, column)
  cplx& at(std::size_t co, int delta, std::size_t ci, int tap, int col) {
    return weights[static_cast<std::size_t>(delta - 1)](source_index(ci, tap, col),
                                                        static_cast<Eigen::Index>(co));
  }
  const cplx& at(std::size_t co, int delta, std::size_t ci, int tap, int col) const {
    return weights[static_cast<std::size_t>(delta - 1)](source_index(ci, tap, col),
                                                        static_cast<Eigen::Index>(co));
  }

  Eigen::Index source_index(std::size_t ci, int tap, int col) const {
    return static_cast<Eigen::Index>((ci * static_cast<std::size_t>(ky_taps) + static_cast<std::size_t>(tap)) *
                                         static_cast<std::size_t>(kx_extent) +
                                     static_cast<std::size_t>(col));
  }

  void validate() const {
    detail::require(R >= 2, "GrappaKernel: R must be >= 2");
    detail::require(kx_extent >= 1 && kx_extent % 2 == 1, "GrappaKernel: kx_extent must be odd");
    detail::require(ky_taps >= 1, "GrappaKernel: ky_taps must be >= 1");
    detail::require(weights.size() == static_cast<std::size_t>(R - 1),
                    "GrappaKernel: expected R-1 weight blocks");
    for (const auto& w : weights)
      detail::require(static_cast<std::size_t>(w.rows()) == sources() &&
                          static_cast<std::size_t>(w.cols()) == coils,
                      "GrappaKernel: weight block has the wrong shape");
  }
};

namespace detail {

inline int first_tap_offset(int ky_taps) { return -((ky_taps - 1) / 2); }

inline std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

// One row of the system matrix: the kernel neighborhood around (row, x) given
// the source row indices.
inline void gather_sources(const CoilStack& k, const std::vector<std::size_t>& src_rows, std::size_t x,
                           int kx_extent, Eigen::Ref<Eigen::RowVectorXcd, 0, Eigen::InnerStride<>> row) {
  const int half = kx_extent / 2;
  Eigen::Index idx = 0;
  for (std::size_t c = 0; c < k.coils(); ++c)
    for (std::size_t sr : src_rows)
      for (int j = 0; j < kx_extent; ++j)
        row(idx++) = k(c, sr, wrap(static_cast<long>(x) + j - half, k.width()));
}

}  // namespace detail

/// Fits the kernel on a fully-sampled calibration region (coils x rows x width).
inline GrappaKernel grappa_calibrate(const KSpaceGrid& acs, int R, int kx_extent = 5, int ky_taps = 4,
                                     double tikhonov = 1e-6) {
  detail::require(R >= 2, "grappa_calibrate: R must be >= 2");
  detail::require(kx_extent >= 1 && kx_extent % 2 == 1, "grappa_calibrate: kx_extent must be odd");
  detail::require(ky_taps >= 1, "grappa_calibrate: ky_taps must be >= 1");
  detail::require(tikhonov >= 0.0, "grappa_calibrate: tikhonov must be >= 0");

  GrappaKernel kernel;
  kernel.R = R;
  kernel.kx_extent = kx_extent;
  kernel.ky_taps = ky_taps;
  kernel.tikhonov = tikhonov;
  kernel.coils = acs.coils();
  const std::size_t n_src = kernel.sources();
  const long rows = static_cast<long>(acs.height());
  const int t0 = detail::first_tap_offset(ky_taps);

  for (int delta = 1; delta < R; ++delta) {
    std::vector<long> targets;
    for (long t = 0; t < rows; ++t) {
      const long lo = t - delta + static_cast<long>(t0) * R;
      const long hi = t - delta + static_cast<long>(t0 + ky_taps - 1) * R;
      if (lo >= 0 && hi < rows) targets.push_back(t);
    }
    const std::size_t equations = targets.size() * acs.width();
    if (equations < n_src) throw CalibrationError(equations, n_src);

    CMat A(static_cast<Eigen::Index>(equations), static_cast<Eigen::Index>(n_src));
    CMat B(static_cast<Eigen::Index>(equations), static_cast<Eigen::Index>(acs.coils()));
    std::vector<std::size_t> src_rows(static_cast<std::size_t>(ky_taps));
    Eigen::Index e = 0;
    for (long t : targets) {
      for (int k = 0; k < ky_taps; ++k)
        src_rows[static_cast<std::size_t>(k)] = static_cast<std::size_t>(t - delta + static_cast<long>(t0 + k) * R);
      for (std::size_t x = 0; x < acs.width(); ++x, ++e) {
        detail::gather_sources(acs, src_rows, x, kx_extent, A.row(e));
        for (std::size_t c = 0; c < acs.coils(); ++c)
          B(e, static_cast<Eigen::Index>(c)) = acs(c, static_cast<std::size_t>(t), x);
      }
    }

    CMat X;
    if (tikhonov > 0.0) {
      CMat normal = A.adjoint() * A;
      const double damping = tikhonov * normal.trace().real() / static_cast<double>(n_src);
      normal.diagonal().array() += damping;
      X = normal.ldlt().solve(A.adjoint() * B);
    } else {
      X = A.completeOrthogonalDecomposition().solve(B);
    }
    const double bnorm = B.norm();
    const double rel = bnorm > 0.0 ? (A * X - B).norm() / bnorm : (A * X).norm();
    kernel.fit_residual = std::max(kernel.fit_residual, rel);
    kernel.weights.push_back(std::move(X));
  }
  return kernel;
}

/// ACS rows of `acquired` as a standalone grid.
inline KSpaceGrid extract_acs(const KSpaceGrid& acquired, const SamplingMask& mask) {
  const std::size_t begin = mask.acs_begin(), n = static_cast<std::size_t>(mask.acs_lines());
  KSpaceGrid acs(acquired.coils(), n, acquired.width());
  for (std::size_t c = 0; c < acquired.coils(); ++c)
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t x = 0; x < acquired.width(); ++x) acs(c, r, x) = acquired(c, begin + r, x);
  return acs;
}

/// Fills every unsampled row with the kernel prediction; acquired rows are copied verbatim.
inline KSpaceGrid grappa_fill(const KSpaceGrid& acquired, const SamplingMask& mask,
                              const GrappaKernel& kernel) {
  kernel.validate();
  detail::require(acquired.height() == mask.height() && acquired.width() == mask.width(),
                  "grappa: k-space and mask dimensions differ");
  detail::require(acquired.coils() == kernel.coils, "grappa: kernel coil count does not match data");
  detail::require(mask.acceleration() == kernel.R,
                  "grappa: kernel R=" + std::to_string(kernel.R) + " does not match mask R=" +
                      std::to_string(mask.acceleration()));
  detail::require(mask == make_uniform_mask(mask.height(), mask.width(), mask.acceleration(),
                                            mask.acs_lines(), mask.offset()),
                  "grappa: mask is not a uniform-with-ACS pattern");

  const long h = static_cast<long>(acquired.height());
  const long R = kernel.R;
  const long offset = mask.offset();
  const long last_modular = offset + ((h - 1 - offset) / R) * R;
  const int t0 = detail::first_tap_offset(kernel.ky_taps);

  KSpaceGrid out = acquired;
  std::vector<std::size_t> src_rows(static_cast<std::size_t>(kernel.ky_taps));
  Eigen::RowVectorXcd src(static_cast<Eigen::Index>(kernel.sources()));
  for (long y = 0; y < h; ++y) {
    if (mask.row_sampled(static_cast<std::size_t>(y))) continue;
    const int delta = static_cast<int>(((y - offset) % R + R) % R);
    for (int k = 0; k < kernel.ky_taps; ++k) {
      const long r = std::clamp(y - delta + static_cast<long>(t0 + k) * R, offset, last_modular);
      src_rows[static_cast<std::size_t>(k)] = static_cast<std::size_t>(r);
    }
    const CMat& w = kernel.weights[static_cast<std::size_t>(delta - 1)];
    for (std::size_t x = 0; x < acquired.width(); ++x) {
      detail::gather_sources(acquired, src_rows, x, kernel.kx_extent, src);
      const Eigen::RowVectorXcd pred = src * w;
      for (std::size_t c = 0; c < acquired.coils(); ++c)
        out(c, static_cast<std::size_t>(y), x) = pred(static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

inline ReconResult grappa_reconstruct(const KSpaceGrid& acquired, const SamplingMask& mask,
                                      const GrappaKernel& kernel, const SensitivityMaps& smaps) {
  detail::require(smaps.coils() == acquired.coils() && smaps.same_grid(acquired.height(), acquired.width()),
                  "grappa: sensitivity maps do not match k-space");
  ReconResult out;
  out.final_kspace = grappa_fill(acquired, mask, kernel);
  const CoilStack coils = coil_images_of(out.final_kspace);
  out.combined = sense1_combine(coils, smaps);
  for (std::size_t c = 0; c < coils.coils(); ++c) out.coil_images.push_back(coils.image(c));
  return out;
}

/// Calibrates on the ACS band of `acquired` and reconstructs.
inline ReconResult grappa_reconstruct(const KSpaceGrid& acquired, const SamplingMask& mask,
                                      const SensitivityMaps& smaps, int kx_extent = 5, int ky_taps = 4,
                                      double tikhonov = 1e-6) {
  const GrappaKernel kernel =
      grappa_calibrate(extract_acs(acquired, mask), mask.acceleration(), kx_extent, ky_taps, tikhonov);
  return grappa_reconstruct(acquired, mask, kernel, smaps);
}

}  // namespace inrmri
