#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "inrmri/errors.hpp"

namespace inrmri {

using cplx = std::complex<double>;

namespace detail {

inline bool all_finite(std::span<const cplx> v) {
  return std::all_of(v.begin(), v.end(),
                     [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

}  // namespace detail

/// Single complex plane, row-major.
class ComplexImage {
 public:
  ComplexImage() = default;

  ComplexImage(std::size_t height, std::size_t width)
      : height_(height), width_(width), values_(height * width) {}

  ComplexImage(std::size_t height, std::size_t width, std::vector<cplx> values)
      : height_(height), width_(width), values_(std::move(values)) {
    detail::require(values_.size() == height_ * width_,
                    "ComplexImage: values size " + std::to_string(values_.size()) +
                        " does not match " + std::to_string(height_) + "x" + std::to_string(width_));
    detail::require(detail::all_finite(values_), "ComplexImage: non-finite entry");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }

  cplx& operator()(std::size_t y, std::size_t x) { return values_[y * width_ + x]; }
  const cplx& operator()(std::size_t y, std::size_t x) const { return values_[y * width_ + x]; }

  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }

  bool same_shape(const ComplexImage& o) const noexcept {
    return height_ == o.height_ && width_ == o.width_;
  }

  friend bool operator==(const ComplexImage&, const ComplexImage&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<cplx> values_;
};

/// Stack of per-coil complex planes, coil-major, row-major within a coil.
class CoilStack {
 public:
  CoilStack() = default;

  CoilStack(std::size_t coils, std::size_t height, std::size_t width)
      : coils_(coils), height_(height), width_(width), values_(coils * height * width) {
    detail::require(coils_ >= 1, "coil count must be >= 1");
  }

  CoilStack(std::size_t coils, std::size_t height, std::size_t width, std::vector<cplx> values)
      : coils_(coils), height_(height), width_(width), values_(std::move(values)) {
    detail::require(coils_ >= 1, "coil count must be >= 1");
    detail::require(values_.size() == coils_ * height_ * width_,
                    "coil stack values size does not match dimensions");
    detail::require(detail::all_finite(values_), "coil stack has a non-finite entry");
  }

  std::size_t coils() const noexcept { return coils_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t plane_size() const noexcept { return height_ * width_; }

  std::span<cplx> plane(std::size_t c) { return {values_.data() + c * plane_size(), plane_size()}; }
  std::span<const cplx> plane(std::size_t c) const {
    return {values_.data() + c * plane_size(), plane_size()};
  }

  cplx& operator()(std::size_t c, std::size_t y, std::size_t x) {
    return values_[(c * height_ + y) * width_ + x];
  }
  const cplx& operator()(std::size_t c, std::size_t y, std::size_t x) const {
    return values_[(c * height_ + y) * width_ + x];
  }

  ComplexImage image(std::size_t c) const {
    auto p = plane(c);
    return ComplexImage(height_, width_, std::vector<cplx>(p.begin(), p.end()));
  }

  void set_plane(std::size_t c, const ComplexImage& img) {
    detail::require(img.height() == height_ && img.width() == width_, "set_plane: shape mismatch");
    std::copy(img.values().begin(), img.values().end(), plane(c).begin());
  }

  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }

  bool same_grid(std::size_t h, std::size_t w) const noexcept { return height_ == h && width_ == w; }

  friend bool operator==(const CoilStack&, const CoilStack&) = default;

 private:
  std::size_t coils_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<cplx> values_;
};

/// Multi-coil k-space samples; also holds predicted and composite k-space.
class KSpaceGrid : public CoilStack {
 public:
  using CoilStack::CoilStack;
  friend bool operator==(const KSpaceGrid&, const KSpaceGrid&) = default;
};

/// Per-coil complex sensitivity weighting.
class SensitivityMaps : public CoilStack {
 public:
  SensitivityMaps() = default;

  SensitivityMaps(std::size_t coils, std::size_t height, std::size_t width)
      : CoilStack(coils, height, width) {}

  SensitivityMaps(std::size_t coils, std::size_t height, std::size_t width, std::vector<cplx> values)
      : CoilStack(coils, height, width, std::move(values)) {
    for (std::size_t p = 0; p < plane_size(); ++p) {
      bool any = false;
      double ss = 0.0;
      for (std::size_t c = 0; c < this->coils(); ++c) {
        const cplx v = plane(c)[p];
        any = any || v != cplx{};
        ss += std::norm(v);
      }
      detail::require(!any || ss > 0.0, "SensitivityMaps: zero sum-of-squares at a covered pixel");
    }
  }

  friend bool operator==(const SensitivityMaps&, const SensitivityMaps&) = default;
};

/// Cartesian line-sampling pattern. Phase encoding runs along rows.
class SamplingMask {
 public:
  SamplingMask() = default;

  /// Arbitrary line pattern; structure fields describe how it was generated.
  SamplingMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> sampled_rows,
               int acceleration, int acs_lines, int offset)
      : height_(height),
        width_(width),
        rows_(std::move(sampled_rows)),
        acceleration_(acceleration),
        acs_lines_(acs_lines),
        offset_(offset) {
    detail::require(rows_.size() == height_, "SamplingMask: row pattern size mismatch");
    detail::require(width_ >= 1, "SamplingMask: width must be >= 1");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  int acceleration() const noexcept { return acceleration_; }
  int acs_lines() const noexcept { return acs_lines_; }
  int offset() const noexcept { return offset_; }

  bool row_sampled(std::size_t ky) const { return rows_[ky] != 0; }
  bool sampled(std::size_t ky, std::size_t /*kx*/) const { return rows_[ky] != 0; }

  std::size_t sampled_rows() const {
    return static_cast<std::size_t>(std::count(rows_.begin(), rows_.end(), std::uint8_t{1}));
  }
  std::size_t sampled_count() const { return sampled_rows() * width_; }

  /// First row of the centered ACS band.
  std::size_t acs_begin() const noexcept {
    return (height_ - static_cast<std::size_t>(acs_lines_)) / 2;
  }
  std::size_t acs_end() const noexcept { return acs_begin() + static_cast<std::size_t>(acs_lines_); }

  std::span<const std::uint8_t> rows() const noexcept { return rows_; }

  friend bool operator==(const SamplingMask&, const SamplingMask&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> rows_;
  int acceleration_ = 1;
  int acs_lines_ = 0;
  int offset_ = 0;
};

/// Normalized (x, y) pixel-center lattice spanning [-1, 1] on both axes.
class CoordinateGrid {
 public:
  CoordinateGrid(std::size_t height, std::size_t width) : height_(height), width_(width) {
    detail::require(height >= 2, "make_coordinate_grid: height must be >= 2");
    detail::require(width >= 2, "make_coordinate_grid: width must be >= 2");
    coords_.reserve(height * width);
    const double sy = 2.0 / static_cast<double>(height - 1);
    const double sx = 2.0 / static_cast<double>(width - 1);
    for (std::size_t y = 0; y < height; ++y) {
      // Outermost pixel centers land exactly on +/-1.
      const double cy = (y + 1 == height) ? 1.0 : -1.0 + sy * static_cast<double>(y);
      for (std::size_t x = 0; x < width; ++x) {
        const double cx = (x + 1 == width) ? 1.0 : -1.0 + sx * static_cast<double>(x);
        coords_.push_back({cx, cy});
      }
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return coords_.size(); }

  /// (x, y) of pixel p in row-major order.
  const std::array<double, 2>& operator[](std::size_t p) const { return coords_[p]; }
  std::span<const std::array<double, 2>> coords() const noexcept { return coords_; }

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<std::array<double, 2>> coords_;
};

inline SamplingMask make_uniform_mask(std::size_t height, std::size_t width, int R, int acs_lines,
                                      int offset = 0) {
  detail::require(height >= 1, "make_uniform_mask: height must be >= 1");
  detail::require(width >= 1, "make_uniform_mask: width must be >= 1");
  detail::require(R >= 1 && static_cast<std::size_t>(R) <= height,
                  "make_uniform_mask: R must satisfy 1 <= R <= height");
  detail::require(acs_lines >= 0 && static_cast<std::size_t>(acs_lines) <= height,
                  "make_uniform_mask: acs_lines must satisfy 0 <= acs_lines <= height");
  detail::require(offset >= 0 && offset < R, "make_uniform_mask: offset must satisfy 0 <= offset < R");

  std::vector<std::uint8_t> rows(height, 0);
  const std::size_t acs_begin = (height - static_cast<std::size_t>(acs_lines)) / 2;
  const std::size_t acs_end = acs_begin + static_cast<std::size_t>(acs_lines);
  for (std::size_t r = 0; r < height; ++r) {
    const bool modular = static_cast<int>(r % static_cast<std::size_t>(R)) == offset;
    const bool acs = r >= acs_begin && r < acs_end;
    rows[r] = (modular || acs) ? 1 : 0;
  }
  return SamplingMask(height, width, std::move(rows), R, acs_lines, offset);
}

inline KSpaceGrid apply_mask(const KSpaceGrid& k, const SamplingMask& m) {
  detail::require(k.height() == m.height() && k.width() == m.width(),
                  "apply_mask: k-space and mask dimensions differ");
  KSpaceGrid out = k;
  for (std::size_t c = 0; c < k.coils(); ++c) {
    auto p = out.plane(c);
    for (std::size_t y = 0; y < k.height(); ++y) {
      if (m.row_sampled(y)) continue;
      std::fill_n(p.begin() + static_cast<std::ptrdiff_t>(y * k.width()), k.width(), cplx{});
    }
  }
  return out;
}

inline CoordinateGrid make_coordinate_grid(std::size_t height, std::size_t width) {
  return CoordinateGrid(height, width);
}

}  // namespace inrmri
