#pragma once

// Centered, orthonormal 2D DFT for arbitrary grid sizes.
//
// 1D transforms use a recursive mixed-radix decimation-in-time scheme with
// radix 4/2/3/5/7/... butterflies. Lengths with a prime factor above
// kMaxDirectRadix go through Bluestein's chirp-z algorithm on a power-of-two
// inner transform.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "inrmri/data_model.hpp"

namespace inrmri {

class FftPlan {
 public:
  static constexpr std::size_t kMaxDirectRadix = 64;

  explicit FftPlan(std::size_t n) : n_(n) {
    detail::require(n >= 1, "FftPlan: length must be >= 1");
    factors_ = factorize(n);
    if (factors_.back() > kMaxDirectRadix) {
      init_bluestein();
    } else {
      twiddles_.resize(n_);
      for (std::size_t k = 0; k < n_; ++k) twiddles_[k] = unit_root(k, n_);
    }
  }

  std::size_t size() const noexcept { return n_; }

  /// Unnormalized forward DFT, X[k] = sum_t x[t] exp(-2 pi i k t / n), in place.
  void forward(std::span<cplx> data) const {
    detail::require(data.size() == n_, "FftPlan: length mismatch");
    if (n_ == 1) return;
    if (bluestein_) {
      bluestein(data);
      return;
    }
    std::vector<cplx> in(data.begin(), data.end());
    recurse(in.data(), 1, data.data(), n_, 0);
  }

  /// Unnormalized inverse DFT (positive exponent), in place.
  void inverse(std::span<cplx> data) const {
    for (auto& z : data) z = std::conj(z);
    forward(data);
    for (auto& z : data) z = std::conj(z);
  }

 private:
  static cplx unit_root(std::size_t k, std::size_t n) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    return {std::cos(a), std::sin(a)};
  }

  static std::vector<std::size_t> factorize(std::size_t n) {
    std::vector<std::size_t> f;
    while (n % 4 == 0) {
      f.push_back(4);
      n /= 4;
    }
    if (n % 2 == 0) {
      f.push_back(2);
      n /= 2;
    }
    for (std::size_t p = 3; p * p <= n; p += 2) {
      while (n % p == 0) {
        f.push_back(p);
        n /= p;
      }
    }
    if (n > 1) f.push_back(n);
    if (f.empty()) f.push_back(1);
    std::stable_sort(f.begin(), f.end(), [](std::size_t a, std::size_t b) {
      // radix-4 stages first, then ascending
      return (a == 4 ? 0 : a) < (b == 4 ? 0 : b);
    });
    return f;
  }

  // out[0..n) = DFT_n of in[0], in[stride], ..., in[(n-1) stride]
  void recurse(const cplx* in, std::size_t stride, cplx* out, std::size_t n,
               std::size_t level) const {
    if (n == 1) {
      out[0] = in[0];
      return;
    }
    const std::size_t p = factors_[level];
    const std::size_t m = n / p;
    for (std::size_t r = 0; r < p; ++r) recurse(in + r * stride, stride * p, out + r * m, m, level + 1);

    const std::size_t tw_step = n_ / n;   // W_n^j  = twiddles_[j * tw_step]
    const std::size_t root_step = n_ / p;  // W_p^j  = twiddles_[j * root_step]
    if (p == 2) {
      for (std::size_t k = 0; k < m; ++k) {
        const cplx a = out[k];
        const cplx b = out[k + m] * twiddles_[k * tw_step];
        out[k] = a + b;
        out[k + m] = a - b;
      }
      return;
    }
    if (p == 4) {
      for (std::size_t k = 0; k < m; ++k) {
        const cplx a0 = out[k];
        const cplx a1 = out[k + m] * twiddles_[k * tw_step];
        const cplx a2 = out[k + 2 * m] * twiddles_[2 * k * tw_step];
        const cplx a3 = out[k + 3 * m] * twiddles_[3 * k * tw_step];
        const cplx s02 = a0 + a2, d02 = a0 - a2;
        const cplx s13 = a1 + a3, d13 = a1 - a3;
        const cplx d13_rot{d13.imag(), -d13.real()};  // -i * d13
        out[k] = s02 + s13;
        out[k + m] = d02 + d13_rot;
        out[k + 2 * m] = s02 - s13;
        out[k + 3 * m] = d02 - d13_rot;
      }
      return;
    }
    std::vector<cplx> t(p);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t r = 0; r < p; ++r) t[r] = out[k + r * m] * twiddles_[r * k * tw_step];
      for (std::size_t s = 0; s < p; ++s) {
        cplx acc = t[0];
        for (std::size_t r = 1; r < p; ++r) acc += t[r] * twiddles_[((r * s) % p) * root_step];
        out[k + s * m] = acc;
      }
    }
  }

  void init_bluestein() {
    std::size_t m = 1;
    while (m < 2 * n_ - 1) m <<= 1;
    inner_ = std::make_unique<FftPlan>(m);
    chirp_.resize(n_);
    const std::size_t two_n = 2 * n_;
    for (std::size_t k = 0; k < n_; ++k) {
      // exp(-i pi k^2 / n) with k^2 reduced mod 2n for accuracy
      const std::size_t k2 = (k * k) % two_n;
      const double a = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n_);
      chirp_[k] = {std::cos(a), std::sin(a)};
    }
    chirp_spectrum_.assign(m, cplx{});
    chirp_spectrum_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n_; ++k) {
      chirp_spectrum_[k] = std::conj(chirp_[k]);
      chirp_spectrum_[m - k] = std::conj(chirp_[k]);
    }
    inner_->forward(chirp_spectrum_);
    bluestein_ = true;
  }

  void bluestein(std::span<cplx> data) const {
    const std::size_t m = inner_->size();
    std::vector<cplx> a(m, cplx{});
    for (std::size_t k = 0; k < n_; ++k) a[k] = data[k] * chirp_[k];
    inner_->forward(a);
    for (std::size_t k = 0; k < m; ++k) a[k] *= chirp_spectrum_[k];
    inner_->inverse(a);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n_; ++k) data[k] = a[k] * scale * chirp_[k];
  }

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<cplx> twiddles_;
  bool bluestein_ = false;
  std::unique_ptr<FftPlan> inner_;
  std::vector<cplx> chirp_;
  std::vector<cplx> chirp_spectrum_;
};

/// Reusable centered orthonormal 2D transform for a fixed grid size.
class Fft2c {
 public:
  Fft2c(std::size_t height, std::size_t width)
      : height_(height), width_(width), rows_(width), cols_(height) {
    detail::require(height >= 1 && width >= 1, "Fft2c: empty grid");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  void forward(std::span<cplx> plane) const { apply(plane, false); }
  void inverse(std::span<cplx> plane) const { apply(plane, true); }

 private:
  // out[(i + n/2) % n] = in[i]
  static void shift_rows_cols(std::span<cplx> plane, std::size_t h, std::size_t w, bool inverse) {
    std::vector<cplx> tmp(plane.begin(), plane.end());
    const std::size_t sy = h / 2, sx = w / 2;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t ty = (y + sy) % h, tx = (x + sx) % w;
        if (inverse) {
          plane[y * w + x] = tmp[ty * w + tx];
        } else {
          plane[ty * w + tx] = tmp[y * w + x];
        }
      }
    }
  }

  void apply(std::span<cplx> plane, bool inverse) const {
    detail::require(plane.size() == height_ * width_, "Fft2c: plane size mismatch");
    shift_rows_cols(plane, height_, width_, /*inverse=*/true);
    for (std::size_t y = 0; y < height_; ++y) {
      auto row = plane.subspan(y * width_, width_);
      inverse ? rows_.inverse(row) : rows_.forward(row);
    }
    std::vector<cplx> col(height_);
    for (std::size_t x = 0; x < width_; ++x) {
      for (std::size_t y = 0; y < height_; ++y) col[y] = plane[y * width_ + x];
      inverse ? cols_.inverse(col) : cols_.forward(col);
      for (std::size_t y = 0; y < height_; ++y) plane[y * width_ + x] = col[y];
    }
    shift_rows_cols(plane, height_, width_, /*inverse=*/false);
    const double scale = 1.0 / std::sqrt(static_cast<double>(height_ * width_));
    for (auto& z : plane) z *= scale;
  }

  std::size_t height_;
  std::size_t width_;
  FftPlan rows_;
  FftPlan cols_;
};

inline ComplexImage fft2c(const ComplexImage& img) {
  detail::require(detail::all_finite(img.values()), "fft2c: non-finite input");
  ComplexImage out = img;
  Fft2c(img.height(), img.width()).forward(out.values());
  return out;
}

inline ComplexImage ifft2c(const ComplexImage& k) {
  detail::require(detail::all_finite(k.values()), "ifft2c: non-finite input");
  ComplexImage out = k;
  Fft2c(k.height(), k.width()).inverse(out.values());
  return out;
}

}  // namespace inrmri
