#pragma once

// Branch-free sin/cos pair for the activation hot loop. Cody-Waite reduction
// by pi/2 followed by the fdlibm minimax kernels; accurate to a few ulp for
// |x| < 2^30, written so the compiler can vectorize the loop body.

#include <bit>
#include <cstddef>
#include <cstdint>

namespace inrmri::fastmath {

struct SinCos {
  double sin;
  double cos;
};

inline SinCos sincos(double x) noexcept {
  constexpr double kTwoOverPi = 6.36619772367581382433e-01;
  constexpr double kPio2Hi = 1.57079632673412561417e+00;
  constexpr double kPio2Mid = 6.07710050630396597660e-11;
  constexpr double kPio2Lo = 2.02226624879595063154e-21;
  constexpr double kRound = 0x1.8p52;

  const double shifted = x * kTwoOverPi + kRound;
  const std::uint64_t quadrant = std::bit_cast<std::uint64_t>(shifted) & 3u;
  const double q = shifted - kRound;
  const double r = ((x - q * kPio2Hi) - q * kPio2Mid) - q * kPio2Lo;

  const double z = r * r;
  const double ps = -1.66666666666666324348e-01 +
                    z * (8.33333333332248946124e-03 +
                         z * (-1.98412698298579493134e-04 +
                              z * (2.75573137070700676789e-06 +
                                   z * (-2.50507602534068634195e-08 + z * 1.58969099521155010221e-10))));
  const double pc = 4.16666666666666019037e-02 +
                    z * (-1.38888888888741095749e-03 +
                         z * (2.48015872894767294178e-05 +
                              z * (-2.75573143513906633035e-07 +
                                   z * (2.08757232129817482790e-09 + z * -1.13596475577881948265e-11))));
  const double s = r + r * z * ps;
  const double c = 1.0 - 0.5 * z + z * z * pc;

  const bool swap = (quadrant & 1u) != 0;
  const double s1 = swap ? c : s;
  const double c1 = swap ? s : c;
  return {(quadrant & 2u) ? -s1 : s1, ((quadrant + 1) & 2u) ? -c1 : c1};
}

/// out[i] = sin(omega * z[i]), slope[i] = omega * cos(omega * z[i]).
/// `out` may alias `z`.
template <class T>
void sine_activation(const T* z, T omega, T* out, T* slope, std::size_t n) noexcept {
  const double w = static_cast<double>(omega);
  for (std::size_t i = 0; i < n; ++i) {
    const SinCos sc = sincos(w * static_cast<double>(z[i]));
    out[i] = static_cast<T>(sc.sin);
    slope[i] = static_cast<T>(w * sc.cos);
  }
}

/// Column-major (rows x cols) variant that adds bias[r] to every column
/// before the activation: out = sin(omega * (z + b)).
template <class T>
void sine_activation_biased(T* z, const T* bias, std::size_t rows, std::size_t cols, T omega,
                            T* slope) noexcept {
  const double w = static_cast<double>(omega);
  for (std::size_t c = 0; c < cols; ++c) {
    T* zc = z + c * rows;
    T* sc_out = slope + c * rows;
    for (std::size_t r = 0; r < rows; ++r) {
      const T pre = zc[r] + bias[r];
      const SinCos sc = sincos(w * static_cast<double>(pre));
      zc[r] = static_cast<T>(sc.sin);
      sc_out[r] = static_cast<T>(w * sc.cos);
    }
  }
}

}  // namespace inrmri::fastmath
