#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace inrmri;
using testing_support::Lcg;
using testing_support::brute_dft2c;
using testing_support::max_abs_diff;

TEST(Fft2c, CenterDeltaIsFlat) {
  ComplexImage img(8, 8);
  img(4, 4) = 1.0;
  const ComplexImage k = fft2c(img);
  for (const cplx& z : k.values()) {
    EXPECT_NEAR(z.real(), 0.125, 1e-15);
    EXPECT_NEAR(z.imag(), 0.0, 1e-15);
  }
}

TEST(Fft2c, ConstantConcentratesAtCenter) {
  ComplexImage img(8, 8);
  for (cplx& z : img.values()) z = 1.0;
  const ComplexImage k = fft2c(img);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) {
      const cplx expect = (y == 4 && x == 4) ? cplx{8.0, 0.0} : cplx{};
      EXPECT_NEAR(std::abs(k(y, x) - expect), 0.0, 1e-12) << y << "," << x;
    }
}

TEST(Fft2c, InverseOfConstantIsCenterDelta) {
  ComplexImage k(6, 10);
  for (cplx& z : k.values()) z = {0.5, -0.25};
  const ComplexImage img = ifft2c(k);
  const double scale = std::sqrt(60.0);
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 10; ++x) {
      const cplx expect = (y == 3 && x == 5) ? cplx{0.5, -0.25} * scale : cplx{};
      EXPECT_NEAR(std::abs(img(y, x) - expect), 0.0, 1e-12);
    }
}

TEST(Fft2c, MatchesBruteForceDft) {
  Lcg g(11);
  const ComplexImage x = testing_support::random_image(g, 8, 8);
  EXPECT_LT(max_abs_diff(fft2c(x), brute_dft2c(x, -1)), 1e-9);
  EXPECT_LT(max_abs_diff(ifft2c(x), brute_dft2c(x, +1)), 1e-9);
}

// mixed radices, odd sizes, and primes large enough to go through the chirp path
TEST(Fft2c, MatchesBruteForceOnAwkwardSizes) {
  Lcg g(12);
  const std::array<std::pair<std::size_t, std::size_t>, 7> shapes{
      {{7, 9}, {1, 5}, {12, 10}, {3, 1}, {67, 6}, {5, 71}, {36, 25}}};
  for (auto [h, w] : shapes) {
    const ComplexImage x = testing_support::random_image(g, h, w);
    EXPECT_LT(max_abs_diff(fft2c(x), brute_dft2c(x, -1)), 1e-9) << h << "x" << w;
    EXPECT_LT(max_abs_diff(ifft2c(x), brute_dft2c(x, +1)), 1e-9) << h << "x" << w;
  }
}

TEST(Fft2c, RoundTrip) {
  Lcg g(13);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{16, 16}, {7, 9}, {128, 96}, {97, 5}}) {
    const ComplexImage x = testing_support::random_image(g, h, w);
    EXPECT_LT(max_abs_diff(ifft2c(fft2c(x)), x), 1e-12);
    EXPECT_LT(max_abs_diff(fft2c(ifft2c(x)), x), 1e-12);
  }
}

TEST(Fft2c, Unitarity) {
  Lcg g(14);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{7, 9}, {8, 8}, {30, 14}, {131, 2}}) {
    const ComplexImage x = testing_support::random_image(g, h, w);
    const double n0 = testing_support::norm2(x.values());
    EXPECT_NEAR(testing_support::norm2(fft2c(x).values()) / n0, 1.0, 1e-10);
    EXPECT_NEAR(testing_support::norm2(ifft2c(x).values()) / n0, 1.0, 1e-10);
  }
}

TEST(Fft2c, Linearity) {
  Lcg g(15);
  const ComplexImage x = testing_support::random_image(g, 9, 12);
  const ComplexImage y = testing_support::random_image(g, 9, 12);
  const cplx a{0.3, -1.7}, b{-2.0, 0.4};
  ComplexImage mix(9, 12);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = a * x.values()[i] + b * y.values()[i];
  const ComplexImage fx = fft2c(x), fy = fft2c(y), fm = fft2c(mix);
  ComplexImage expect(9, 12);
  for (std::size_t i = 0; i < mix.size(); ++i) expect.values()[i] = a * fx.values()[i] + b * fy.values()[i];
  EXPECT_LT(max_abs_diff(fm, expect) / testing_support::norm2(expect.values()), 1e-10);
}

TEST(Fft2c, AdjointIdentity) {
  Lcg g(16);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {7, 9}}) {
    const ComplexImage x = testing_support::random_image(g, h, w);
    const ComplexImage y = testing_support::random_image(g, h, w);
    const cplx lhs = testing_support::inner(fft2c(x), y);
    const cplx rhs = testing_support::inner(x, ifft2c(y));
    EXPECT_LT(std::abs(lhs - rhs) / std::abs(lhs), 1e-10);
  }
}

TEST(FftPlan, OneDimensionalMatchesDirectSum) {
  Lcg g(17);
  for (std::size_t n : {1u, 2u, 3u, 4u, 8u, 15u, 16u, 49u, 64u, 67u, 128u, 131u, 250u}) {
    std::vector<cplx> x(n);
    for (cplx& z : x) z = testing_support::random_cplx(g);
    std::vector<cplx> y = x;
    FftPlan(n).forward(y);
    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      cplx s{};
      for (std::size_t j = 0; j < n; ++j)
        s += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) /
                                        static_cast<double>(n));
      err = std::max(err, std::abs(s - y[k]));
    }
    EXPECT_LT(err, 1e-9 * static_cast<double>(n)) << n;
  }
}

TEST(Fft2c, RejectsNonFiniteInput) {
  ComplexImage x(4, 4);
  x(1, 1) = {std::nan(""), 0.0};
  EXPECT_THROW(fft2c(x), std::invalid_argument);
}
