#include <gtest/gtest.h>

#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace inrmri;

TEST(Psnr, IdenticalIsCapped) {
  const auto [t, r] = testing_support::metric_pair(1, 16);
  EXPECT_EQ(psnr(r, r), kPsnrCap);
}

TEST(Psnr, UniformErrorTwentyDb) {
  ComplexImage ref(8, 8), test(8, 8);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref.values()[i] = 0.5 + 0.5 * static_cast<double>(i % 2);
    test.values()[i] = ref.values()[i] + 0.1;
  }
  EXPECT_NEAR(psnr(test, ref), 20.0, 1e-12);
}

TEST(Psnr, MatchesScript16x16) {
  const auto [t, r] = testing_support::metric_pair(5, 16);
  EXPECT_NEAR(psnr(t, r), testing_support::kPsnr16Seed5, 1e-9);
}

TEST(Metrics, MatchScriptOnRandomPairs) {
  for (std::size_t k = 0; k < testing_support::kMetricPairs.size(); ++k) {
    const auto [t, r] = testing_support::metric_pair(1000 + k, 32);
    EXPECT_NEAR(psnr(t, r), testing_support::kMetricPairs[k].first, 1e-6) << k;
    EXPECT_NEAR(ssim(t, r), testing_support::kMetricPairs[k].second, 1e-6) << k;
  }
}

TEST(Psnr, ReferenceDeterminesPeak) {
  ComplexImage a(4, 4), b(4, 4);
  for (std::size_t i = 0; i < 16; ++i) {
    a.values()[i] = 1.0;
    b.values()[i] = 0.5;
  }
  EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(0.25 / 0.25), 1e-12);
  EXPECT_NEAR(psnr(b, a), 10.0 * std::log10(1.0 / 0.25), 1e-12);
}

TEST(Psnr, Errors) {
  EXPECT_THROW(psnr(ComplexImage(4, 4), ComplexImage(4, 4)), std::invalid_argument);
  ComplexImage r(4, 4);
  r(0, 0) = 1.0;
  EXPECT_THROW(psnr(ComplexImage(4, 5), r), std::invalid_argument);
}

TEST(Ssim, IdenticalIsExactlyOne) {
  const auto [t, r] = testing_support::metric_pair(3, 20);
  EXPECT_EQ(ssim(t, t), 1.0);
  EXPECT_EQ(ssim(r, r), 1.0);
}

TEST(Ssim, ZeroTestImage) {
  const ComplexImage ref = testing_support::ssim_zero_reference();
  const double v = ssim(ComplexImage(24, 24), ref);
  EXPECT_GT(v, 0.0);
  EXPECT_NEAR(v, testing_support::kSsimZeroTest, 1e-9);
}

TEST(Ssim, BoundedAndErrors) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto [t, r] = testing_support::metric_pair(s, 12);
    const double v = ssim(t, r);
    EXPECT_LE(std::abs(v), 1.0);
  }
  const auto [t, r] = testing_support::metric_pair(0, 10);
  EXPECT_THROW(ssim(t, r), std::invalid_argument);
  EXPECT_THROW(ssim(ComplexImage(12, 12), ComplexImage(12, 13)), std::invalid_argument);
}

TEST(Metrics, InvariantUnderGlobalPhase) {
  const auto [t, r] = testing_support::metric_pair(8, 16);
  const cplx rot = std::polar(1.0, 0.7);
  ComplexImage t2 = t, r2 = r;
  for (cplx& z : t2.values()) z *= rot;
  for (cplx& z : r2.values()) z *= rot;
  EXPECT_NEAR(psnr(t2, r2), psnr(t, r), 1e-9);
  EXPECT_NEAR(ssim(t2, r2), ssim(t, r), 1e-9);
}
