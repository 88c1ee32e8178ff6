#include <gtest/gtest.h>

#include <cstring>
#include <iostream>

#include "grappa_oracle.hpp"
#include "test_support.hpp"

using namespace inrmri;
using testing_support::Lcg;
using testing_support::plane_wave_kspace;
using testing_support::relative_error;

TEST(Grappa, KernelConsistentDataIsRecoveredExactly) {
  for (int R : {2, 3}) {
    const std::size_t h = R == 2 ? 33 : 34, w = 24;
    const KSpaceGrid full = plane_wave_kspace(4, h, w, 10, 100 + static_cast<std::uint64_t>(R));
    const SamplingMask mask = make_uniform_mask(h, w, R, 12);
    const KSpaceGrid acquired = apply_mask(full, mask);
    const GrappaKernel kernel = grappa_calibrate(extract_acs(acquired, mask), R, 5, 2, 0.0);
    EXPECT_LT(kernel.fit_residual, 1e-8) << "R=" << R;
    const KSpaceGrid filled = grappa_fill(acquired, mask, kernel);
    EXPECT_LT(relative_error(filled, full), 1e-6) << "R=" << R;

    const SensitivityMaps smaps = synth_smaps(4, h, w, 1);
    const ReconResult r = grappa_reconstruct(acquired, mask, kernel, smaps);
    EXPECT_GT(psnr(r.combined, zero_filled(full, smaps)), 80.0) << "R=" << R;
  }
}

TEST(Grappa, DampedKernelOnConsistentData) {
  const KSpaceGrid full = plane_wave_kspace(4, 33, 24, 10, 7);
  const SamplingMask mask = make_uniform_mask(33, 24, 2, 12);
  const KSpaceGrid acquired = apply_mask(full, mask);
  const GrappaKernel kernel = grappa_calibrate(extract_acs(acquired, mask), 2, 5, 2, 1e-6);
  EXPECT_LT(relative_error(grappa_fill(acquired, mask, kernel), full), 1e-3);
}

TEST(Grappa, ConstantSingleCoil) {
  KSpaceGrid k(1, 16, 12);
  for (cplx& z : k.values()) z = {0.75, -0.5};
  const SamplingMask mask = make_uniform_mask(16, 12, 2, 8);
  const KSpaceGrid acquired = apply_mask(k, mask);
  // minimum-norm solution of the rank-one system
  const GrappaKernel kernel = grappa_calibrate(extract_acs(acquired, mask), 2, 5, 4, 0.0);
  cplx sum{};
  for (Eigen::Index i = 0; i < kernel.weights[0].rows(); ++i) sum += kernel.weights[0](i, 0);
  EXPECT_NEAR(std::abs(sum - 1.0), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(kernel.weights[0](0, 0) - kernel.weights[0](7, 0)), 0.0, 1e-10);
  const KSpaceGrid filled = grappa_fill(acquired, mask, kernel);
  for (const cplx& z : filled.values()) EXPECT_NEAR(std::abs(z - cplx{0.75, -0.5}), 0.0, 1e-8);
}

TEST(Grappa, DampingSensitivity) {
  Lcg g(71);
  const KSpaceGrid acs = testing_support::random_kspace(g, 4, 40, 32);
  const GrappaKernel a = grappa_calibrate(acs, 3, 5, 4, 0.0);
  const GrappaKernel b = grappa_calibrate(acs, 3, 5, 4, 1e-6);
  for (std::size_t d = 0; d < a.weights.size(); ++d)
    EXPECT_LT((a.weights[d] - b.weights[d]).norm() / a.weights[d].norm(), 1e-4);
}

TEST(Grappa, UnderdeterminedCalibration) {
  Lcg g(72);
  const KSpaceGrid acs = testing_support::random_kspace(g, 8, 8, 8);
  try {
    grappa_calibrate(acs, 4, 5, 4);
    FAIL() << "expected CalibrationError";
  } catch (const CalibrationError& e) {
    EXPECT_LT(e.equations(), e.unknowns());
    EXPECT_EQ(e.unknowns(), 8u * 4 * 5);
  }
}

TEST(Grappa, ParameterErrors) {
  Lcg g(73);
  const KSpaceGrid acs = testing_support::random_kspace(g, 2, 30, 16);
  EXPECT_THROW(grappa_calibrate(acs, 1), std::invalid_argument);
  EXPECT_THROW(grappa_calibrate(acs, 2, 4), std::invalid_argument);
  EXPECT_THROW(grappa_calibrate(acs, 2, 5, 0), std::invalid_argument);
  EXPECT_THROW(grappa_calibrate(acs, 2, 5, 4, -1.0), std::invalid_argument);
}

TEST(Grappa, RMismatchIsRejected) {
  const std::size_t n = 32;
  const SensitivityMaps s = synth_smaps(4, n, n, 0);
  const SamplingMask m2 = make_uniform_mask(n, n, 2, 16), m3 = make_uniform_mask(n, n, 3, 16);
  const KSpaceGrid acq = simulate_acquisition(shepp_logan(n, n), s, m2, 0.0, 0);
  const GrappaKernel kernel = grappa_calibrate(extract_acs(acq, m2), 2);
  EXPECT_THROW(grappa_reconstruct(apply_mask(acq, m3), m3, kernel, s), std::invalid_argument);
}

TEST(Grappa, AcquiredLinesPassThroughBitwise) {
  const std::size_t n = 48;
  const SensitivityMaps s = synth_smaps(6, n, n, 2);
  const SamplingMask m = make_uniform_mask(n, n, 3, 18, 1);
  const KSpaceGrid acq = simulate_acquisition(shepp_logan(n, n), s, m, 0.01, 3);
  const ReconResult r = grappa_reconstruct(acq, m, s);
  for (std::size_t c = 0; c < 6; ++c)
    for (std::size_t y = 0; y < n; ++y)
      if (m.row_sampled(y))
        for (std::size_t x = 0; x < n; ++x) {
          const cplx a = r.final_kspace(c, y, x), b = acq(c, y, x);
          ASSERT_EQ(std::memcmp(&a, &b, sizeof(cplx)), 0);
        }
}

TEST(Grappa, FullySampledMaskIsDirectCombine) {
  const std::size_t n = 24;
  const SensitivityMaps s = synth_smaps(4, n, n, 2);
  const SamplingMask m = make_uniform_mask(n, n, 2, static_cast<int>(n));
  const KSpaceGrid acq = simulate_acquisition(shepp_logan(n, n), s, m, 0.01, 3);
  EXPECT_EQ(grappa_reconstruct(acq, m, s).combined, zero_filled(acq, s));
}

TEST(Grappa, Linearity) {
  const std::size_t n = 40;
  const SensitivityMaps s = synth_smaps(4, n, n, 5);
  const SamplingMask m = make_uniform_mask(n, n, 2, 16);
  const KSpaceGrid acq = simulate_acquisition(shepp_logan(n, n), s, m, 0.01, 6);
  const GrappaKernel kernel = grappa_calibrate(extract_acs(acq, m), 2);
  const cplx alpha{-0.6, 1.9};
  KSpaceGrid scaled = acq;
  for (cplx& z : scaled.values()) z *= alpha;
  const ComplexImage a = grappa_reconstruct(acq, m, kernel, s).combined;
  const ComplexImage b = grappa_reconstruct(scaled, m, kernel, s).combined;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(b.values()[i] - alpha * a.values()[i]);
    den += std::norm(alpha * a.values()[i]);
  }
  EXPECT_LT(std::sqrt(num / den), 1e-10);
}

// prediction error of the calibrated kernel on the same fully sampled data
TEST(Grappa, LargerAcsDoesNotWorsenPrediction) {
  const std::size_t n = 64;
  const SensitivityMaps s = synth_smaps(8, n, n, 1);
  const SamplingMask full_mask = make_uniform_mask(n, n, 1, 0);
  const KSpaceGrid full = simulate_acquisition(shepp_logan(n, n), s, full_mask, 0.002, 2);
  double previous = 1e300;
  for (int acs : {16, 20, 24, 32, 40}) {
    const SamplingMask m = make_uniform_mask(n, n, 2, acs);
    const KSpaceGrid acq = apply_mask(full, m);
    const GrappaKernel kernel = grappa_calibrate(extract_acs(acq, m), 2);
    const double err = relative_error(grappa_fill(acq, m, kernel), full);
    EXPECT_LE(err, previous) << "acs " << acs;
    previous = err;
  }
}

TEST(Grappa, BeatsZeroFilledAtR2) {
  const std::size_t n = 64;
  const SensitivityMaps s = synth_smaps(8, n, n, 7);
  const ComplexImage truth = shepp_logan(n, n);
  const KSpaceGrid full = simulate_acquisition(truth, s, make_uniform_mask(n, n, 1, 0), 0.005, 1);
  const SamplingMask m = make_uniform_mask(n, n, 2, 24);
  const KSpaceGrid acq = apply_mask(full, m);
  const ComplexImage ref = zero_filled(full, s);
  const double zf = psnr(zero_filled(acq, s), ref);
  const double gr = psnr(grappa_reconstruct(acq, m, s).combined, ref);
  EXPECT_GE(gr - zf, 10.0) << "grappa " << gr << " zero-filled " << zf;
}

TEST(GrappaKernel, AccessorLayout) {
  Lcg g(74);
  const GrappaKernel k = grappa_calibrate(testing_support::random_kspace(g, 3, 40, 20), 3, 3, 2);
  EXPECT_EQ(k.weights.size(), 2u);
  EXPECT_EQ(k.weights[1].rows(), 3 * 2 * 3);
  EXPECT_EQ(&k.at(2, 2, 1, 1, 2), &k.weights[1]((1 * 2 + 1) * 3 + 2, 2));
}
