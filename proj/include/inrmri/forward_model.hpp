#pragma once

// Multi-coil encoding operator A_j = M F C_j and its adjoint.

#include <cstddef>
#include <string>

#include "inrmri/data_model.hpp"
#include "inrmri/fourier.hpp"

namespace inrmri {

namespace detail {

inline void check_encoding_dims(std::size_t h, std::size_t w, const SensitivityMaps& smaps,
                                const SamplingMask& mask, const char* op) {
  require(smaps.same_grid(h, w), std::string(op) + ": sensitivity maps do not match the image grid");
  require(mask.height() == h && mask.width() == w,
          std::string(op) + ": sampling mask does not match the image grid");
}

}  // namespace detail

/// Per coil: fft2c(C_j * img) without masking.
inline KSpaceGrid forward_unmasked(const ComplexImage& img, const SensitivityMaps& smaps,
                                   const Fft2c& plan) {
  detail::require(smaps.same_grid(img.height(), img.width()),
                  "forward: sensitivity maps do not match the image grid");
  KSpaceGrid out(smaps.coils(), img.height(), img.width());
  const auto src = img.values();
  for (std::size_t c = 0; c < smaps.coils(); ++c) {
    auto dst = out.plane(c);
    const auto sens = smaps.plane(c);
    for (std::size_t p = 0; p < dst.size(); ++p) dst[p] = sens[p] * src[p];
    plan.forward(dst);
  }
  return out;
}

inline KSpaceGrid forward_unmasked(const ComplexImage& img, const SensitivityMaps& smaps) {
  return forward_unmasked(img, smaps, Fft2c(img.height(), img.width()));
}

inline KSpaceGrid forward(const ComplexImage& img, const SensitivityMaps& smaps,
                          const SamplingMask& mask, const Fft2c& plan) {
  detail::check_encoding_dims(img.height(), img.width(), smaps, mask, "forward");
  return apply_mask(forward_unmasked(img, smaps, plan), mask);
}

inline KSpaceGrid forward(const ComplexImage& img, const SensitivityMaps& smaps,
                          const SamplingMask& mask) {
  return forward(img, smaps, mask, Fft2c(img.height(), img.width()));
}

/// sum_j conj(C_j) * ifft2c(M k_j)
inline ComplexImage adjoint(const KSpaceGrid& k, const SensitivityMaps& smaps,
                            const SamplingMask& mask, const Fft2c& plan) {
  detail::check_encoding_dims(k.height(), k.width(), smaps, mask, "adjoint");
  detail::require(k.coils() == smaps.coils(), "adjoint: coil count mismatch");
  const KSpaceGrid masked = apply_mask(k, mask);
  ComplexImage out(k.height(), k.width());
  auto acc = out.values();
  std::vector<cplx> buf(k.plane_size());
  for (std::size_t c = 0; c < k.coils(); ++c) {
    const auto src = masked.plane(c);
    std::copy(src.begin(), src.end(), buf.begin());
    plan.inverse(buf);
    const auto sens = smaps.plane(c);
    for (std::size_t p = 0; p < buf.size(); ++p) acc[p] += std::conj(sens[p]) * buf[p];
  }
  return out;
}

inline ComplexImage adjoint(const KSpaceGrid& k, const SensitivityMaps& smaps,
                            const SamplingMask& mask) {
  return adjoint(k, smaps, mask, Fft2c(k.height(), k.width()));
}

}  // namespace inrmri
