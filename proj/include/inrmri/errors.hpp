#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace inrmri {

/// Thrown when a file cannot be read, written, or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(int iteration, double last_finite_loss)
      : std::runtime_error("training diverged at iteration " + std::to_string(iteration) +
                           " (last finite loss " + std::to_string(last_finite_loss) + ")"),
        iteration_(iteration),
        last_finite_loss_(last_finite_loss) {}

  int iteration() const noexcept { return iteration_; }
  double last_finite_loss() const noexcept { return last_finite_loss_; }

 private:
  int iteration_;
  double last_finite_loss_;
};

/// GRAPPA calibration has fewer equations than unknowns.
class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(std::size_t equations, std::size_t unknowns)
      : std::runtime_error("GRAPPA calibration underdetermined: " + std::to_string(equations) +
                           " equations for " + std::to_string(unknowns) + " unknowns"),
        equations_(equations),
        unknowns_(unknowns) {}

  std::size_t equations() const noexcept { return equations_; }
  std::size_t unknowns() const noexcept { return unknowns_; }

 private:
  std::size_t equations_;
  std::size_t unknowns_;
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& what) { throw std::invalid_argument(what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) invalid(what);
}

}  // namespace detail
}  // namespace inrmri
