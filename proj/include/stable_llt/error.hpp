#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stable_llt {

/// Parameter or precondition violation (bad alpha, m >= n, empty grid, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its stated accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The exact-convolution certificate could not be met within the memory budget.
class CertificateError : public NumericalError {
 public:
  CertificateError(const std::string& what, std::int64_t required_window)
      : NumericalError(what), required_window_(required_window) {}

  std::int64_t required_window() const noexcept { return required_window_; }

 private:
  std::int64_t required_window_;
};

}  // namespace stable_llt
