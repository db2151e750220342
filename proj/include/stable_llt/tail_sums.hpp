#pragma once

#include <complex>
#include <cstdint>

namespace stable_llt {

/// Shape of the analytic mass function beyond the explicit table.
enum class TailShape {
  power,            ///< f(x) = x^-exponent
  log_power,        ///< f(x) = x^-exponent * (ln x)^sigma
  geometric_square  ///< f(x) = x^-exponent * 2^-x
};

/// A sum together with a certified bound on its absolute error.
struct CertifiedSum {
  double value = 0.0;
  double bound = 0.0;
};

struct CertifiedComplexSum {
  std::complex<double> value{};
  double bound = 0.0;
};

/// Positive, eventually completely monotone summand f(k) for k >= 1.
struct TailKernel {
  TailShape shape = TailShape::power;
  double exponent = 2.0;
  double sigma = 0.0;

  double value(double x) const;
  long double value_ld(long double x) const;

  /// Kernel of k^j f(k).
  TailKernel moment(int j) const;

  /// sum_{k >= a} f(k), a >= 1. Euler-Maclaurin with three Bernoulli
  /// corrections past a = 1024; the bound is the first omitted remainder.
  CertifiedSum sum_from(std::int64_t a) const;

  /// sum_{k = a}^{b} f(k) by direct (compensated) summation.
  double sum_range(std::int64_t a, std::int64_t b) const;

  /// sum_{k >= a} f(k) e^{itk} via repeated summation by parts.
  CertifiedComplexSum oscillatory_sum_from(std::int64_t a, double t) const;

  /// Derivative f^(order)(x), order <= 6.
  long double derivative(long double x, int order) const;

  /// Largest k >= a with sum_{j >= k} f(j) >= v, for 0 < v <= sum_from(a).
  /// Inverts the conditional tail CDF; capped at 2^62.
  std::int64_t invert_from(std::int64_t a, double v) const;

  /// int_a^inf f(x) dx (power and log_power only).
  double integral_from(double a) const;
};

}  // namespace stable_llt
