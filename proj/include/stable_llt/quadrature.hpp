#pragma once

#include <cstddef>
#include <functional>

namespace stable_llt {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< GSL absolute error estimate
  long evaluations = 0;
  bool converged = false;
};

/// Globally adaptive 7/15-point Gauss-Kronrod (GSL qag) with an absolute tolerance.
QuadratureResult gauss_kronrod_adaptive(const std::function<double(double)>& f, double a, double b,
                                        double abs_tol, std::size_t max_intervals = 200000);

}  // namespace stable_llt
