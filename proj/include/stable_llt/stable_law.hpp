#pragma once

// The limit stable law: parameters, characteristic function, density by
// Fourier inversion and the gamma integral.

#include <complex>
#include <span>
#include <vector>

#include "stable_llt/lattice_model.hpp"

namespace stable_llt {

/// log psi(t) = -c|t|^alpha (1 - i beta sign(t) tan(pi alpha/2))
///            = -c'|t|^alpha exp(-i (pi/2) theta alpha sign(t)).
struct StableParams {
  double alpha = 2.0;
  double beta = 0.0;
  double c = 0.5;
  double c_prime = 0.5;
  double theta = 0.0;
};

struct ZolotarevForm {
  double c_prime = 0.0;
  double theta = 0.0;
};

ZolotarevForm zolotarev_form(const StableParams& p);

/// Parameters (alpha, beta, c) given directly; Zolotarev fields are filled in.
StableParams make_stable(double alpha, double beta, double c);

/// c = Gamma(1-alpha)(c1+c2)cos(pi alpha/2), beta = (c1-c2)/(c1+c2).
StableParams from_tails(double alpha, double c1, double c2);

/// alpha = 2, c = 1/2, beta = 0: the standard normal.
StableParams gaussian();

/// Limit law of S_n/b_n for a builder law (gaussian for alpha = 2).
StableParams stable_for(const LatticeLaw& law);

/// Inverse of zolotarev_form: (c, beta) from (alpha, c', theta).
StableParams from_zolotarev(double alpha, double c_prime, double theta);

std::complex<double> char_fn(const StableParams& p, double t);

struct DensityResult {
  double value = 0.0;
  double quadrature_error = 0.0;
  double truncation_error = 0.0;
  double cutoff = 0.0;  ///< T
  long evaluations = 0;
};

/// g(x) = (1/pi) int_0^T e^{-c t^alpha} cos(c beta tan(pi alpha/2) t^alpha - t x) dt.
/// Throws NumericalError if the quadrature misses tol.
DensityResult density_detailed(const StableParams& p, double x, double tol);
double density(const StableParams& p, double x, double tol);

/// Density over a grid: OpenMP-parallel and serial reference (identical output).
std::vector<double> density_grid(const StableParams& p, std::span<const double> xs, double tol);
std::vector<double> density_grid_serial(const StableParams& p, std::span<const double> xs, double tol);

/// int_0^inf t^delta e^{-p t^alpha} dt = Gamma((delta+1)/alpha) / (alpha p^{(delta+1)/alpha}).
double gamma_integral(double delta, double p, double alpha);

/// The same integral by double-exponential quadrature.
double gamma_integral_quadrature(double delta, double p, double alpha);

struct ArgRatio {
  double t = 0.0;
  double ratio = 0.0;  ///< |arg phi(t) / log|phi(t)||
};

/// Ratios for a decreasing grid in (0, 0.1]; they tend to |beta tan(pi alpha/2)|.
std::vector<ArgRatio> arg_log_ratio_check(const LatticeLaw& law, std::span<const double> t_grid);

}  // namespace stable_llt
