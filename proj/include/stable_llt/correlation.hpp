#pragma once

// Exact left side of the correlation inequality, its three bounds (each
// with constant 1) and the empirical decay exponent.

#include <cstdint>
#include <span>
#include <vector>

#include "stable_llt/exact_llt.hpp"

namespace stable_llt {

struct SpectralGap {
  double c_hat = 0.0;  ///< -max_{eps <= t <= pi} log|phi(t)|
  double t_at = 0.0;
};

/// 10^4-point grid on [epsilon, pi] plus local refinement at the maximum.
SpectralGap spectral_gap(const LatticeLaw& law, double epsilon, int grid = 10000);

/// Smallest integer x0 >= 1 with e^{c x} >= x^{2/alpha} for every x >= x0.
std::int64_t x0_from_gap(double c_hat, double alpha);

struct JointMinusProduct {
  double lhs = 0.0;
  double lhs_err = 0.0;
  std::int64_t kappa_m = 0;
  std::int64_t kappa_n = 0;
  double p_m = 0.0;   ///< P(S_m = kappa_m)
  double p_nm = 0.0;  ///< P(S_{n-m} = kappa_n - kappa_m)
  double p_n = 0.0;   ///< P(S_n = kappa_n)
};

/// b_m P(S_m=k_m) b_n |P(S_{n-m}=k_n-k_m) - P(S_n=k_n)|, with a certified error.
JointMinusProduct joint_minus_product(const SnEngine& engine, std::int64_t m, std::int64_t n, double kappa);
JointMinusProduct joint_minus_product(const LatticeLaw& law, const NormingSeq& seq, std::int64_t m, std::int64_t n,
                                      double kappa, double tol = 1e-3);

/// (n/(n-m))^{1/alpha} L(n)/L(n-m) + 1.
double bound_i(const NormingSeq& seq, std::int64_t m, std::int64_t n);

/// Full bracket of the second bound with C = 1; requires n > m + eps^{-alpha/(alpha+1)}.
double bound_ii(const NormingSeq& seq, double c_hat, std::int64_t m, std::int64_t n, double eta);

/// L~(n) (m/n)^rho; requires n >= 2m and m >= x0.
double corollary_bound(const NormingSeq& seq, std::int64_t m, std::int64_t n, std::int64_t x0);

struct CorrReport {
  std::int64_t m = 0;
  std::int64_t n = 0;
  double kappa = 0.0;
  double lhs = 0.0;
  double lhs_err = 0.0;
  double bound_i = 0.0;
  double bound_ii = 0.0;  ///< NaN outside its validity range
  double corollary = 0.0;
  double ratio_i = 0.0;
  double ratio_ii = 0.0;
  double ratio_corollary = 0.0;
};

CorrReport corr_report(const SnEngine& engine, const SpectralGap& gap, std::int64_t x0, std::int64_t m,
                       std::int64_t n, double kappa);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> log_ratio;  ///< log(m/n)
  std::vector<double> log_lhs;
  std::vector<double> residuals;  ///< NaN for masked points
  std::vector<bool> used;
  int used_count = 0;
};

/// Least squares of y on x over the masked points; needs >= 4 of them.
ExponentFit fit_log_log(std::span<const double> x, std::span<const double> y, const std::vector<bool>& mask);

/// Slope of log lhs against log(m/n); points with lhs <= 10 lhs_err are masked.
ExponentFit exponent_fit(const SnEngine& engine, std::int64_t n, std::span<const std::int64_t> m_grid,
                         std::int64_t x0, double kappa = 0.0);

/// Powers of two m with x0 <= m <= n/2.
std::vector<std::int64_t> dyadic_m_grid(std::int64_t n, std::int64_t x0);

inline constexpr double kDominationGrowth = 0.10;

struct DominationScan {
  std::vector<std::int64_t> n_max;    ///< grid horizon of each extension
  std::vector<double> empirical_C;    ///< max lhs/corollary over the grid up to n_max
  std::vector<CorrReport> rows;
  bool stable = false;
};

/// Dyadic (m, n) grids with n >= 2m, m >= max(x0, first_n), n <= n_base 2^e for e = 0..extensions.
/// The nested maxima never decrease. Stable means finite, total relative growth
/// over the extensions at most kDominationGrowth, and increments not all positive
/// and non-decreasing (linear or faster growth in log n).
DominationScan domination_scan(const SnEngine& engine, const SpectralGap& gap, std::int64_t x0,
                               std::int64_t n_base, int extensions, double kappa = 0.0);

}  // namespace stable_llt
