#pragma once

// Norming constants b_n solving b^alpha = n h(b), the slowly varying part
// L(n) = b_n / n^{1/alpha}, the running sup M and the composite L~.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stable_llt/lattice_model.hpp"

namespace stable_llt {

/// The function h: a positive constant, log^sigma x, or a Karamata form
/// h(x) = gamma(x) exp(int_{a0}^x eps(t)/t dt).
class SlowlyVarying {
 public:
  enum class Kind { constant, log_power, karamata };

  static SlowlyVarying constant(double value);
  static SlowlyVarying log_power(double sigma);
  /// |eps(t)| <= eps_bar and gamma_lo <= gamma(x) <= gamma_hi must hold on [a0, inf).
  static SlowlyVarying karamata(std::function<double(double)> gamma, std::function<double(double)> eps,
                                double eps_bar, double gamma_lo, double gamma_hi, double a0 = 1.0);

  double operator()(double x) const;

  Kind kind() const { return kind_; }
  double param() const { return param_; }
  double a0() const { return a0_; }
  double eps_bar() const { return eps_bar_; }
  bool monotone() const { return kind_ != Kind::karamata; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  double param_ = 1.0;
  double a0_ = 1.0;
  double eps_bar_ = 0.0;
  double gamma_lo_ = 0.0;
  double gamma_hi_ = 0.0;
  std::function<double(double)> gamma_;
  std::function<double(double)> eps_;
};

struct NormingOptions {
  double epsilon = 0.5;  ///< M is taken over [1/epsilon, x]
  double eta = 1.0;
  double delta = -1.0;   ///< negative selects 1/(2 alpha)
};

class NormingSeq {
 public:
  NormingSeq(double alpha, SlowlyVarying h, NormingOptions opts = {});

  /// h from the law's l: log_power sigma, or the constant (Var for alpha = 2).
  static NormingSeq for_law(const LatticeLaw& law, NormingOptions opts = {});

  double alpha() const { return alpha_; }
  const SlowlyVarying& h() const { return h_; }
  double epsilon() const { return epsilon_; }
  double eta() const { return eta_; }
  double delta() const { return delta_; }
  /// rho = min{eta (1/alpha - delta), 1}.
  double rho() const;

  /// b_n, served from the shared cache when warmed, else solved directly.
  double b(std::int64_t n) const;
  double L(std::int64_t n) const;
  /// Smallest n for which b_n exists (above 1 only for log-power h).
  std::int64_t first_n() const;

  /// Fills the shared cache for 1..n_max (append-only, safe for concurrent readers).
  void warm(std::int64_t n_max) const;
  std::int64_t cached() const;

 private:
  struct Cache;
  double alpha_;
  SlowlyVarying h_;
  double epsilon_;
  double eta_;
  double delta_;
  std::shared_ptr<Cache> cache_;
};

/// Root of b^alpha = n h(b) in the monotone region, relative accuracy 1e-12.
double solve_bn(const NormingSeq& seq, std::int64_t n);

/// Smallest n for which a log-power equation has a root in its monotone region.
std::int64_t min_n_log_power(double alpha, double sigma);

/// M(x) = sup_{1/epsilon <= y <= x} h(y).
double sup_h(const NormingSeq& seq, double x);

/// L~(n) = L(n)(1 + M(n^{1+1/alpha}) + L(n)^eta).
double tilde_l(const NormingSeq& seq, std::int64_t n);

struct LogWeightCheck {
  double lhs_sum = 0.0;  ///< sum_{a <= k < b} L~(k)/k
  double rhs_gap = 0.0;  ///< log^gamma b - log^gamma a
  double fitted_C = 0.0;
  std::int64_t worst_a = 0;
  std::int64_t worst_b = 0;
};

/// gamma = delta' + sigma + 1 with delta' the midpoint of (sigma/alpha, min(sigma, 1 - sigma)),
/// the exponent under which log^sigma norming satisfies the log-weight summability.
double log_weight_gamma(double alpha, double sigma);

/// fitted_C is the max of lhs/rhs over all windows whose endpoints lie in
/// {a, the powers of two strictly inside (a, b), b}.
LogWeightCheck log_weight_sum_check(const NormingSeq& seq, std::int64_t a, std::int64_t b, double gamma);

struct NormingRow {
  std::int64_t n = 0;
  double b = 0.0;
  double L = 0.0;
  double M = 0.0;  ///< M(n^{1+1/alpha})
  double tilde_L = 0.0;
};

std::vector<NormingRow> norming_table(const NormingSeq& seq, std::span<const std::int64_t> ns);

}  // namespace stable_llt
