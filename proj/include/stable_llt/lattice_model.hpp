#pragma once

// Centered lattice laws with span 1 and regularly varying tails:
// construction, validation, evaluation and sampling.

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "stable_llt/rng.hpp"
#include "stable_llt/tail_sums.hpp"

namespace stable_llt {

enum class TailKind { none, power, log_power, geometric_square };

/// Analytic description of the mass outside the explicit table:
/// P(X = k) = right_weight * f(k) for k > cutoff and
/// P(X = -k) = left_weight * f(k) for k > cutoff.
struct TailDescriptor {
  TailKind kind = TailKind::none;
  std::int64_t cutoff = 0;
  double exponent = 0.0;
  double sigma = 0.0;
  double right_weight = 0.0;
  double left_weight = 0.0;

  TailKernel kernel() const;
  bool has_right() const { return kind != TailKind::none && right_weight > 0.0; }
  bool has_left() const { return kind != TailKind::none && left_weight > 0.0; }
};

/// Identifier for the slowly varying factor l(x) of the tail condition.
struct SlowlyVaryingRef {
  enum class Kind { constant, log_power };
  Kind kind = Kind::constant;
  double param = 1.0;  ///< value for constant, sigma for log_power
};

class LatticeLaw {
 public:
  /// Validates every invariant; throws InvalidArgument on violation.
  LatticeLaw(std::int64_t table_lo, std::vector<double> table, TailDescriptor tail, double alpha, double c1,
             double c2, SlowlyVaryingRef l, std::string name = "custom",
             std::map<std::string, double> params = {});

  double pmf(std::int64_t k) const;

  std::int64_t offset() const { return 0; }
  std::int64_t span() const { return 1; }
  std::int64_t table_lo() const { return table_lo_; }
  std::int64_t table_hi() const { return table_lo_ + static_cast<std::int64_t>(table_.size()) - 1; }
  std::span<const double> table() const { return table_; }
  const TailDescriptor& tail() const { return tail_; }

  double alpha() const { return alpha_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  const SlowlyVaryingRef& l() const { return l_; }
  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }

  /// P(X >= k) and P(X <= k), each with a certified absolute error bound.
  CertifiedSum upper_tail(std::int64_t k) const;
  CertifiedSum lower_tail(std::int64_t k) const;

  /// Total mass (should be 1 within 1e-12).
  CertifiedSum total_mass() const;

  /// E[X]; requires alpha > 1.
  double mean() const;

  /// E[X^2 1{|X| <= x}] (the function h for alpha = 2).
  double truncated_second_moment(double x) const;

  /// Var(X) when finite (bounded or geometric tails), otherwise throws.
  double variance() const;

  /// Smallest/largest support site; INT64 extremes when the tail is infinite.
  std::int64_t support_min() const;
  std::int64_t support_max() const;

  bool symmetric() const;

  /// Law of -X.
  LatticeLaw mirrored() const;

 private:
  std::int64_t table_lo_;
  std::vector<double> table_;
  TailDescriptor tail_;
  double alpha_;
  double c1_;
  double c2_;
  SlowlyVaryingRef l_;
  std::string name_;
  std::map<std::string, double> params_;
};

// Evaluation ---------------------------------------------------------------

double pmf(const LatticeLaw& law, std::int64_t k);

/// gcd of pairwise differences of support sites. Throws on a single-site support.
std::int64_t verify_span(const LatticeLaw& law);

/// gcd of pairwise differences for an explicit site list.
std::int64_t span_of_sites(std::span<const std::int64_t> sites);

struct CharFnValue {
  std::complex<double> value{};
  double bound = 0.0;
};

/// sum_k P(X=k) e^{itk}, absolute error <= 1e-12.
std::complex<double> char_fn(const LatticeLaw& law, double t);
CharFnValue char_fn_certified(const LatticeLaw& law, double t);

struct TailPoint {
  double x = 0.0;
  double right = 0.0;  ///< x^alpha P(X > x)
  double left = 0.0;   ///< x^alpha P(X <= -x)
};

std::vector<TailPoint> tail_profile(const LatticeLaw& law, std::span<const double> x_grid);

/// Ratio f(2x)/f(x) of a profile column: 1 in the limit for slowly varying data.
std::vector<double> doubling_ratios(std::span<const double> values);

// Sampling -----------------------------------------------------------------

/// Two-stage inversion sampler: exact inversion on a head table holding
/// mass >= 1 - 1e-6 (capped at |k| <= 65536), then conditional inversion on
/// certified tail partial sums.
class LatticeSampler {
 public:
  explicit LatticeSampler(const LatticeLaw& law);

  std::int64_t operator()(SeededStream& stream) const;

  std::int64_t head_lo() const { return head_lo_; }
  std::int64_t head_hi() const { return head_lo_ + static_cast<std::int64_t>(cdf_.size()) - 1; }
  double head_mass() const { return cdf_.empty() ? 0.0 : cdf_.back(); }

 private:
  std::int64_t draw(double u) const;

  std::int64_t head_lo_;
  std::vector<double> cdf_;
  TailKernel kernel_;
  double right_weight_ = 0.0;
  double left_weight_ = 0.0;
  double right_mass_ = 0.0;
  double left_mass_ = 0.0;
};

std::vector<std::int64_t> sample(const LatticeLaw& law, SeededStream& stream, std::int64_t count);

// Builders -----------------------------------------------------------------

/// {-1: 1/4, 0: 1/2, 1: 1/4}.
LatticeLaw lazy_walk();

/// P(X=k) = alpha*c_scale*|k|^{-1-alpha} in the tail region, centered on {-1,0,1}.
LatticeLaw zipf_symmetric(double alpha, double c_scale = 0.5);

/// Right/left tail constants c1, c2: x^alpha P(X>x) -> c1, x^alpha P(X<=-x) -> c2.
LatticeLaw zipf_skewed(double alpha, double c1, double c2);

/// Tail mass at k proportional to log^sigma|k| / |k|^{1+alpha}; symmetric.
/// x^alpha P(X>x) ~ c_scale * log^sigma x.
LatticeLaw log_sigma_family(double alpha, double sigma, double c_scale = 0.5);

/// P(X=n) proportional to 1/(n^2 2^n) on n >= 1, centered by an atom at -1.
LatticeLaw remark1_counterexample();

/// 1 / sum_{k>=1} 1/(k^2 2^k), the normalizer of the uncentered counterexample.
double remark1_constant();

/// Builds a law by name from a parameter map (used by the CLI).
LatticeLaw build_law(const std::string& builder, const std::map<std::string, double>& params);

// Serialization ------------------------------------------------------------

nlohmann::json to_json(const LatticeLaw& law);
LatticeLaw law_from_json(const nlohmann::json& doc);

}  // namespace stable_llt
