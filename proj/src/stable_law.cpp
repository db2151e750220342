#include "stable_llt/stable_law.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "stable_llt/error.hpp"
#include "stable_llt/quadrature.hpp"

namespace stable_llt {

namespace {

constexpr double kPi = std::numbers::pi;

void check_stable_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0) {
    throw InvalidArgument("alpha must lie in (0,2] and differ from 1");
  }
}

// c beta tan(pi alpha/2), the coefficient of i|t|^alpha sign(t) in log psi.
double skew_coefficient(const StableParams& p) {
  if (p.alpha == 2.0 || p.beta == 0.0) return 0.0;
  return p.c * p.beta * std::tan(kPi * p.alpha / 2);
}

}  // namespace

ZolotarevForm zolotarev_form(const StableParams& p) {
  check_stable_alpha(p.alpha);
  if (p.alpha == 2.0 || p.beta == 0.0) return {p.c, 0.0};
  // tan(pi theta alpha/2) = beta tan(pi alpha/2); the principal branch keeps
  // |pi theta alpha/2| < pi/2, which is the admissible range.
  const double phi = std::atan(p.beta * std::tan(kPi * p.alpha / 2));
  const double theta = 2.0 * phi / (kPi * p.alpha);
  return {p.c / std::cos(phi), theta};
}

StableParams make_stable(double alpha, double beta, double c) {
  check_stable_alpha(alpha);
  if (!(beta >= -1.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in [-1,1]");
  if (!(c > 0.0)) throw InvalidArgument("scale c must be positive");
  if (alpha == 2.0 && beta != 0.0) throw InvalidArgument("alpha = 2 requires beta = 0");
  StableParams p{alpha, beta, c, c, 0.0};
  const ZolotarevForm z = zolotarev_form(p);
  p.c_prime = z.c_prime;
  p.theta = z.theta;
  return p;
}

StableParams from_tails(double alpha, double c1, double c2) {
  if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0) {
    throw InvalidArgument("from_tails: alpha must lie in (0,2) and differ from 1");
  }
  if (!(c1 >= 0.0 && c2 >= 0.0)) throw InvalidArgument("from_tails: c1, c2 must be nonnegative");
  if (!(c1 + c2 > 0.0)) throw InvalidArgument("from_tails: c1 + c2 must be positive");
  const double c = std::tgamma(1.0 - alpha) * (c1 + c2) * std::cos(kPi * alpha / 2);
  return make_stable(alpha, (c1 - c2) / (c1 + c2), c);
}

StableParams gaussian() { return make_stable(2.0, 0.0, 0.5); }

StableParams stable_for(const LatticeLaw& law) {
  if (law.alpha() == 2.0) return gaussian();
  return from_tails(law.alpha(), law.c1(), law.c2());
}

StableParams from_zolotarev(double alpha, double c_prime, double theta) {
  check_stable_alpha(alpha);
  const double phi = kPi * theta * alpha / 2;
  const double c = c_prime * std::cos(phi);
  const double beta = alpha == 2.0 ? 0.0 : std::tan(phi) / std::tan(kPi * alpha / 2);
  return StableParams{alpha, beta, c, c_prime, theta};
}

std::complex<double> char_fn(const StableParams& p, double t) {
  if (t == 0.0) return {1.0, 0.0};
  const double ta = std::pow(std::fabs(t), p.alpha);
  const double sgn = t > 0.0 ? 1.0 : -1.0;
  return std::polar(std::exp(-p.c * ta), skew_coefficient(p) * ta * sgn);
}

DensityResult density_detailed(const StableParams& p, double x, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("density: tol must be positive");
  const double a = p.alpha;
  const double c = p.c;
  const double skew = skew_coefficient(p);
  // Start from e^{-c T^a} = tol/10 and grow T until the exact tail integral
  // (1/pi) int_T^inf e^{-c t^a} dt = Gamma(1/a, c T^a) / (pi a c^{1/a}) is below tol/10.
  double cutoff = std::pow(std::log(10.0 / tol) / c, 1.0 / a);
  auto tail_bound = [&](double tt) {
    return boost::math::tgamma(1.0 / a, c * std::pow(tt, a)) / (kPi * a * std::pow(c, 1.0 / a));
  };
  while (tail_bound(cutoff) > tol / 10) cutoff *= 1.25;
  auto integrand = [&](double t) {
    const double ta = std::pow(t, a);
    return std::exp(-c * ta) * std::cos(skew * ta - t * x);
  };
  const QuadratureResult q = gauss_kronrod_adaptive(integrand, 0.0, cutoff, kPi * tol / 4);
  if (!q.converged) {
    throw NumericalError("density: quadrature did not converge at x = " + std::to_string(x));
  }
  DensityResult r;
  r.value = q.value / kPi;
  r.quadrature_error = q.error / kPi;
  r.truncation_error = tail_bound(cutoff);
  r.cutoff = cutoff;
  r.evaluations = q.evaluations;
  return r;
}

double density(const StableParams& p, double x, double tol) { return density_detailed(p, x, tol).value; }

std::vector<double> density_grid_serial(const StableParams& p, std::span<const double> xs, double tol) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = density(p, xs[i], tol);
  return out;
}

std::vector<double> density_grid(const StableParams& p, std::span<const double> xs, double tol) {
  std::vector<double> out(xs.size());
  const auto count = static_cast<std::int64_t>(xs.size());
  bool failed = false;
  std::string message;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = density(p, xs[static_cast<std::size_t>(i)], tol);
    } catch (const NumericalError& e) {
#pragma omp critical
      {
        failed = true;
        message = e.what();
      }
    }
  }
  if (failed) throw NumericalError(message);
  return out;
}

double gamma_integral(double delta, double p, double alpha) {
  if (!(delta > -1.0)) throw InvalidArgument("gamma_integral: delta must exceed -1");
  if (!(p > 0.0)) throw InvalidArgument("gamma_integral: p must be positive");
  if (!(alpha > 0.0)) throw InvalidArgument("gamma_integral: alpha must be positive");
  const double s = (delta + 1.0) / alpha;
  return std::tgamma(s) / (alpha * std::pow(p, s));
}

double gamma_integral_quadrature(double delta, double p, double alpha) {
  if (!(delta > -1.0) || !(p > 0.0) || !(alpha > 0.0)) {
    throw InvalidArgument("gamma_integral_quadrature: parameter out of range");
  }
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double t) {
    if (t <= 0.0) return 0.0;
    const double v = std::pow(t, delta) * std::exp(-p * std::pow(t, alpha));
    return std::isfinite(v) ? v : 0.0;
  };
  double err = 0.0;
  const double v = integrator.integrate(f, 1e-12, &err);
  return v;
}

std::vector<ArgRatio> arg_log_ratio_check(const LatticeLaw& law, std::span<const double> t_grid) {
  std::vector<ArgRatio> out;
  double prev = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    if (!(t > 0.0 && t <= 0.1) || t >= prev) {
      throw InvalidArgument("arg_log_ratio_check: grid must be decreasing in (0, 0.1]");
    }
    prev = t;
    const std::complex<double> phi = char_fn(law, t);
    const double lm = std::log(std::abs(phi));
    out.push_back({t, std::fabs(std::arg(phi) / lm)});
  }
  return out;
}

}  // namespace stable_llt
