#include "stable_llt/norming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stable_llt/error.hpp"

namespace stable_llt {

namespace {

constexpr int kSupGridPerUnit = 1000;  // grid points per unit of ln y

// Bisection for an increasing F on [lo, hi] in the variable u = ln b.
double bisect_increasing(const std::function<double(double)>& F, double lo, double hi) {
  for (int it = 0; it < 400 && hi - lo > 1e-14 * std::max(1.0, std::fabs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double golden_max(const SlowlyVarying& h, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = h(std::exp(x1)), f2 = h(std::exp(x2));
  double best = std::max(f1, f2);
  while (b - a > 1e-9) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = h(std::exp(x2));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = h(std::exp(x1));
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

}  // namespace

SlowlyVarying SlowlyVarying::constant(double value) {
  if (!(value > 0.0)) throw InvalidArgument("constant slowly varying function must be positive");
  SlowlyVarying s;
  s.kind_ = Kind::constant;
  s.param_ = value;
  return s;
}

SlowlyVarying SlowlyVarying::log_power(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("log-power exponent sigma must be positive");
  SlowlyVarying s;
  s.kind_ = Kind::log_power;
  s.param_ = sigma;
  return s;
}

SlowlyVarying SlowlyVarying::karamata(std::function<double(double)> gamma, std::function<double(double)> eps,
                                      double eps_bar, double gamma_lo, double gamma_hi, double a0) {
  if (!gamma || !eps) throw InvalidArgument("karamata: gamma and eps accessors are required");
  if (!(eps_bar >= 0.0)) throw InvalidArgument("karamata: eps_bar must be nonnegative");
  if (!(gamma_lo > 0.0 && gamma_hi >= gamma_lo)) throw InvalidArgument("karamata: need 0 < gamma_lo <= gamma_hi");
  if (!(a0 > 0.0)) throw InvalidArgument("karamata: a0 must be positive");
  SlowlyVarying s;
  s.kind_ = Kind::karamata;
  s.a0_ = a0;
  s.eps_bar_ = eps_bar;
  s.gamma_lo_ = gamma_lo;
  s.gamma_hi_ = gamma_hi;
  s.gamma_ = std::move(gamma);
  s.eps_ = std::move(eps);
  return s;
}

double SlowlyVarying::operator()(double x) const {
  switch (kind_) {
    case Kind::constant:
      return param_;
    case Kind::log_power:
      if (!(x > 1.0)) throw InvalidArgument("log-power h needs x > 1");
      return std::pow(std::log(x), param_);
    case Kind::karamata: {
      const double g = gamma_(x);
      if (!(g >= gamma_lo_ * (1 - 1e-12) && g <= gamma_hi_ * (1 + 1e-12))) {
        throw InvalidArgument("karamata: gamma(x) outside its declared bounds");
      }
      const double lo = std::log(a0_);
      const double hi = std::log(x);
      if (lo == hi) return g;
      auto f = [&](double u) {
        const double e = eps_(std::exp(u));
        if (std::fabs(e) > eps_bar_ * (1 + 1e-12)) throw InvalidArgument("karamata: |eps(t)| exceeds eps_bar");
        return e;
      };
      const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, 1e-13);
      return g * std::exp(integral);
    }
  }
  return 0.0;
}

std::string SlowlyVarying::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::constant:
      os << "constant(" << param_ << ")";
      break;
    case Kind::log_power:
      os << "log_power(" << param_ << ")";
      break;
    case Kind::karamata:
      os << "karamata(eps_bar=" << eps_bar_ << ",a0=" << a0_ << ")";
      break;
  }
  return os.str();
}

struct NormingSeq::Cache {
  mutable std::shared_mutex mutex;
  std::vector<double> b;  // b[n-1]
};

NormingSeq::NormingSeq(double alpha, SlowlyVarying h, NormingOptions opts)
    : alpha_(alpha),
      h_(std::move(h)),
      epsilon_(opts.epsilon),
      eta_(opts.eta),
      delta_(opts.delta < 0.0 ? 1.0 / (2.0 * alpha) : opts.delta),
      cache_(std::make_shared<Cache>()) {
  if (!(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0) {
    throw InvalidArgument("norming: alpha must lie in (0,2] and differ from 1");
  }
  if (!(epsilon_ > 0.0)) throw InvalidArgument("norming: epsilon must be positive");
  if (!(eta_ > 0.0 && eta_ <= 1.0)) throw InvalidArgument("norming: eta must lie in (0,1]");
  if (!(delta_ > 0.0 && delta_ < 1.0 / alpha)) throw InvalidArgument("norming: delta must lie in (0, 1/alpha)");
  if (h_.kind() == SlowlyVarying::Kind::log_power) {
    if (!(h_.param() < alpha / (1.0 + alpha))) {
      throw InvalidArgument("norming: log-power sigma must lie in (0, alpha/(1+alpha))");
    }
    if (epsilon_ >= 1.0) throw InvalidArgument("norming: log-power h needs epsilon < 1 so that 1/epsilon > 1");
  }
}

NormingSeq NormingSeq::for_law(const LatticeLaw& law, NormingOptions opts) {
  const SlowlyVaryingRef& l = law.l();
  if (l.kind == SlowlyVaryingRef::Kind::log_power) {
    return NormingSeq(law.alpha(), SlowlyVarying::log_power(l.param), opts);
  }
  return NormingSeq(law.alpha(), SlowlyVarying::constant(l.param), opts);
}

double NormingSeq::rho() const { return std::min(eta_ * (1.0 / alpha_ - delta_), 1.0); }

double NormingSeq::b(std::int64_t n) const {
  if (n < 1) throw InvalidArgument("norming: n must be >= 1");
  if (n < first_n()) return solve_bn(*this, n);
  {
    std::shared_lock lock(cache_->mutex);
    if (static_cast<std::size_t>(n) <= cache_->b.size()) return cache_->b[static_cast<std::size_t>(n - 1)];
  }
  return solve_bn(*this, n);
}

double NormingSeq::L(std::int64_t n) const { return b(n) / std::pow(static_cast<double>(n), 1.0 / alpha_); }

void NormingSeq::warm(std::int64_t n_max) const {
  std::size_t start = 0;
  {
    std::shared_lock lock(cache_->mutex);
    start = cache_->b.size();
  }
  if (static_cast<std::size_t>(n_max) <= start) return;
  std::vector<double> fresh(static_cast<std::size_t>(n_max) - start);
  const auto count = static_cast<std::int64_t>(fresh.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    const std::int64_t n = static_cast<std::int64_t>(start) + i + 1;
    fresh[static_cast<std::size_t>(i)] = n < first_n() ? std::numeric_limits<double>::quiet_NaN() : solve_bn(*this, n);
  }
  std::unique_lock lock(cache_->mutex);
  for (std::size_t i = cache_->b.size() - start; i < fresh.size(); ++i) cache_->b.push_back(fresh[i]);
}

std::int64_t NormingSeq::cached() const {
  std::shared_lock lock(cache_->mutex);
  return static_cast<std::int64_t>(cache_->b.size());
}

std::int64_t min_n_log_power(double alpha, double sigma) {
  return static_cast<std::int64_t>(std::ceil(std::exp(sigma - sigma * std::log(sigma / alpha))));
}

std::int64_t NormingSeq::first_n() const {
  return h_.kind() == SlowlyVarying::Kind::log_power ? min_n_log_power(alpha_, h_.param()) : 1;
}

double solve_bn(const NormingSeq& seq, std::int64_t n) {
  if (n < 1) throw InvalidArgument("solve_bn: n must be >= 1");
  const double alpha = seq.alpha();
  const SlowlyVarying& h = seq.h();
  const double ln_n = std::log(static_cast<double>(n));
  switch (h.kind()) {
    case SlowlyVarying::Kind::constant:
      return std::pow(static_cast<double>(n) * h.param(), 1.0 / alpha);
    case SlowlyVarying::Kind::log_power: {
      const double sigma = h.param();
      const std::int64_t n_min = min_n_log_power(alpha, sigma);
      if (n < n_min) {
        throw InvalidArgument("solve_bn: b^alpha = n log^sigma b has no root with b > e^{sigma/alpha} for n = " +
                              std::to_string(n) + "; the minimal n is " + std::to_string(n_min));
      }
      // u = ln b > sigma/alpha, F(u) = alpha u - sigma ln u - ln n is increasing there.
      auto F = [&](double u) { return alpha * u - sigma * std::log(u) - ln_n; };
      const double lo = sigma / alpha;
      double hi = std::max(2.0 * lo, (ln_n + 1.0) / alpha);
      while (F(hi) < 0.0) hi *= 2.0;
      return std::exp(bisect_increasing(F, lo, hi));
    }
    case SlowlyVarying::Kind::karamata: {
      auto F = [&](double u) { return alpha * u - std::log(h(std::exp(u))) - ln_n; };
      const double lo = std::log(h.a0());
      if (F(lo) > 0.0) {
        throw InvalidArgument("solve_bn: no root above a0 for n = " + std::to_string(n) +
                              " (a0^alpha exceeds n h(a0))");
      }
      double hi = std::max(lo + 1.0, (ln_n + 1.0) / alpha);
      while (F(hi) < 0.0) hi = lo + 2.0 * (hi - lo);
      return std::exp(bisect_increasing(F, lo, hi));
    }
  }
  return 0.0;
}

double sup_h(const NormingSeq& seq, double x) {
  const double lo = 1.0 / seq.epsilon();
  if (!(x >= lo * (1 - 1e-12))) {
    throw InvalidArgument("sup_h: x must be >= 1/epsilon = " + std::to_string(lo) + " (epsilon = " +
                          std::to_string(seq.epsilon()) + ")");
  }
  x = std::max(x, lo);
  const SlowlyVarying& h = seq.h();
  switch (h.kind()) {
    case SlowlyVarying::Kind::constant:
      return h.param();
    case SlowlyVarying::Kind::log_power:
      return h(x);
    case SlowlyVarying::Kind::karamata:
      break;
  }
  // Grid on an absolute lattice in ln y, then golden refinement around the best point.
  const double ulo = std::log(lo);
  const double uhi = std::log(x);
  double best = std::max(h(lo), h(x));
  double best_u = h(lo) >= h(x) ? ulo : uhi;
  const auto k0 = static_cast<std::int64_t>(std::ceil(ulo * kSupGridPerUnit));
  const auto k1 = static_cast<std::int64_t>(std::floor(uhi * kSupGridPerUnit));
  for (std::int64_t k = k0; k <= k1; ++k) {
    const double u = static_cast<double>(k) / kSupGridPerUnit;
    const double v = h(std::exp(u));
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  const double step = 1.0 / kSupGridPerUnit;
  const double a = std::max(ulo, best_u - step);
  const double b = std::min(uhi, best_u + step);
  if (b > a) best = std::max(best, golden_max(h, a, b));
  return best;
}

double tilde_l(const NormingSeq& seq, std::int64_t n) {
  const double L = seq.L(n);
  const double M = sup_h(seq, std::pow(static_cast<double>(n), 1.0 + 1.0 / seq.alpha()));
  return L * (1.0 + M + std::pow(L, seq.eta()));
}

double log_weight_gamma(double alpha, double sigma) {
  const double lo = sigma / alpha;
  const double hi = std::min(sigma, 1.0 - sigma);
  if (!(sigma > 0.0 && lo < hi)) {
    throw InvalidArgument("log_weight_gamma: need 0 < sigma with sigma/alpha < min(sigma, 1 - sigma)");
  }
  return 0.5 * (lo + hi) + sigma + 1.0;
}

LogWeightCheck log_weight_sum_check(const NormingSeq& seq, std::int64_t a, std::int64_t b, double gamma) {
  if (!(a >= 2 && a < b)) throw InvalidArgument("log_weight_sum_check: need 2 <= a < b");
  if (!(gamma > 0.0 && gamma < 2.0)) throw InvalidArgument("log_weight_sum_check: gamma must lie in (0,2)");
  if (b <= (std::int64_t{1} << 22)) seq.warm(b);

  const auto count = b - a;
  std::vector<double> terms(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    const std::int64_t k = a + i;
    terms[static_cast<std::size_t>(i)] = tilde_l(seq, k) / static_cast<double>(k);
  }

  std::vector<std::int64_t> points{a};
  for (std::int64_t p = 1; p < b; p *= 2) {
    if (p > a) points.push_back(p);
  }
  points.push_back(b);

  // prefix[j] = sum_{a <= k < points[j]} terms
  std::vector<long double> prefix(points.size(), 0.0L);
  long double acc = 0.0L;
  std::size_t j = 1;
  for (std::int64_t k = a; k < b; ++k) {
    acc += terms[static_cast<std::size_t>(k - a)];
    while (j < points.size() && points[j] == k + 1) prefix[j++] = acc;
  }

  auto logg = [&](std::int64_t x) { return std::pow(std::log(static_cast<double>(x)), gamma); };
  LogWeightCheck out;
  out.lhs_sum = static_cast<double>(prefix.back());
  out.rhs_gap = logg(b) - logg(a);
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t q = p + 1; q < points.size(); ++q) {
      const double lhs = static_cast<double>(prefix[q] - prefix[p]);
      const double rhs = logg(points[q]) - logg(points[p]);
      const double ratio = lhs / rhs;
      if (ratio > out.fitted_C) {
        out.fitted_C = ratio;
        out.worst_a = points[p];
        out.worst_b = points[q];
      }
    }
  }
  return out;
}

std::vector<NormingRow> norming_table(const NormingSeq& seq, std::span<const std::int64_t> ns) {
  std::vector<NormingRow> rows;
  rows.reserve(ns.size());
  for (std::int64_t n : ns) {
    NormingRow r;
    r.n = n;
    r.b = seq.b(n);
    r.L = seq.L(n);
    r.M = sup_h(seq, std::pow(static_cast<double>(n), 1.0 + 1.0 / seq.alpha()));
    r.tilde_L = tilde_l(seq, n);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace stable_llt
