#include "stable_llt/tail_sums.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "stable_llt/error.hpp"

namespace stable_llt {

namespace {

constexpr std::int64_t kEulerMaclaurinStart = 1024;
constexpr std::int64_t kInvertCap = std::int64_t{1} << 62;
constexpr long double kTwoPi = 2.0L * std::numbers::pi_v<long double>;

// Neumaier compensated accumulator.
struct Compensated {
  long double sum = 0.0L;
  long double carry = 0.0L;
  void add(long double x) {
    const long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  long double value() const { return sum + carry; }
};

}  // namespace

double TailKernel::value(double x) const { return static_cast<double>(value_ld(x)); }

long double TailKernel::value_ld(long double x) const {
  switch (shape) {
    case TailShape::power:
      return std::pow(x, -static_cast<long double>(exponent));
    case TailShape::log_power:
      return std::pow(x, -static_cast<long double>(exponent)) *
             std::pow(std::log(x), static_cast<long double>(sigma));
    case TailShape::geometric_square:
      return std::pow(x, -static_cast<long double>(exponent)) * std::exp2(-x);
  }
  return 0.0L;
}

TailKernel TailKernel::moment(int j) const {
  TailKernel k = *this;
  k.exponent -= j;
  return k;
}

long double TailKernel::derivative(long double x, int order) const {
  if (shape == TailShape::geometric_square) {
    throw InvalidArgument("derivative: not available for the geometric tail");
  }
  // f^(m)(x) = x^-(s+m) * sum_i c_i u^(sigma-i), u = ln x.
  std::vector<long double> coef{1.0L};
  long double s = exponent;
  for (int m = 0; m < order; ++m) {
    std::vector<long double> next(coef.size() + 1, 0.0L);
    for (std::size_t i = 0; i < coef.size(); ++i) {
      next[i] += -(s + m) * coef[i];
      if (shape == TailShape::log_power) {
        next[i + 1] += (static_cast<long double>(sigma) - static_cast<long double>(i)) * coef[i];
      }
    }
    coef = std::move(next);
  }
  const long double u = std::log(x);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < coef.size(); ++i) {
    if (coef[i] == 0.0L) continue;
    const long double pw = shape == TailShape::log_power
                               ? std::pow(u, static_cast<long double>(sigma) - static_cast<long double>(i))
                               : 1.0L;
    acc += coef[i] * pw;
  }
  return acc * std::pow(x, -(s + order));
}

double TailKernel::integral_from(double a) const {
  const double s1 = exponent - 1.0;
  if (s1 <= 0.0) throw InvalidArgument("integral_from: divergent tail integral");
  switch (shape) {
    case TailShape::power:
      return std::pow(a, -s1) / s1;
    case TailShape::log_power: {
      if (a <= 1.0) throw InvalidArgument("integral_from: log-power tail needs a > 1");
      const double z = s1 * std::log(a);
      return boost::math::tgamma(sigma + 1.0, z) / std::pow(s1, sigma + 1.0);
    }
    case TailShape::geometric_square:
      break;
  }
  throw InvalidArgument("integral_from: not available for the geometric tail");
}

double TailKernel::sum_range(std::int64_t a, std::int64_t b) const {
  Compensated acc;
  for (std::int64_t k = b; k >= a; --k) acc.add(value_ld(static_cast<long double>(k)));
  return static_cast<double>(acc.value());
}

CertifiedSum TailKernel::sum_from(std::int64_t a) const {
  if (a < 1) throw InvalidArgument("sum_from: start must be >= 1");
  if (exponent <= 1.0 && shape != TailShape::geometric_square) {
    throw InvalidArgument("sum_from: divergent tail (exponent <= 1)");
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (shape == TailShape::geometric_square) {
    Compensated acc;
    long double term = 0.0L;
    for (std::int64_t k = a;; ++k) {
      term = value_ld(static_cast<long double>(k));
      acc.add(term);
      if (term <= 1e-22L * acc.value() || term == 0.0L) break;
    }
    // Ratio of consecutive terms is at most 1/2, so the remainder is below the last term.
    const double v = static_cast<double>(acc.value());
    return {v, static_cast<double>(term) + 4 * eps * v};
  }
  double head = 0.0;
  std::int64_t start = a;
  if (a < kEulerMaclaurinStart) {
    head = sum_range(a, kEulerMaclaurinStart - 1);
    start = kEulerMaclaurinStart;
  }
  const long double x = static_cast<long double>(start);
  const long double f0 = value_ld(x);
  const long double f1 = derivative(x, 1);
  const long double f3 = derivative(x, 3);
  const long double f5 = derivative(x, 5);
  const long double tail = static_cast<long double>(integral_from(static_cast<double>(start))) + f0 / 2 -
                           f1 / 12 + f3 / 720 - f5 / 30240;
  const double v = head + static_cast<double>(tail);
  const double remainder = static_cast<double>(std::fabs(f5) / 30240);
  return {v, remainder + 8 * eps * v};
}

CertifiedComplexSum TailKernel::oscillatory_sum_from(std::int64_t a, double t) const {
  const double tm = std::remainder(t, 2.0 * std::numbers::pi);
  if (tm == 0.0) {
    const CertifiedSum s = sum_from(a);
    return {{s.value, 0.0}, s.bound};
  }
  const double d = 2.0 * std::fabs(std::sin(tm / 2.0));
  const std::complex<long double> z = std::polar(1.0L, static_cast<long double>(tm));

  auto phase = [&](std::int64_t k) {
    const long double ang = std::fmod(static_cast<long double>(tm) * static_cast<long double>(k), kTwoPi);
    return std::polar(1.0L, ang);
  };

  // Direct part on [a, a2): long enough that summation by parts contracts fast.
  std::int64_t a2 = a;
  if (shape != TailShape::geometric_square) {
    a2 = std::max<std::int64_t>(a, static_cast<std::int64_t>(std::ceil(64.0 / d)));
    a2 = std::max<std::int64_t>(a2, 64);
  }
  Compensated re, im;
  long double mass = 0.0L;
  std::complex<long double> zk = phase(a);
  long double last = 0.0L;
  std::int64_t k = a;
  for (; shape == TailShape::geometric_square || k < a2; ++k) {
    if (((k - a) & 255) == 0) zk = phase(k);
    const long double f = value_ld(static_cast<long double>(k));
    re.add(f * zk.real());
    im.add(f * zk.imag());
    mass += f;
    zk *= z;
    last = f;
    if (shape == TailShape::geometric_square && (f <= 1e-22L * std::fabs(re.value()) + 1e-300L)) break;
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (shape == TailShape::geometric_square) {
    return {{static_cast<double>(re.value()), static_cast<double>(im.value())},
            static_cast<double>(last) + 1e-15 * static_cast<double>(last)};
  }
  // Phase recurrence drifts by at most ~256 ulp between resyncs.
  const double direct_err =
      static_cast<double>(512 * std::numeric_limits<long double>::epsilon() * mass) + eps * static_cast<double>(mass);

  // sum_{k>=a2} f(k) z^k = sum_{j<p} z^(a2+j) D^j f(a2) / (1-z)^(j+1) + R_p,
  // |R_p| <= |1-z|^-p |D^(p-1) f(a2)|.
  constexpr int kMaxTerms = 40;
  std::array<long double, kMaxTerms + 1> diff{};
  for (int i = 0; i <= kMaxTerms; ++i) diff[i] = value_ld(static_cast<long double>(a2 + i));
  const long double fmax = diff[0];
  const std::complex<long double> w = 1.0L / (1.0L - z);
  const long double wabs = std::abs(w);
  std::complex<long double> zpow = phase(a2);
  std::complex<long double> wpow = w;
  std::complex<long double> acc = 0.0L;
  long double best_bound = std::numeric_limits<long double>::infinity();
  std::complex<long double> best_acc = 0.0L;
  long double wabs_pow = wabs;  // |w|^(j+1)
  long double round_err = 0.0L;
  for (int j = 0; j < kMaxTerms; ++j) {
    // diff[0] holds D^j f(a2).
    acc += zpow * diff[0] * wpow;
    zpow *= z;
    wpow *= w;
    // Cancellation error in D^j f grows like 2^j ulp(f).
    round_err += std::ldexp(std::numeric_limits<long double>::epsilon() * fmax, j + 1) * wabs_pow;
    const long double trunc = wabs_pow * std::fabs(diff[0]);
    const long double bound = trunc + round_err;
    if (bound < best_bound) {
      best_bound = bound;
      best_acc = acc;
    }
    if (trunc < 1e-20L) break;
    wabs_pow *= wabs;
    for (int i = 0; i + j < kMaxTerms; ++i) diff[i] = diff[i + 1] - diff[i];
  }
  const std::complex<double> total(static_cast<double>(re.value() + best_acc.real()),
                                   static_cast<double>(im.value() + best_acc.imag()));
  return {total, static_cast<double>(best_bound) + direct_err};
}

std::int64_t TailKernel::invert_from(std::int64_t a, double v) const {
  if (!(v > 0.0)) throw InvalidArgument("invert_from: v must be positive");
  auto r = [&](std::int64_t k) { return sum_from(k).value; };
  if (r(a) < v) return a;
  std::int64_t lo = a;      // r(lo) >= v
  std::int64_t step = 1;
  std::int64_t hi = a + 1;  // r(hi) < v once found
  while (r(hi) >= v) {
    lo = hi;
    if (hi >= kInvertCap / 2) return kInvertCap;
    step *= 2;
    hi = std::min(kInvertCap, a + step);
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (r(mid) >= v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace stable_llt
