#include "stable_llt/lattice_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include "stable_llt/error.hpp"

namespace stable_llt {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kMeanTol = 1e-10;
constexpr std::int64_t kSamplerHeadCap = 65536;
constexpr double kSamplerHeadDeficit = 1e-6;
constexpr std::int64_t kMinCutoff = 64;

struct Accumulator {
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

TailShape shape_of(TailKind kind) {
  switch (kind) {
    case TailKind::power:
      return TailShape::power;
    case TailKind::log_power:
      return TailShape::log_power;
    case TailKind::geometric_square:
      return TailShape::geometric_square;
    case TailKind::none:
      break;
  }
  throw InvalidArgument("tail kind 'none' has no kernel");
}

const char* kind_name(TailKind kind) {
  switch (kind) {
    case TailKind::none:
      return "none";
    case TailKind::power:
      return "power";
    case TailKind::log_power:
      return "log_power";
    case TailKind::geometric_square:
      return "geometric_square";
  }
  return "none";
}

TailKind kind_from_name(const std::string& s) {
  if (s == "none") return TailKind::none;
  if (s == "power") return TailKind::power;
  if (s == "log_power") return TailKind::log_power;
  if (s == "geometric_square") return TailKind::geometric_square;
  throw InvalidArgument("unknown tail kind '" + s + "'");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0) {
    throw InvalidArgument("alpha must lie in (0,2] and differ from 1");
  }
}

std::complex<long double> unit_phase(long double t, std::int64_t k) {
  const long double ang = std::fmod(t * static_cast<long double>(k), 2.0L * std::numbers::pi_v<long double>);
  return std::polar(1.0L, ang);
}

// Power-type law: tail mass w_r f(k), w_l f(k) for |k| >= k0 and the rest
// placed on {-1, 0, 1} so that the mean vanishes (alpha > 1).
LatticeLaw build_centered_heavy(const std::string& name, std::map<std::string, double> params, double alpha,
                                double c1, double c2, TailShape shape, double sigma, SlowlyVaryingRef l) {
  const double wr = alpha * c1;
  const double wl = alpha * c2;
  TailKernel f{shape, 1.0 + alpha, sigma};
  const TailKernel fk = f.moment(1);

  std::int64_t k0 = 2;
  double mass_t = 0.0;
  double m = 0.0;
  for (;; ++k0) {
    if (k0 > 1'000'000) throw InvalidArgument(name + ": tail constants too large to normalize");
    mass_t = (wr + wl) * f.sum_from(k0).value;
    m = alpha > 1.0 ? (wr - wl) * fk.sum_from(k0).value : 0.0;
    const double r = 1.0 - mass_t;
    if (r > 0.0 && std::fabs(m) <= r / 2) break;
  }
  const double r = 1.0 - mass_t;
  const double p0 = (r - std::fabs(m)) / 2;
  const double p1 = (r + std::fabs(m)) / 4 - m / 2;
  const double pm1 = (r + std::fabs(m)) / 4 + m / 2;

  const std::int64_t cutoff = std::max(kMinCutoff, k0);
  std::vector<double> table(static_cast<std::size_t>(2 * cutoff + 1), 0.0);
  auto at = [&](std::int64_t k) -> double& { return table[static_cast<std::size_t>(k + cutoff)]; };
  at(-1) = pm1;
  at(0) = p0;
  at(1) = p1;
  for (std::int64_t k = k0; k <= cutoff; ++k) {
    const double fkv = f.value(static_cast<double>(k));
    at(k) = wr * fkv;
    at(-k) = wl * fkv;
  }
  TailDescriptor tail;
  tail.kind = shape == TailShape::power ? TailKind::power : TailKind::log_power;
  tail.cutoff = cutoff;
  tail.exponent = 1.0 + alpha;
  tail.sigma = sigma;
  tail.right_weight = wr;
  tail.left_weight = wl;
  params["k0"] = static_cast<double>(k0);
  return LatticeLaw(-cutoff, std::move(table), tail, alpha, c1, c2, l, name, std::move(params));
}

}  // namespace

TailKernel TailDescriptor::kernel() const { return TailKernel{shape_of(kind), exponent, sigma}; }

LatticeLaw::LatticeLaw(std::int64_t table_lo, std::vector<double> table, TailDescriptor tail, double alpha,
                       double c1, double c2, SlowlyVaryingRef l, std::string name,
                       std::map<std::string, double> params)
    : table_lo_(table_lo),
      table_(std::move(table)),
      tail_(tail),
      alpha_(alpha),
      c1_(c1),
      c2_(c2),
      l_(l),
      name_(std::move(name)),
      params_(std::move(params)) {
  check_alpha(alpha_);
  if (!(c1_ >= 0.0) || !(c2_ >= 0.0)) throw InvalidArgument("tail constants must be nonnegative");
  if (alpha_ < 2.0 && !(c1_ + c2_ > 0.0)) throw InvalidArgument("c1 + c2 must be positive");
  if (table_.empty()) throw InvalidArgument("empty table");
  for (double p : table_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("masses must be finite and nonnegative");
  }
  if (tail_.kind != TailKind::none) {
    if (!(tail_.right_weight >= 0.0) || !(tail_.left_weight >= 0.0)) {
      throw InvalidArgument("tail weights must be nonnegative");
    }
    if (tail_.cutoff < 1) throw InvalidArgument("tail cutoff must be >= 1");
    if (table_lo_ < -tail_.cutoff || table_hi() > tail_.cutoff) {
      throw InvalidArgument("table overlaps the analytic tail region");
    }
    if (tail_.kind != TailKind::geometric_square && !(tail_.exponent > 1.0)) {
      throw InvalidArgument("tail exponent must exceed 1");
    }
  }
  const CertifiedSum mass = total_mass();
  if (std::fabs(mass.value - 1.0) > kMassTol) {
    throw InvalidArgument("total mass differs from 1 by " + std::to_string(mass.value - 1.0));
  }
  if (verify_span(*this) != 1) throw InvalidArgument("span must be 1");
  if (alpha_ > 1.0) {
    const double mu = mean();
    if (std::fabs(mu) > kMeanTol) throw InvalidArgument("law is not centered: mean " + std::to_string(mu));
  }
}

double LatticeLaw::pmf(std::int64_t k) const {
  if (k >= table_lo_ && k <= table_hi()) return table_[static_cast<std::size_t>(k - table_lo_)];
  if (tail_.kind == TailKind::none) return 0.0;
  if (k > tail_.cutoff) return tail_.right_weight * tail_.kernel().value(static_cast<double>(k));
  if (k < -tail_.cutoff) return tail_.left_weight * tail_.kernel().value(static_cast<double>(-k));
  return 0.0;
}

CertifiedSum LatticeLaw::upper_tail(std::int64_t k) const {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  Accumulator acc;
  double bound = 0.0;
  for (std::int64_t j = std::max(k, table_lo_); j <= table_hi(); ++j) {
    acc.add(table_[static_cast<std::size_t>(j - table_lo_)]);
  }
  if (tail_.has_right()) {
    const CertifiedSum s = tail_.kernel().sum_from(std::max(k, tail_.cutoff + 1));
    acc.add(static_cast<long double>(tail_.right_weight) * s.value);
    bound += tail_.right_weight * s.bound;
  }
  const double v = static_cast<double>(acc.value());
  return {v, bound + 4 * eps * v};
}

CertifiedSum LatticeLaw::lower_tail(std::int64_t k) const {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  Accumulator acc;
  double bound = 0.0;
  for (std::int64_t j = table_lo_; j <= std::min(k, table_hi()); ++j) {
    acc.add(table_[static_cast<std::size_t>(j - table_lo_)]);
  }
  if (tail_.has_left()) {
    const CertifiedSum s = tail_.kernel().sum_from(std::max(-k, tail_.cutoff + 1));
    acc.add(static_cast<long double>(tail_.left_weight) * s.value);
    bound += tail_.left_weight * s.bound;
  }
  const double v = static_cast<double>(acc.value());
  return {v, bound + 4 * eps * v};
}

CertifiedSum LatticeLaw::total_mass() const {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  Accumulator acc;
  for (double p : table_) acc.add(p);
  double bound = 0.0;
  if (tail_.kind != TailKind::none && tail_.right_weight + tail_.left_weight > 0.0) {
    const CertifiedSum s = tail_.kernel().sum_from(tail_.cutoff + 1);
    acc.add(static_cast<long double>(tail_.right_weight + tail_.left_weight) * s.value);
    bound += (tail_.right_weight + tail_.left_weight) * s.bound;
  }
  const double v = static_cast<double>(acc.value());
  return {v, bound + 4 * eps * v};
}

double LatticeLaw::mean() const {
  if (alpha_ <= 1.0) throw InvalidArgument("mean is infinite for alpha <= 1");
  Accumulator acc;
  for (std::size_t i = 0; i < table_.size(); ++i) {
    acc.add(static_cast<long double>(table_lo_ + static_cast<std::int64_t>(i)) * table_[i]);
  }
  if (tail_.kind != TailKind::none && tail_.right_weight != tail_.left_weight) {
    const CertifiedSum s = tail_.kernel().moment(1).sum_from(tail_.cutoff + 1);
    acc.add(static_cast<long double>(tail_.right_weight - tail_.left_weight) * s.value);
  }
  return static_cast<double>(acc.value());
}

double LatticeLaw::variance() const {
  if (tail_.kind == TailKind::power || tail_.kind == TailKind::log_power) {
    throw InvalidArgument("variance is infinite for power tails");
  }
  Accumulator acc;
  Accumulator first;
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const long double k = static_cast<long double>(table_lo_ + static_cast<std::int64_t>(i));
    acc.add(k * k * table_[i]);
    first.add(k * table_[i]);
  }
  if (tail_.kind == TailKind::geometric_square) {
    const TailKernel f = tail_.kernel();
    acc.add(static_cast<long double>(tail_.right_weight + tail_.left_weight) * f.moment(2).sum_from(tail_.cutoff + 1).value);
    first.add(static_cast<long double>(tail_.right_weight - tail_.left_weight) *
              f.moment(1).sum_from(tail_.cutoff + 1).value);
  }
  const long double mu = first.value();
  return static_cast<double>(acc.value() - mu * mu);
}

double LatticeLaw::truncated_second_moment(double x) const {
  if (!(x >= 0.0)) throw InvalidArgument("truncated_second_moment: x must be >= 0");
  const double xf = std::floor(x);
  const std::int64_t xi = xf > 4e18 ? std::numeric_limits<std::int64_t>::max() / 2 : static_cast<std::int64_t>(xf);
  Accumulator acc;
  for (std::int64_t k = std::max(table_lo_, -xi); k <= std::min(table_hi(), xi); ++k) {
    const long double kk = static_cast<long double>(k);
    acc.add(kk * kk * table_[static_cast<std::size_t>(k - table_lo_)]);
  }
  if (tail_.kind != TailKind::none && xi > tail_.cutoff) {
    const TailKernel g = tail_.kernel().moment(2);
    long double part = 0.0L;
    if (tail_.kind == TailKind::geometric_square) {
      part = g.sum_from(tail_.cutoff + 1).value - (xi < 4096 ? g.sum_from(xi + 1).value : 0.0);
    } else {
      if (xi - tail_.cutoff > 100'000'000) {
        throw InvalidArgument("truncated_second_moment: range too long for direct summation");
      }
      part = g.sum_range(tail_.cutoff + 1, xi);
    }
    acc.add(static_cast<long double>(tail_.right_weight + tail_.left_weight) * part);
  }
  return static_cast<double>(acc.value());
}

std::int64_t LatticeLaw::support_min() const {
  if (tail_.has_left()) return std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (table_[i] > 0.0) return table_lo_ + static_cast<std::int64_t>(i);
  }
  return table_lo_;
}

std::int64_t LatticeLaw::support_max() const {
  if (tail_.has_right()) return std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = table_.size(); i-- > 0;) {
    if (table_[i] > 0.0) return table_lo_ + static_cast<std::int64_t>(i);
  }
  return table_hi();
}

bool LatticeLaw::symmetric() const {
  if (tail_.kind != TailKind::none && tail_.right_weight != tail_.left_weight) return false;
  const std::int64_t lo = std::min(table_lo_, -table_hi());
  const std::int64_t hi = -lo;
  for (std::int64_t k = 1; k <= hi; ++k) {
    auto entry = [&](std::int64_t j) {
      return (j >= table_lo_ && j <= table_hi()) ? table_[static_cast<std::size_t>(j - table_lo_)] : 0.0;
    };
    if (entry(k) != entry(-k)) return false;
  }
  return true;
}

LatticeLaw LatticeLaw::mirrored() const {
  std::vector<double> rev(table_.rbegin(), table_.rend());
  TailDescriptor t = tail_;
  std::swap(t.right_weight, t.left_weight);
  return LatticeLaw(-table_hi(), std::move(rev), t, alpha_, c2_, c1_, l_, name_ + "_mirrored", params_);
}

double pmf(const LatticeLaw& law, std::int64_t k) { return law.pmf(k); }

std::int64_t span_of_sites(std::span<const std::int64_t> sites) {
  if (sites.size() < 2) throw InvalidArgument("degenerate distribution");
  std::int64_t g = 0;
  for (std::size_t i = 1; i < sites.size(); ++i) g = std::gcd(g, sites[i] - sites[0]);
  if (g == 0) throw InvalidArgument("degenerate distribution");
  return g;
}

std::int64_t verify_span(const LatticeLaw& law) {
  std::vector<std::int64_t> sites;
  const auto table = law.table();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i] > 0.0) sites.push_back(law.table_lo() + static_cast<std::int64_t>(i));
  }
  const TailDescriptor& t = law.tail();
  if (t.has_right()) {
    sites.push_back(t.cutoff + 1);
    sites.push_back(t.cutoff + 2);
  }
  if (t.has_left()) {
    sites.push_back(-t.cutoff - 1);
    sites.push_back(-t.cutoff - 2);
  }
  return span_of_sites(sites);
}

CharFnValue char_fn_certified(const LatticeLaw& law, double t) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double tm = std::remainder(t, 2.0 * std::numbers::pi);
  if (tm == 0.0) return {{1.0, 0.0}, 0.0};
  Accumulator re, im;
  const auto table = law.table();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i] == 0.0) continue;
    const auto z = unit_phase(tm, law.table_lo() + static_cast<std::int64_t>(i));
    re.add(table[i] * z.real());
    im.add(table[i] * z.imag());
  }
  double bound = 8 * eps;
  const TailDescriptor& td = law.tail();
  if (td.kind != TailKind::none && td.right_weight + td.left_weight > 0.0) {
    const CertifiedComplexSum s = td.kernel().oscillatory_sum_from(td.cutoff + 1, tm);
    re.add(static_cast<long double>(td.right_weight + td.left_weight) * s.value.real());
    im.add(static_cast<long double>(td.right_weight - td.left_weight) * s.value.imag());
    bound += (td.right_weight + td.left_weight) * s.bound;
  }
  return {{static_cast<double>(re.value()), static_cast<double>(im.value())}, bound};
}

std::complex<double> char_fn(const LatticeLaw& law, double t) { return char_fn_certified(law, t).value; }

std::vector<TailPoint> tail_profile(const LatticeLaw& law, std::span<const double> x_grid) {
  std::vector<TailPoint> out;
  out.reserve(x_grid.size());
  double prev = 0.0;
  for (double x : x_grid) {
    if (!(x > 0.0) || x <= prev) throw InvalidArgument("tail_profile: grid must be positive and increasing");
    prev = x;
    const double scale = std::pow(x, law.alpha());
    const auto up = static_cast<std::int64_t>(std::floor(x)) + 1;
    const auto down = static_cast<std::int64_t>(std::floor(-x));
    out.push_back({x, scale * law.upper_tail(up).value, scale * law.lower_tail(down).value});
  }
  return out;
}

std::vector<double> doubling_ratios(std::span<const double> values) {
  std::vector<double> r;
  for (std::size_t i = 1; i < values.size(); ++i) r.push_back(values[i] / values[i - 1]);
  return r;
}

LatticeSampler::LatticeSampler(const LatticeLaw& law) : head_lo_(0) {
  const TailDescriptor& td = law.tail();
  std::int64_t k_head = std::max(-law.table_lo(), law.table_hi());
  if (td.kind != TailKind::none) {
    kernel_ = td.kernel();
    right_weight_ = td.has_right() ? td.right_weight : 0.0;
    left_weight_ = td.has_left() ? td.left_weight : 0.0;
    k_head = std::max(k_head, td.cutoff);
    while (k_head < kSamplerHeadCap &&
           (right_weight_ + left_weight_) * kernel_.sum_from(k_head + 1).value > kSamplerHeadDeficit) {
      k_head = std::min(kSamplerHeadCap, 2 * k_head);
    }
    const double rest = kernel_.sum_from(k_head + 1).value;
    right_mass_ = right_weight_ * rest;
    left_mass_ = left_weight_ * rest;
  }
  head_lo_ = -k_head;
  cdf_.resize(static_cast<std::size_t>(2 * k_head + 1));
  long double acc = 0.0L;
  for (std::int64_t k = -k_head; k <= k_head; ++k) {
    acc += law.pmf(k);
    cdf_[static_cast<std::size_t>(k + k_head)] = static_cast<double>(acc);
  }
}

std::int64_t LatticeSampler::draw(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it != cdf_.end()) return head_lo_ + static_cast<std::int64_t>(it - cdf_.begin());
  double v = u - cdf_.back();
  const std::int64_t start = head_hi() + 1;
  if (v < right_mass_ && right_weight_ > 0.0) {
    return kernel_.invert_from(start, std::max(v, 1e-300) / right_weight_);
  }
  v -= right_mass_;
  if (left_weight_ > 0.0) {
    v = std::clamp(v, 1e-300, left_mass_);
    return -kernel_.invert_from(start, v / left_weight_);
  }
  if (right_weight_ > 0.0) return kernel_.invert_from(start, std::clamp(v, 1e-300, right_mass_) / right_weight_);
  // Rounding gap above the last CDF entry: return the largest support site.
  for (std::size_t i = cdf_.size(); i-- > 0;) {
    if (i == 0 || cdf_[i] > cdf_[i - 1]) return head_lo_ + static_cast<std::int64_t>(i);
  }
  return head_hi();
}

std::int64_t LatticeSampler::operator()(SeededStream& stream) const { return draw(stream.next_uniform()); }

std::vector<std::int64_t> sample(const LatticeLaw& law, SeededStream& stream, std::int64_t count) {
  if (count < 1) throw InvalidArgument("sample: count must be >= 1");
  const LatticeSampler sampler(law);
  std::vector<std::int64_t> out(static_cast<std::size_t>(count));
  for (auto& x : out) x = sampler(stream);
  return out;
}

LatticeLaw lazy_walk() {
  return LatticeLaw(-1, {0.25, 0.5, 0.25}, TailDescriptor{}, 2.0, 0.0, 0.0,
                    SlowlyVaryingRef{SlowlyVaryingRef::Kind::constant, 0.5}, "lazy_walk");
}

LatticeLaw zipf_symmetric(double alpha, double c_scale) {
  check_alpha(alpha);
  if (alpha == 2.0) throw InvalidArgument("zipf_symmetric: alpha must be below 2");
  if (!(c_scale > 0.0)) throw InvalidArgument("zipf_symmetric: c_scale must be positive");
  return build_centered_heavy("zipf_symmetric", {{"alpha", alpha}, {"c_scale", c_scale}}, alpha, c_scale, c_scale,
                              TailShape::power, 0.0, SlowlyVaryingRef{SlowlyVaryingRef::Kind::constant, 1.0});
}

LatticeLaw zipf_skewed(double alpha, double c1, double c2) {
  check_alpha(alpha);
  if (alpha == 2.0) throw InvalidArgument("zipf_skewed: alpha must be below 2");
  if (!(c1 >= 0.0 && c2 >= 0.0 && c1 + c2 > 0.0)) {
    throw InvalidArgument("zipf_skewed: need c1, c2 >= 0 and c1 + c2 > 0");
  }
  return build_centered_heavy("zipf_skewed", {{"alpha", alpha}, {"c1", c1}, {"c2", c2}}, alpha, c1, c2,
                              TailShape::power, 0.0, SlowlyVaryingRef{SlowlyVaryingRef::Kind::constant, 1.0});
}

LatticeLaw log_sigma_family(double alpha, double sigma, double c_scale) {
  check_alpha(alpha);
  if (alpha == 2.0) throw InvalidArgument("log_sigma_family: alpha must be below 2");
  if (!(sigma > 0.0 && sigma < alpha / (1.0 + alpha))) {
    throw InvalidArgument("log_sigma_family: sigma must lie in (0, alpha/(1+alpha))");
  }
  if (!(c_scale > 0.0)) throw InvalidArgument("log_sigma_family: c_scale must be positive");
  return build_centered_heavy("log_sigma_family", {{"alpha", alpha}, {"sigma", sigma}, {"c_scale", c_scale}}, alpha,
                              c_scale, c_scale, TailShape::log_power, sigma,
                              SlowlyVaryingRef{SlowlyVaryingRef::Kind::log_power, sigma});
}

double remark1_constant() {
  const TailKernel f{TailShape::geometric_square, 2.0, 0.0};
  return 1.0 / f.sum_from(1).value;
}

LatticeLaw remark1_counterexample() {
  const double c = remark1_constant();
  const double mu = c * std::numbers::ln2;
  const double w = mu / (1.0 + mu);
  const std::int64_t cutoff = kMinCutoff;
  std::vector<double> table(static_cast<std::size_t>(cutoff + 2), 0.0);
  table[0] = w;
  const TailKernel f{TailShape::geometric_square, 2.0, 0.0};
  for (std::int64_t k = 1; k <= cutoff; ++k) {
    table[static_cast<std::size_t>(k + 1)] = (1.0 - w) * c * f.value(static_cast<double>(k));
  }
  TailDescriptor tail;
  tail.kind = TailKind::geometric_square;
  tail.cutoff = cutoff;
  tail.exponent = 2.0;
  tail.right_weight = (1.0 - w) * c;
  tail.left_weight = 0.0;
  LatticeLaw probe(-1, table, tail, 2.0, 0.0, 0.0, SlowlyVaryingRef{SlowlyVaryingRef::Kind::constant, 1.0},
                   "remark1_counterexample");
  return LatticeLaw(-1, std::move(table), tail, 2.0, 0.0, 0.0,
                    SlowlyVaryingRef{SlowlyVaryingRef::Kind::constant, probe.variance()}, "remark1_counterexample",
                    {{"C", c}, {"atom_minus_one", w}});
}

LatticeLaw build_law(const std::string& builder, const std::map<std::string, double>& params) {
  auto get = [&](const char* key, std::optional<double> dflt = std::nullopt) {
    const auto it = params.find(key);
    if (it != params.end()) return it->second;
    if (dflt) return *dflt;
    throw InvalidArgument("law '" + builder + "' requires parameter '" + key + "'");
  };
  if (builder == "lazy_walk") return lazy_walk();
  if (builder == "zipf_symmetric") return zipf_symmetric(get("alpha"), get("c_scale", 0.5));
  if (builder == "zipf_skewed") return zipf_skewed(get("alpha"), get("c1"), get("c2"));
  if (builder == "log_sigma_family") return log_sigma_family(get("alpha"), get("sigma"), get("c_scale", 0.5));
  if (builder == "remark1_counterexample") return remark1_counterexample();
  throw InvalidArgument("unknown law builder '" + builder + "'");
}

nlohmann::json to_json(const LatticeLaw& law) {
  nlohmann::json table = nlohmann::json::array();
  const auto t = law.table();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != 0.0) table.push_back({law.table_lo() + static_cast<std::int64_t>(i), t[i]});
  }
  const TailDescriptor& td = law.tail();
  return {
      {"name", law.name()},
      {"params", law.params()},
      {"offset", law.offset()},
      {"span", law.span()},
      {"alpha", law.alpha()},
      {"c1", law.c1()},
      {"c2", law.c2()},
      {"l",
       {{"kind", law.l().kind == SlowlyVaryingRef::Kind::constant ? "constant" : "log_power"},
        {"param", law.l().param}}},
      {"table_range", {law.table_lo(), law.table_hi()}},
      {"table", table},
      {"tail",
       {{"kind", kind_name(td.kind)},
        {"cutoff", td.cutoff},
        {"exponent", td.exponent},
        {"sigma", td.sigma},
        {"right_weight", td.right_weight},
        {"left_weight", td.left_weight}}},
  };
}

LatticeLaw law_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("offset").get<std::int64_t>() != 0 || doc.at("span").get<std::int64_t>() != 1) {
      throw InvalidArgument("law JSON: only offset 0 and span 1 are supported");
    }
    const auto range = doc.at("table_range");
    const auto lo = range.at(0).get<std::int64_t>();
    const auto hi = range.at(1).get<std::int64_t>();
    if (hi < lo) throw InvalidArgument("law JSON: empty table range");
    std::vector<double> table(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (const auto& e : doc.at("table")) {
      const auto k = e.at(0).get<std::int64_t>();
      if (k < lo || k > hi) throw InvalidArgument("law JSON: table site outside table_range");
      table[static_cast<std::size_t>(k - lo)] = e.at(1).get<double>();
    }
    const auto& tj = doc.at("tail");
    TailDescriptor td;
    td.kind = kind_from_name(tj.at("kind").get<std::string>());
    td.cutoff = tj.at("cutoff").get<std::int64_t>();
    td.exponent = tj.at("exponent").get<double>();
    td.sigma = tj.at("sigma").get<double>();
    td.right_weight = tj.at("right_weight").get<double>();
    td.left_weight = tj.at("left_weight").get<double>();
    SlowlyVaryingRef l;
    const auto lk = doc.at("l").at("kind").get<std::string>();
    if (lk == "constant") {
      l.kind = SlowlyVaryingRef::Kind::constant;
    } else if (lk == "log_power") {
      l.kind = SlowlyVaryingRef::Kind::log_power;
    } else {
      throw InvalidArgument("law JSON: unknown l kind '" + lk + "'");
    }
    l.param = doc.at("l").at("param").get<double>();
    std::map<std::string, double> params;
    if (doc.contains("params")) params = doc.at("params").get<std::map<std::string, double>>();
    return LatticeLaw(lo, std::move(table), td, doc.at("alpha").get<double>(), doc.at("c1").get<double>(),
                      doc.at("c2").get<double>(), l, doc.value("name", std::string("custom")), std::move(params));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("law JSON: ") + e.what());
  }
}

}  // namespace stable_llt
