#include "stable_llt/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "stable_llt/error.hpp"

namespace stable_llt {

namespace {

double log_abs_phi(const LatticeLaw& law, double t) { return std::log(std::abs(char_fn(law, t))); }

JointMinusProduct assemble(double bm, double bn, std::int64_t km, std::int64_t kn, const LocalProb& pm,
                           const LocalProb& pnm, const LocalProb& pn) {
  JointMinusProduct r;
  r.kappa_m = km;
  r.kappa_n = kn;
  r.p_m = pm.p;
  r.p_nm = pnm.p;
  r.p_n = pn.p;
  const double diff = std::fabs(pnm.p - pn.p);
  const double diff_err = pnm.bound + pn.bound;
  r.lhs = bm * pm.p * bn * diff;
  const double upper = bm * bn * (pm.p + pm.bound) * (diff + diff_err);
  const double lower = bm * bn * std::max(0.0, pm.p - pm.bound) * std::max(0.0, diff - diff_err);
  r.lhs_err = std::max(upper - r.lhs, r.lhs - lower);
  return r;
}

void check_pair(std::int64_t m, std::int64_t n) {
  if (m < 1 || m >= n) {
    throw InvalidArgument("correlation: need 1 <= m < n (got m = " + std::to_string(m) + ", n = " +
                          std::to_string(n) + ")");
  }
}

// Local probabilities for a batch of (n, k) sites; one S_n per distinct n.
class ProbTable {
 public:
  void need(std::int64_t n, std::int64_t k) { wanted_[n].insert(k); }

  void fill(const SnEngine& engine) {
    std::vector<std::int64_t> ns;
    for (const auto& [n, ks] : wanted_) ns.push_back(n);
    std::vector<std::vector<std::pair<std::int64_t, LocalProb>>> found(ns.size());
    std::exception_ptr failure;
    const auto count = static_cast<std::int64_t>(ns.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        const std::int64_t n = ns[static_cast<std::size_t>(i)];
        const SnPmf s = engine.pmf(n);
        for (std::int64_t k : wanted_.at(n)) {
          found[static_cast<std::size_t>(i)].push_back({k, LocalProb{s.mass(k), s.entry_bound(k)}});
        }
      } catch (...) {
#pragma omp critical(stable_llt_prob_table)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      for (const auto& [k, lp] : found[i]) probs_[{ns[i], k}] = lp;
    }
  }

  const LocalProb& at(std::int64_t n, std::int64_t k) const { return probs_.at({n, k}); }

 private:
  std::map<std::int64_t, std::set<std::int64_t>> wanted_;
  std::map<std::pair<std::int64_t, std::int64_t>, LocalProb> probs_;
};

std::vector<JointMinusProduct> joint_batch(const SnEngine& engine,
                                           const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                                           double kappa) {
  const NormingSeq& seq = engine.seq();
  ProbTable table;
  for (const auto& [m, n] : pairs) {
    check_pair(m, n);
    const std::int64_t km = nearest_site(kappa * seq.b(m));
    const std::int64_t kn = nearest_site(kappa * seq.b(n));
    table.need(m, km);
    table.need(n - m, kn - km);
    table.need(n, kn);
  }
  table.fill(engine);
  std::vector<JointMinusProduct> out;
  out.reserve(pairs.size());
  for (const auto& [m, n] : pairs) {
    const std::int64_t km = nearest_site(kappa * seq.b(m));
    const std::int64_t kn = nearest_site(kappa * seq.b(n));
    out.push_back(assemble(seq.b(m), seq.b(n), km, kn, table.at(m, km), table.at(n - m, kn - km), table.at(n, kn)));
  }
  return out;
}

bool bound_ii_valid(const NormingSeq& seq, std::int64_t m, std::int64_t n) {
  const double a = seq.alpha();
  return static_cast<double>(n) > static_cast<double>(m) + std::pow(seq.epsilon(), -a / (a + 1.0));
}

CorrReport make_report(const NormingSeq& seq, const SpectralGap& gap, std::int64_t x0, std::int64_t m,
                       std::int64_t n, double kappa, const JointMinusProduct& j) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  CorrReport r;
  r.m = m;
  r.n = n;
  r.kappa = kappa;
  r.lhs = j.lhs;
  r.lhs_err = j.lhs_err;
  r.bound_i = bound_i(seq, m, n);
  r.bound_ii = bound_ii_valid(seq, m, n) ? bound_ii(seq, gap.c_hat, m, n, seq.eta()) : nan;
  r.corollary = (n >= 2 * m && m >= x0) ? corollary_bound(seq, m, n, x0) : nan;
  r.ratio_i = r.lhs / r.bound_i;
  r.ratio_ii = r.lhs / r.bound_ii;
  r.ratio_corollary = r.lhs / r.corollary;
  return r;
}

}  // namespace

SpectralGap spectral_gap(const LatticeLaw& law, double epsilon, int grid) {
  if (!(epsilon > 0.0 && epsilon < M_PI)) throw InvalidArgument("spectral_gap: epsilon must lie in (0, pi)");
  if (grid < 3) throw InvalidArgument("spectral_gap: grid needs at least 3 points");
  const double h = (M_PI - epsilon) / (grid - 1);
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double v = log_abs_phi(law, epsilon + h * i);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double lo = epsilon + h * std::max(0, best - 1);
  const double hi = epsilon + h * std::min(grid - 1, best + 1);
  const auto [t, neg] =
      boost::math::tools::brent_find_minima([&](double s) { return -log_abs_phi(law, s); }, lo, hi, 40);
  SpectralGap g;
  if (-neg > best_v) {
    g.c_hat = neg;
    g.t_at = t;
  } else {
    g.c_hat = -best_v;
    g.t_at = epsilon + h * best;
  }
  return g;
}

std::int64_t x0_from_gap(double c_hat, double alpha) {
  if (!(c_hat > 0.0)) throw InvalidArgument("x0_from_gap: spectral gap must be positive");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidArgument("x0_from_gap: alpha must lie in (0, 2]");
  const double p = 2.0 / alpha;
  auto f = [&](double x) { return c_hat * x - p * std::log(x); };
  const double x_star = p / c_hat;  // minimum of f
  if (x_star <= 1.0 || f(x_star) >= 0.0) return 1;
  double hi = 2.0 * x_star;
  while (f(hi) < 0.0) hi *= 2.0;
  boost::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, x_star, hi, boost::math::tools::eps_tolerance<double>(50),
                                                        iters);
  auto x0 = static_cast<std::int64_t>(std::ceil(b));
  while (x0 > 1 && f(static_cast<double>(x0 - 1)) >= 0.0 && static_cast<double>(x0 - 1) >= a) --x0;
  return x0;
}

JointMinusProduct joint_minus_product(const SnEngine& engine, std::int64_t m, std::int64_t n, double kappa) {
  return joint_batch(engine, {{m, n}}, kappa).front();
}

JointMinusProduct joint_minus_product(const LatticeLaw& law, const NormingSeq& seq, std::int64_t m, std::int64_t n,
                                      double kappa, double tol) {
  check_pair(m, n);
  SnOptions opts;
  opts.tol = tol;
  opts.n_max = n;
  return joint_minus_product(SnEngine(law, seq, opts), m, n, kappa);
}

double bound_i(const NormingSeq& seq, std::int64_t m, std::int64_t n) {
  check_pair(m, n);
  const double ratio = static_cast<double>(n) / static_cast<double>(n - m);
  return std::pow(ratio, 1.0 / seq.alpha()) * seq.L(n) / seq.L(n - m) + 1.0;
}

double bound_ii(const NormingSeq& seq, double c_hat, std::int64_t m, std::int64_t n, double eta) {
  check_pair(m, n);
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("bound_ii: eta must lie in (0, 1]");
  if (!(c_hat > 0.0)) throw InvalidArgument("bound_ii: spectral gap must be positive");
  if (!bound_ii_valid(seq, m, n)) {
    throw InvalidArgument("bound_ii: requires n > m + epsilon^{-alpha/(alpha+1)} (m = " + std::to_string(m) +
                          ", n = " + std::to_string(n) + ", epsilon = " + std::to_string(seq.epsilon()) + ")");
  }
  const double a = seq.alpha();
  const double nd = static_cast<double>(n);
  const double r = static_cast<double>(m) / nd;
  const double expo = std::pow(nd, 1.0 / a) * (std::exp(-static_cast<double>(n - m) * c_hat) + std::exp(-nd * c_hat));
  const double M = sup_h(seq, std::pow(nd, 1.0 + 1.0 / a));
  const double middle = r / std::pow(1.0 - r, 1.0 + 1.0 / a) * (1.0 + M);
  const double last = std::pow(r, eta / a) * std::pow(seq.L(m), eta) / std::pow(1.0 - r, (eta + 1.0) / a);
  return seq.L(n) * (expo + middle + last);
}

double corollary_bound(const NormingSeq& seq, std::int64_t m, std::int64_t n, std::int64_t x0) {
  check_pair(m, n);
  if (n < 2 * m) throw InvalidArgument("corollary_bound: requires n >= 2m");
  if (m < x0) {
    throw InvalidArgument("corollary_bound: requires m >= x0 = " + std::to_string(x0) + " (m = " +
                          std::to_string(m) + ")");
  }
  return tilde_l(seq, n) * std::pow(static_cast<double>(m) / static_cast<double>(n), seq.rho());
}

CorrReport corr_report(const SnEngine& engine, const SpectralGap& gap, std::int64_t x0, std::int64_t m,
                       std::int64_t n, double kappa) {
  return make_report(engine.seq(), gap, x0, m, n, kappa, joint_minus_product(engine, m, n, kappa));
}

ExponentFit fit_log_log(std::span<const double> x, std::span<const double> y, const std::vector<bool>& mask) {
  if (x.size() != y.size() || mask.size() != x.size()) throw InvalidArgument("fit_log_log: size mismatch");
  ExponentFit f;
  f.log_ratio.assign(x.begin(), x.end());
  f.log_lhs.assign(y.begin(), y.end());
  f.used = mask;
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!mask[i]) continue;
    ++f.used_count;
    sx += x[i];
    sy += y[i];
  }
  if (f.used_count < 4) {
    throw NumericalError("exponent_fit: only " + std::to_string(f.used_count) + " usable points (need 4)");
  }
  const double mx = sx / f.used_count, my = sy / f.used_count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!mask[i]) continue;
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericalError("exponent_fit: degenerate abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.residuals.assign(x.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask[i]) f.residuals[i] = y[i] - (f.intercept + f.slope * x[i]);
  }
  return f;
}

ExponentFit exponent_fit(const SnEngine& engine, std::int64_t n, std::span<const std::int64_t> m_grid,
                         std::int64_t x0, double kappa) {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (std::int64_t m : m_grid) {
    if (n < 2 * m || m < x0 || m < engine.seq().first_n()) {
      throw InvalidArgument("exponent_fit: m = " + std::to_string(m) + " violates n >= 2m, m >= x0 = " +
                            std::to_string(x0));
    }
    pairs.push_back({m, n});
  }
  const auto joint = joint_batch(engine, pairs, kappa);
  std::vector<double> x, y;
  std::vector<bool> mask;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    x.push_back(std::log(static_cast<double>(pairs[i].first) / static_cast<double>(n)));
    const bool ok = joint[i].lhs > 10.0 * joint[i].lhs_err && joint[i].lhs > 0.0;
    y.push_back(joint[i].lhs > 0.0 ? std::log(joint[i].lhs) : -std::numeric_limits<double>::infinity());
    mask.push_back(ok);
  }
  return fit_log_log(x, y, mask);
}

std::vector<std::int64_t> dyadic_m_grid(std::int64_t n, std::int64_t x0) {
  std::vector<std::int64_t> ms;
  for (std::int64_t m = 1; 2 * m <= n; m *= 2) {
    if (m >= x0) ms.push_back(m);
  }
  return ms;
}

DominationScan domination_scan(const SnEngine& engine, const SpectralGap& gap, std::int64_t x0,
                               std::int64_t n_base, int extensions, double kappa) {
  if (extensions < 1) throw InvalidArgument("domination_scan: need at least one extension");
  if (n_base < 2) throw InvalidArgument("domination_scan: n_base must be >= 2");
  const std::int64_t n_top = n_base << extensions;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (std::int64_t n = 2; n <= n_top; n *= 2) {
    for (std::int64_t m : dyadic_m_grid(n, std::max(x0, engine.seq().first_n()))) pairs.push_back({m, n});
  }
  const auto joint = joint_batch(engine, pairs, kappa);
  DominationScan scan;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    scan.rows.push_back(make_report(engine.seq(), gap, x0, pairs[i].first, pairs[i].second, kappa, joint[i]));
  }
  for (int e = 0; e <= extensions; ++e) {
    const std::int64_t horizon = n_base << e;
    double C = 0.0;
    bool any = false;
    for (const CorrReport& r : scan.rows) {
      if (r.n > horizon) continue;
      any = true;
      C = std::max(C, r.ratio_corollary);
    }
    if (!any) {
      throw InvalidArgument("domination_scan: empty grid at n <= " + std::to_string(horizon) + " for x0 = " +
                            std::to_string(x0));
    }
    scan.n_max.push_back(horizon);
    scan.empirical_C.push_back(C);
  }
  bool blow_up = true;
  double prev = 0.0;
  for (std::size_t e = 1; e < scan.empirical_C.size(); ++e) {
    const double d = scan.empirical_C[e] - scan.empirical_C[e - 1];
    if (!(d > 0.0) || d < prev) blow_up = false;
    prev = d;
  }
  const double growth = scan.empirical_C.back() / scan.empirical_C.front() - 1.0;
  scan.stable = std::isfinite(scan.empirical_C.back()) && !blow_up && growth <= kDominationGrowth;
  return scan;
}

}  // namespace stable_llt
