#include "stable_llt/exact_llt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stable_llt/error.hpp"

namespace stable_llt {

namespace {

double sum_of(std::span<const double> v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s);
}

// r -> sup_{|j| >= r} v(j) on [-W, W], stored for r = 0..W+1.
std::vector<double> radial_suffix_max(std::span<const double> v, std::int64_t W) {
  std::vector<double> g(static_cast<std::size_t>(W + 2), 0.0);
  for (std::int64_t r = W; r >= 0; --r) {
    const double here = std::max(v[static_cast<std::size_t>(W + r)], v[static_cast<std::size_t>(W - r)]);
    g[static_cast<std::size_t>(r)] = std::max(g[static_cast<std::size_t>(r + 1)], here);
  }
  return g;
}

// Upper bound on sup_{|j| >= r} p(j) for the exact law p behind `s`, given
// the suffix maxima of its in-window upper bound.
double far_sup(const std::vector<double>& g, std::int64_t W, double outside, std::int64_t r) {
  if (r > W) return outside;
  return std::max(g[static_cast<std::size_t>(std::max<std::int64_t>(r, 0))], outside);
}

SnPmf crop(const SnPmf& s, std::int64_t W) {
  if (W >= s.W) return s;
  SnPmf c = s;
  c.W = W;
  const auto off = static_cast<std::size_t>(s.W - W);
  const auto len = static_cast<std::size_t>(2 * W + 1);
  c.masses.assign(s.masses.begin() + static_cast<std::ptrdiff_t>(off),
                  s.masses.begin() + static_cast<std::ptrdiff_t>(off + len));
  c.envelope.assign(s.envelope.begin() + static_cast<std::ptrdiff_t>(off),
                    s.envelope.begin() + static_cast<std::ptrdiff_t>(off + len));
  long double cut = 0.0L;
  for (std::size_t i = 0; i < off; ++i) cut += s.masses[i] + s.masses[s.masses.size() - 1 - i];
  c.err_bound += static_cast<double>(cut);
  for (double& e : c.envelope) e = std::min(e, c.err_bound);
  return c;
}

std::int64_t safe_mul(std::int64_t a, std::int64_t b) {
  if (a != 0 && b > std::numeric_limits<std::int64_t>::max() / a) return std::numeric_limits<std::int64_t>::max();
  return a * b;
}

}  // namespace

double SnPmf::mass(std::int64_t k) const {
  if (!in_window(k)) return 0.0;
  return masses[static_cast<std::size_t>(k + W)];
}

double SnPmf::entry_bound(std::int64_t k) const {
  if (!in_window(k)) return err_bound;
  return envelope[static_cast<std::size_t>(k + W)] + roundoff;
}

double SnPmf::total() const { return sum_of(masses); }

bool SnPmf::envelope_zero() const {
  return std::all_of(envelope.begin(), envelope.end(), [](double e) { return e == 0.0; });
}

SnPmf combine(const SnPmf& a, const SnPmf& b, std::int64_t W, ConvKernel kernel) {
  const std::int64_t wf = a.W + b.W;
  W = std::min(W, wf);
  const Convolution main = convolve(a.masses, b.masses, kernel);

  SnPmf c;
  c.n = a.n + b.n;
  c.W = W;
  c.tol = std::max(a.tol, b.tol);
  c.w_factor = std::max(a.w_factor, b.w_factor);
  const double sum_a = sum_of(a.masses);
  const double sum_b = sum_of(b.masses);
  c.roundoff = a.roundoff * sum_b + b.roundoff * sum_a +
               a.roundoff * b.roundoff * static_cast<double>(std::min(a.masses.size(), b.masses.size())) +
               main.roundoff;

  c.masses.assign(static_cast<std::size_t>(2 * W + 1), 0.0);
  long double cropped = 0.0L;
  long double clamped = 0.0L;
  for (std::size_t i = 0; i < main.values.size(); ++i) {
    const std::int64_t k = static_cast<std::int64_t>(i) - wf;
    double v = main.values[i];
    if (v < 0.0) {
      clamped += -v;
      v = 0.0;
    }
    if (k < -W || k > W) {
      cropped += v;
    } else {
      c.masses[static_cast<std::size_t>(k + W)] = v;
    }
  }
  c.err_bound = a.err_bound + b.err_bound + static_cast<double>(cropped + clamped);

  c.envelope.assign(c.masses.size(), 0.0);
  const bool env_a = !a.envelope_zero();
  const bool env_b = !b.envelope_zero();
  if (!env_a && !env_b && a.err_bound == 0.0 && b.err_bound == 0.0) return c;

  // Upper bounds of the exact laws inside their windows.
  std::vector<double> upper_a(a.masses.size()), upper_b(b.masses.size());
  for (std::size_t i = 0; i < upper_a.size(); ++i) upper_a[i] = a.masses[i] + a.envelope[i] + a.roundoff;
  for (std::size_t i = 0; i < upper_b.size(); ++i) upper_b[i] = b.masses[i] + b.envelope[i] + b.roundoff;

  auto add_window = [&](const Convolution& conv) {
    for (std::int64_t k = -W; k <= W; ++k) {
      c.envelope[static_cast<std::size_t>(k + W)] +=
          std::max(conv.values[static_cast<std::size_t>(k + wf)], 0.0) + conv.roundoff;
    }
  };
  if (env_a) add_window(convolve(a.envelope, upper_b, kernel));
  if (env_b) add_window(convolve(a.masses, b.envelope, kernel));

  const double max_env_a = env_a ? *std::max_element(a.envelope.begin(), a.envelope.end()) : 0.0;
  const std::vector<double> g_a = radial_suffix_max(upper_a, a.W);
  const std::vector<double> g_b = radial_suffix_max(upper_b, b.W);
  for (std::int64_t k = -W; k <= W; ++k) {
    const std::int64_t ak = k < 0 ? -k : k;
    double e = c.envelope[static_cast<std::size_t>(k + W)];
    e += max_env_a * b.err_bound;
    if (a.err_bound > 0.0) e += a.err_bound * far_sup(g_b, b.W, b.err_bound, a.W + 1 - ak);
    if (b.err_bound > 0.0) e += b.err_bound * far_sup(g_a, a.W, a.err_bound, b.W + 1 - ak);
    c.envelope[static_cast<std::size_t>(k + W)] = std::min(e, c.err_bound);
  }
  return c;
}

SnPmf truncated_step(const LatticeLaw& law, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("truncated_step: tau must be nonnegative");
  auto outside = [&](std::int64_t K) {
    const CertifiedSum up = law.upper_tail(K + 1);
    const CertifiedSum lo = law.lower_tail(-K - 1);
    return up.value + up.bound + lo.value + lo.bound;
  };
  std::int64_t K = 0;
  const std::int64_t smin = law.support_min();
  const std::int64_t smax = law.support_max();
  const bool bounded = smin != std::numeric_limits<std::int64_t>::min() && smax != std::numeric_limits<std::int64_t>::max();
  if (bounded) {
    K = std::max(-smin, smax);
  } else {
    std::int64_t hi = std::max<std::int64_t>({1, -law.table_lo(), law.table_hi()});
    while (outside(hi) > tau) {
      if (hi > (std::int64_t{1} << 40)) throw InvalidArgument("truncated_step: tau too small for this law");
      hi *= 2;
    }
    std::int64_t lo = hi / 2;
    if (outside(lo) <= tau) lo = 0;
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (outside(mid) <= tau) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    K = hi;
  }
  SnPmf s;
  s.n = 1;
  s.W = K;
  s.masses.resize(static_cast<std::size_t>(2 * K + 1));
  for (std::int64_t k = -K; k <= K; ++k) s.masses[static_cast<std::size_t>(k + K)] = law.pmf(k);
  s.envelope.assign(s.masses.size(), 0.0);
  s.err_bound = bounded ? 0.0 : outside(K);
  s.tol = tau;
  return s;
}

SnEngine::SnEngine(LatticeLaw law, NormingSeq seq, SnOptions opts)
    : law_(std::move(law)), seq_(std::move(seq)), opts_(opts) {
  if (!(opts_.tol > 0.0 && opts_.tol <= 1e-3)) throw InvalidArgument("exact_llt: tol must lie in (0, 1e-3]");
  if (opts_.n_max < 1) throw InvalidArgument("exact_llt: n_max must be >= 1");
  if (!(opts_.w_factor > 0.0)) throw InvalidArgument("exact_llt: w_factor must be positive");
  step_ = std::make_shared<const SnPmf>(truncated_step(law_, opts_.tol / (2.0 * static_cast<double>(opts_.n_max))));
  good_w_ = opts_.w_factor;
}

std::int64_t SnEngine::window(std::int64_t m, double w, std::int64_t target) const {
  const double scaled = std::ceil(w * seq_.b(std::max(target, seq_.first_n())));
  const std::int64_t support = safe_mul(m, step_->W);
  const std::int64_t least = std::max<std::int64_t>(1, opts_.min_window);
  const std::int64_t win =
      scaled >= 9e18 ? support : std::min(support, std::max(least, static_cast<std::int64_t>(scaled)));
  if (win > opts_.max_window) {
    throw CertificateError("exact_llt: window " + std::to_string(win) + " for n = " + std::to_string(target) +
                               " exceeds the memory budget of " + std::to_string(opts_.max_window),
                           win);
  }
  return win;
}

double SnEngine::current_w_factor() const {
  std::lock_guard lock(memo_mutex_);
  return good_w_;
}

std::shared_ptr<const SnPmf> SnEngine::dyadic(int j, double w, int J) const {
  const MemoKey key{w, J, j};
  {
    std::lock_guard lock(memo_mutex_);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const std::int64_t target = std::int64_t{1} << J;
  std::shared_ptr<const SnPmf> result;
  if (j == 0) {
    SnPmf s = crop(*step_, window(1, w, target));
    s.w_factor = w;
    s.tol = opts_.tol;
    result = std::make_shared<const SnPmf>(std::move(s));
  } else {
    const auto half = dyadic(j - 1, w, J);
    const std::int64_t m = std::int64_t{1} << j;
    result = std::make_shared<const SnPmf>(combine(*half, *half, window(m, w, target), opts_.kernel));
  }
  std::lock_guard lock(memo_mutex_);
  const auto [it, inserted] = memo_.emplace(key, result);
  return it->second;
}

bool SnEngine::build(std::int64_t n, double w, SnPmf& out) const {
  int J = 0;
  while ((std::int64_t{1} << J) < n) ++J;
  const std::int64_t target = std::int64_t{1} << J;
  bool have = false;
  std::int64_t m = 0;
  for (int j = 0; (n >> j) != 0; ++j) {
    const auto d = dyadic(j, w, J);
    if (d->err_bound > opts_.tol) return false;
    if (((n >> j) & 1) == 0) continue;
    const std::int64_t step = std::int64_t{1} << j;
    if (!have) {
      out = *d;
      have = true;
    } else {
      out = combine(out, *d, window(m + step, w, target), opts_.kernel);
    }
    m += step;
    if (out.err_bound > opts_.tol) return false;
  }
  out = crop(out, window(n, w, n));
  out.tol = opts_.tol;
  out.w_factor = w;
  return out.err_bound <= opts_.tol;
}

SnPmf SnEngine::pmf(std::int64_t n) const {
  if (n < 1) throw InvalidArgument("exact_llt: n must be >= 1");
  if (n > opts_.n_max) {
    throw InvalidArgument("exact_llt: n = " + std::to_string(n) + " exceeds the engine horizon n_max = " +
                          std::to_string(opts_.n_max));
  }
  double w = current_w_factor();
  for (int d = 0; d <= opts_.max_doublings; ++d, w *= 2) {
    SnPmf out;
    if (build(n, w, out)) {
      std::lock_guard lock(memo_mutex_);
      good_w_ = std::max(good_w_, w);
      return out;
    }
  }
  const std::int64_t need = static_cast<std::int64_t>(std::ceil(w * seq_.b(std::max(n, seq_.first_n()))));
  throw CertificateError("exact_llt: tolerance " + std::to_string(opts_.tol) + " not met for n = " +
                             std::to_string(n) + " after " + std::to_string(opts_.max_doublings) +
                             " window doublings",
                         need);
}

LocalProb SnEngine::local_prob(std::int64_t n, std::int64_t k) const {
  const SnPmf s = pmf(n);
  return {s.mass(k), s.entry_bound(k)};
}

SnPmf sn_pmf(const LatticeLaw& law, std::int64_t n, double tol) {
  SnOptions opts;
  opts.tol = tol;
  opts.n_max = n;
  return SnEngine(law, NormingSeq::for_law(law), opts).pmf(n);
}

LocalProb local_prob(const LatticeLaw& law, std::int64_t n, std::int64_t k, double tol) {
  const SnPmf s = sn_pmf(law, n, tol);
  return {s.mass(k), s.entry_bound(k)};
}

std::int64_t nearest_site(double x) { return static_cast<std::int64_t>(std::ceil(x - 0.5)); }

LltRatio llt_ratio(const SnEngine& engine, const StableParams& stable, std::int64_t n, double kappa) {
  LltRatio r;
  r.n = n;
  const double bn = engine.seq().b(n);
  r.kappa_n = nearest_site(kappa * bn);
  const LocalProb lp = engine.local_prob(n, r.kappa_n);
  r.scaled_prob = bn * lp.p;
  r.scaled_bound = bn * lp.bound;
  r.density = density(stable, kappa, 1e-10);
  r.ratio = r.scaled_prob / r.density;
  return r;
}

LltRatio llt_ratio(const LatticeLaw& law, const StableParams& stable, const NormingSeq& seq, std::int64_t n,
                   double kappa, double tol) {
  SnOptions opts;
  opts.tol = tol;
  opts.n_max = n;
  return llt_ratio(SnEngine(law, seq, opts), stable, n, kappa);
}

UniformBoundScan uniform_bound_scan(const SnEngine& engine, std::span<const std::int64_t> n_list) {
  if (n_list.empty()) throw InvalidArgument("uniform_bound_scan: empty n list");
  UniformBoundScan out;
  for (std::int64_t n : n_list) {
    const SnPmf s = engine.pmf(n);
    const auto it = std::max_element(s.masses.begin(), s.masses.end());
    const std::int64_t k = static_cast<std::int64_t>(it - s.masses.begin()) - s.W;
    const double bn = engine.seq().b(n);
    UniformBoundRow row{n, k, bn * *it, bn * s.entry_bound(k)};
    out.rows.push_back(row);
    if (row.scaled_max > out.C_hat) {
      out.C_hat = row.scaled_max;
      out.n_at = n;
      out.k_at = k;
    }
  }
  return out;
}

UniformBoundScan uniform_bound_scan(const LatticeLaw& law, const NormingSeq& seq,
                                    std::span<const std::int64_t> n_list, double tol) {
  if (n_list.empty()) throw InvalidArgument("uniform_bound_scan: empty n list");
  SnOptions opts;
  opts.tol = tol;
  opts.n_max = *std::max_element(n_list.begin(), n_list.end());
  return uniform_bound_scan(SnEngine(law, seq, opts), n_list);
}

LocalProbSweep::LocalProbSweep(const LatticeLaw& law, const NormingSeq& seq, SnOptions opts)
    : seq_(seq), opts_(opts) {
  if (!(opts_.tol > 0.0 && opts_.tol <= 1e-3)) throw InvalidArgument("exact_llt: tol must lie in (0, 1e-3]");
  if (opts_.n_max < 1) throw InvalidArgument("exact_llt: n_max must be >= 1");
  step_ = truncated_step(law, opts_.tol / (2.0 * static_cast<double>(opts_.n_max)));
  step_.tol = opts_.tol;
  step_.w_factor = opts_.w_factor;
  current_ = step_;
}

const SnPmf& LocalProbSweep::advance() {
  const std::int64_t m = current_.n + 1;
  if (m > opts_.n_max) throw InvalidArgument("LocalProbSweep: horizon n_max reached");
  const double scaled = std::ceil(opts_.w_factor * seq_.b(std::max(opts_.n_max, seq_.first_n())));
  const double least = static_cast<double>(std::max({std::int64_t{1}, opts_.min_window, step_.W}));
  const std::int64_t W = std::min(safe_mul(m, step_.W), static_cast<std::int64_t>(std::min(9e18, std::max(least, scaled))));
  if (W > opts_.max_window) {
    throw CertificateError("LocalProbSweep: window exceeds the memory budget", W);
  }
  current_ = combine(current_, step_, W, opts_.kernel);
  if (current_.err_bound > opts_.tol) {
    throw CertificateError("LocalProbSweep: tolerance not met at n = " + std::to_string(m) +
                               "; increase the window factor",
                           2 * W);
  }
  return current_;
}

}  // namespace stable_llt
