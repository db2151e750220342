// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "stable_llt/aslt_sim.hpp"
#include "stable_llt/correlation.hpp"
#include "stable_llt/error.hpp"
#include "stable_llt/exact_llt.hpp"
#include "stable_llt/norming.hpp"
#include "stable_llt/stable_law.hpp"

using namespace stable_llt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<LatticeLaw> all_builders() {
  return {lazy_walk(), zipf_symmetric(1.5), zipf_skewed(1.5, 1.0, 0.0), zipf_skewed(1.25, 0.3, 0.7),
          log_sigma_family(1.5, 0.4), remark1_counterexample()};
}

Outcome gaussian_anchor() {
  const LatticeLaw law = lazy_walk();
  const LltRatio r = llt_ratio(law, gaussian(), NormingSeq::for_law(law), 4096, 0.0);
  const double target = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const double rel = std::abs(r.scaled_prob - target) / target;
  return {rel <= 0.01, fmt("b_n P(S_n=0) = %.7f at n = 4096, relative gap %.2e (bound %.1e)", r.scaled_prob, rel,
                           r.scaled_bound)};
}

Outcome density_closed_form() {
  double worst = 0.0;
  for (double alpha : {1.25, 1.5, 1.75}) {
    const double g = density(make_stable(alpha, 0.0, 1.0), 0.0, 1e-10);
    const double ref = std::tgamma(1.0 / alpha) / (std::numbers::pi * alpha);
    worst = std::max(worst, std::abs(g - ref));
  }
  return {worst <= 1e-8, fmt("max |g(0) - Gamma(1/a)/(pi a)| = %.2e over a in {1.25, 1.5, 1.75}", worst)};
}

Outcome convolution_oracle() {
  double worst = 0.0;
  for (const LatticeLaw& law : all_builders()) {
    for (std::int64_t n = 1; n <= 16; ++n) {
      const SnPmf d = sn_pmf(law, n, 1e-3);
      const SnPmf step = truncated_step(law, 1e-3 / (2.0 * static_cast<double>(n)));
      std::vector<double> iter(step.masses);
      std::int64_t W = step.W;
      for (std::int64_t r = 2; r <= n; ++r) {
        std::vector<double> next(iter.size() + step.masses.size() - 1, 0.0);
        for (std::size_t i = 0; i < iter.size(); ++i)
          for (std::size_t j = 0; j < step.masses.size(); ++j) next[i + j] += iter[i] * step.masses[j];
        iter = std::move(next);
        W += step.W;
      }
      const std::int64_t shared = std::min(W, d.W);
      for (std::int64_t k = -shared; k <= shared; ++k) {
        worst = std::max(worst, std::abs(d.mass(k) - iter[static_cast<std::size_t>(k + W)]));
      }
    }
  }

  // lazy walk: integer path weights (1, 2, 1) over 4^n
  double lazy_worst = 0.0;
  std::vector<std::int64_t> counts{1};
  for (int n = 1; n <= 8; ++n) {
    std::vector<std::int64_t> next(counts.size() + 2, 0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      next[i] += counts[i];
      next[i + 1] += 2 * counts[i];
      next[i + 2] += counts[i];
    }
    counts = std::move(next);
    const SnPmf s = sn_pmf(lazy_walk(), n, 1e-3);
    for (int k = -n; k <= n; ++k) {
      const double exact = static_cast<double>(counts[static_cast<std::size_t>(k + n)]) / std::ldexp(1.0, 2 * n);
      lazy_worst = std::max(lazy_worst, std::abs(s.mass(k) - exact));
    }
  }
  return {worst <= 1e-12 && lazy_worst == 0.0,
          fmt("doubling vs iterated max gap %.2e (n <= 16, six builders); lazy enumeration gap %.1e (n <= 8)", worst,
              lazy_worst)};
}

Outcome correlation_shape() {
  struct Case {
    LatticeLaw law;
    double tol;
  };
  const std::vector<Case> cases{{lazy_walk(), 1e-3}, {zipf_symmetric(1.5), 1e-4}};
  bool pass = true;
  std::string detail;
  for (const Case& c : cases) {
    SnOptions o;
    o.n_max = 4096;
    o.tol = c.tol;
    const SnEngine engine(c.law, NormingSeq::for_law(c.law), o);
    const SpectralGap gap = spectral_gap(c.law, engine.seq().epsilon());
    const std::int64_t x0 = x0_from_gap(gap.c_hat, c.law.alpha());
    const ExponentFit fit = exponent_fit(engine, 4096, dyadic_m_grid(4096, x0), x0);
    const double rho = 1.0 / (2.0 * c.law.alpha());
    const DominationScan scan = domination_scan(engine, gap, x0, 512, 3);
    const bool ok = fit.slope >= rho - 0.1 && scan.stable;
    pass = pass && ok;
    detail += fmt("%s%s: slope %.4f (need >= %.4f, %d points), C over extensions", detail.empty() ? "" : "; ",
                  c.law.name().c_str(), fit.slope, rho - 0.1, fit.used_count);
    for (double C : scan.empirical_C) detail += fmt(" %.6g", C);
    detail += scan.stable ? " stable" : " unstable";
  }
  return {pass, detail};
}

struct AsltData {
  ConvergenceStudy study;
  std::vector<std::int64_t> grid;
};

const AsltData& aslt_data() {
  static const AsltData data = [] {
    AsltData d;
    d.grid = {1000, 10000, 16384, 100000};
    std::vector<std::uint64_t> seeds(64);
    std::iota(seeds.begin(), seeds.end(), 0);
    const LatticeLaw law = lazy_walk();
    d.study = convergence_study(law, NormingSeq::for_law(law), gaussian(), 0.0, d.grid, seeds);
    return d;
  }();
  return data;
}

Outcome aslt_unbiased() {
  const AsltData& d = aslt_data();
  bool pass = true;
  std::string detail;
  const double root = std::sqrt(static_cast<double>(d.study.runs.size()));
  for (const StudyRow& r : d.study.rows) {
    if (r.N == 16384) continue;
    pass = pass && r.unbiased;
    detail += fmt("%sN=%lld: mean %.5f vs E %.5f (4 SE %.5f)", detail.empty() ? "" : "; ", static_cast<long long>(r.N),
                  r.mean_A, r.expected_A, 4.0 * r.sd_A / root);
  }
  return {pass, detail};
}

Outcome aslt_trend() {
  const AsltData& d = aslt_data();
  const double g = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  double expected_gap = 0.0;
  for (const StudyRow& r : d.study.rows) {
    if (r.N == 16384) expected_gap = std::abs(r.expected_A - g) / g;
  }
  const std::size_t last = d.grid.size() - 1;
  std::vector<double> a;
  for (std::size_t i = 0; i < 32; ++i) a.push_back(d.study.runs[i].A[last]);
  const double median = quantile(a, 0.5);
  const double median_gap = std::abs(median - g) / g;
  return {expected_gap <= 0.05 && median_gap <= 0.25,
          fmt("E[A] at N = 2^14 off g(0) by %.2f%%; median A at N = 1e5 over 32 seeds %.5f (off by %.1f%%)",
              100 * expected_gap, median, 100 * median_gap)};
}

Outcome log_weight_bounded() {
  const double alpha = 1.5, sigma = 0.4;
  const NormingSeq seq(alpha, SlowlyVarying::log_power(sigma));
  const double gamma = log_weight_gamma(alpha, sigma);
  const std::int64_t a = 16;
  auto series = [&](double g) {
    std::vector<double> C;
    for (int j = 8; j <= 20; j += 2) C.push_back(log_weight_sum_check(seq, a, std::int64_t{1} << j, g).fitted_C);
    return C;
  };
  const std::vector<double> C = series(gamma);
  const double mid = log_weight_sum_check(seq, a, std::int64_t{1} << 12, gamma).fitted_C;
  const double growth = C.back() / mid - 1.0;
  const std::vector<double> control = series(1.0);
  const double control_growth = control.back() / control[2] - 1.0;
  return {gamma < 2.0 && std::isfinite(C.back()) && growth <= 0.01 && control_growth > 0.01,
          fmt("gamma = %.6f, fitted_C %.6f at b = 2^8 and %.6f at b = 2^20 (growth %.2e since 2^12); "
              "gamma = 1 control grows %.6f -> %.6f",
              gamma, C.front(), C.back(), growth, control.front(), control.back())};
}

Outcome counterexample_ratios() {
  const LatticeLaw law = remark1_counterexample();
  std::vector<double> xs;
  for (int j = 1; j <= 6; ++j) xs.push_back(std::ldexp(1.0, j));
  const auto prof = tail_profile(law, xs);
  std::vector<double> tails, moments;
  for (const TailPoint& p : prof) {
    tails.push_back(p.right);
    moments.push_back(law.truncated_second_moment(p.x));
  }
  const auto tr = doubling_ratios(tails);
  const auto mr = doubling_ratios(moments);
  double tail_far = 1.0;
  for (std::size_t i = 1; i < tr.size(); ++i) tail_far = std::min(tail_far, std::abs(tr[i] - 1.0));
  bool settling = true;
  for (std::size_t i = 1; i < mr.size(); ++i) settling = settling && std::abs(mr[i] - 1.0) <= std::abs(mr[i - 1] - 1.0);
  const double moment_gap = std::abs(mr.back() - 1.0);
  return {tail_far >= 0.5 && settling && moment_gap <= 1e-3,
          fmt("x^2 P(X>x) ratios at (32,64): %.3e, min |ratio - 1| for x >= 4: %.3f; "
              "truncated second moment ratio at (32,64): 1 %+.2e",
              tr.back(), tail_far, mr.back() - 1.0)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gaussian LLT anchor", gaussian_anchor},
      {"stable density closed form", density_closed_form},
      {"convolution oracle equivalence", convolution_oracle},
      {"correlation inequality shape", correlation_shape},
      {"ASLLT expectation identity", aslt_unbiased},
      {"ASLLT convergence trend", aslt_trend},
      {"log-weight hypothesis check", log_weight_bounded},
      {"tail counterexample", counterexample_ratios},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
