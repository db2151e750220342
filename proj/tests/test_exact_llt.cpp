#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "stable_llt/error.hpp"
#include "stable_llt/exact_llt.hpp"

using namespace stable_llt;

namespace {

std::vector<LatticeLaw> all_builders() {
  return {lazy_walk(), zipf_symmetric(1.5), zipf_skewed(1.5, 1.0, 0.0), zipf_skewed(1.25, 0.3, 0.7),
          log_sigma_family(1.5, 0.4), remark1_counterexample()};
}

// path counts of the lazy walk with weights (1, 2, 1): exact integers
std::vector<std::int64_t> lazy_counts(int n) {
  std::vector<std::int64_t> c{1};
  for (int s = 0; s < n; ++s) {
    std::vector<std::int64_t> next(c.size() + 2, 0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] += 2 * c[i];
      next[i + 2] += c[i];
    }
    c = std::move(next);
  }
  return c;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

}  // namespace

TEST_SUITE("exact_llt") {

TEST_CASE("lazy walk small n") {
  const SnPmf one = sn_pmf(lazy_walk(), 1, 1e-3);
  CHECK(one.err_bound == 0.0);
  CHECK(one.mass(-1) == 0.25);
  CHECK(one.mass(0) == 0.5);
  CHECK(one.mass(1) == 0.25);

  const LocalProb p0 = local_prob(lazy_walk(), 2, 0);
  CHECK(std::abs(p0.p - 3.0 / 8) <= p0.bound + 1e-16);
  const LocalProb p2 = local_prob(lazy_walk(), 2, 2);
  CHECK(std::abs(p2.p - 1.0 / 16) <= p2.bound + 1e-16);
}

TEST_CASE("lazy walk against exact enumeration and the binomial law") {
  for (int n = 1; n <= 8; ++n) {
    const auto counts = lazy_counts(n);
    const double total = std::ldexp(1.0, 2 * n);
    const SnPmf s = sn_pmf(lazy_walk(), n, 1e-3);
    for (int k = -n; k <= n; ++k) {
      const double exact = static_cast<double>(counts[static_cast<std::size_t>(k + n)]) / total;
      CHECK(std::abs(s.mass(k) - exact) <= 1e-15);
      CHECK(exact == binom(2 * n, n + k) / total);
    }
  }
  for (int n : {32, 100, 500}) {
    const SnPmf s = sn_pmf(lazy_walk(), n, 1e-3);
    for (int k = -n; k <= n; k += 7) {
      const double ref = std::exp(std::lgamma(2.0 * n + 1) - std::lgamma(n + k + 1.0) - std::lgamma(n - k + 1.0) -
                                  2.0 * n * std::numbers::ln2);
      CHECK(std::abs(s.mass(k) - ref) <= s.entry_bound(k) + 1e-13 * ref + 1e-300);
    }
  }
}

TEST_CASE("doubling equals iterated convolution for n <= 16") {
  for (const LatticeLaw& law : all_builders()) {
    CAPTURE(law.name());
    SnOptions opts;
    opts.n_max = 16;
    opts.w_factor = 1e12;
    const SnEngine engine(law, NormingSeq::for_law(law), opts);
    const SnPmf& step = engine.step();
    std::vector<double> iter(step.masses);
    std::int64_t W = step.W;
    for (std::int64_t n = 1; n <= 16; ++n) {
      if (n > 1) {
        std::vector<double> next(iter.size() + step.masses.size() - 1, 0.0);
        for (std::size_t i = 0; i < iter.size(); ++i)
          for (std::size_t j = 0; j < step.masses.size(); ++j) next[i + j] += iter[i] * step.masses[j];
        iter = std::move(next);
        W += step.W;
      }
      const SnPmf d = engine.pmf(n);
      CAPTURE(n);
      const std::int64_t shared = std::min(W, d.W);
      double worst = 0.0;
      for (std::int64_t k = -shared; k <= shared; ++k) {
        worst = std::max(worst, std::abs(d.mass(k) - iter[static_cast<std::size_t>(k + W)]));
      }
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("zipf n = 8 against iterated convolution with default windows") {
  const LatticeLaw law = zipf_symmetric(1.5);
  const SnPmf d = sn_pmf(law, 8, 1e-3);
  SnOptions opts;
  opts.n_max = 8;
  const SnEngine engine(law, NormingSeq::for_law(law), opts);
  const SnPmf& step = engine.step();
  std::vector<double> iter(step.masses);
  std::int64_t W = step.W;
  for (int n = 2; n <= 8; ++n) {
    std::vector<double> next(iter.size() + step.masses.size() - 1, 0.0);
    for (std::size_t i = 0; i < iter.size(); ++i)
      for (std::size_t j = 0; j < step.masses.size(); ++j) next[i + j] += iter[i] * step.masses[j];
    iter = std::move(next);
    W += step.W;
  }
  for (std::int64_t k = -d.W; k <= d.W; ++k) {
    const double ref = iter[static_cast<std::size_t>(k + W)];
    CHECK(d.mass(k) <= ref + 1e-12);
    CHECK(ref <= d.mass(k) + d.entry_bound(k) + 1e-12);
  }
}

TEST_CASE("symmetry, normalization and mass ceiling") {
  const LatticeLaw zipf = zipf_symmetric(1.5);
  const SnPmf s = sn_pmf(zipf, 300, 1e-3);
  for (std::int64_t k = 0; k <= s.W; ++k) CHECK(std::abs(s.mass(k) - s.mass(-k)) <= 1e-12);
  for (const LatticeLaw& law : all_builders()) {
    CAPTURE(law.name());
    for (std::int64_t n : {3, 64, 1000}) {
      const SnPmf p = sn_pmf(law, n, 1e-3);
      CHECK(p.total() <= 1.0 + 1e-12);
      CHECK(p.total() >= 1.0 - 1e-3);
      CHECK(p.total() >= 1.0 - p.err_bound - 1e-12);
      CHECK(p.err_bound <= 1e-3);
      for (double m : p.masses) CHECK(m >= 0.0);
    }
  }
}

TEST_CASE("characteristic function consistency") {
  for (const LatticeLaw& law : all_builders()) {
    CAPTURE(law.name());
    for (std::int64_t n : {1, 5, 16, 64}) {
      const SnPmf s = sn_pmf(law, n, 1e-3);
      for (double t : {0.05, 0.3, 1.0, 2.9}) {
        std::complex<double> acc = 0.0;
        for (std::int64_t k = -s.W; k <= s.W; ++k) acc += s.mass(k) * std::polar(1.0, t * static_cast<double>(k));
        const std::complex<double> ref = std::pow(char_fn(law, t), static_cast<double>(n));
        CHECK(std::abs(acc - ref) <= 1e-8 + s.err_bound);
      }
    }
  }
}

TEST_CASE("kernels give identical or certified-close laws") {
  const LatticeLaw law = zipf_symmetric(1.5);
  SnOptions o;
  o.n_max = 200;
  o.kernel = ConvKernel::serial_direct;
  const SnPmf a = SnEngine(law, NormingSeq::for_law(law), o).pmf(200);
  o.kernel = ConvKernel::omp_direct;
  const SnPmf b = SnEngine(law, NormingSeq::for_law(law), o).pmf(200);
  o.kernel = ConvKernel::fft;
  const SnPmf c = SnEngine(law, NormingSeq::for_law(law), o).pmf(200);
  CHECK(a.masses == b.masses);
  CHECK(a.err_bound == b.err_bound);
  REQUIRE(a.W == c.W);
  for (std::int64_t k = -a.W; k <= a.W; ++k) CHECK(std::abs(a.mass(k) - c.mass(k)) <= a.roundoff + c.roundoff + 1e-15);
}

TEST_CASE("window enlargement is conservative") {
  const LatticeLaw law = zipf_symmetric(1.5);
  SnOptions o;
  o.n_max = 512;
  const SnPmf small = SnEngine(law, NormingSeq::for_law(law), o).pmf(512);
  o.w_factor = 160;
  const SnPmf large = SnEngine(law, NormingSeq::for_law(law), o).pmf(512);
  CHECK(large.err_bound <= small.err_bound);
  for (std::int64_t k = -small.W; k <= small.W; ++k) {
    CHECK(large.mass(k) <= small.mass(k) + small.err_bound + small.roundoff + large.roundoff);
    CHECK(std::abs(large.mass(k) - small.mass(k)) <= small.entry_bound(k) + large.entry_bound(k));
  }
}

TEST_CASE("engine argument checks and certificate failure") {
  const LatticeLaw law = zipf_symmetric(1.5);
  SnOptions o;
  o.n_max = 10;
  const SnEngine e(law, NormingSeq::for_law(law), o);
  CHECK_THROWS_AS(e.pmf(0), InvalidArgument);
  CHECK_THROWS_AS(e.pmf(11), InvalidArgument);
  o.tol = 1e-2;
  CHECK_THROWS_AS(SnEngine(law, NormingSeq::for_law(law), o), InvalidArgument);

  SnOptions tight;
  tight.n_max = 4096;
  tight.w_factor = 1.0;
  tight.max_doublings = 1;
  tight.min_window = 1;
  const SnEngine t(law, NormingSeq::for_law(law), tight);
  try {
    (void)t.pmf(4096);
    FAIL("expected a certificate error");
  } catch (const CertificateError& err) {
    CHECK(err.required_window() > 0);
  }
}

TEST_CASE("local limit ratios") {
  const LltRatio lazy = llt_ratio(lazy_walk(), gaussian(), NormingSeq::for_law(lazy_walk()), 4096, 0.0);
  CHECK(lazy.kappa_n == 0);
  CHECK(lazy.density == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-9));
  CHECK(std::abs(lazy.ratio - 1.0) < 0.01);

  const LatticeLaw z = zipf_symmetric(1.5);
  const LltRatio zr = llt_ratio(z, stable_for(z), NormingSeq::for_law(z), 4096, 0.0);
  CHECK(zr.ratio >= 0.9);
  CHECK(zr.ratio <= 1.1);
  const LltRatio zs = llt_ratio(z, stable_for(z), NormingSeq::for_law(z), 64, 0.0);
  CHECK(std::abs(zr.ratio - 1.0) < std::abs(zs.ratio - 1.0));

  const LltRatio far = llt_ratio(lazy_walk(), gaussian(), NormingSeq::for_law(lazy_walk()), 16, 6.0);
  CHECK(far.kappa_n == 17);
  CHECK(far.scaled_prob == 0.0);

  const LltRatio five = llt_ratio(lazy_walk(), gaussian(), NormingSeq::for_law(lazy_walk()), 16, 5.0);
  CHECK(five.kappa_n == 14);
  CHECK(five.scaled_prob / std::sqrt(8.0) == doctest::Approx(binom(32, 30) / std::ldexp(1.0, 32)).epsilon(1e-12));

  CHECK(nearest_site(4.5) == 4);
  CHECK(nearest_site(4.51) == 5);
  CHECK(nearest_site(-4.5) == -5);
}

TEST_CASE("uniform bound scans") {
  std::vector<std::int64_t> ns;
  for (int n = 1; n <= 256; ++n) ns.push_back(n);
  const auto lazy = uniform_bound_scan(lazy_walk(), NormingSeq::for_law(lazy_walk()), ns);
  CHECK(std::isfinite(lazy.C_hat));
  CHECK(lazy.n_at == 256);
  CHECK(lazy.C_hat < 1.0 / std::sqrt(2.0 * std::numbers::pi));
  CHECK(lazy.rows.back().scaled_max == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(0.01));

  const std::vector<std::int64_t> one{1};
  const auto single = uniform_bound_scan(lazy_walk(), NormingSeq::for_law(lazy_walk()), one);
  CHECK(single.C_hat == doctest::Approx(std::sqrt(0.5) * 0.5).epsilon(1e-15));
  CHECK(single.n_at == 1);
  CHECK(single.k_at == 0);

  const LatticeLaw z = zipf_symmetric(1.5);
  std::vector<std::int64_t> dy;
  for (int j = 4; j <= 10; ++j) dy.push_back(std::int64_t{1} << j);
  const auto zs = uniform_bound_scan(z, NormingSeq::for_law(z), dy);
  CHECK(std::isfinite(zs.C_hat));
  for (const UniformBoundRow& r : zs.rows) CHECK(r.scaled_max <= 1.05 * zs.rows.back().scaled_max + 0.05);
}

TEST_CASE("sweep matches the doubling engine") {
  const LatticeLaw law = zipf_symmetric(1.5);
  SnOptions o;
  o.n_max = 200;
  LocalProbSweep sweep(law, NormingSeq::for_law(law), o);
  const SnEngine engine(law, NormingSeq::for_law(law), o);
  while (sweep.n() < 200) sweep.advance();
  const SnPmf& a = sweep.current();
  const SnPmf b = engine.pmf(200);
  for (std::int64_t k = -20; k <= 20; ++k) CHECK(std::abs(a.mass(k) - b.mass(k)) <= a.entry_bound(k) + b.entry_bound(k));
}

}
