#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "stable_llt/aslt_sim.hpp"
#include "stable_llt/error.hpp"

using namespace stable_llt;

namespace {

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  std::iota(s.begin(), s.end(), first);
  return s;
}

}  // namespace

TEST_SUITE("aslt_sim") {

TEST_CASE("kappa_n rounding") {
  const NormingSeq lazy = NormingSeq::for_law(lazy_walk());
  for (std::int64_t n : {1, 17, 1000}) CHECK(kappa_n(lazy, 0.0, n) == 0);
  CHECK(kappa_n(lazy, 1.0, 8) == 2);
  const NormingSeq one(1.5, SlowlyVarying::constant(1.0));
  CHECK(one.b(64) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(kappa_n(one, 0.3, 64) == 5);
  for (std::int64_t n = 1; n < 5000; n += 37) {
    const std::int64_t k = kappa_n(lazy, 0.8, n);
    CHECK(std::abs(static_cast<double>(k) / lazy.b(n) - 0.8) <= 0.5 / lazy.b(n) + 1e-15);
  }
}

TEST_CASE("supported laws") {
  CHECK_THROWS_AS(check_aslt_law(zipf_symmetric(0.8)), InvalidArgument);
  CHECK_NOTHROW(check_aslt_law(zipf_symmetric(1.5)));
  CHECK_NOTHROW(check_aslt_law(lazy_walk()));
  CHECK_NOTHROW(check_aslt_law(remark1_counterexample()));
  const LatticeLaw bad = zipf_symmetric(0.8);
  const NormingSeq seq = NormingSeq::for_law(bad);
  const std::vector<std::int64_t> cps{10};
  CHECK_THROWS_AS(run_path(bad, seq, 0.0, 10, 1, cps), InvalidArgument);
}

TEST_CASE("checkpoints") {
  const auto cps = default_checkpoints(1000);
  const std::vector<std::int64_t> expect{2, 4, 8, 16, 32, 64, 128, 256, 512, 1000};
  CHECK(cps == expect);
  CHECK(default_checkpoints(1024).back() == 1024);
  CHECK(default_checkpoints(1024).size() == 10);
  CHECK_THROWS_AS(default_checkpoints(1), InvalidArgument);
  const std::vector<std::int64_t> bad{4, 4};
  CHECK_THROWS_AS(run_path(lazy_walk(), NormingSeq::for_law(lazy_walk()), 0.0, 10, 1, bad), InvalidArgument);
  const std::vector<std::int64_t> beyond{20};
  CHECK_THROWS_AS(run_path(lazy_walk(), NormingSeq::for_law(lazy_walk()), 0.0, 10, 1, beyond), InvalidArgument);
}

TEST_CASE("paths: determinism, invariants, replay") {
  const LatticeLaw law = zipf_symmetric(1.5);
  const NormingSeq seq = NormingSeq::for_law(law);
  const auto cps = default_checkpoints(5000);
  const AsltRun a = run_path(law, seq, 0.3, 5000, 17, cps);
  const AsltRun b = run_path(law, seq, 0.3, 5000, 17, cps);
  CHECK(a.A == b.A);
  CHECK(a.hits == b.hits);
  CHECK(a.final_position == b.final_position);
  CHECK(a.hits <= a.N);
  for (double v : a.A) CHECK(v >= 0.0);

  const auto pos = replay_positions(law, 5000, 17);
  REQUIRE(pos.size() == 5000);
  CHECK(pos.back() == a.final_position);
  double sum = 0.0;
  std::int64_t hits = 0;
  std::size_t c = 0;
  std::vector<double> A;
  for (std::int64_t n = 1; n <= 5000; ++n) {
    if (pos[static_cast<std::size_t>(n - 1)] == kappa_n(seq, 0.3, n)) {
      ++hits;
      sum += seq.b(n) / static_cast<double>(n);
    }
    if (c < cps.size() && cps[c] == n) {
      A.push_back(sum / std::log(static_cast<double>(n)));
      ++c;
    }
  }
  CHECK(hits == a.hits);
  REQUIRE(A.size() == a.A.size());
  for (std::size_t i = 0; i < A.size(); ++i) CHECK(A[i] == doctest::Approx(a.A[i]).epsilon(1e-13));

  const AsltRun lazy = run_path(lazy_walk(), NormingSeq::for_law(lazy_walk()), 0.0, 1000, 3, default_checkpoints(1000));
  CHECK(lazy.A.back() > 0.0);
}

TEST_CASE("forced indicators reproduce the weight sum") {
  const LatticeLaw law = log_sigma_family(1.5, 0.4);
  const NormingSeq seq = NormingSeq::for_law(law);
  const auto cps = default_checkpoints(20000);
  PathOptions o;
  o.force_indicator = true;
  const AsltRun r = run_path(law, seq, 0.0, 20000, 5, cps, o);
  long double sum = 0.0L;
  std::size_t c = 0;
  for (std::int64_t n = 1; n <= 20000; ++n) {
    if (n >= seq.first_n()) sum += seq.b(n) / static_cast<long double>(n);
    if (c < cps.size() && cps[c] == n) {
      CHECK(std::abs(r.A[c] - static_cast<double>(sum / std::log(static_cast<long double>(n)))) <= 1e-12 * r.A[c]);
      ++c;
    }
  }
}

TEST_CASE("parallel runs equal serial runs") {
  const LatticeLaw law = zipf_skewed(1.5, 1.0, 0.0);
  const NormingSeq seq = NormingSeq::for_law(law);
  const auto seeds = seed_range(100, 12);
  const auto cps = default_checkpoints(3000);
  const auto p = run_paths(law, seq, 0.0, 3000, seeds, cps);
  const auto s = run_paths_serial(law, seq, 0.0, 3000, seeds, cps);
  REQUIRE(p.size() == s.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].seed == seeds[i]);
    CHECK(p[i].A == s[i].A);
    CHECK(p[i].hits == s[i].hits);
  }
}

TEST_CASE("expected average by hand and unbiasedness") {
  const LatticeLaw law = lazy_walk();
  const NormingSeq seq = NormingSeq::for_law(law);
  const double hand = (std::sqrt(0.5) * 0.5 + (1.0 / 2) * (3.0 / 8)) / std::numbers::ln2;
  CHECK(expected_average(law, seq, 0.0, 2) == doctest::Approx(hand).epsilon(1e-14));

  const auto cps = default_checkpoints(2000);
  const ExpectedAverage ex = expected_average(law, seq, 0.0, 2000, cps);
  const auto runs = run_paths(law, seq, 0.0, 2000, seed_range(500, 64), cps);
  for (std::size_t c = 0; c < cps.size(); ++c) {
    double m = 0.0, ss = 0.0;
    for (const AsltRun& r : runs) m += r.A[c];
    m /= runs.size();
    for (const AsltRun& r : runs) ss += (r.A[c] - m) * (r.A[c] - m);
    const double se = std::sqrt(ss / (runs.size() - 1) / runs.size());
    CAPTURE(cps[c]);
    CHECK(std::abs(m - ex.values[c]) <= 4 * se + ex.bounds[c]);
  }
}

TEST_CASE("zipf expected average trends toward g(0)") {
  const LatticeLaw law = zipf_symmetric(1.5);
  const NormingSeq seq = NormingSeq::for_law(law);
  const std::vector<std::int64_t> cps{64, 512, 4096};
  const ExpectedAverage ex = expected_average(law, seq, 0.0, 4096, cps);
  const double g0 = density(stable_for(law), 0.0, 1e-10);
  CHECK(std::abs(ex.values[2] - g0) < std::abs(ex.values[1] - g0));
  CHECK(std::abs(ex.values[1] - g0) < std::abs(ex.values[0] - g0));
}

TEST_CASE("second moment of Y_h is controlled by the uniform bound") {
  const LatticeLaw law = lazy_walk();
  const NormingSeq seq = NormingSeq::for_law(law);
  std::vector<std::int64_t> ns;
  for (std::int64_t n = 1; n <= 4096; ++n) ns.push_back(n);
  SnOptions o;
  o.n_max = 4096;
  const SnEngine engine(law, seq, o);
  const UniformBoundScan scan = uniform_bound_scan(engine, ns);
  for (std::int64_t h = 1; h <= 4096; h = h < 64 ? h + 1 : h + 61) {
    const double p = engine.local_prob(h, 0).p;
    const double ey2 = seq.b(h) * seq.b(h) * (p - p * p);
    CHECK(ey2 / seq.b(h) <= scan.C_hat);
  }
}

TEST_CASE("block diagnostics") {
  const LatticeLaw law = lazy_walk();
  const NormingSeq seq = NormingSeq::for_law(law);
  SnOptions o;
  o.n_max = 64;
  const SnEngine engine(law, seq, o);
  const double exact = exact_block_second_moment(engine, 0.0, 4);
  const BlockVariance mc = block_variance_diag(law, seq, 0.0, 3, 1, seed_range(0, 4000), 1.0);
  CHECK(std::abs(mc.estimate - exact) <= 4 * mc.std_error);
  CHECK(std::abs(mc.mean_sum) <= 4 * mc.mean_sum_se);

  std::vector<double> ratios;
  for (int m = 4; m <= 8; ++m) {
    const BlockVariance b = block_variance_diag(law, seq, 0.0, m, 4, seed_range(1000, 64), 1.0);
    CHECK(std::isfinite(b.ratio));
    CHECK(b.gk_shape == doctest::Approx(double(m + 4) - m).epsilon(1e-15));
    ratios.push_back(b.ratio);
  }
  bool blow_up = true;
  double prev = 0.0;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    const double d = ratios[i] - ratios[i - 1];
    if (!(d > 0.0) || d < prev) blow_up = false;
    prev = d;
  }
  CHECK_FALSE(blow_up);

  CHECK_THROWS_AS(block_variance_diag(law, seq, 0.0, 30, 4, seed_range(0, 8), 1.0), InvalidArgument);
}

TEST_CASE("quantiles") {
  const std::vector<double> v{4, 1, 3, 2};
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK_THROWS_AS(quantile({}, 0.5), InvalidArgument);
}

TEST_CASE("convergence study rows") {
  const LatticeLaw law = lazy_walk();
  const NormingSeq seq = NormingSeq::for_law(law);
  const std::vector<std::int64_t> grid{100, 1000};
  const auto study = convergence_study(law, seq, gaussian(), 0.0, grid, seed_range(0, 16));
  REQUIRE(study.rows.size() == 2);
  for (const StudyRow& r : study.rows) {
    CHECK(r.q25 <= r.median_A);
    CHECK(r.median_A <= r.q75);
    CHECK(r.unbiased);
    CHECK(r.g_kappa == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-9));
  }
  CHECK(study.runs.size() == 16);
  const auto few = seed_range(0, 4);
  CHECK_THROWS_AS(convergence_study(law, seq, gaussian(), 0.0, grid, few), InvalidArgument);
}

TEST_CASE("lazy expected average approaches g(0) along the decade grid") {
  const LatticeLaw law = lazy_walk();
  const std::vector<std::int64_t> cps{1000, 10000, 100000};
  const ExpectedAverage ex = expected_average(law, NormingSeq::for_law(law), 0.0, 100000, cps);
  const double g = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t i = 1; i < cps.size(); ++i) CHECK(std::abs(ex.values[i] - g) <= std::abs(ex.values[i - 1] - g));
}

}
