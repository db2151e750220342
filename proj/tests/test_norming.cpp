#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "stable_llt/error.hpp"
#include "stable_llt/norming.hpp"

using namespace stable_llt;

namespace {

SlowlyVarying wiggle() {
  return SlowlyVarying::karamata([](double) { return 1.0; }, [](double t) { return 0.1 * std::sin(std::log(t)); },
                                 0.1, 1.0, 1.0);
}

// closed form of the wiggle: exp(0.1 (1 - cos log x))
double wiggle_exact(double x) { return std::exp(0.1 * (1.0 - std::cos(std::log(x)))); }

}  // namespace

TEST_SUITE("norming") {

TEST_CASE("closed-form roots") {
  const NormingSeq one(1.5, SlowlyVarying::constant(1.0));
  CHECK(solve_bn(one, 64) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(one.b(64) == doctest::Approx(16.0).epsilon(1e-12));

  const NormingSeq lazy = NormingSeq::for_law(lazy_walk());
  CHECK(lazy.b(8) == doctest::Approx(2.0).epsilon(1e-14));
  for (std::int64_t n : {1, 2, 50, 4096}) CHECK(lazy.b(n) == doctest::Approx(std::sqrt(n / 2.0)).epsilon(1e-14));
  for (std::int64_t n : {1, 10, 1000}) CHECK(lazy.L(n) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("log-power roots and residuals") {
  const NormingSeq seq(1.5, SlowlyVarying::log_power(0.4));
  const double b = solve_bn(seq, 10000);
  CHECK(std::abs(std::pow(b, 1.5) - 1e4 * std::pow(std::log(b), 0.4)) < 1e-9 * std::pow(b, 1.5));

  CHECK(min_n_log_power(1.5, 0.4) == seq.first_n());
  CHECK(seq.first_n() == 3);
  CHECK_THROWS_AS(seq.b(seq.first_n() - 1), InvalidArgument);
  try {
    (void)solve_bn(seq, 1);
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find(std::to_string(seq.first_n())) != std::string::npos);
  }

  seq.warm(5000);
  CHECK(seq.cached() >= 5000);
  double prev = 0.0;
  for (std::int64_t n = seq.first_n(); n <= 5000; ++n) {
    const double bn = seq.b(n);
    CHECK(bn > prev);
    prev = bn;
    const double h = std::pow(std::log(bn), 0.4);
    CHECK(std::abs(std::pow(bn, 1.5) - n * h) <= 1e-9 * std::pow(bn, 1.5));
    CHECK(seq.L(n) == doctest::Approx(std::pow(h, 1.0 / 1.5)).epsilon(1e-9));
  }
}

TEST_CASE("Karamata h roots") {
  const NormingSeq seq(1.5, wiggle());
  for (std::int64_t n : {1, 7, 100, 100000}) {
    const double b = seq.b(n);
    CHECK(std::abs(std::pow(b, 1.5) - n * wiggle_exact(b)) <= 1e-9 * std::pow(b, 1.5));
    CHECK(seq.h()(b) == doctest::Approx(wiggle_exact(b)).epsilon(1e-9));
  }
}

TEST_CASE("L is slowly varying for every kind") {
  const std::vector<NormingSeq> seqs{NormingSeq(1.5, SlowlyVarying::constant(0.7)),
                                     NormingSeq(1.5, SlowlyVarying::log_power(0.4)),
                                     NormingSeq(1.25, SlowlyVarying::log_power(0.2)), NormingSeq(1.5, wiggle())};
  for (const NormingSeq& seq : seqs) {
    CAPTURE(seq.h().describe());
    for (std::int64_t n = 4096; n <= (std::int64_t{1} << 24); n *= 4) {
      const double r = seq.L(2 * n) / seq.L(n);
      CHECK(r >= 0.9);
      CHECK(r <= 1.1);
    }
  }
  const NormingSeq c(1.5, SlowlyVarying::constant(0.7));
  for (std::int64_t n : {1, 33, 4096}) CHECK(c.L(n) == doctest::Approx(std::pow(0.7, 1.0 / 1.5)).epsilon(1e-12));
}

TEST_CASE("sup_h") {
  const NormingSeq c(1.5, SlowlyVarying::constant(0.7));
  CHECK(sup_h(c, 2.0) == 0.7);
  CHECK(sup_h(c, 1e9) == 0.7);

  const NormingSeq lp(1.5, SlowlyVarying::log_power(0.4));
  for (double x : {3.0, 100.0, 1e8}) CHECK(sup_h(lp, x) == doctest::Approx(std::pow(std::log(x), 0.4)).epsilon(1e-14));
  CHECK_THROWS_AS(sup_h(lp, 1.0), InvalidArgument);

  const NormingSeq kw(1.5, wiggle());
  double prev = 0.0;
  for (double x = 2.0; x < 1e7; x *= 1.7) {
    const double m = sup_h(kw, x);
    CHECK(m >= prev);
    prev = m;
    CHECK(m >= wiggle_exact(x) * (1 - 1e-12));
    CHECK(m >= wiggle_exact(2.0) * (1 - 1e-12));
    double dense = 0.0;
    const int steps = 200000;
    for (int i = 0; i <= steps; ++i) {
      const double y = std::exp(std::log(2.0) + (std::log(x) - std::log(2.0)) * i / steps);
      dense = std::max(dense, wiggle_exact(y));
    }
    CHECK(m == doctest::Approx(dense).epsilon(1e-6));
  }
}

TEST_CASE("tilde L") {
  const NormingSeq c(1.5, SlowlyVarying::constant(0.7));
  const double L = std::pow(0.7, 1.0 / 1.5);
  for (std::int64_t n : {2, 100, 100000}) CHECK(tilde_l(c, n) == doctest::Approx(L * (1 + 0.7 + L)).epsilon(1e-12));

  const double sigma = 0.4, alpha = 1.5, dp = 0.3;
  const NormingSeq lp(alpha, SlowlyVarying::log_power(sigma));
  for (std::int64_t n : {std::int64_t{1} << 10, std::int64_t{1} << 16, std::int64_t{1} << 22}) {
    const double ln = std::log(static_cast<double>(n));
    const double bound =
        std::pow(ln, dp) * (1 + std::pow(1 + 1 / alpha, sigma) * std::pow(ln, sigma) + std::pow(ln, dp * lp.eta()));
    CHECK(tilde_l(lp, n) <= bound);
  }
  for (std::int64_t n = 1024; n <= (std::int64_t{1} << 22); n *= 2) {
    const double r = tilde_l(lp, 2 * n) / tilde_l(lp, n);
    CHECK(r >= 0.9);
    CHECK(r <= 1.1);
  }
}

TEST_CASE("slow variation power bound") {
  const NormingSeq lp(1.5, SlowlyVarying::log_power(0.4));
  const double d = lp.delta();
  auto q = [&](std::int64_t m, std::int64_t n) {
    return (std::pow(m, d) * lp.L(m)) / (std::pow(n, d) * lp.L(n)) / std::pow(double(m) / n, d / 2);
  };
  double C = 0.0;
  for (std::int64_t m = 64; m <= 1024; m *= 2)
    for (std::int64_t n = 2 * m; n <= 4096; n *= 2) C = std::max(C, q(m, n));
  // L increases here, so the ratio never exceeds 2^{-delta/2}
  const double sup = std::pow(2.0, -d / 2);
  CHECK(C <= sup);
  for (std::int64_t m = 64; m <= (std::int64_t{1} << 14); m *= 2)
    for (std::int64_t n = 2 * m; n <= (std::int64_t{1} << 20); n *= 2) {
      CHECK(q(m, n) <= sup);
      CHECK(q(m, n) <= 1.05 * C);
    }
}

TEST_CASE("log-weight check") {
  const NormingSeq c(1.5, SlowlyVarying::constant(0.7));
  const double K = tilde_l(c, 16);
  const LogWeightCheck r = log_weight_sum_check(c, 16, 4096, 1.0);
  CHECK(r.rhs_gap == doctest::Approx(std::log(4096.0 / 16.0)).epsilon(1e-14));
  double harmonic = 0.0;
  for (int k = 16; k < 4096; ++k) harmonic += 1.0 / k;
  CHECK(r.lhs_sum == doctest::Approx(K * harmonic).epsilon(1e-12));
  double best = 0.0;
  std::vector<std::int64_t> ends{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  for (std::size_t i = 0; i < ends.size(); ++i)
    for (std::size_t j = i + 1; j < ends.size(); ++j) {
      double h = 0.0;
      for (std::int64_t k = ends[i]; k < ends[j]; ++k) h += 1.0 / static_cast<double>(k);
      best = std::max(best, h / std::log(double(ends[j]) / ends[i]));
    }
  CHECK(r.fitted_C == doctest::Approx(K * best).epsilon(1e-12));
  CHECK(r.fitted_C == doctest::Approx(K).epsilon(0.05));

  const NormingSeq lp(1.5, SlowlyVarying::log_power(0.4));
  const LogWeightCheck single = log_weight_sum_check(lp, 99, 100, 1.5);
  CHECK(single.lhs_sum == doctest::Approx(tilde_l(lp, 99) / 99.0).epsilon(1e-14));
  CHECK(single.rhs_gap > 0.0);

  CHECK_THROWS_AS(log_weight_sum_check(lp, 1, 100, 1.5), InvalidArgument);
  CHECK_THROWS_AS(log_weight_sum_check(lp, 50, 50, 1.5), InvalidArgument);
  CHECK_THROWS_AS(log_weight_sum_check(lp, 16, 100, 2.5), InvalidArgument);
}

TEST_CASE("log-weight exponent") {
  const double g = log_weight_gamma(1.5, 0.4);
  CHECK(g == doctest::Approx(0.5 * (0.4 / 1.5 + 0.4) + 1.4).epsilon(1e-15));
  CHECK(g < 2.0);
  CHECK_THROWS_AS(log_weight_gamma(1.5, 0.7), InvalidArgument);
  CHECK_THROWS_AS(log_weight_gamma(1.5, 0.0), InvalidArgument);
}

TEST_CASE("norming table") {
  const NormingSeq lp(1.5, SlowlyVarying::log_power(0.4));
  const std::vector<std::int64_t> ns{16, 256, 4096};
  const auto rows = norming_table(lp, ns);
  REQUIRE(rows.size() == 3);
  for (const NormingRow& r : rows) {
    CHECK(r.b == lp.b(r.n));
    CHECK(r.L == lp.L(r.n));
    CHECK(r.tilde_L == doctest::Approx(tilde_l(lp, r.n)).epsilon(1e-15));
  }
  CHECK(lp.rho() == doctest::Approx(std::min(1.0, 1.0 / 1.5 - 1.0 / 3.0)).epsilon(1e-15));
}

}
