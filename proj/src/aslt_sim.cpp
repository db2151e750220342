#include "stable_llt/aslt_sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "stable_llt/error.hpp"

namespace stable_llt {

namespace {

void check_checkpoints(std::span<const std::int64_t> cps, std::int64_t N) {
  std::int64_t prev = 1;
  for (std::int64_t c : cps) {
    if (c <= prev || c > N) {
      throw InvalidArgument("aslt: checkpoints must be strictly increasing within [2, N = " + std::to_string(N) + "]");
    }
    prev = c;
  }
}

std::vector<std::int64_t> resolve_checkpoints(std::span<const std::int64_t> cps, std::int64_t N) {
  if (cps.empty()) return default_checkpoints(N);
  check_checkpoints(cps, N);
  return {cps.begin(), cps.end()};
}

struct SweepResult {
  std::vector<LocalProb> probs;  ///< index n = 1..N
  double w_factor = 0.0;
};

// P(S_n = kappa_n) for n = 1..N; restarts with a doubled window factor when
// the sweep's certificate fails.
SweepResult sweep_probs(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N, SnOptions opts) {
  opts.n_max = N;
  for (int d = 0;; ++d) {
    try {
      LocalProbSweep sweep(law, seq, opts);
      SweepResult r;
      r.w_factor = opts.w_factor;
      r.probs.resize(static_cast<std::size_t>(N + 1));
      for (std::int64_t n = 1; n <= N; ++n) {
        const SnPmf& s = n == 1 ? sweep.current() : sweep.advance();
        const std::int64_t k = n >= seq.first_n() ? kappa_n(seq, kappa, n) : 0;
        r.probs[static_cast<std::size_t>(n)] = LocalProb{s.mass(k), s.entry_bound(k)};
      }
      return r;
    } catch (const CertificateError&) {
      if (d >= opts.max_doublings) throw;
      opts.w_factor *= 2.0;
    }
  }
}

template <class Fn>
void for_each_seed(std::size_t count, Fn&& fn) {
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(stable_llt_seed_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double mean_of(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

double sd_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  long double s = 0.0L;
  for (double x : v) s += (x - mean) * (x - mean);
  return static_cast<double>(std::sqrt(s / static_cast<long double>(v.size() - 1)));
}

}  // namespace

std::int64_t kappa_n(const NormingSeq& seq, double kappa, std::int64_t n) { return nearest_site(kappa * seq.b(n)); }

void check_aslt_law(const LatticeLaw& law) {
  if (!(law.alpha() > 1.0)) {
    throw InvalidArgument("aslt: alpha must exceed 1 (got " + std::to_string(law.alpha()) + ")");
  }
  if (law.alpha() == 2.0) {
    try {
      law.variance();
    } catch (const InvalidArgument&) {
      throw InvalidArgument("aslt: alpha = 2 requires a finite variance");
    }
  }
}

std::vector<std::int64_t> default_checkpoints(std::int64_t N) {
  if (N < 2) throw InvalidArgument("aslt: N must be >= 2");
  std::vector<std::int64_t> cps;
  for (std::int64_t c = 2; c <= N; c *= 2) cps.push_back(c);
  if (cps.back() != N) cps.push_back(N);
  return cps;
}

AsltRun run_path(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N, std::uint64_t seed,
                 std::span<const std::int64_t> checkpoints, PathOptions opts) {
  check_aslt_law(law);
  if (N < 2) throw InvalidArgument("aslt: N must be >= 2");
  AsltRun run;
  run.law = law.name();
  run.seed = seed;
  run.N = N;
  run.kappa = kappa;
  run.checkpoints = resolve_checkpoints(checkpoints, N);
  run.A.reserve(run.checkpoints.size());

  const LatticeSampler sampler(law);
  SeededStream stream(seed, 0);
  std::int64_t s = 0;
  double acc = 0.0;
  std::size_t next = 0;
  for (std::int64_t n = 1; n <= N; ++n) {
    s += sampler(stream);
    if (n >= seq.first_n()) {
      const double bn = seq.b(n);
      const bool hit = s == nearest_site(kappa * bn);
      if (hit) ++run.hits;
      if (hit || opts.force_indicator) acc += bn / static_cast<double>(n);
    }
    if (next < run.checkpoints.size() && run.checkpoints[next] == n) {
      run.A.push_back(acc / std::log(static_cast<double>(n)));
      ++next;
    }
  }
  run.final_position = s;
  return run;
}

std::vector<std::int64_t> replay_positions(const LatticeLaw& law, std::int64_t N, std::uint64_t seed) {
  SeededStream stream(seed, 0);
  std::vector<std::int64_t> steps = sample(law, stream, N);
  std::int64_t s = 0;
  for (auto& x : steps) {
    s += x;
    x = s;
  }
  return steps;
}

std::vector<AsltRun> run_paths(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N,
                               std::span<const std::uint64_t> seeds, std::span<const std::int64_t> checkpoints) {
  check_aslt_law(law);
  seq.warm(N);
  std::vector<AsltRun> runs(seeds.size());
  for_each_seed(seeds.size(), [&](std::size_t i) { runs[i] = run_path(law, seq, kappa, N, seeds[i], checkpoints); });
  return runs;
}

std::vector<AsltRun> run_paths_serial(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N,
                                      std::span<const std::uint64_t> seeds,
                                      std::span<const std::int64_t> checkpoints) {
  std::vector<AsltRun> runs;
  runs.reserve(seeds.size());
  for (std::uint64_t seed : seeds) runs.push_back(run_path(law, seq, kappa, N, seed, checkpoints));
  return runs;
}

ExpectedAverage expected_average(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N,
                                 std::span<const std::int64_t> checkpoints, SnOptions opts) {
  check_aslt_law(law);
  if (N < 2) throw InvalidArgument("aslt: N must be >= 2");
  ExpectedAverage out;
  out.checkpoints = resolve_checkpoints(checkpoints, N);
  seq.warm(N);
  const SweepResult sw = sweep_probs(law, seq, kappa, N, opts);
  out.w_factor = sw.w_factor;
  double acc = 0.0, err = 0.0;
  std::size_t next = 0;
  for (std::int64_t n = 1; n <= N; ++n) {
    const double weight = n >= seq.first_n() ? seq.b(n) / static_cast<double>(n) : 0.0;
    acc += weight * sw.probs[static_cast<std::size_t>(n)].p;
    err += weight * sw.probs[static_cast<std::size_t>(n)].bound;
    if (next < out.checkpoints.size() && out.checkpoints[next] == n) {
      const double lg = std::log(static_cast<double>(n));
      out.values.push_back(acc / lg);
      out.bounds.push_back(err / lg);
      ++next;
    }
  }
  return out;
}

double expected_average(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N, double tol) {
  SnOptions opts;
  opts.tol = tol;
  const std::int64_t cp[] = {N};
  return expected_average(law, seq, kappa, N, cp, opts).values.front();
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ConvergenceStudy convergence_study(const LatticeLaw& law, const NormingSeq& seq, const StableParams& stable,
                                   double kappa, std::span<const std::int64_t> N_grid,
                                   std::span<const std::uint64_t> seeds, SnOptions opts) {
  if (seeds.size() < 8) throw InvalidArgument("convergence_study: needs at least 8 seeds");
  if (N_grid.empty()) throw InvalidArgument("convergence_study: empty N grid");
  const std::int64_t N = N_grid.back();
  check_checkpoints(N_grid, N);

  ConvergenceStudy study;
  study.runs = run_paths(law, seq, kappa, N, seeds, N_grid);
  const ExpectedAverage ex = expected_average(law, seq, kappa, N, N_grid, opts);
  const double g = density(stable, kappa, 1e-10);
  const double root = std::sqrt(static_cast<double>(seeds.size()));
  for (std::size_t j = 0; j < N_grid.size(); ++j) {
    std::vector<double> a;
    a.reserve(study.runs.size());
    for (const AsltRun& r : study.runs) a.push_back(r.A[j]);
    StudyRow row;
    row.N = N_grid[j];
    row.median_A = quantile(a, 0.5);
    row.q25 = quantile(a, 0.25);
    row.q75 = quantile(a, 0.75);
    row.mean_A = mean_of(a);
    row.sd_A = sd_of(a, row.mean_A);
    row.expected_A = ex.values[j];
    row.expected_bound = ex.bounds[j];
    row.g_kappa = g;
    row.unbiased = std::fabs(row.mean_A - row.expected_A) <= 4.0 * row.sd_A / root + row.expected_bound;
    study.rows.push_back(row);
  }
  return study;
}

BlockVariance block_variance_diag(const LatticeLaw& law, const NormingSeq& seq, double kappa, int m, int n_blocks,
                                  std::span<const std::uint64_t> seeds, double gamma, std::int64_t max_horizon,
                                  SnOptions opts) {
  check_aslt_law(law);
  if (m < 1 || n_blocks < 1) throw InvalidArgument("block_variance_diag: need m >= 1 and n_blocks >= 1");
  if (seeds.size() < 2) throw InvalidArgument("block_variance_diag: needs at least 2 seeds");
  if (m + n_blocks >= 62 || (std::int64_t{1} << (m + n_blocks)) > max_horizon) {
    throw InvalidArgument("block_variance_diag: horizon 2^" + std::to_string(m + n_blocks) +
                          " exceeds the budget of " + std::to_string(max_horizon) + " steps");
  }
  const std::int64_t first = std::int64_t{1} << m;
  const std::int64_t last = (std::int64_t{1} << (m + n_blocks)) - 1;
  seq.warm(last);
  const SweepResult sw = sweep_probs(law, seq, kappa, last, opts);

  const LatticeSampler sampler(law);
  std::vector<double> sums(seeds.size());
  for_each_seed(seeds.size(), [&](std::size_t i) {
    SeededStream stream(seeds[i], 0);
    std::int64_t s = 0;
    double acc = 0.0;
    for (std::int64_t k = 1; k <= last; ++k) {
      s += sampler(stream);
      if (k < first || k < seq.first_n()) continue;
      const double bk = seq.b(k);
      const double ind = s == nearest_site(kappa * bk) ? 1.0 : 0.0;
      acc += bk * (ind - sw.probs[static_cast<std::size_t>(k)].p) / static_cast<double>(k);
    }
    sums[i] = acc;
  });

  BlockVariance out;
  out.m = m;
  out.n_blocks = n_blocks;
  std::vector<double> squares(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) squares[i] = sums[i] * sums[i];
  const double root = std::sqrt(static_cast<double>(sums.size()));
  out.estimate = mean_of(squares);
  out.std_error = sd_of(squares, out.estimate) / root;
  out.mean_sum = mean_of(sums);
  out.mean_sum_se = sd_of(sums, out.mean_sum) / root;
  const double p = std::max(gamma, 1.0);
  out.gk_shape = std::pow(static_cast<double>(m + n_blocks), p) - std::pow(static_cast<double>(m), p);
  out.ratio = out.estimate / out.gk_shape;
  return out;
}

double exact_block_second_moment(const SnEngine& engine, double kappa, int i) {
  if (i < 1 || i > 20) throw InvalidArgument("exact_block_second_moment: block index must lie in [1, 20]");
  const std::int64_t lo = std::int64_t{1} << (i - 1);
  const std::int64_t hi = (std::int64_t{1} << i) - 1;
  const NormingSeq& seq = engine.seq();
  std::vector<SnPmf> laws(static_cast<std::size_t>(hi + 1));
  for (std::int64_t n = 1; n <= hi; ++n) laws[static_cast<std::size_t>(n)] = engine.pmf(n);
  auto kap = [&](std::int64_t n) { return kappa_n(seq, kappa, n); };
  auto p = [&](std::int64_t n, std::int64_t k) { return laws[static_cast<std::size_t>(n)].mass(k); };
  double total = 0.0;
  for (std::int64_t h = lo; h <= hi; ++h) {
    const double bh = seq.b(h);
    const double ph = p(h, kap(h));
    total += bh * bh * (ph - ph * ph) / static_cast<double>(h * h);
    for (std::int64_t k = h + 1; k <= hi; ++k) {
      const double bk = seq.b(k);
      const double pk = p(k, kap(k));
      const double joint = ph * p(k - h, kap(k) - kap(h));
      total += 2.0 * bh * bk * (joint - ph * pk) / static_cast<double>(h * k);
    }
  }
  return total;
}

}  // namespace stable_llt
