#pragma once

// Logarithmic averages A_N = (1/log N) sum_{n<=N} (b_n/n) 1{S_n = kappa_n}:
// seeded path simulation, their exact expectation, and the dyadic block
// second-moment diagnostic.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stable_llt/exact_llt.hpp"
#include "stable_llt/lattice_model.hpp"
#include "stable_llt/norming.hpp"
#include "stable_llt/stable_law.hpp"

namespace stable_llt {

/// Lattice site nearest to kappa b_n, ties to the smaller site.
std::int64_t kappa_n(const NormingSeq& seq, double kappa, std::int64_t n);

/// Rejects unsupported laws: alpha <= 1, or alpha = 2 with infinite variance.
void check_aslt_law(const LatticeLaw& law);

struct AsltRun {
  std::string law;
  std::uint64_t seed = 0;
  std::int64_t N = 0;
  double kappa = 0.0;
  std::vector<std::int64_t> checkpoints;
  std::vector<double> A;  ///< A_M at each checkpoint
  std::int64_t hits = 0;
  std::int64_t final_position = 0;
};

struct PathOptions {
  bool force_indicator = false;  ///< test hook: every indicator counts as 1
};

/// Powers of two in [2, N], plus N itself.
std::vector<std::int64_t> default_checkpoints(std::int64_t N);

/// Steps drawn from stream (seed, 0). O(1) memory in N.
AsltRun run_path(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N, std::uint64_t seed,
                 std::span<const std::int64_t> checkpoints, PathOptions opts = {});

/// S_1..S_N replayed from the same stream in one batch.
std::vector<std::int64_t> replay_positions(const LatticeLaw& law, std::int64_t N, std::uint64_t seed);

/// One path per seed, parallel over seeds; output in seed order.
std::vector<AsltRun> run_paths(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N,
                               std::span<const std::uint64_t> seeds, std::span<const std::int64_t> checkpoints);
std::vector<AsltRun> run_paths_serial(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N,
                                      std::span<const std::uint64_t> seeds,
                                      std::span<const std::int64_t> checkpoints);

struct ExpectedAverage {
  std::vector<std::int64_t> checkpoints;
  std::vector<double> values;  ///< E[A_M]
  std::vector<double> bounds;  ///< certified absolute error of each value
  double w_factor = 0.0;
};

/// (1/log M) sum_{n<=M} (b_n/n) P(S_n = kappa_n) at each checkpoint, by the
/// exact sweep; the window factor doubles on certificate failure.
ExpectedAverage expected_average(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N,
                                 std::span<const std::int64_t> checkpoints, SnOptions opts = {});
double expected_average(const LatticeLaw& law, const NormingSeq& seq, double kappa, std::int64_t N,
                        double tol = 1e-3);

struct StudyRow {
  std::int64_t N = 0;
  double median_A = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double mean_A = 0.0;
  double sd_A = 0.0;
  double expected_A = 0.0;
  double expected_bound = 0.0;
  double g_kappa = 0.0;
  bool unbiased = false;  ///< |mean - expected| <= 4 sd/sqrt(seeds) + expected_bound
};

struct ConvergenceStudy {
  std::vector<StudyRow> rows;
  std::vector<AsltRun> runs;
};

ConvergenceStudy convergence_study(const LatticeLaw& law, const NormingSeq& seq, const StableParams& stable,
                                   double kappa, std::span<const std::int64_t> N_grid,
                                   std::span<const std::uint64_t> seeds, SnOptions opts = {});

/// Type-7 sample quantile.
double quantile(std::vector<double> values, double q);

struct BlockVariance {
  int m = 0;
  int n_blocks = 0;
  double estimate = 0.0;  ///< E[(sum_{i=m+1}^{m+n_blocks} Z_i)^2]
  double std_error = 0.0;
  double mean_sum = 0.0;  ///< sample mean of the block sum (should be ~ 0)
  double mean_sum_se = 0.0;
  double gk_shape = 0.0;  ///< (m+n_blocks)^{max(gamma,1)} - m^{max(gamma,1)}
  double ratio = 0.0;
};

/// Z_i = sum_{2^{i-1} <= k < 2^i} Y_k/k with Y_k = b_k(1{S_k = kappa_k} - P(S_k = kappa_k)).
BlockVariance block_variance_diag(const LatticeLaw& law, const NormingSeq& seq, double kappa, int m, int n_blocks,
                                  std::span<const std::uint64_t> seeds, double gamma,
                                  std::int64_t max_horizon = std::int64_t{1} << 22, SnOptions opts = {});

/// Exact E[Z_i^2] from joint probabilities.
double exact_block_second_moment(const SnEngine& engine, double kappa, int i);

}  // namespace stable_llt
