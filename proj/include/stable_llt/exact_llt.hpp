#pragma once

// Certified law of S_n by windowed convolution of dyadic powers.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "stable_llt/kernels.hpp"
#include "stable_llt/lattice_model.hpp"
#include "stable_llt/norming.hpp"
#include "stable_llt/stable_law.hpp"

namespace stable_llt {

/// Law of S_n on the window [-W, W].
///
/// Error accounting, with p the exact law and m the stored masses:
///   sum_k |p(k) - m(k)| over all k <= err_bound + (2W+1) roundoff,
///   m(k) - roundoff <= p(k) <= m(k) + envelope(k) + roundoff inside the window,
///   p(k) <= err_bound outside it.
struct SnPmf {
  std::int64_t n = 0;
  std::int64_t W = 0;
  std::vector<double> masses;
  std::vector<double> envelope;
  double roundoff = 0.0;
  double err_bound = 0.0;
  double tol = 0.0;
  double w_factor = 0.0;

  bool in_window(std::int64_t k) const { return k >= -W && k <= W; }
  double mass(std::int64_t k) const;
  /// Certified absolute error of mass(k).
  double entry_bound(std::int64_t k) const;
  double total() const;
  bool envelope_zero() const;
};

struct LocalProb {
  double p = 0.0;
  double bound = 0.0;
};

struct SnOptions {
  double tol = 1e-3;
  double w_factor = 40.0;
  std::int64_t n_max = 0;  ///< horizon for the one-step pre-truncation; 0 means the requested n
  std::int64_t min_window = std::int64_t{1} << 15;  ///< windows below this keep the full support
  std::int64_t max_window = std::int64_t{1} << 23;
  int max_doublings = 8;
  ConvKernel kernel = ConvKernel::automatic;
};

/// c = a * b cropped to [-W, W], with every error term propagated.
SnPmf combine(const SnPmf& a, const SnPmf& b, std::int64_t W, ConvKernel kernel = ConvKernel::automatic);

/// One-step law truncated to mass >= 1 - tau (outside mass in err_bound).
SnPmf truncated_step(const LatticeLaw& law, double tau);

/// Memoizing engine: S_{2^j} are computed once per window factor and target
/// scale 2^ceil(log2 n), all on the target's window, and combined over the
/// binary digits of n. Thread-safe.
class SnEngine {
 public:
  SnEngine(LatticeLaw law, NormingSeq seq, SnOptions opts = {});

  /// Certified S_n; the window factor doubles until err_bound <= tol.
  SnPmf pmf(std::int64_t n) const;
  LocalProb local_prob(std::int64_t n, std::int64_t k) const;

  const LatticeLaw& law() const { return law_; }
  const NormingSeq& seq() const { return seq_; }
  const SnOptions& options() const { return opts_; }
  const SnPmf& step() const { return *step_; }
  /// Window for S_m inside the computation of S_target:
  /// min(m K, max(ceil(w b_target), min_window)), K the half-width of the truncated step.
  std::int64_t window(std::int64_t m, double w, std::int64_t target) const;
  /// Window factor that last met the certificate.
  double current_w_factor() const;

 private:
  struct MemoKey {
    double w;
    int J;  ///< target scale 2^J
    int j;
    auto operator<=>(const MemoKey&) const = default;
  };

  std::shared_ptr<const SnPmf> dyadic(int j, double w, int J) const;
  bool build(std::int64_t n, double w, SnPmf& out) const;

  LatticeLaw law_;
  NormingSeq seq_;
  SnOptions opts_;
  std::shared_ptr<const SnPmf> step_;
  mutable std::mutex memo_mutex_;
  mutable std::map<MemoKey, std::shared_ptr<const SnPmf>> memo_;
  mutable double good_w_ = 0.0;
};

SnPmf sn_pmf(const LatticeLaw& law, std::int64_t n, double tol);
LocalProb local_prob(const LatticeLaw& law, std::int64_t n, std::int64_t k, double tol = 1e-3);

/// Nearest lattice site to x, ties to the smaller site.
std::int64_t nearest_site(double x);

struct LltRatio {
  std::int64_t n = 0;
  std::int64_t kappa_n = 0;
  double scaled_prob = 0.0;  ///< b_n P(S_n = kappa_n)
  double scaled_bound = 0.0;
  double density = 0.0;      ///< g(kappa)
  double ratio = 0.0;
};

LltRatio llt_ratio(const SnEngine& engine, const StableParams& stable, std::int64_t n, double kappa);
LltRatio llt_ratio(const LatticeLaw& law, const StableParams& stable, const NormingSeq& seq, std::int64_t n,
                   double kappa, double tol = 1e-3);

struct UniformBoundRow {
  std::int64_t n = 0;
  std::int64_t argmax_k = 0;
  double scaled_max = 0.0;  ///< b_n max_k P(S_n = k)
  double scaled_bound = 0.0;
};

struct UniformBoundScan {
  double C_hat = 0.0;
  std::int64_t n_at = 0;
  std::int64_t k_at = 0;
  std::vector<UniformBoundRow> rows;
};

UniformBoundScan uniform_bound_scan(const SnEngine& engine, std::span<const std::int64_t> n_list);
UniformBoundScan uniform_bound_scan(const LatticeLaw& law, const NormingSeq& seq,
                                    std::span<const std::int64_t> n_list, double tol = 1e-3);

/// Walks n -> n+1 by S_{n+1} = S_n * X with the one-step law pre-truncated
/// for horizon opts.n_max; windows never drop below the one-step support. Throws CertificateError once err_bound > tol.
class LocalProbSweep {
 public:
  LocalProbSweep(const LatticeLaw& law, const NormingSeq& seq, SnOptions opts);

  const SnPmf& current() const { return current_; }
  std::int64_t n() const { return current_.n; }
  const SnPmf& advance();

 private:
  NormingSeq seq_;
  SnOptions opts_;
  SnPmf step_;
  SnPmf current_;
};

}  // namespace stable_llt
