// stable_llt: report generator for the density, exact-llt, corr-check, aslt
// and norming experiments. Exit codes: 0 all checks pass, 2 invalid config,
// 3 numerical failure, 4 acceptance failure.

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "stable_llt/aslt_sim.hpp"
#include "stable_llt/correlation.hpp"
#include "stable_llt/error.hpp"
#include "stable_llt/exact_llt.hpp"
#include "stable_llt/io.hpp"
#include "stable_llt/kernels.hpp"
#include "stable_llt/norming.hpp"
#include "stable_llt/stable_law.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stable_llt;
using namespace stable_llt::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

struct Overrides {
  std::string config;
  std::string out;
  std::string seeds;
  int threads = -1;
  double tol = -1.0;
};

class Run {
 public:
  Run(std::string command, const ExperimentConfig& cfg)
      : cfg_(cfg), dir_(cfg.out), manifest_(std::move(command), cfg.to_json()) {
    fs::create_directories(dir_);
  }

  const ExperimentConfig& cfg() const { return cfg_; }

  void csv(const std::string& name, const CsvTable& t, const std::string& kind) {
    t.write(dir_ / name);
    manifest_.add_file(dir_ / name, kind);
  }

  void json_file(const std::string& name, const json& doc, const std::string& kind) {
    write_json(dir_ / name, doc);
    manifest_.add_file(dir_ / name, kind);
  }

  void check(const std::string& name, bool pass, json detail) {
    detail["name"] = name;
    detail["pass"] = pass;
    checks_.push_back(std::move(detail));
    all_pass_ = all_pass_ && pass;
  }

  json& results() { return results_; }

  int finish() {
    json summary;
    summary["command"] = manifest_.doc()["command"];
    summary["checks"] = checks_;
    summary["all_pass"] = all_pass_;
    summary["results"] = results_;
    write_json(dir_ / "summary.json", summary);
    manifest_.add_file(dir_ / "summary.json", "summary");
    manifest_.write(dir_ / "manifest.json");
    std::cout << summary.dump(2) << "\n";
    return all_pass_ ? 0 : kExitAcceptance;
  }

 private:
  ExperimentConfig cfg_;
  fs::path dir_;
  Manifest manifest_;
  json checks_ = json::array();
  json results_ = json::object();
  bool all_pass_ = true;
};

int cmd_density(Run& run) {
  const ExperimentConfig& cfg = run.cfg();
  const LatticeLaw law = make_law(cfg);
  const StableParams p = make_stable_params(cfg, law);
  const DensitySpec& d = cfg.density;
  std::vector<double> xs(static_cast<std::size_t>(d.points));
  for (int i = 0; i < d.points; ++i) xs[static_cast<std::size_t>(i)] = d.x_min + (d.x_max - d.x_min) * i / (d.points - 1);
  const std::vector<double> gs = density_grid(p, xs, d.tol);
  run.csv("density.csv", density_table(xs, gs), "density");
  run.results()["stable"] = to_json(p);

  if (p.alpha == 2.0) {
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double exact = std::exp(-xs[i] * xs[i] / (4.0 * p.c)) / std::sqrt(4.0 * M_PI * p.c);
      worst = std::max(worst, std::fabs(gs[i] - exact));
    }
    run.check("normal_closed_form", worst <= d.check_tol, {{"max_abs_diff", worst}, {"threshold", d.check_tol}});
  }
  if (p.beta == 0.0) {
    std::vector<double> neg(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) neg[i] = -xs[i];
    const std::vector<double> gneg = density_grid(p, neg, d.tol);
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, std::fabs(gs[i] - gneg[i]));
    run.check("symmetry", worst <= d.check_tol, {{"max_abs_diff", worst}, {"threshold", d.check_tol}});
    const double closed = gamma_integral(0.0, p.c, p.alpha) / M_PI;
    const double g0 = density(p, 0.0, d.tol);
    run.check("g0_closed_form", std::fabs(g0 - closed) <= d.check_tol,
              {{"g0", g0}, {"closed_form", closed}, {"threshold", d.check_tol}});
  }
  return run.finish();
}

int cmd_exact_llt(Run& run) {
  const ExperimentConfig& cfg = run.cfg();
  const LatticeLaw law = make_law(cfg);
  const NormingSeq seq = make_norming(cfg, law);
  const StableParams p = make_stable_params(cfg, law);
  SnOptions opts;
  opts.tol = cfg.tol;
  opts.w_factor = cfg.exact.w_factor;
  opts.n_max = cfg.exact.n;
  for (std::int64_t n : cfg.exact.n_list) opts.n_max = std::max(opts.n_max, n);
  const SnEngine engine(law, seq, opts);

  const SnPmf s = engine.pmf(cfg.exact.n);
  run.csv("sn_pmf.csv", sn_pmf_table(s), "sn_pmf");
  run.json_file("sn_pmf.json", {{"n", s.n}, {"W", s.W}, {"err_bound", s.err_bound}, {"tol", s.tol}}, "sn_pmf_sidecar");
  run.check("certificate", s.err_bound <= cfg.tol, {{"err_bound", s.err_bound}, {"threshold", cfg.tol}});

  const LltRatio r = llt_ratio(engine, p, cfg.exact.n, cfg.kappa);
  run.results()["llt"] = {{"n", r.n},
                          {"kappa_n", r.kappa_n},
                          {"scaled_prob", r.scaled_prob},
                          {"scaled_bound", r.scaled_bound},
                          {"density", r.density},
                          {"ratio", r.ratio}};
  run.check("ratio", std::fabs(r.ratio - 1.0) <= cfg.exact.ratio_tolerance,
            {{"ratio", r.ratio}, {"threshold", cfg.exact.ratio_tolerance}});

  if (!cfg.exact.n_list.empty()) {
    const UniformBoundScan scan = uniform_bound_scan(engine, cfg.exact.n_list);
    CsvTable t({"n", "argmax_k", "scaled_max", "scaled_bound"});
    for (const auto& row : scan.rows) {
      t.add(row.n).add(row.argmax_k).add(row.scaled_max).add(row.scaled_bound);
      t.end_row();
    }
    run.csv("uniform_bound.csv", t, "uniform_bound");
    run.results()["uniform_bound"] = {{"C_hat", scan.C_hat}, {"n_at", scan.n_at}, {"k_at", scan.k_at}};
    run.check("uniform_bound_finite", std::isfinite(scan.C_hat), {{"C_hat", scan.C_hat}});
  }
  return run.finish();
}

int cmd_corr_check(Run& run) {
  const ExperimentConfig& cfg = run.cfg();
  const LatticeLaw law = make_law(cfg);
  const NormingSeq seq = make_norming(cfg, law);
  const CorrSpec& c = cfg.corr;
  SnOptions opts;
  opts.tol = cfg.tol;
  opts.n_max = std::max(c.n, c.n_base << c.extensions);
  const SnEngine engine(law, seq, opts);

  const SpectralGap gap = spectral_gap(law, seq.epsilon());
  const std::int64_t x0 = x0_from_gap(gap.c_hat, law.alpha());
  const std::vector<std::int64_t> ms = dyadic_m_grid(c.n, x0);
  const ExponentFit fit = exponent_fit(engine, c.n, ms, x0, cfg.kappa);
  const DominationScan scan = domination_scan(engine, gap, x0, c.n_base, c.extensions, cfg.kappa);

  run.csv("corr_grid.csv", corr_table(scan.rows), "corr_grid");
  run.results()["spectral_gap"] = {{"c_hat", gap.c_hat}, {"t_at", gap.t_at}, {"x0", x0}};
  json fj = to_json(fit);
  fj["m_grid"] = ms;
  run.results()["exponent_fit"] = fj;
  run.results()["domination"] = {{"n_max", scan.n_max}, {"empirical_C", scan.empirical_C}, {"stable", scan.stable}};
  run.results()["rho"] = seq.rho();
  run.check("slope", fit.slope >= seq.rho() - c.slope_margin,
            {{"slope", fit.slope}, {"threshold", seq.rho() - c.slope_margin}});
  run.check("domination_stable", scan.stable, {{"empirical_C", scan.empirical_C}});
  return run.finish();
}

int cmd_aslt(Run& run) {
  const ExperimentConfig& cfg = run.cfg();
  const LatticeLaw law = make_law(cfg);
  const NormingSeq seq = make_norming(cfg, law);
  const StableParams p = make_stable_params(cfg, law);
  const AsltSpec& a = cfg.aslt;
  const std::vector<std::int64_t> grid = a.N_grid.empty() ? default_checkpoints(a.N) : a.N_grid;
  SnOptions opts;
  opts.tol = cfg.tol;
  const double g = density(p, cfg.kappa, 1e-10);

  std::vector<AsltRun> runs;
  if (cfg.seeds.size() >= 8) {
    const ConvergenceStudy study = convergence_study(law, seq, p, cfg.kappa, grid, cfg.seeds, opts);
    runs = study.runs;
    run.csv("study.csv", study_table(study.rows), "study");
    json rows = json::array();
    for (const StudyRow& r : study.rows) {
      rows.push_back(to_json(r));
      run.check("unbiased_N" + std::to_string(r.N), r.unbiased,
                {{"mean_A", r.mean_A}, {"expected_A", r.expected_A}, {"sd_A", r.sd_A}});
    }
    run.results()["study"] = rows;
    if (a.median_band > 0.0) {
      const StudyRow& last = study.rows.back();
      const double rel = std::fabs(last.median_A - g) / g;
      run.check("median_band", rel <= a.median_band, {{"relative_gap", rel}, {"threshold", a.median_band}});
    }
  } else {
    runs = run_paths(law, seq, cfg.kappa, a.N, cfg.seeds, grid);
    const ExpectedAverage ex = expected_average(law, seq, cfg.kappa, a.N, grid, opts);
    run.results()["expected_A"] = ex.values;
  }
  run.results()["g_kappa"] = g;
  run.csv("runs.csv", runs_table(runs), "runs");
  CsvTable cps({"seed", "checkpoint", "A"});
  for (const AsltRun& r : runs) {
    for (std::size_t j = 0; j < r.checkpoints.size(); ++j) {
      cps.add(static_cast<std::int64_t>(r.seed)).add(r.checkpoints[j]).add(r.A[j]);
      cps.end_row();
    }
  }
  run.csv("checkpoints.csv", cps, "checkpoints");
  return run.finish();
}

int cmd_norming(Run& run) {
  const ExperimentConfig& cfg = run.cfg();
  const LatticeLaw law = make_law(cfg);
  const NormingSeq seq = make_norming(cfg, law);
  const std::vector<NormingRow> rows = norming_table(seq, cfg.norming_table.ns);
  run.csv("norming.csv", norming_csv(rows), "norming");
  double worst = 0.0;
  for (const NormingRow& r : rows) {
    const double lhs = std::pow(r.b, seq.alpha());
    const double rhs = static_cast<double>(r.n) * seq.h()(r.b);
    worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
  }
  run.check("fixed_point", worst <= 1e-10, {{"max_rel_residual", worst}, {"threshold", 1e-10}});
  run.results()["norming"] = describe(seq);

  const NormingTableSpec& t = cfg.norming_table;
  if (t.log_weight) {
    if (seq.h().kind() != SlowlyVarying::Kind::log_power && t.gamma < 0.0) {
      throw ConfigError("norming_table.gamma", "required unless h is log_power");
    }
    const double gamma = t.gamma >= 0.0 ? t.gamma : log_weight_gamma(seq.alpha(), seq.h().param());
    const LogWeightCheck full = log_weight_sum_check(seq, t.a, t.b, gamma);
    const std::int64_t mid = std::max<std::int64_t>(t.a + 1, static_cast<std::int64_t>(std::sqrt(static_cast<double>(t.a) * static_cast<double>(t.b))));
    const LogWeightCheck half = log_weight_sum_check(seq, t.a, mid, gamma);
    const double growth = full.fitted_C / half.fitted_C - 1.0;
    run.results()["log_weight"] = {{"gamma", gamma},          {"a", t.a},
                                   {"b", t.b},                {"fitted_C", full.fitted_C},
                                   {"fitted_C_mid", half.fitted_C}, {"b_mid", mid},
                                   {"worst_a", full.worst_a}, {"worst_b", full.worst_b}};
    run.check("log_weight_bounded", std::isfinite(full.fitted_C) && growth <= 0.01,
              {{"growth", growth}, {"threshold", 0.01}});
  }
  return run.finish();
}

int thread_count(const Overrides& o, const ExperimentConfig& cfg) {
  if (o.threads >= 0) return o.threads;
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("STABLE_LLT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError("STABLE_LLT_THREADS", "expected a positive integer");
  }
  return 0;
}

int dispatch(const std::string& name, const Overrides& o, const std::function<int(Run&)>& body) {
  try {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (!o.out.empty()) cfg.out = o.out;
    if (!o.seeds.empty()) cfg.seeds = parse_seed_list(o.seeds);
    if (o.tol >= 0.0) {
      if (!(o.tol > 0.0 && o.tol <= 1e-3)) throw ConfigError("--tol", "must lie in (0, 1e-3]");
      cfg.tol = o.tol;
    }
    cfg.threads = thread_count(o, cfg);
    if (cfg.threads > 0) {
      omp_set_num_threads(cfg.threads);
    }
    Run run(name, cfg);
    return body(run);
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact local probabilities, stable densities and almost sure local limit checks"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seeds", o.seeds, "seed list, e.g. 0-63 or 1,5,9");
  app.add_option("--threads", o.threads, "worker threads (default: STABLE_LLT_THREADS or OpenMP)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--tol", o.tol, "certificate tolerance in (0, 1e-3]");

  struct Sub {
    const char* name;
    const char* help;
    int (*body)(Run&);
  };
  const Sub subs[] = {
      {"density", "stable density on a grid", cmd_density},
      {"exact-llt", "exact law of S_n and the local limit ratio", cmd_exact_llt},
      {"corr-check", "correlation inequality shape checks", cmd_corr_check},
      {"aslt", "logarithmic averages against their expectation", cmd_aslt},
      {"norming", "norming constants and the log-weight check", cmd_norming},
  };
  for (const Sub& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  for (const Sub& s : subs) {
    if (app.got_subcommand(s.name)) return dispatch(s.name, o, s.body);
  }
  return kExitConfig;
}
