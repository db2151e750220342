#pragma once

// Experiment configuration: one JSON document, flags override its values.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "stable_llt/lattice_model.hpp"
#include "stable_llt/norming.hpp"
#include "stable_llt/stable_law.hpp"

namespace stable_llt::cli {

/// Invalid configuration; `field` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct LawSpec {
  std::string builder = "lazy_walk";
  std::map<std::string, double> params;
};

struct NormingSpec {
  std::string h = "auto";  ///< auto | constant | log_power
  double value = 1.0;      ///< constant h
  double sigma = 0.0;      ///< log_power h
  double epsilon = 0.5;
  double eta = 1.0;
  double delta = -1.0;     ///< negative selects 1/(2 alpha)
};

struct StableSpec {
  bool set = false;
  double alpha = 2.0;
  double beta = 0.0;
  double c = 0.5;
};

struct DensitySpec {
  double x_min = -4.0;
  double x_max = 4.0;
  int points = 81;
  double tol = 1e-10;
  double check_tol = 1e-6;
};

struct ExactSpec {
  std::int64_t n = 4096;
  std::vector<std::int64_t> n_list;  ///< uniform-bound scan; empty skips it
  double ratio_tolerance = 0.01;
  double w_factor = 40.0;
};

struct CorrSpec {
  std::int64_t n = 4096;
  std::int64_t n_base = 512;
  int extensions = 3;
  double slope_margin = 0.1;
};

struct AsltSpec {
  std::int64_t N = 1000;
  std::vector<std::int64_t> N_grid;  ///< empty: powers of two up to N
  double median_band = 0.25;         ///< relative band for the median at the largest N; <= 0 disables
};

struct NormingTableSpec {
  std::vector<std::int64_t> ns = {16, 64, 256, 1024, 4096, 16384, 65536};
  bool log_weight = false;
  std::int64_t a = 16;
  std::int64_t b = std::int64_t{1} << 20;
  double gamma = -1.0;  ///< negative: derived from (alpha, sigma)
};

struct ExperimentConfig {
  LawSpec law;
  NormingSpec norming;
  StableSpec stable;
  double kappa = 0.0;
  double tol = 1e-3;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7};
  int threads = 0;  ///< 0: OpenMP default
  std::string out = "out";
  DensitySpec density;
  ExactSpec exact;
  CorrSpec corr;
  AsltSpec aslt;
  NormingTableSpec norming_table;

  nlohmann::json to_json() const;
};

/// Unknown keys and wrong types are rejected with the field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// "1,2,5-9" -> {1,2,5,6,7,8,9}.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

LatticeLaw make_law(const ExperimentConfig& cfg);
NormingSeq make_norming(const ExperimentConfig& cfg, const LatticeLaw& law);
StableParams make_stable_params(const ExperimentConfig& cfg, const LatticeLaw& law);

}  // namespace stable_llt::cli
