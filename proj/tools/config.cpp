#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "stable_llt/error.hpp"

namespace stable_llt::cli {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [k, v] : node_.items()) {
      if (!known.count(k)) throw ConfigError(field(k), "unknown key");
    }
  }

  bool has(const char* key) const { return node_.contains(key); }
  const json& at(const char* key) const { return node_.at(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void get(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    out = v.get<double>();
  }

  void get(const char* key, std::int64_t& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    out = v.get<std::int64_t>();
  }

  void get(const char* key, int& out) const {
    std::int64_t v = out;
    get(key, v);
    out = static_cast<int>(v);
  }

  void get(const char* key, bool& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    out = v.get<bool>();
  }

  void get(const char* key, std::string& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    out = v.get<std::string>();
  }

  void get(const char* key, std::vector<std::int64_t>& out) const {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of integers");
    out.clear();
    for (const json& e : v) {
      if (!e.is_number_integer()) throw ConfigError(field(key), "expected an array of integers");
      out.push_back(e.get<std::int64_t>());
    }
  }

 private:
  const json& node_;
  std::string path_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

void check_increasing(const std::vector<std::int64_t>& v, const std::string& field, std::int64_t lo) {
  std::int64_t prev = lo - 1;
  for (std::int64_t x : v) {
    require(x > prev, field, "must be strictly increasing and >= " + std::to_string(lo));
    prev = x;
  }
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["law"] = {{"builder", law.builder}, {"params", law.params}};
  j["norming"] = {{"h", norming.h},         {"value", norming.value}, {"sigma", norming.sigma},
                  {"epsilon", norming.epsilon}, {"eta", norming.eta},   {"delta", norming.delta}};
  if (stable.set) j["stable"] = {{"alpha", stable.alpha}, {"beta", stable.beta}, {"c", stable.c}};
  j["kappa"] = kappa;
  j["tol"] = tol;
  j["seeds"] = seeds;
  j["threads"] = threads;
  j["out"] = out;
  j["density"] = {{"x_min", density.x_min},
                  {"x_max", density.x_max},
                  {"points", density.points},
                  {"tol", density.tol},
                  {"check_tol", density.check_tol}};
  j["exact_llt"] = {{"n", exact.n},
                    {"n_list", exact.n_list},
                    {"ratio_tolerance", exact.ratio_tolerance},
                    {"w_factor", exact.w_factor}};
  j["corr"] = {{"n", corr.n}, {"n_base", corr.n_base}, {"extensions", corr.extensions},
               {"slope_margin", corr.slope_margin}};
  j["aslt"] = {{"N", aslt.N}, {"N_grid", aslt.N_grid}, {"median_band", aslt.median_band}};
  j["norming_table"] = {{"ns", norming_table.ns},
                        {"log_weight", norming_table.log_weight},
                        {"a", norming_table.a},
                        {"b", norming_table.b},
                        {"gamma", norming_table.gamma}};
  return j;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  ExperimentConfig cfg;
  const Section root(doc, "");
  root.allow({"law", "norming", "stable", "kappa", "tol", "seeds", "threads", "out", "density", "exact_llt", "corr",
              "aslt", "norming_table"});

  if (root.has("law")) {
    const Section s(root.at("law"), "law");
    s.allow({"builder", "params"});
    s.get("builder", cfg.law.builder);
    if (s.has("params")) {
      const Section p(s.at("params"), "law.params");
      for (const auto& [k, v] : s.at("params").items()) {
        if (!v.is_number()) throw ConfigError(p.field(k), "expected a number");
        cfg.law.params[k] = v.get<double>();
      }
    }
  }
  if (root.has("norming")) {
    const Section s(root.at("norming"), "norming");
    s.allow({"h", "value", "sigma", "epsilon", "eta", "delta"});
    s.get("h", cfg.norming.h);
    s.get("value", cfg.norming.value);
    s.get("sigma", cfg.norming.sigma);
    s.get("epsilon", cfg.norming.epsilon);
    s.get("eta", cfg.norming.eta);
    s.get("delta", cfg.norming.delta);
    require(cfg.norming.h == "auto" || cfg.norming.h == "constant" || cfg.norming.h == "log_power", "norming.h",
            "expected auto, constant or log_power");
  }
  if (root.has("stable")) {
    const Section s(root.at("stable"), "stable");
    s.allow({"alpha", "beta", "c"});
    cfg.stable.set = true;
    s.get("alpha", cfg.stable.alpha);
    s.get("beta", cfg.stable.beta);
    s.get("c", cfg.stable.c);
  }
  root.get("kappa", cfg.kappa);
  root.get("tol", cfg.tol);
  if (root.has("seeds")) {
    const json& v = root.at("seeds");
    if (v.is_string()) {
      try {
        cfg.seeds = parse_seed_list(v.get<std::string>());
      } catch (const ConfigError& e) {
        throw ConfigError("seeds", e.what());
      }
    } else {
      require(v.is_array() && !v.empty(), "seeds", "expected a seed list string or a nonempty array");
      cfg.seeds.clear();
      for (const json& e : v) {
        require(e.is_number_unsigned(), "seeds", "expected a seed list string or a nonempty array");
        cfg.seeds.push_back(e.get<std::uint64_t>());
      }
    }
  }
  root.get("threads", cfg.threads);
  root.get("out", cfg.out);
  require(cfg.tol > 0.0 && cfg.tol <= 1e-3, "tol", "must lie in (0, 1e-3]");
  require(cfg.threads >= 0, "threads", "must be >= 0");

  if (root.has("density")) {
    const Section s(root.at("density"), "density");
    s.allow({"x_min", "x_max", "points", "tol", "check_tol"});
    s.get("x_min", cfg.density.x_min);
    s.get("x_max", cfg.density.x_max);
    s.get("points", cfg.density.points);
    s.get("tol", cfg.density.tol);
    s.get("check_tol", cfg.density.check_tol);
    require(cfg.density.points >= 2, "density.points", "must be >= 2");
    require(cfg.density.x_min < cfg.density.x_max, "density.x_max", "must exceed x_min");
    require(cfg.density.tol > 0.0, "density.tol", "must be positive");
  }
  if (root.has("exact_llt")) {
    const Section s(root.at("exact_llt"), "exact_llt");
    s.allow({"n", "n_list", "ratio_tolerance", "w_factor"});
    s.get("n", cfg.exact.n);
    s.get("n_list", cfg.exact.n_list);
    s.get("ratio_tolerance", cfg.exact.ratio_tolerance);
    s.get("w_factor", cfg.exact.w_factor);
    require(cfg.exact.n >= 1, "exact_llt.n", "must be >= 1");
    require(cfg.exact.w_factor > 0.0, "exact_llt.w_factor", "must be positive");
    for (std::int64_t n : cfg.exact.n_list) require(n >= 1, "exact_llt.n_list", "entries must be >= 1");
  }
  if (root.has("corr")) {
    const Section s(root.at("corr"), "corr");
    s.allow({"n", "n_base", "extensions", "slope_margin"});
    s.get("n", cfg.corr.n);
    s.get("n_base", cfg.corr.n_base);
    s.get("extensions", cfg.corr.extensions);
    s.get("slope_margin", cfg.corr.slope_margin);
    require(cfg.corr.n >= 4, "corr.n", "must be >= 4");
    require(cfg.corr.n_base >= 2, "corr.n_base", "must be >= 2");
    require(cfg.corr.extensions >= 1 && cfg.corr.extensions <= 20, "corr.extensions", "must lie in [1, 20]");
  }
  if (root.has("aslt")) {
    const Section s(root.at("aslt"), "aslt");
    s.allow({"N", "N_grid", "median_band"});
    s.get("N", cfg.aslt.N);
    s.get("N_grid", cfg.aslt.N_grid);
    s.get("median_band", cfg.aslt.median_band);
    require(cfg.aslt.N >= 2, "aslt.N", "must be >= 2");
    check_increasing(cfg.aslt.N_grid, "aslt.N_grid", 2);
    if (!cfg.aslt.N_grid.empty()) require(cfg.aslt.N_grid.back() <= cfg.aslt.N, "aslt.N_grid", "entries must be <= N");
  }
  if (root.has("norming_table")) {
    const Section s(root.at("norming_table"), "norming_table");
    s.allow({"ns", "log_weight", "a", "b", "gamma"});
    s.get("ns", cfg.norming_table.ns);
    s.get("log_weight", cfg.norming_table.log_weight);
    s.get("a", cfg.norming_table.a);
    s.get("b", cfg.norming_table.b);
    s.get("gamma", cfg.norming_table.gamma);
    check_increasing(cfg.norming_table.ns, "norming_table.ns", 1);
    require(cfg.norming_table.a >= 2 && cfg.norming_table.a < cfg.norming_table.b, "norming_table.b",
            "need 2 <= a < b");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("--config", std::string("parse error: ") + e.what());
  }
  return parse_config(doc);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("--seeds", "'" + s + "' is not a nonnegative integer");
    }
    return std::stoull(s);
  };
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(number(item));
      continue;
    }
    const std::uint64_t lo = number(item.substr(0, dash));
    const std::uint64_t hi = number(item.substr(dash + 1));
    if (hi < lo || hi - lo > 1000000) throw ConfigError("--seeds", "bad range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("--seeds", "empty seed list");
  return seeds;
}

LatticeLaw make_law(const ExperimentConfig& cfg) {
  try {
    return build_law(cfg.law.builder, cfg.law.params);
  } catch (const InvalidArgument& e) {
    throw ConfigError("law", e.what());
  }
}

NormingSeq make_norming(const ExperimentConfig& cfg, const LatticeLaw& law) {
  NormingOptions opts;
  opts.epsilon = cfg.norming.epsilon;
  opts.eta = cfg.norming.eta;
  opts.delta = cfg.norming.delta;
  try {
    if (cfg.norming.h == "auto") return NormingSeq::for_law(law, opts);
    if (cfg.norming.h == "constant") return NormingSeq(law.alpha(), SlowlyVarying::constant(cfg.norming.value), opts);
    return NormingSeq(law.alpha(), SlowlyVarying::log_power(cfg.norming.sigma), opts);
  } catch (const InvalidArgument& e) {
    throw ConfigError("norming", e.what());
  }
}

StableParams make_stable_params(const ExperimentConfig& cfg, const LatticeLaw& law) {
  try {
    if (cfg.stable.set) return make_stable(cfg.stable.alpha, cfg.stable.beta, cfg.stable.c);
    return stable_for(law);
  } catch (const InvalidArgument& e) {
    throw ConfigError("stable", e.what());
  }
}

}  // namespace stable_llt::cli
