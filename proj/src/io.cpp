#include "stable_llt/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "stable_llt/error.hpp"

namespace stable_llt {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw NumericalError("write to " + path.string() + " failed");
}

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::add(double x) {
  current_.push_back(format_double(x));
  return *this;
}

CsvTable& CsvTable::add(std::int64_t x) {
  current_.push_back(std::to_string(x));
  return *this;
}

CsvTable& CsvTable::add(const std::string& s) {
  current_.push_back(s);
  return *this;
}

void CsvTable::end_row() {
  if (current_.size() != header_.size()) throw InvalidArgument("CsvTable: row width does not match header");
  rows_.push_back(std::move(current_));
  current_.clear();
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

CsvTable sn_pmf_table(const SnPmf& s) {
  CsvTable t({"k", "mass", "entry_bound"});
  for (std::int64_t k = -s.W; k <= s.W; ++k) {
    t.add(k).add(s.mass(k)).add(s.entry_bound(k));
    t.end_row();
  }
  return t;
}

CsvTable density_table(std::span<const double> xs, std::span<const double> gs) {
  if (xs.size() != gs.size()) throw InvalidArgument("density_table: size mismatch");
  CsvTable t({"x", "g"});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    t.add(xs[i]).add(gs[i]);
    t.end_row();
  }
  return t;
}

CsvTable norming_csv(std::span<const NormingRow> rows) {
  CsvTable t({"n", "b", "L", "M", "tilde_L"});
  for (const auto& r : rows) {
    t.add(r.n).add(r.b).add(r.L).add(r.M).add(r.tilde_L);
    t.end_row();
  }
  return t;
}

CsvTable corr_table(std::span<const CorrReport> rows) {
  CsvTable t({"m", "n", "lhs", "lhs_err", "bound_i", "bound_ii", "corollary", "ratio_i", "ratio_ii",
              "ratio_corollary"});
  for (const auto& r : rows) {
    t.add(r.m).add(r.n).add(r.lhs).add(r.lhs_err).add(r.bound_i).add(r.bound_ii).add(r.corollary);
    t.add(r.ratio_i).add(r.ratio_ii).add(r.ratio_corollary);
    t.end_row();
  }
  return t;
}

CsvTable study_table(std::span<const StudyRow> rows) {
  CsvTable t({"N", "median_A", "q25", "q75", "mean_A", "expected_A", "g_kappa"});
  for (const auto& r : rows) {
    t.add(r.N).add(r.median_A).add(r.q25).add(r.q75).add(r.mean_A).add(r.expected_A).add(r.g_kappa);
    t.end_row();
  }
  return t;
}

CsvTable runs_table(std::span<const AsltRun> runs) {
  CsvTable t({"seed", "N", "kappa", "A_N", "hits", "final_position"});
  for (const auto& r : runs) {
    t.add(static_cast<std::int64_t>(r.seed)).add(r.N).add(r.kappa).add(r.A.back()).add(r.hits).add(r.final_position);
    t.end_row();
  }
  return t;
}

nlohmann::json to_json(const StableParams& p) {
  const ZolotarevForm z = zolotarev_form(p);
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"c", p.c}, {"c_prime", z.c_prime}, {"theta", z.theta}};
}

nlohmann::json to_json(const CorrReport& r) {
  return {{"m", r.m},
          {"n", r.n},
          {"kappa", r.kappa},
          {"lhs", r.lhs},
          {"lhs_err", r.lhs_err},
          {"bound_i", r.bound_i},
          {"bound_ii", number_or_null(r.bound_ii)},
          {"corollary", number_or_null(r.corollary)},
          {"ratio_i", r.ratio_i},
          {"ratio_ii", number_or_null(r.ratio_ii)},
          {"ratio_corollary", number_or_null(r.ratio_corollary)}};
}

nlohmann::json to_json(const ExponentFit& f) {
  nlohmann::json res = nlohmann::json::array();
  for (double r : f.residuals) res.push_back(number_or_null(r));
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"used_count", f.used_count},
          {"used", f.used},
          {"log_ratio", f.log_ratio},
          {"residuals", res}};
}

nlohmann::json to_json(const StudyRow& r) {
  return {{"N", r.N},           {"median_A", r.median_A},     {"q25", r.q25},
          {"q75", r.q75},       {"mean_A", r.mean_A},         {"sd_A", r.sd_A},
          {"expected_A", r.expected_A}, {"expected_bound", r.expected_bound}, {"g_kappa", r.g_kappa},
          {"unbiased", r.unbiased}};
}

nlohmann::json describe(const NormingSeq& seq) {
  return {{"alpha", seq.alpha()}, {"h", seq.h().describe()}, {"epsilon", seq.epsilon()},
          {"eta", seq.eta()},     {"delta", seq.delta()},    {"rho", seq.rho()}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

Manifest::Manifest(std::string command, nlohmann::json config) {
  doc_["command"] = std::move(command);
  doc_["config"] = std::move(config);
  doc_["files"] = nlohmann::json::array();
}

void Manifest::add_file(const std::filesystem::path& path, const std::string& kind) {
  doc_["files"].push_back({{"path", path.filename().string()}, {"kind", kind}});
}

void Manifest::set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }

void Manifest::write(const std::filesystem::path& path) const { write_json(path, doc_); }

}  // namespace stable_llt
