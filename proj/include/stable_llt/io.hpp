#pragma once

// CSV and JSON exports. CSV: comma separated, header row, doubles as %.17g.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "stable_llt/aslt_sim.hpp"
#include "stable_llt/correlation.hpp"
#include "stable_llt/exact_llt.hpp"
#include "stable_llt/norming.hpp"
#include "stable_llt/stable_law.hpp"

namespace stable_llt {

std::string format_double(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& add(double x);
  CsvTable& add(std::int64_t x);
  CsvTable& add(const std::string& s);
  /// Ends the current row; throws if its width differs from the header.
  void end_row();

  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> current_;
};

CsvTable sn_pmf_table(const SnPmf& s);
CsvTable density_table(std::span<const double> xs, std::span<const double> gs);
CsvTable norming_csv(std::span<const NormingRow> rows);
CsvTable corr_table(std::span<const CorrReport> rows);
CsvTable study_table(std::span<const StudyRow> rows);
CsvTable runs_table(std::span<const AsltRun> runs);

nlohmann::json to_json(const StableParams& p);
nlohmann::json to_json(const CorrReport& r);
nlohmann::json to_json(const ExponentFit& f);
nlohmann::json to_json(const StudyRow& r);
nlohmann::json describe(const NormingSeq& seq);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Run manifest: effective configuration plus every emitted file.
class Manifest {
 public:
  Manifest(std::string command, nlohmann::json config);

  void add_file(const std::filesystem::path& path, const std::string& kind);
  void set(const std::string& key, nlohmann::json value);
  const nlohmann::json& doc() const { return doc_; }
  void write(const std::filesystem::path& path) const;

 private:
  nlohmann::json doc_;
};

}  // namespace stable_llt
