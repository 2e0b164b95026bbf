#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ksq/fd_oracle.hpp"
#include "ksq/nonlinear.hpp"
#include "ksq/sobolev.hpp"

namespace ksq {

struct VerifySettings {
  std::size_t samples = 20;
  std::uint64_t seed = 1;
  double amplitude = 1.0;  // scales every sampled datum; 0 gives an all-skipped run
  std::vector<std::string> estimates;  // empty: every estimate valid at the configured s
};

struct RootsSettings {
  double rho_min = 0.1;
  double rho_max = 4.0;
  std::size_t points = 64;
};

struct LatticeSettings {
  double x_max = 4.0;
  std::size_t x_points = 41;
};

struct SweepSettings {
  // Each entry maps dotted config keys to values; "pipeline" may be among them.
  std::vector<nlohmann::json> entries;
};

struct ExperimentConfig {
  std::string pipeline = "solve";  // solve | verify | roots | compat | wbdr | oracle-compare | calibrate | sweep
  ModelParams model;
  double horizon = 0.5;
  double length = 80.0;
  std::size_t points = 1024;
  std::size_t steps = 128;
  nlohmann::json phi = {{"family", "gaussian"}, {"amp", 0.01}, {"center", 5.0}, {"width", 1.0}};
  nlohmann::json h1 = {{"family", "zero"}};
  nlohmann::json h2 = {{"family", "zero"}};
  SolverOptions solver;
  bool weighted = false;
  bool monitor_energy = false;
  CalibrationSettings calibration;
  std::optional<ConstantsCalibration> constants;  // skips calibration when given
  VerifySettings verify;
  FDConfig oracle = [] {
    FDConfig f;
    f.dt = 0.0;  // 0: an eighth of the solution time step
    return f;
  }();
  RootsSettings roots;
  LatticeSettings lattice;
  SweepSettings sweep;
  std::size_t workers = 1;  // concurrent sweep entries or verify samples
  std::string output = "ksq_out";

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Unknown keys are rejected with their dotted path.
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& file);
// `key=value` with a dotted key; the value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);
void apply_override(nlohmann::json& config, const std::string& key, const nlohmann::json& value);

// Shortest round-trip decimal.
std::string format_number(double v);

struct CsvTable {
  std::string name;
  std::string schema;  // written as "# schema: <schema>" above the header row
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<double> row);
  std::string str() const;
};

struct RunReport {
  nlohmann::json summary = nlohmann::json::object();
  std::vector<CsvTable> tables;
  Diagnostics diag;
  bool diverged = false;  // a sweep entry failed to converge

  std::size_t digest() const;  // hash of the summary and every table
};

RunReport run_experiment(const ExperimentConfig& cfg);
// summary.json and one <name>.csv per table; the directory is created if needed.
void write_report(const RunReport& report, const std::filesystem::path& dir);

struct EstimateRun {
  std::vector<NormReport> reports;
  std::vector<std::string> notes;  // skipped samples
};

// Estimate ids: boundary_operator_bound, halfline_semigroup_bound, whole_line_smoothing,
// forced_halfline_bound, bilinear_bound (s >= 0); weighted_boundary_bound,
// weighted_bilinear_uxx, weighted_bilinear_uvx (weighted branch).
const std::vector<std::string>& estimate_ids();
EstimateRun verify_estimates(const ExperimentConfig& cfg);

struct RatioSummary {
  std::size_t count = 0;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double max_over_median() const noexcept { return median > 0.0 ? max / median : 0.0; }
  double min_over_median() const noexcept { return median > 0.0 ? min / median : 0.0; }
};
RatioSummary summarize_ratios(const std::vector<NormReport>& reports, const std::string& estimate);

}  // namespace ksq
