#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

#include "ksq/boundary.hpp"
#include "ksq/sobolev.hpp"
#include "ksq/spectral.hpp"

namespace ksq {

struct SolverOptions {
  QuadratureConfig quad;
  double tol = 1e-10;  // stop when the increment drops below tol * d
  std::size_t max_iterations = 50;
  bool nonlinear = true;     // false drops u u_x (linear limit)
  bool second_order = true;  // false drops u_xx
  std::size_t stations = 16;
  double patch_length = 0.0;  // solve_global: fixed patch length; 0 picks it per patch

  void validate() const;
};

// Empirical constants of the local existence argument, measured on a random ensemble.
//   c1: linear solution operators,  ||W_c phi + W_bdr h||_X <= c1 (||phi|| + ||h||)
//   c2: Duhamel term of the nonlinearity against T^{1/2}||w|| + (T^{1/2} + T^{1/4})||w||^2
//   energy_c: constant of the energy inequality for z = u - y
struct ConstantsCalibration {
  double c1 = 0.0;
  double c2 = 0.0;
  double energy_c = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  nlohmann::json ratios = nlohmann::json::object();

  bool valid() const noexcept { return c1 > 0.0 && c2 > 0.0; }
};
void to_json(nlohmann::json& j, const ConstantsCalibration& c);
void from_json(const nlohmann::json& j, ConstantsCalibration& c);

struct CalibrationSettings {
  std::size_t ensemble = 8;
  std::uint64_t seed = 1;
  double horizon = 0.5;
  std::size_t steps = 64;
};

ConstantsCalibration calibrate_constants(const Grid1D& grid, const ModelParams& params,
                                         const CalibrationSettings& settings, const SolverOptions& opts = {});

struct PicardState {
  explicit PicardState(FieldSeries w) : w(std::move(w)) {}

  std::size_t iterations = 0;
  FieldSeries w;
  double d = 0.0;
  double kappa = 0.0;  // largest ratio of successive increments
  std::vector<double> kappa_history;
  std::vector<double> increment_history;
  std::vector<double> norm_history;
  double norm = 0.0;
  double residual = 0.0;  // ||map(w) - w|| / ||w|| for the returned w
  bool within_ball = true;
  Diagnostics diag;
};
void to_json(nlohmann::json& j, const PicardState& s);  // summary, without the field

// map(w) = W_c(t) phi + W_bdr(t) h - int_0^t W_c(t - r) (w_xx + w w_x)(r) dr on the
// time grid of h.  The quadratic term is formed as (w^2/2)_x with 2/3 dealiasing.
FieldSeries apply_fixed_point_map(const FieldSeries& w, const SpectralField& phi, const BoundaryData& h,
                                  const ModelParams& params, const SolverOptions& opts = {},
                                  Diagnostics* diag = nullptr);

// Solution of the linear problem (no u_xx, no u u_x) with data phi and h.
FieldSeries linear_solution(const SpectralField& phi, const BoundaryData& h, const ModelParams& params,
                            const SolverOptions& opts = {}, Diagnostics* diag = nullptr);

// Solution-space norm at index s (traces recorded on a copy).
double x_norm(const FieldSeries& u, double s, std::size_t stations = 16);

struct LocalStep {
  double t_star = 0.0;  // largest dyadic step
  double t_bound = 0.0;  // largest step allowed by the two conditions
  double d = 0.0;        // ball radius 2 c1 (||phi|| + ||h||)
};
LocalStep pick_local_step(const SpectralField& phi, const BoundaryData& h, const ConstantsCalibration& calib);

// Picard iteration on the time grid of h, starting from w = 0.
PicardState solve_local(const SpectralField& phi, const BoundaryData& h, const ModelParams& params, double d,
                        const SolverOptions& opts = {});

struct EnergyStep {
  double t = 0.0;
  double z2 = 0.0;
  double zxx2 = 0.0;
  double y2 = 0.0;
  double lhs = 0.0;  // d/dt ||z||^2 + ||z_xx||^2
  double rhs = 0.0;  // (C + ||y||^2)||z||^2 + ||y||^4 + C||y||^2
  double slack = 0.0;
  double envelope = 0.0;
  bool ok = true;
};
struct EnergyLedger {
  double c = 0.0;
  std::vector<EnergyStep> steps;
  bool inequality_holds = true;
  bool envelope_holds = true;
  double worst_excess = 0.0;     // max (lhs - rhs) / slack
  double envelope_margin = 0.0;  // min (envelope - ||z||^2) / envelope
};
void to_json(nlohmann::json& j, const EnergyLedger& e);

// Ledger over interior steps (centered differences) for u = y + z.
EnergyLedger energy_monitor(const FieldSeries& z, const FieldSeries& y, double c, double phi_l2, double h_norm);

struct PatchSummary {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t iterations = 0;
  double kappa = 0.0;
  double d = 0.0;
  double residual = 0.0;
};

struct SolveRecord {
  explicit SolveRecord(FieldSeries u) : solution(std::move(u)) {}

  std::vector<PatchSummary> patches;
  FieldSeries solution;
  std::vector<double> l2_series;
  std::vector<double> hs_series;  // ||u(t)||_{H^s(R+)} at the run's s
  double seam_jump = 0.0;
  std::optional<EnergyLedger> energy;
  Diagnostics diag;
};
void to_json(nlohmann::json& j, const PatchSummary& p);
void to_json(nlohmann::json& j, const SolveRecord& r);  // summary, without the field

// Patches [0, T] (T = horizon of h) with local solves restarted from the last field.
SolveRecord solve_global(const SpectralField& phi, const BoundaryData& h, const ModelParams& params,
                         const ConstantsCalibration& calib, const SolverOptions& opts = {}, bool monitor_energy = false);

// Picard iteration in the weighted norm (-2 < s < 0, eps > 0).
PicardState solve_weighted(const SpectralField& phi, const BoundaryData& h, const ModelParams& params,
                           const ConstantsCalibration& calib, const SolverOptions& opts = {});

// q = t^a v for the boundary solution v, against theta + vartheta: theta solves the
// forced problem with homogeneous boundary data, vartheta the problem with data t^a h.
struct SplittingCheck {
  double relative_error = 0.0;
  double q_norm = 0.0;
};
SplittingCheck weighted_splitting_check(const Grid1D& grid, const BoundaryData& h, const ModelParams& params,
                                        const SolverOptions& opts = {});

// Left sides of the weighted bilinear bounds over horizons, divided by ||u||, ||u||^2,
// and the fitted exponent of T (log-log least squares).
struct WeightedBilinearSides {
  double linear = 0.0;    // L^1 H^s + weighted L^1 L^2 of u_xx
  double bilinear = 0.0;  // the same for u u_x
  double norm = 0.0;      // weighted solution norm of u
};
WeightedBilinearSides weighted_bilinear_sides(const FieldSeries& u, const ModelParams& params);

struct ExponentFit {
  std::vector<double> horizons;
  std::vector<double> linear_ratio;
  std::vector<double> bilinear_ratio;
  double alpha_linear = 0.0;
  double alpha_bilinear = 0.0;
};
ExponentFit weighted_bilinear_exponent(const SpectralField& phi, const ModelParams& params,
                                       const std::vector<double>& horizons, double dt, const SolverOptions& opts = {});

// y = u_t from the linearized problem with y(0) = -phi'''' - delta phi''' - phi'' - phi phi'
// and boundary data h'.  consistency = ||y - D_t u|| / ||D_t u|| with centered differences.
struct TimeDerivative {
  explicit TimeDerivative(FieldSeries y) : y(std::move(y)) {}
  FieldSeries y;
  double consistency = 0.0;
  std::size_t iterations = 0;
};
// -phi'''' - delta phi''' - phi'' - phi phi' (terms dropped per the option flags).
SpectralField initial_time_derivative(const SpectralField& phi, double delta, const SolverOptions& opts = {});
TimeDerivative bootstrap_time_derivative(const SolveRecord& u, const SpectralField& phi, const BoundaryData& h,
                                         const ModelParams& params, const SolverOptions& opts = {});

}  // namespace ksq
