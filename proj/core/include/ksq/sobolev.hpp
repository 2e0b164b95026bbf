#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

#include "ksq/boundary.hpp"
#include "ksq/spectral.hpp"

namespace ksq {

// Measured sides of an inequality lhs <= C rhs; ratio is the empirical C.
struct NormReport {
  std::string estimate;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  nlohmann::json data = nlohmann::json::object();

  static NormReport make(std::string id, double lhs, double rhs, nlohmann::json data = nlohmann::json::object());
};
void to_json(nlohmann::json& j, const NormReport& r);
void from_json(const nlohmann::json& j, NormReport& r);

// (sum_k (1 + xi_k^2)^s |c_k|^2 / L)^{1/2}
double hs_norm_line(const SpectralField& f, double s);

// H^s(R+) surrogate of the x >= 0 part of a field on a centered grid.
//   s = 0      : trapezoid L^2(0, L/2)
//   s < 0      : zero extension
//   s > 0      : least H^s norm over all grid functions that agree with f on x >= 0,
//                vanish beyond a band of x < 0 next to the boundary, and are free on
//                that band (never larger than the zero-extension norm).
double hs_norm_halfline(const Grid1D& grid, std::span<const double> full_values, double s);
double hs_norm_halfline(const SpectralField& f, double s);

// H^r(0,T) of samples at t_j = jT/m, zero-padded to [0, 4T].
double hr_norm_time(std::span<const double> g, double horizon, double r);

// || h ||  in  H^{s/4+3/8}(0,T) x H^{s/4+1/8}(0,T)
double boundary_pair_norm(const BoundaryData& h, double s);

// Samples of u and u_x at 16 fixed stations (x = 0 and 15 geometric points).
TraceRecord record_traces(const FieldSeries& u, std::size_t stations = 16);

struct SolutionNormParts {
  double sup_hs = 0.0;    // sup_t ||u||_{H^s}
  double l2_hs2 = 0.0;    // ||u||_{L^2(0,T;H^{s+2})}
  double trace_u = 0.0;   // max over stations of ||u(x,.)||_{H^{s/4+3/8}(0,T)}
  double trace_ux = 0.0;  // max over stations of ||u_x(x,.)||_{H^{s/4+1/8}(0,T)}
  double total() const noexcept { return sup_hs + l2_hs2 + trace_u + trace_ux; }
};
// Requires u.traces (IncompleteRecordError otherwise).
SolutionNormParts solution_norm_parts(const FieldSeries& u, double s);
double solution_norm(const FieldSeries& u, double s);

struct WeightedNormParts {
  double sup_hs = 0.0;
  double l2_hs2 = 0.0;
  double weighted_sup_l2 = 0.0;  // sup_t ||t^a u||_{L^2}
  double weighted_l2_h2 = 0.0;   // ||t^a u||_{L^2(0,T;H^2)}
  double total() const noexcept { return sup_hs + l2_hs2 + weighted_sup_l2 + weighted_l2_h2; }
};
// a = |s|/4 + eps; needs -2 < s < 0 and eps > 0.
WeightedNormParts weighted_solution_norm_parts(const FieldSeries& u, double s, double eps);
double weighted_solution_norm(const FieldSeries& u, double s, double eps);

// ||phi||_{H^s(R+)} + ||h||_{pair}
double data_norm(const SpectralField& phi, const BoundaryData& h, double s);

// int_0^T t^a ||f(t)||_{H^s(R+)} dt  (trapezoid; a = 0 for the plain norm).
double l1_time_norm(const FieldSeries& f, double s, double weight_exponent = 0.0);
// (int_0^T ||f(t)||^2_{H^s(R+)} dt)^{1/2}
double l2_time_norm(const FieldSeries& f, double s);
double sup_time_norm(const FieldSeries& f, double s);

// Fraction of the L^2 mass in the outer 5% at each end of the grid.
double edge_mass_fraction(const SpectralField& f);

}  // namespace ksq
