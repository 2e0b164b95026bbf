#pragma once

#include <vector>

#include "ksq/boundary.hpp"
#include "ksq/spectral.hpp"

namespace ksq::detail {

using CoeffSeries = std::vector<std::vector<cplx>>;

// Whole-line exponential-integrator march: c_0 = init (or 0), forced by `source`
// (or unforced) on every node of `time`.
CoeffSeries whole_line_march(const Grid1D& grid, const TimeGrid& time, double delta, const std::vector<cplx>* init,
                             const CoeffSeries* source);

// Real value and x-derivative at x = 0 of a field given by coefficients.
std::pair<double, double> trace_at_zero(const Grid1D& grid, const std::vector<cplx>& coeffs);

// Half-line field  U + W_bdr(h - traces of U)  on the x >= 0 nodes, re-extended to
// x < 0 by the order-4 blend.  `h` may be null (homogeneous boundary data).
FieldSeries boundary_correct(const Grid1D& grid, const TimeGrid& time, const CoeffSeries& whole_line,
                             const BoundaryOperator& op, const BoundaryData* h, Diagnostics* diag);

// Coefficients of the extension of the x >= 0 part of `values`.
std::vector<cplx> extended_coeffs(const Grid1D& grid, std::span<const double> full_values, Extension rule);

}  // namespace ksq::detail
