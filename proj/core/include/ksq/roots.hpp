#pragma once

#include <array>
#include <span>
#include <vector>

#include "ksq/grid.hpp"

namespace ksq {

// The two roots of  lambda^4 + delta lambda^3 + tau = 0  with negative real part.
struct RootPair {
  cplx lambda1;
  cplx lambda2;
  cplx tau;
  double delta = 0.0;
  std::array<double, 2> residuals{};
};

// All four roots (companion eigenvalues polished by Newton), unordered.
std::array<cplx, 4> quartic_roots(cplx tau, double delta);

// Closed form for delta = 0: the two fourth roots of -tau in the left half plane,
// labeled as on the contour tau = i 8 rho^4.
std::array<cplx, 2> zero_delta_roots(cplx tau);

// Requires Re tau >= 0 and tau != 0.  lambda1 is the continuation in delta of the
// delta = 0 root  |tau|^{1/4} exp(i(arg(-tau)/4 + pi/2)).
RootPair characteristic_roots(cplx tau, double delta);

// Roots along tau = i 8 rho^4; labels are continued from node to node (with substeps as
// needed), RefinementError when that fails.
std::vector<RootPair> root_curve(std::span<const double> rho_nodes, double delta);

// Newton refinement of a root pair at a nearby (tau, delta), keeping labels.
// Returns false if either root fails to converge or leaves the left half plane.
bool track_roots(RootPair& pair, cplx tau, double delta);

}  // namespace ksq
