#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ksq/boundary.hpp"
#include "ksq/errors.hpp"
#include "ksq/sobolev.hpp"
#include "ksq/spectral.hpp"

namespace ksq {

// Method-of-lines reference solver on [0, L]: second-order central differences,
// BDF2 for the linear part (implicit, banded), second-order extrapolation for uu_x.
struct FDConfig {
  double length = 40.0;
  std::size_t nx = 2048;  // number of intervals
  double dt = 1e-3;
  std::string scheme = "sbdf2";
  bool include_uxx = true;
  bool include_nonlinear = true;
  std::size_t startup_substeps = 16;  // backward-Euler substeps for the first step

  void validate() const;
};

// Samples on x_i = i dx (i = 0..nx) at every node of `time`.
struct GridSolution {
  double dx = 0.0;
  TimeGrid time{1.0, 2};
  std::vector<std::vector<double>> u;  // [time][x]
  Diagnostics diag;
};

// The output time grid is h.grid; cfg.dt must divide its spacing.
GridSolution fd_solve(const std::function<double(double)>& phi, const BoundaryData& h, const ModelParams& params,
                      const FDConfig& cfg);

// Half-line part of a spectral solution as grid samples.
GridSolution to_grid_solution(const FieldSeries& u);

// Relative L^2 space-time difference on the coarser of the two lattices (cubic
// interpolation in x and t), against the larger of the two norms.
NormReport fd_compare(const GridSolution& a, const GridSolution& b);
NormReport fd_compare(const FieldSeries& spectral, const GridSolution& fd);

// Minimal banded LU (no pivoting; fails loudly on small pivots).
class BandedLU {
 public:
  BandedLU(std::size_t n, std::size_t lower, std::size_t upper);
  double& at(std::size_t i, std::size_t j);
  void factor();
  void solve(std::vector<double>& rhs) const;

 private:
  std::size_t n_, kl_, ku_, width_;
  std::vector<double> a_;
  bool factored_ = false;
};

}  // namespace ksq
