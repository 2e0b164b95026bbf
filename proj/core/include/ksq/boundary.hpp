#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "ksq/errors.hpp"
#include "ksq/grid.hpp"
#include "ksq/roots.hpp"
#include "ksq/spectral.hpp"

namespace ksq {

// Samples of u(0,t) = h1 and u_x(0,t) = h2 at the nodes of a TimeGrid.
struct BoundaryData {
  TimeGrid grid;
  std::vector<double> h1;
  std::vector<double> h2;

  static BoundaryData zeros(const TimeGrid& g);
  void check() const;
  bool is_zero() const;
};

// Laplace transforms of h1, h2 at tau = i mu (values at -i mu are the conjugates).
struct LaplaceSamples {
  std::vector<double> mu;
  std::vector<cplx> h1_hat;
  std::vector<cplx> h2_hat;
};

enum class LaplaceRule { linear, cubic };

// Exact transform of the piecewise-linear or local-cubic interpolant of the samples,
// with h taken as zero beyond T.
LaplaceSamples laplace_on_contour(const BoundaryData& h, std::span<const double> mu_nodes,
                                  LaplaceRule rule = LaplaceRule::cubic);

// Transform of one sampled signal at arbitrary complex Laplace variables.
std::vector<cplx> laplace_transform(const TimeGrid& grid, std::span<const double> samples,
                                    std::span<const cplx> s_nodes, LaplaceRule rule);

enum class QuadratureScheme {
  // Trapezoid rule on the shifted Bromwich line Re tau = r, evaluated on time
  // lattices by folding the sum onto an FFT.
  shifted_trapezoid,
  // Gauss-Legendre panels on the contour tau = i 8 rho^4.
  rho_panels,
};

struct QuadratureConfig {
  QuadratureScheme scheme = QuadratureScheme::shifted_trapezoid;
  double tol = 1e-12;
  // Tail estimate (relative to max |h|) above which an accuracy warning is issued.
  double warn_tol = 1e-4;

  // shifted_trapezoid
  int period_factor = 8;  // period of the discrete inversion, in units of T
  double damping = 23.0;  // r * period
  int folds = 8;          // number of aliases of the sampling band kept

  // rho_panels
  int panels = 12;         // geometrically graded panels near rho = 0
  double rho_max = 0.0;    // 0 selects it from the decay of |h~| rho^3
  double rho_cap = 12.0;   // upper limit for the automatic choice
  std::size_t max_nodes = 4'000'000;
  LaplaceRule laplace = LaplaceRule::cubic;

  void validate() const;
};

// Values of the boundary solution on the lattice x_i = i dx (i < nx) times t_j.
struct BoundaryLattice {
  double dx = 0.0;
  std::vector<std::vector<double>> v;   // [time][x]
  std::vector<std::vector<double>> vx;  // empty unless requested
};

// The boundary integral operator: zero initial data, boundary values (h1, h2).
// Node sets and roots are cached per time grid; instances are thread-safe.
class BoundaryOperator {
 public:
  explicit BoundaryOperator(double delta, QuadratureConfig quad = {});

  double delta() const noexcept { return delta_; }
  const QuadratureConfig& quadrature() const noexcept { return quad_; }

  // Pointwise values at arbitrary (x >= 0, t in [0,T]); matrix indexed [x][t].
  std::vector<std::vector<double>> eval(const BoundaryData& h, std::span<const double> x_nodes,
                                        std::span<const double> t_nodes, Diagnostics* diag = nullptr,
                                        bool derivative = false) const;

  // Values at every node of h.grid on a uniform x lattice starting at 0.  Truncation
  // warnings are relative to max(max|h|, error_scale).
  BoundaryLattice lattice(const BoundaryData& h, double dx, std::size_t nx, bool with_derivative = false,
                          Diagnostics* diag = nullptr, double error_scale = 0.0) const;

  struct Plan;

 private:
  std::shared_ptr<const Plan> plan_for(const BoundaryData& h, std::span<const double> t_nodes,
                                       Diagnostics* diag) const;

  double delta_;
  QuadratureConfig quad_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<double, std::size_t>, std::shared_ptr<const Plan>> cache_;
};

std::vector<std::vector<double>> wbdr_eval(const BoundaryData& h, std::span<const double> x_nodes,
                                           std::span<const double> t_nodes, const ModelParams& params,
                                           const QuadratureConfig& quad, Diagnostics* diag = nullptr);

// Boundary solution at time t on the x >= 0 part of a centered grid; the x < 0 part
// is filled by the order-4 reflection blend.
SpectralField wbdr_field(const BoundaryData& h, const Grid1D& grid, double t, const ModelParams& params,
                         const QuadratureConfig& quad, Diagnostics* diag = nullptr);

}  // namespace ksq
