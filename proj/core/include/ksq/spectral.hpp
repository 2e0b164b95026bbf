#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ksq/grid.hpp"

namespace ksq {

// Samples on a Grid1D together with continuous-transform coefficients
//   c_k = dx * sum_j u_j exp(-i xi_k x_j),   u_j = (1/L) sum_k c_k exp(i xi_k x_j).
// Either representation may be stale; the flags say which ones are current.
class SpectralField {
 public:
  explicit SpectralField(Grid1D grid);

  static SpectralField from_values(Grid1D grid, std::vector<cplx> values);
  static SpectralField from_real(Grid1D grid, std::span<const double> values);
  static SpectralField from_coeffs(Grid1D grid, std::vector<cplx> coeffs);

  const Grid1D& grid() const noexcept { return grid_; }
  bool values_current() const noexcept { return values_ok_; }
  bool coeffs_current() const noexcept { return coeffs_ok_; }

  // Throw DomainError if the requested representation is stale.
  const std::vector<cplx>& values() const;
  const std::vector<cplx>& coeffs() const;

  // Bring a stale representation up to date.
  SpectralField& sync();

  // Mutable access invalidates the other representation.
  std::vector<cplx>& edit_values();
  std::vector<cplx>& edit_coeffs();

  std::vector<double> real_values() const;
  double max_imag() const;

 private:
  Grid1D grid_;
  std::vector<cplx> values_;
  std::vector<cplx> coeffs_;
  bool values_ok_ = true;
  bool coeffs_ok_ = true;
};

SpectralField forward_transform(SpectralField f);
SpectralField inverse_transform(SpectralField f);

// In-place DFT helpers on raw arrays in the coefficient convention above.
void values_to_coeffs(const Grid1D& grid, std::span<const cplx> values, std::span<cplx> coeffs);
void coeffs_to_values(const Grid1D& grid, std::span<const cplx> coeffs, std::span<cplx> values);

// Symbol of -(d^4 + delta d^3) in Fourier space: i delta xi^3 - xi^4, odd part zeroed at Nyquist.
cplx linear_symbol(const Grid1D& grid, std::size_t k, double delta);

// Spectral derivative of given order; Nyquist slot zeroed for odd orders.
SpectralField derivative(const SpectralField& f, int order);

SpectralField propagate_whole_line(const SpectralField& phi, double t, const ModelParams& params);

// Whole-line extensions of data given on x >= 0 (centered grids only).
// blendK reflects with weights matching K one-sided derivatives at x = 0.
enum class Extension { automatic, zero, even, blend2, blend4, blend6, blend8 };

Extension resolve_extension(Extension requested, double s);
// Returns full-grid samples whose x >= 0 part is `values` and x < 0 part is filled by the rule.
std::vector<double> extend_half_line(const Grid1D& grid, std::span<const double> values, Extension rule);
std::vector<double> half_line_part(const Grid1D& grid, std::span<const double> full);

// Stations at which time traces are sampled: geometric in x, always including x = 0.
struct TraceRecord {
  std::vector<std::size_t> station_index;  // offsets from the x = 0 node
  std::vector<double> station_x;
  std::vector<std::vector<double>> u;   // [station][time]
  std::vector<std::vector<double>> ux;  // [station][time]
};

// Field samples at every node of a TimeGrid.
struct FieldSeries {
  Grid1D grid;
  TimeGrid time;
  std::vector<SpectralField> snapshots;
  std::optional<TraceRecord> traces;

  FieldSeries(Grid1D g, TimeGrid tg);
  static FieldSeries zeros(Grid1D g, TimeGrid tg);
  void check_shape() const;
};

// Exponential-integrator weights for one step with a piecewise-linear source:
//   p_{j+1} = e p_j + a f_j + b f_{j+1}.
struct EtdWeights {
  cplx e, a, b;
};
EtdWeights etd_weights(cplx symbol, double dt);

class BoundaryOperator;

enum class Propagator { whole_line, half_line };

// Forced problem p_t + p_xxxx + delta p_xxx = f, p(0) = 0.  The half-line version
// additionally removes the boundary traces through `op` (required in that case).
FieldSeries duhamel(const FieldSeries& f, const ModelParams& params, Propagator kind,
                    const BoundaryOperator* op = nullptr, Extension rule = Extension::automatic);

// Half-line solution with zero boundary data; internal time lattice of `steps` steps.
SpectralField propagate_half_line(const SpectralField& phi, double t, const ModelParams& params,
                                  const BoundaryOperator& op, Extension rule = Extension::automatic,
                                  std::size_t steps = 128);

FieldSeries propagate_half_line_series(const SpectralField& phi, const TimeGrid& time,
                                       const ModelParams& params, const BoundaryOperator& op,
                                       Extension rule = Extension::automatic);

}  // namespace ksq
