#include <algorithm>
#include <cmath>

#include "ksq/boundary.hpp"
#include "ksq/spectral.hpp"
#include "linear_ops.hpp"

namespace ksq {

namespace detail {

CoeffSeries whole_line_march(const Grid1D& grid, const TimeGrid& time, double delta, const std::vector<cplx>* init,
                             const CoeffSeries* source) {
  const std::size_t n = grid.size(), nt = time.size();
  if (source && source->size() != nt) throw ShapeError("source does not cover the time grid");
  std::vector<EtdWeights> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = etd_weights(linear_symbol(grid, k, delta), time.dt());
  CoeffSeries out(nt, std::vector<cplx>(n, cplx{}));
  if (init) out[0] = *init;
  for (std::size_t j = 0; j + 1 < nt; ++j) {
    const auto& cur = out[j];
    auto& next = out[j + 1];
    if (source) {
      const auto& f0 = (*source)[j];
      const auto& f1 = (*source)[j + 1];
      for (std::size_t k = 0; k < n; ++k) next[k] = w[k].e * cur[k] + w[k].a * f0[k] + w[k].b * f1[k];
    } else {
      for (std::size_t k = 0; k < n; ++k) next[k] = w[k].e * cur[k];
    }
  }
  return out;
}

std::pair<double, double> trace_at_zero(const Grid1D& grid, const std::vector<cplx>& coeffs) {
  cplx u = 0.0, ux = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    u += coeffs[k];
    if (!grid.is_nyquist(k)) ux += cplx(0.0, grid.xi(k)) * coeffs[k];
  }
  // Evaluating the trigonometric interpolant at the node x = 0 (phase exp(i xi x) = 1).
  const double inv_l = 1.0 / grid.length();
  return {u.real() * inv_l, ux.real() * inv_l};
}

std::vector<cplx> extended_coeffs(const Grid1D& grid, std::span<const double> full_values, Extension rule) {
  const auto ext = extend_half_line(grid, half_line_part(grid, full_values), rule);
  std::vector<cplx> v(ext.begin(), ext.end()), c(grid.size());
  values_to_coeffs(grid, v, c);
  return c;
}

FieldSeries boundary_correct(const Grid1D& grid, const TimeGrid& time, const CoeffSeries& whole_line,
                             const BoundaryOperator& op, const BoundaryData* h, Diagnostics* diag) {
  const std::size_t n = grid.size(), nt = time.size();
  const std::size_t c = grid.zero_index(), half = n - c;
  if (h && h->grid != time) throw ShapeError("boundary data grid differs from solution time grid");
  BoundaryData corr = BoundaryData::zeros(time);
  std::vector<std::vector<double>> vals(nt, std::vector<double>(n));
  std::vector<cplx> tmp(n);
  for (std::size_t j = 0; j < nt; ++j) {
    coeffs_to_values(grid, whole_line[j], tmp);
    for (std::size_t i = 0; i < n; ++i) vals[j][i] = tmp[i].real();
    const auto [u0, ux0] = trace_at_zero(grid, whole_line[j]);
    corr.h1[j] = (h ? h->h1[j] : 0.0) - u0;
    corr.h2[j] = (h ? h->h2[j] : 0.0) - ux0;
  }
  // Truncation is judged against the field being corrected as well as the data.
  double field = 0.0;
  for (const auto& row : vals)
    for (std::size_t i = c; i < n; ++i) field = std::max(field, std::abs(row[i]));
  auto lat = op.lattice(corr, grid.dx(), half, false, diag, field);
  // The boundary solution starts from zero; use the exact value rather than the inversion's.
  std::fill(lat.v[0].begin(), lat.v[0].end(), 0.0);
  FieldSeries out(grid, time);
  out.snapshots.reserve(nt);
  // x < 0 keeps the whole-line field, plus the reflected correction: the result is as
  // smooth across x = 0 as the correction's extension.
  std::vector<double> full(n);
  for (std::size_t j = 0; j < nt; ++j) {
    const auto ext = extend_half_line(grid, lat.v[j], Extension::blend4);
    for (std::size_t i = 0; i < n; ++i) full[i] = vals[j][i] + ext[i];
    auto field = SpectralField::from_real(grid, full);
    field.sync();
    out.snapshots.push_back(std::move(field));
  }
  return out;
}

}  // namespace detail

FieldSeries duhamel(const FieldSeries& f, const ModelParams& params, Propagator kind, const BoundaryOperator* op,
                    Extension rule) {
  f.check_shape();
  const Grid1D& grid = f.grid;
  detail::CoeffSeries src(f.time.size());
  for (std::size_t j = 0; j < src.size(); ++j) {
    SpectralField s = f.snapshots[j];
    if (kind == Propagator::half_line) {
      const auto r = resolve_extension(rule, std::max(params.s, 0.0));
      src[j] = detail::extended_coeffs(grid, s.real_values(), r);
    } else {
      s.sync();
      src[j] = s.coeffs();
    }
  }
  auto p = detail::whole_line_march(grid, f.time, params.delta, nullptr, &src);
  if (kind == Propagator::whole_line) {
    FieldSeries out(grid, f.time);
    for (auto& c : p) {
      auto field = SpectralField::from_coeffs(grid, std::move(c));
      field.sync();
      out.snapshots.push_back(std::move(field));
    }
    return out;
  }
  if (!op) throw ConfigError("half-line Duhamel integral needs a boundary operator");
  return detail::boundary_correct(grid, f.time, p, *op, nullptr, nullptr);
}

FieldSeries propagate_half_line_series(const SpectralField& phi, const TimeGrid& time, const ModelParams& params,
                                       const BoundaryOperator& op, Extension rule) {
  const Grid1D& grid = phi.grid();
  const auto r = resolve_extension(rule, params.s);
  SpectralField p = phi;
  p.sync();
  const auto init = detail::extended_coeffs(grid, p.real_values(), r);
  auto u = detail::whole_line_march(grid, time, params.delta, &init, nullptr);
  return detail::boundary_correct(grid, time, u, op, nullptr, nullptr);
}

SpectralField propagate_half_line(const SpectralField& phi, double t, const ModelParams& params,
                                  const BoundaryOperator& op, Extension rule, std::size_t steps) {
  if (!(t >= 0.0)) throw DomainError("propagation time must be nonnegative");
  if (t == 0.0) {
    SpectralField p = phi;
    p.sync();
    const auto r = resolve_extension(rule, params.s);
    return SpectralField::from_real(p.grid(), extend_half_line(p.grid(), half_line_part(p.grid(), p.real_values()), r))
        .sync();
  }
  auto series = propagate_half_line_series(phi, TimeGrid(t, steps), params, op, rule);
  return series.snapshots.back();
}

}  // namespace ksq
