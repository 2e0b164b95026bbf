#include "ksq/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "ksq/errors.hpp"

namespace ksq {

SpectralField::SpectralField(Grid1D grid)
    : grid_(grid), values_(grid.size(), cplx{}), coeffs_(grid.size(), cplx{}) {}

SpectralField SpectralField::from_values(Grid1D grid, std::vector<cplx> values) {
  if (values.size() != grid.size()) throw ShapeError("value count does not match grid");
  SpectralField f(grid);
  f.values_ = std::move(values);
  f.coeffs_ok_ = false;
  return f;
}

SpectralField SpectralField::from_real(Grid1D grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw ShapeError("value count does not match grid");
  std::vector<cplx> v(values.begin(), values.end());
  return from_values(grid, std::move(v));
}

SpectralField SpectralField::from_coeffs(Grid1D grid, std::vector<cplx> coeffs) {
  if (coeffs.size() != grid.size()) throw ShapeError("coefficient count does not match grid");
  SpectralField f(grid);
  f.coeffs_ = std::move(coeffs);
  f.values_ok_ = false;
  return f;
}

const std::vector<cplx>& SpectralField::values() const {
  if (!values_ok_) throw DomainError("field values are stale; call sync()");
  return values_;
}

const std::vector<cplx>& SpectralField::coeffs() const {
  if (!coeffs_ok_) throw DomainError("field coefficients are stale; call sync()");
  return coeffs_;
}

SpectralField& SpectralField::sync() {
  if (!coeffs_ok_ && values_ok_) {
    values_to_coeffs(grid_, values_, coeffs_);
    coeffs_ok_ = true;
  } else if (!values_ok_ && coeffs_ok_) {
    coeffs_to_values(grid_, coeffs_, values_);
    values_ok_ = true;
  }
  return *this;
}

std::vector<cplx>& SpectralField::edit_values() {
  sync();
  coeffs_ok_ = false;
  return values_;
}

std::vector<cplx>& SpectralField::edit_coeffs() {
  sync();
  values_ok_ = false;
  return coeffs_;
}

std::vector<double> SpectralField::real_values() const {
  const auto& v = values();
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](cplx z) { return z.real(); });
  return out;
}

double SpectralField::max_imag() const {
  double m = 0.0;
  for (cplx z : values()) m = std::max(m, std::abs(z.imag()));
  return m;
}

void values_to_coeffs(const Grid1D& grid, std::span<const cplx> values, std::span<cplx> coeffs) {
  const std::size_t n = grid.size();
  if (values.size() != n || coeffs.size() != n) throw ShapeError("transform size mismatch");
  if (values.data() != coeffs.data()) std::copy(values.begin(), values.end(), coeffs.begin());
  detail::fft_inplace(coeffs.data(), n, -1);
  const double dx = grid.dx();
  const double x0 = grid.origin();
  for (std::size_t k = 0; k < n; ++k) coeffs[k] *= dx * std::polar(1.0, -grid.xi(k) * x0);
}

void coeffs_to_values(const Grid1D& grid, std::span<const cplx> coeffs, std::span<cplx> values) {
  const std::size_t n = grid.size();
  if (values.size() != n || coeffs.size() != n) throw ShapeError("transform size mismatch");
  const double x0 = grid.origin();
  const double inv_l = 1.0 / grid.length();
  for (std::size_t k = 0; k < n; ++k) values[k] = coeffs[k] * std::polar(inv_l, grid.xi(k) * x0);
  detail::fft_inplace(values.data(), n, +1);
}

SpectralField forward_transform(SpectralField f) {
  if (!f.values_current()) throw DomainError("forward transform needs current values");
  f.sync();
  return f;
}

SpectralField inverse_transform(SpectralField f) {
  if (!f.coeffs_current()) throw DomainError("inverse transform needs current coefficients");
  f.sync();
  return f;
}

cplx linear_symbol(const Grid1D& grid, std::size_t k, double delta) {
  const double xi = grid.xi(k);
  const double xi2 = xi * xi;
  const double odd = grid.is_nyquist(k) ? 0.0 : delta * xi2 * xi;
  return {-xi2 * xi2, odd};
}

SpectralField derivative(const SpectralField& f, int order) {
  if (order < 0) throw DomainError("derivative order must be nonnegative");
  SpectralField g = f;
  g.sync();
  auto& c = g.edit_coeffs();
  const Grid1D& grid = g.grid();
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (order % 2 == 1 && grid.is_nyquist(k)) {
      c[k] = 0.0;
      continue;
    }
    c[k] *= std::pow(cplx(0.0, grid.xi(k)), order);
  }
  g.sync();
  return g;
}

SpectralField propagate_whole_line(const SpectralField& phi, double t, const ModelParams& params) {
  if (!(t >= 0.0)) throw DomainError("propagation time must be nonnegative");
  SpectralField out = phi;
  out.sync();
  auto& c = out.edit_coeffs();
  const Grid1D& grid = out.grid();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::exp(linear_symbol(grid, k, params.delta) * t);
  out.sync();
  return out;
}

namespace {

std::span<const double> blend_weights(Extension rule) {
  static const std::array<double, 1> even{1.0};
  static const std::array<double, 2> b2{3.0, -2.0};
  static const std::array<double, 4> b4{10.0, -20.0, 15.0, -4.0};
  static const std::array<double, 6> b6{21.0, -70.0, 105.0, -84.0, 35.0, -6.0};
  static const std::array<double, 8> b8{36.0, -168.0, 378.0, -504.0, 420.0, -216.0, 63.0, -8.0};
  switch (rule) {
    case Extension::even: return even;
    case Extension::blend2: return b2;
    case Extension::blend4: return b4;
    case Extension::blend6: return b6;
    case Extension::blend8: return b8;
    default: return {};
  }
}

// Largest s for which the extension of a smooth function stays in H^s.
double regularity_limit(Extension rule) {
  switch (rule) {
    case Extension::zero: return 0.5;
    case Extension::even: return 1.5;
    case Extension::blend2: return 2.5;
    case Extension::blend4: return 4.5;
    case Extension::blend6: return 6.5;
    case Extension::blend8: return 8.5;
    default: return 0.0;
  }
}

}  // namespace

Extension resolve_extension(Extension requested, double s) {
  Extension rule = requested;
  if (rule == Extension::automatic) rule = s < 0.0 ? Extension::zero : Extension::blend4;
  if (s >= regularity_limit(rule))
    throw ConfigError("extension rule does not preserve H^s for s=" + std::to_string(s));
  return rule;
}

namespace {

// C-infinity step: 1 for r <= a, 0 for r >= b.
double cutoff(double r, double a, double b) {
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  const double u = (r - a) / (b - a);
  const auto g = [](double v) { return v > 0.0 ? std::exp(-1.0 / v) : 0.0; };
  return g(1.0 - u) / (g(1.0 - u) + g(u));
}

}  // namespace

std::vector<double> extend_half_line(const Grid1D& grid, std::span<const double> values, Extension rule) {
  const std::size_t n = grid.size();
  const std::size_t c = grid.zero_index();
  const std::size_t half = n - c;
  if (values.size() != half) throw ShapeError("half-line sample count does not match grid");
  if (rule == Extension::automatic) rule = Extension::blend4;
  std::vector<double> full(n, 0.0);
  std::copy(values.begin(), values.end(), full.begin() + static_cast<std::ptrdiff_t>(c));
  const auto w = blend_weights(rule);
  if (w.empty()) return full;
  // Only the part of f within a short, resolved distance of x = 0 is reflected:
  // g = chi f with chi = 1 on [0, 8 dx] and 0 beyond 40 dx (at most L/8).  The rest of f
  // vanishes near 0, so extending it by zero is smooth.  This keeps data far from the
  // boundary from being copied (and compressed) onto x < 0.
  const double b = std::min(40.0 * grid.dx(), grid.length() / 8.0), a = b / 5.0;
  std::vector<double> g(half);
  for (std::size_t i = 0; i < half; ++i) g[i] = cutoff(grid.dx() * static_cast<double>(i), a, b) * values[i];
  for (std::size_t j = 1; j <= c; ++j) {
    double acc = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::size_t idx = (i + 1) * j;
      if (idx < half && g[idx] != 0.0) {
        acc += w[i] * g[idx];
        any = true;
      }
    }
    if (!any && grid.dx() * static_cast<double>(j) > b) break;
    full[c - j] = acc;
  }
  return full;
}

std::vector<double> half_line_part(const Grid1D& grid, std::span<const double> full) {
  if (full.size() != grid.size()) throw ShapeError("sample count does not match grid");
  const std::size_t c = grid.zero_index();
  return {full.begin() + static_cast<std::ptrdiff_t>(c), full.end()};
}

FieldSeries::FieldSeries(Grid1D g, TimeGrid tg) : grid(g), time(tg) {}

FieldSeries FieldSeries::zeros(Grid1D g, TimeGrid tg) {
  FieldSeries s(g, tg);
  s.snapshots.assign(tg.size(), SpectralField(g));
  return s;
}

void FieldSeries::check_shape() const {
  if (snapshots.size() != time.size()) throw ShapeError("snapshot count does not match time grid");
  for (const auto& f : snapshots)
    if (f.grid() != grid) throw ShapeError("snapshot grid mismatch");
}

EtdWeights etd_weights(cplx symbol, double dt) {
  const cplx z = symbol * dt;
  const cplx e = std::exp(z);
  cplx phi1, phi2;
  if (std::abs(z) < 0.2) {
    // Taylor series; 12 terms reach round-off for |z| < 0.2.
    cplx term = 1.0;
    phi1 = 0.0;
    phi2 = 0.0;
    double f1 = 1.0, f2 = 2.0;  // (j+1)!, (j+2)!
    for (int j = 0; j < 12; ++j) {
      phi1 += term / f1;
      phi2 += term / f2;
      term *= z;
      f1 *= (j + 2);
      f2 *= (j + 3);
    }
  } else {
    phi1 = (e - 1.0) / z;
    phi2 = (e - 1.0 - z) / (z * z);
  }
  return {e, dt * (phi1 - phi2), dt * phi2};
}

}  // namespace ksq
