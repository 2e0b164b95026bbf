#include "ksq/sobolev.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "fft.hpp"
#include "ksq/errors.hpp"

namespace ksq {

NormReport NormReport::make(std::string id, double lhs, double rhs, nlohmann::json data) {
  if (!(rhs > 0.0)) throw DomainError("norm report needs a positive right-hand side");
  return {std::move(id), lhs, rhs, lhs / rhs, std::move(data)};
}

void to_json(nlohmann::json& j, const NormReport& r) {
  j = nlohmann::json{{"estimate", r.estimate}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}, {"data", r.data}};
}

void from_json(const nlohmann::json& j, NormReport& r) {
  j.at("estimate").get_to(r.estimate);
  j.at("lhs").get_to(r.lhs);
  j.at("rhs").get_to(r.rhs);
  j.at("ratio").get_to(r.ratio);
  r.data = j.value("data", nlohmann::json::object());
}

namespace {

double weighted_sum(const Grid1D& grid, const std::vector<cplx>& c, double s) {
  double acc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double xi = grid.xi(k);
    acc += std::pow(1.0 + xi * xi, s) * std::norm(c[k]);
  }
  return acc / grid.length();
}

// Least-norm extension: the samples on a band of x < 0 next to the boundary are free,
// everything else is fixed (x >= 0 data, zeros beyond the band).  The weighted DFT of the
// band's unit vectors is factored once per (grid, s).
struct QuotientSolver {
  std::size_t first = 0;  // band covers indices [first, zero_index)
  Eigen::MatrixXd m;      // rows: real and imaginary parts of sqrt(w_k / L) c_k
  Eigen::HouseholderQR<Eigen::MatrixXd> qr;
  std::vector<double> sqrt_w;
};

const QuotientSolver& quotient_solver(const Grid1D& grid, double s) {
  static std::mutex mu;
  static std::map<std::tuple<double, std::size_t, double, double>, std::unique_ptr<QuotientSolver>> cache;
  std::lock_guard lock(mu);
  const auto key = std::make_tuple(grid.length(), grid.size(), grid.origin(), s);
  if (auto it = cache.find(key); it != cache.end()) return *it->second;

  auto q = std::make_unique<QuotientSolver>();
  const std::size_t n = grid.size(), c = grid.zero_index();
  const double band = std::min(grid.length() / 4.0, 8.0);
  const auto width = std::min<std::size_t>({c, 512, static_cast<std::size_t>(std::ceil(band / grid.dx()))});
  q->first = c - width;
  q->sqrt_w.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    q->sqrt_w[k] = std::sqrt(std::pow(1.0 + grid.xi(k) * grid.xi(k), s) / grid.length());
  q->m.resize(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(width));
  std::vector<cplx> unit(n), col(n);
  for (std::size_t b = 0; b < width; ++b) {
    std::fill(unit.begin(), unit.end(), cplx{});
    unit[q->first + b] = 1.0;
    values_to_coeffs(grid, unit, col);
    for (std::size_t k = 0; k < n; ++k) {
      q->m(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(b)) = q->sqrt_w[k] * col[k].real();
      q->m(static_cast<Eigen::Index>(2 * k + 1), static_cast<Eigen::Index>(b)) = q->sqrt_w[k] * col[k].imag();
    }
  }
  q->qr.compute(q->m);
  auto& ref = *q;
  cache.emplace(key, std::move(q));
  return ref;
}

}  // namespace

double hs_norm_line(const SpectralField& f, double s) { return std::sqrt(weighted_sum(f.grid(), f.coeffs(), s)); }

double hs_norm_halfline(const Grid1D& grid, std::span<const double> full_values, double s) {
  if (s < -2.0) throw DomainError("half-line norms are supported for s >= -2");
  const auto half = half_line_part(grid, full_values);
  if (s == 0.0) {
    double acc = 0.5 * half[0] * half[0];
    for (std::size_t i = 1; i < half.size(); ++i) acc += half[i] * half[i];
    return std::sqrt(acc * grid.dx());
  }
  std::vector<double> full(grid.size(), 0.0);
  std::copy(half.begin(), half.end(), full.begin() + static_cast<std::ptrdiff_t>(grid.zero_index()));
  std::vector<cplx> v(full.begin(), full.end()), a(grid.size());
  values_to_coeffs(grid, v, a);
  if (s < 0.0) return std::sqrt(weighted_sum(grid, a, s));

  const auto& q = quotient_solver(grid, s);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(2 * a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) {
    rhs(static_cast<Eigen::Index>(2 * k)) = q.sqrt_w[k] * a[k].real();
    rhs(static_cast<Eigen::Index>(2 * k + 1)) = q.sqrt_w[k] * a[k].imag();
  }
  const Eigen::VectorXd fill = q.qr.solve(rhs);
  const double best = (rhs - q.m * fill).norm();
  // Guard against a poorly conditioned solve: never report more than the zero extension.
  return std::min(best, rhs.norm());
}

double hs_norm_halfline(const SpectralField& f, double s) {
  return hs_norm_halfline(f.grid(), f.real_values(), s);
}

double hr_norm_time(std::span<const double> g, double horizon, double r) {
  if (r < -1.0 || r > 2.0) throw DomainError("time Sobolev exponent must lie in [-1, 2]");
  if (g.size() < 2) throw ShapeError("time norm needs at least two samples");
  const std::size_t m = g.size() - 1;
  const std::size_t n = 4 * m;
  const double dt = horizon / static_cast<double>(m);
  std::vector<cplx> buf(n, cplx{});
  for (std::size_t j = 0; j <= m && j < n; ++j) buf[j] = g[j];
  detail::fft_inplace(buf.data(), n, -1);
  const double period = dt * static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    const double mu = 2.0 * std::numbers::pi * kk / period;
    acc += std::pow(1.0 + mu * mu, r) * std::norm(buf[k]);
  }
  return std::sqrt(acc * dt * dt / period);
}

double boundary_pair_norm(const BoundaryData& h, double s) {
  h.check();
  const double T = h.grid.horizon();
  return hr_norm_time(h.h1, T, s / 4.0 + 3.0 / 8.0) + hr_norm_time(h.h2, T, s / 4.0 + 1.0 / 8.0);
}

TraceRecord record_traces(const FieldSeries& u, std::size_t stations) {
  u.check_shape();
  const Grid1D& grid = u.grid;
  const std::size_t c = grid.zero_index();
  const std::size_t half = grid.size() - c;
  if (stations < 2) throw DomainError("need at least two trace stations");
  TraceRecord rec;
  rec.station_index.push_back(0);
  const double top = std::log(static_cast<double>(half / 2));
  for (std::size_t k = 1; k < stations; ++k) {
    auto idx = static_cast<std::size_t>(std::lround(std::exp(top * static_cast<double>(k - 1) / double(stations - 2))));
    idx = std::max(idx, rec.station_index.back() + 1);
    rec.station_index.push_back(std::min(idx, half - 1));
  }
  for (std::size_t idx : rec.station_index) rec.station_x.push_back(grid.dx() * static_cast<double>(idx));
  const std::size_t nt = u.time.size();
  rec.u.assign(stations, std::vector<double>(nt));
  rec.ux.assign(stations, std::vector<double>(nt));
  for (std::size_t j = 0; j < nt; ++j) {
    SpectralField f = u.snapshots[j];
    f.sync();
    const auto d = derivative(f, 1);
    const auto& v = f.values();
    const auto& dv = d.values();
    for (std::size_t k = 0; k < stations; ++k) {
      rec.u[k][j] = v[c + rec.station_index[k]].real();
      rec.ux[k][j] = dv[c + rec.station_index[k]].real();
    }
  }
  return rec;
}

namespace {

std::vector<double> trapezoid_weights(const TimeGrid& t) {
  std::vector<double> w(t.size(), t.dt());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

}  // namespace

double sup_time_norm(const FieldSeries& f, double s) {
  double m = 0.0;
  for (const auto& snap : f.snapshots) m = std::max(m, hs_norm_halfline(snap, s));
  return m;
}

double l2_time_norm(const FieldSeries& f, double s) {
  const auto w = trapezoid_weights(f.time);
  double acc = 0.0;
  for (std::size_t j = 0; j < f.snapshots.size(); ++j) {
    const double v = hs_norm_halfline(f.snapshots[j], s);
    acc += w[j] * v * v;
  }
  return std::sqrt(acc);
}

double l1_time_norm(const FieldSeries& f, double s, double weight_exponent) {
  f.check_shape();
  const auto w = trapezoid_weights(f.time);
  double acc = 0.0;
  for (std::size_t j = 0; j < f.snapshots.size(); ++j) {
    const double t = f.time.t(j);
    const double tw = weight_exponent == 0.0 ? 1.0 : std::pow(t, weight_exponent);
    if (tw == 0.0) continue;
    acc += w[j] * tw * hs_norm_halfline(f.snapshots[j], s);
  }
  return acc;
}

SolutionNormParts solution_norm_parts(const FieldSeries& u, double s) {
  u.check_shape();
  if (!u.traces) throw IncompleteRecordError("solution norm needs recorded time traces");
  SolutionNormParts p;
  p.sup_hs = sup_time_norm(u, s);
  p.l2_hs2 = l2_time_norm(u, s + 2.0);
  const double T = u.time.horizon();
  for (const auto& tr : u.traces->u) p.trace_u = std::max(p.trace_u, hr_norm_time(tr, T, s / 4.0 + 3.0 / 8.0));
  for (const auto& tr : u.traces->ux) p.trace_ux = std::max(p.trace_ux, hr_norm_time(tr, T, s / 4.0 + 1.0 / 8.0));
  return p;
}

double solution_norm(const FieldSeries& u, double s) { return solution_norm_parts(u, s).total(); }

WeightedNormParts weighted_solution_norm_parts(const FieldSeries& u, double s, double eps) {
  if (!(s < 0.0 && s > -2.0) || !(eps > 0.0))
    throw ConfigError("weighted norm needs -2 < s < 0 and eps > 0");
  u.check_shape();
  const double a = std::abs(s) / 4.0 + eps;
  WeightedNormParts p;
  p.sup_hs = sup_time_norm(u, s);
  p.l2_hs2 = l2_time_norm(u, s + 2.0);
  const auto w = trapezoid_weights(u.time);
  double acc = 0.0;
  for (std::size_t j = 0; j < u.snapshots.size(); ++j) {
    const double tw = std::pow(u.time.t(j), a);
    if (tw == 0.0) continue;
    p.weighted_sup_l2 = std::max(p.weighted_sup_l2, tw * hs_norm_halfline(u.snapshots[j], 0.0));
    const double h2 = hs_norm_halfline(u.snapshots[j], 2.0);
    acc += w[j] * tw * tw * h2 * h2;
  }
  p.weighted_l2_h2 = std::sqrt(acc);
  return p;
}

double weighted_solution_norm(const FieldSeries& u, double s, double eps) {
  return weighted_solution_norm_parts(u, s, eps).total();
}

double data_norm(const SpectralField& phi, const BoundaryData& h, double s) {
  return hs_norm_halfline(phi, s) + boundary_pair_norm(h, s);
}

double edge_mass_fraction(const SpectralField& f) {
  const auto& v = f.values();
  const std::size_t n = v.size(), band = std::max<std::size_t>(1, n / 20);
  double total = 0.0, edge = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = std::norm(v[j]);
    total += a;
    if (j < band || j >= n - band) edge += a;
  }
  return total > 0.0 ? std::sqrt(edge / total) : 0.0;
}

}  // namespace ksq
