#include "ksq/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "ksq/data_families.hpp"
#include "linear_ops.hpp"

namespace ksq {

void SolverOptions::validate() const {
  quad.validate();
  if (!(tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (max_iterations < 1) throw ConfigError("solver.max_iterations must be positive");
  if (stations < 1) throw ConfigError("solver.stations must be positive");
  if (patch_length < 0.0) throw ConfigError("solver.patch_length must be nonnegative");
}

void to_json(nlohmann::json& j, const ConstantsCalibration& c) {
  j = {{"c1", c.c1}, {"c2", c.c2}, {"energy_c", c.energy_c}, {"samples", c.samples}, {"seed", c.seed},
       {"ratios", c.ratios}};
}

void from_json(const nlohmann::json& j, ConstantsCalibration& c) {
  c.c1 = j.at("c1").get<double>();
  c.c2 = j.at("c2").get<double>();
  c.energy_c = j.value("energy_c", 1.0);
  c.samples = j.value("samples", std::size_t{0});
  c.seed = j.value("seed", std::uint64_t{0});
  c.ratios = j.value("ratios", nlohmann::json::object());
}

namespace {

using detail::CoeffSeries;
// Source coefficients for time node j given the current iterate at that node.
using SourceFn = std::function<std::vector<cplx>(std::size_t j, const SpectralField& w)>;
using NormFn = std::function<double(const FieldSeries&)>;

double l2_half(const SpectralField& f) { return hs_norm_halfline(f, 0.0); }

std::vector<cplx> truncated(const Grid1D& grid, const std::vector<cplx>& c) {
  const double cut = (2.0 / 3.0) * std::numbers::pi / grid.dx();
  std::vector<cplx> out(c);
  for (std::size_t k = 0; k < out.size(); ++k)
    if (std::abs(grid.xi(k)) > cut || grid.is_nyquist(k)) out[k] = 0.0;
  return out;
}

// Dealiased coefficients of the product of two real fields.
std::vector<cplx> product_coeffs(const Grid1D& grid, const std::vector<cplx>& a, const std::vector<cplx>& b) {
  const std::size_t n = grid.size();
  std::vector<cplx> va(n), vb(n);
  coeffs_to_values(grid, truncated(grid, a), va);
  coeffs_to_values(grid, truncated(grid, b), vb);
  for (std::size_t i = 0; i < n; ++i) va[i] = va[i].real() * vb[i].real();
  values_to_coeffs(grid, va, vb);
  return truncated(grid, vb);
}

// Smooth window: 1 up to 3/4 of the half-line, 0 at its far end.
double sponge(const Grid1D& grid, double x) {
  const double b = 0.5 * grid.length(), a = 0.75 * b;
  if (x <= a) return 1.0;
  if (x >= b) return 0.0;
  const double u = (x - a) / (b - a);
  const auto g = [](double v) { return v > 0.0 ? std::exp(-1.0 / v) : 0.0; };
  return g(1.0 - u) / (g(1.0 - u) + g(u));
}

// -(g) with g given by coefficients, restricted to x >= 0 and re-extended smoothly.
// The far end is damped: solutions are assumed negligible there (see the edge-mass
// check), and undamped sources let seam-localized errors circulate between iterates.
std::vector<cplx> negated_source(const Grid1D& grid, const std::vector<cplx>& g) {
  std::vector<cplx> v(grid.size());
  coeffs_to_values(grid, g, v);
  std::vector<double> re(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) re[i] = -v[i].real() * (grid.x(i) > 0.0 ? sponge(grid, grid.x(i)) : 1.0);
  return detail::extended_coeffs(grid, re, Extension::blend4);
}

// -(w_xx + (w^2/2)_x)
std::vector<cplx> equation_source(const SpectralField& w, const SolverOptions& opts) {
  const Grid1D& grid = w.grid();
  const auto& c = w.coeffs();
  std::vector<cplx> g(c.size(), cplx{});
  if (opts.second_order)
    for (std::size_t k = 0; k < c.size(); ++k) g[k] -= grid.xi(k) * grid.xi(k) * c[k];
  if (opts.nonlinear) {
    const auto sq = product_coeffs(grid, c, c);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (!grid.is_nyquist(k)) g[k] += cplx(0.0, 0.5 * grid.xi(k)) * sq[k];
  }
  return negated_source(grid, g);
}

struct MapContext {
  Grid1D grid;
  TimeGrid time;
  double delta;
  const BoundaryOperator* op;
  const BoundaryData* h;
  std::vector<cplx> init;  // empty: zero initial data
  SourceFn source;         // empty: no source
};

FieldSeries apply_map(const MapContext& ctx, const FieldSeries* w, Diagnostics* diag) {
  CoeffSeries src;
  if (w && ctx.source) {
    src.resize(ctx.time.size());
    for (std::size_t j = 0; j < src.size(); ++j) src[j] = ctx.source(j, w->snapshots[j]);
  }
  const auto u = detail::whole_line_march(ctx.grid, ctx.time, ctx.delta, ctx.init.empty() ? nullptr : &ctx.init,
                                          src.empty() ? nullptr : &src);
  return detail::boundary_correct(ctx.grid, ctx.time, u, *ctx.op, ctx.h, diag);
}

FieldSeries difference(const FieldSeries& a, const FieldSeries& b) {
  FieldSeries out(a.grid, a.time);
  out.snapshots.reserve(a.snapshots.size());
  for (std::size_t j = 0; j < a.snapshots.size(); ++j) {
    const auto& va = a.snapshots[j].values();
    const auto& vb = b.snapshots[j].values();
    std::vector<cplx> v(va.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = va[i] - vb[i];
    out.snapshots.push_back(SpectralField::from_values(a.grid, std::move(v)).sync());
  }
  return out;
}

PicardState picard(const MapContext& ctx, double d, const NormFn& norm, const SolverOptions& opts) {
  PicardState st(FieldSeries::zeros(ctx.grid, ctx.time));
  st.d = d;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    // Only the latest map's warnings describe the returned iterate.
    st.diag = {};
    FieldSeries next = apply_map(ctx, it == 1 ? nullptr : &st.w, &st.diag);
    const double inc = it == 1 ? norm(next) : norm(difference(next, st.w));
    st.increment_history.push_back(inc);
    if (it > 1 && prev > 0.0) st.kappa_history.push_back(inc / prev);
    st.iterations = it;
    if (inc <= opts.tol * d) {
      st.norm = it == 1 ? 0.0 : st.norm_history.back();
      st.residual = st.norm > 0.0 ? inc / st.norm : inc;
      if (it == 1) st.w = std::move(next);
      st.kappa = st.kappa_history.empty() ? 0.0 : *std::max_element(st.kappa_history.begin(), st.kappa_history.end());
      if (st.kappa >= 1.0)
        throw DivergenceError("Picard increments did not contract (kappa=" + std::to_string(st.kappa) + ")",
                              st.increment_history);
      return st;
    }
    const double nrm = norm(next);
    st.norm_history.push_back(nrm);
    if (nrm > d * (1.0 + 1e-12)) st.within_ball = false;
    st.w = std::move(next);
    prev = inc;
    if (!std::isfinite(inc)) break;
  }
  throw DivergenceError("Picard iteration did not reach tol*d in " + std::to_string(opts.max_iterations) +
                            " iterations (last increment " + std::to_string(st.increment_history.back()) + ")",
                        st.increment_history);
}

std::vector<cplx> initial_coeffs(const SpectralField& phi) {
  SpectralField p = phi;
  p.sync();
  return detail::extended_coeffs(p.grid(), p.real_values(), Extension::blend4);
}

BoundaryData slice(const BoundaryData& h, std::size_t start, std::size_t steps) {
  BoundaryData out = BoundaryData::zeros(TimeGrid(h.grid.dt() * static_cast<double>(steps), steps));
  for (std::size_t j = 0; j <= steps; ++j) {
    out.h1[j] = h.h1[start + j];
    out.h2[j] = h.h2[start + j];
  }
  return out;
}

std::vector<double> trapezoid(const TimeGrid& t) {
  std::vector<double> w(t.size(), t.dt());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

FieldSeries boundary_solution(const Grid1D& grid, const BoundaryData& h, const BoundaryOperator& op,
                              Diagnostics* diag) {
  CoeffSeries zero(h.grid.size(), std::vector<cplx>(grid.size(), cplx{}));
  return detail::boundary_correct(grid, h.grid, zero, op, &h, diag);
}

double half_sq(const SpectralField& f) {
  const double v = l2_half(f);
  return v * v;
}

}  // namespace

FieldSeries linear_solution(const SpectralField& phi, const BoundaryData& h, const ModelParams& params,
                            const SolverOptions& opts, Diagnostics* diag) {
  opts.validate();
  h.check();
  const BoundaryOperator op(params.delta, opts.quad);
  MapContext ctx{phi.grid(), h.grid, params.delta, &op, &h, initial_coeffs(phi), {}};
  return apply_map(ctx, nullptr, diag);
}

double x_norm(const FieldSeries& u, double s, std::size_t stations) {
  FieldSeries c = u;
  c.traces = record_traces(c, stations);
  return solution_norm(c, s);
}

FieldSeries apply_fixed_point_map(const FieldSeries& w, const SpectralField& phi, const BoundaryData& h,
                                  const ModelParams& params, const SolverOptions& opts, Diagnostics* diag) {
  opts.validate();
  h.check();
  w.check_shape();
  if (w.time != h.grid) throw ShapeError("iterate and boundary data live on different time grids");
  if (!(w.grid == phi.grid())) throw ShapeError("iterate and initial data live on different grids");
  const BoundaryOperator op(params.delta, opts.quad);
  MapContext ctx{phi.grid(), h.grid, params.delta, &op, &h, initial_coeffs(phi),
                 [&opts](std::size_t, const SpectralField& f) { return equation_source(f, opts); }};
  return apply_map(ctx, &w, diag);
}

LocalStep pick_local_step(const SpectralField& phi, const BoundaryData& h, const ConstantsCalibration& calib) {
  if (!calib.valid()) throw ConfigError("constants are not calibrated; run calibrate_constants first");
  LocalStep out;
  out.d = 2.0 * calib.c1 * data_norm(phi, h, 0.0);
  const double first = 1.0 / (16.0 * calib.c2 * calib.c2);
  double second = std::numeric_limits<double>::infinity();
  if (out.d > 0.0) {
    // y = T^{1/4}:  y^2 + y = 1 / (4 c2 d)
    const double q = 1.0 / (4.0 * calib.c2 * out.d);
    const double y = 2.0 * q / (1.0 + std::sqrt(1.0 + 4.0 * q));
    second = y * y * y * y;
  }
  out.t_bound = std::min(first, second);
  out.t_star = std::exp2(std::floor(std::log2(out.t_bound)));
  return out;
}

namespace {

PicardState local_picard(const Grid1D& grid, std::vector<cplx> init, const BoundaryData& h,
                         const ModelParams& params, double d, const SolverOptions& opts) {
  opts.validate();
  h.check();
  if (!(d >= 0.0)) throw ConfigError("ball radius must be nonnegative");
  const BoundaryOperator op(params.delta, opts.quad);
  MapContext ctx{grid, h.grid, params.delta, &op, &h, std::move(init),
                 [&opts](std::size_t, const SpectralField& f) { return equation_source(f, opts); }};
  const std::size_t stations = opts.stations;
  return picard(ctx, d, [stations](const FieldSeries& u) { return x_norm(u, 0.0, stations); }, opts);
}

}  // namespace

PicardState solve_local(const SpectralField& phi, const BoundaryData& h, const ModelParams& params, double d,
                        const SolverOptions& opts) {
  return local_picard(phi.grid(), initial_coeffs(phi), h, params, d, opts);
}

void to_json(nlohmann::json& j, const PicardState& s) {
  j = {{"iterations", s.iterations},   {"d", s.d},
       {"kappa", s.kappa},             {"kappa_history", s.kappa_history},
       {"increments", s.increment_history}, {"norms", s.norm_history},
       {"norm", s.norm},               {"residual", s.residual},
       {"within_ball", s.within_ball}, {"warnings", s.diag.warnings}};
}

EnergyLedger energy_monitor(const FieldSeries& z, const FieldSeries& y, double c, double phi_l2, double h_norm) {
  z.check_shape();
  y.check_shape();
  if (z.time != y.time || !(z.grid == y.grid)) throw ShapeError("energy monitor needs z and y on the same grids");
  const std::size_t nt = z.time.size();
  const double dt = z.time.dt(), dx = z.grid.dx();
  std::vector<double> e(nt), exx(nt), ey(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    e[j] = half_sq(z.snapshots[j]);
    exx[j] = half_sq(derivative(z.snapshots[j], 2));
    ey[j] = half_sq(y.snapshots[j]);
  }
  EnergyLedger led;
  led.c = c;
  led.envelope_margin = std::numeric_limits<double>::infinity();
  const double h2 = h_norm * h_norm;
  for (std::size_t j = 0; j < nt; ++j) {
    EnergyStep st;
    st.t = z.time.t(j);
    st.z2 = e[j];
    st.zxx2 = exx[j];
    st.y2 = ey[j];
    st.envelope = std::exp(c * st.t * (1.0 + h2)) * (phi_l2 * phi_l2 + c * st.t * (h2 * h2 + h2));
    const bool env_ok = st.z2 <= st.envelope * (1.0 + 1e-9) + 1e-300;
    if (!env_ok) led.envelope_holds = false;
    if (st.envelope > 0.0) led.envelope_margin = std::min(led.envelope_margin, (st.envelope - st.z2) / st.envelope);
    st.ok = env_ok;
    if (j > 0 && j + 1 < nt) {
      st.lhs = (e[j + 1] - e[j - 1]) / (2.0 * dt) + exx[j];
      st.rhs = (c + ey[j]) * e[j] + ey[j] * ey[j] + c * ey[j];
      st.slack = 10.0 * (dt + dx * dx) * (e[j] + exx[j] + ey[j]);
      if (st.lhs > st.rhs + st.slack) {
        st.ok = false;
        led.inequality_holds = false;
      }
      if (st.slack > 0.0) led.worst_excess = std::max(led.worst_excess, (st.lhs - st.rhs) / st.slack);
    }
    led.steps.push_back(st);
  }
  if (!std::isfinite(led.envelope_margin)) led.envelope_margin = 0.0;
  return led;
}

void to_json(nlohmann::json& j, const EnergyLedger& e) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : e.steps)
    steps.push_back({{"t", s.t}, {"z2", s.z2}, {"zxx2", s.zxx2}, {"y2", s.y2}, {"lhs", s.lhs}, {"rhs", s.rhs},
                     {"slack", s.slack}, {"envelope", s.envelope}, {"ok", s.ok}});
  j = {{"c", e.c},
       {"inequality_holds", e.inequality_holds},
       {"envelope_holds", e.envelope_holds},
       {"worst_excess", e.worst_excess},
       {"envelope_margin", e.envelope_margin},
       {"steps", steps}};
}

void to_json(nlohmann::json& j, const PatchSummary& p) {
  j = {{"t_start", p.t_start}, {"t_end", p.t_end}, {"iterations", p.iterations},
       {"kappa", p.kappa},     {"d", p.d},         {"residual", p.residual}};
}

void to_json(nlohmann::json& j, const SolveRecord& r) {
  j = {{"patches", r.patches},
       {"seam_jump", r.seam_jump},
       {"l2_series", r.l2_series},
       {"hs_series", r.hs_series},
       {"warnings", r.diag.warnings}};
  if (r.energy) j["energy"] = *r.energy;
}

SolveRecord solve_global(const SpectralField& phi, const BoundaryData& h, const ModelParams& params,
                         const ConstantsCalibration& calib, const SolverOptions& opts, bool monitor_energy) {
  opts.validate();
  h.check();
  if (!calib.valid()) throw ConfigError("constants are not calibrated; run calibrate_constants first");
  const Grid1D grid = phi.grid();
  const TimeGrid& time = h.grid;
  const std::size_t total = time.steps();
  const double dt = time.dt();

  SolveRecord rec(FieldSeries(grid, time));
  auto& snaps = rec.solution.snapshots;
  SpectralField current = phi;
  current.sync();
  std::size_t start = 0;
  while (start < total) {
    const std::size_t remaining = total - start;
    const BoundaryData rest = slice(h, start, remaining);
    const LocalStep ls = pick_local_step(current, rest, calib);
    const double len = opts.patch_length > 0.0 ? opts.patch_length : ls.t_star;
    auto k = static_cast<std::size_t>(std::floor(len / dt + 1e-9));
    if (k < 2) {
      rec.diag.warn("local step " + std::to_string(len) + " is below two time steps; using 2 steps (contraction " +
                    "checked a posteriori)");
      k = 2;
    }
    if (k >= remaining || remaining - k < 2) k = remaining;
    const BoundaryData hp = slice(h, start, k);
    // Later patches start from the whole-line state handed over by the previous one; its
    // x < 0 part continues smoothly, so no new reflection enters the boundary traces.
    PicardState st = start == 0 ? solve_local(current, hp, params, ls.d, opts)
                                : local_picard(grid, current.coeffs(), hp, params, ls.d, opts);
    rec.diag.merge(st.diag);
    if (!st.within_ball) rec.diag.warn("an iterate left the ball on patch starting at t=" + std::to_string(time.t(start)));
    rec.patches.push_back({time.t(start), time.t(start + k), st.iterations, st.kappa, ls.d, st.residual});
    if (snaps.empty()) {
      snaps.push_back(st.w.snapshots.front());
    } else {
      const auto& prev = snaps.back().values();
      const auto& next = st.w.snapshots.front().values();
      std::vector<double> diff(prev.size());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = prev[i].real() - next[i].real();
      rec.seam_jump = std::max(rec.seam_jump, hs_norm_halfline(grid, diff, 0.0));
    }
    for (std::size_t j = 1; j < st.w.snapshots.size(); ++j) snaps.push_back(std::move(st.w.snapshots[j]));
    current = snaps.back();
    start += k;
  }
  for (const auto& s : snaps) {
    rec.l2_series.push_back(l2_half(s));
    rec.hs_series.push_back(hs_norm_halfline(s, params.s));
  }
  rec.solution.traces = record_traces(rec.solution, opts.stations);
  if (edge_mass_fraction(snaps.back()) > 1e-6)
    rec.diag.warn("solution mass reaches the edge of the computational domain; enlarge the grid");

  if (monitor_energy) {
    const BoundaryOperator op(params.delta, opts.quad);
    FieldSeries y = h.is_zero() ? FieldSeries::zeros(grid, time) : boundary_solution(grid, h, op, &rec.diag);
    FieldSeries z = difference(rec.solution, y);
    rec.energy = energy_monitor(z, y, calib.energy_c, l2_half(phi), boundary_pair_norm(h, 0.0));
  }
  return rec;
}

PicardState solve_weighted(const SpectralField& phi, const BoundaryData& h, const ModelParams& params,
                           const ConstantsCalibration& calib, const SolverOptions& opts) {
  params.require_weighted_branch();
  opts.validate();
  h.check();
  if (h.grid.horizon() > 1.0 + 1e-12) throw ConfigError("weighted solve needs T <= 1");
  if (!calib.valid()) throw ConfigError("constants are not calibrated; run calibrate_constants first");
  const double a = params.weight_exponent();
  BoundaryData hw = h;
  for (std::size_t j = 0; j < h.grid.size(); ++j) {
    const double tw = std::pow(h.grid.t(j), a);
    hw.h1[j] *= tw;
    hw.h2[j] *= tw;
  }
  const double d = 2.0 * calib.c1 * (hs_norm_halfline(phi, params.s) + boundary_pair_norm(hw, 0.0));
  const BoundaryOperator op(params.delta, opts.quad);
  MapContext ctx{phi.grid(), h.grid, params.delta, &op, &h, initial_coeffs(phi),
                 [&opts](std::size_t, const SpectralField& f) { return equation_source(f, opts); }};
  const double s = params.s, eps = params.eps;
  return picard(ctx, d, [s, eps](const FieldSeries& u) { return weighted_solution_norm(u, s, eps); }, opts);
}

SplittingCheck weighted_splitting_check(const Grid1D& grid, const BoundaryData& h, const ModelParams& params,
                                        const SolverOptions& opts) {
  params.require_weighted_branch();
  opts.validate();
  h.check();
  const double a = params.weight_exponent();
  const TimeGrid& time = h.grid;
  const BoundaryOperator op(params.delta, opts.quad);
  Diagnostics diag;
  const FieldSeries v = boundary_solution(grid, h, op, &diag);

  // theta: forced by a t^{a-1} v with homogeneous boundary data
  CoeffSeries src(time.size());
  for (std::size_t j = 0; j < time.size(); ++j) {
    const double t = time.t(j);
    const double wgt = t > 0.0 ? a * std::pow(t, a - 1.0) : 0.0;
    auto vals = v.snapshots[j].real_values();
    for (auto& x : vals) x *= wgt;
    src[j] = detail::extended_coeffs(grid, vals, Extension::blend4);
  }
  const auto forced = detail::whole_line_march(grid, time, params.delta, nullptr, &src);
  const FieldSeries theta = detail::boundary_correct(grid, time, forced, op, nullptr, &diag);

  // vartheta: weighted boundary data, zero initial data
  BoundaryData hw = h;
  for (std::size_t j = 0; j < time.size(); ++j) {
    const double tw = std::pow(time.t(j), a);
    hw.h1[j] *= tw;
    hw.h2[j] *= tw;
  }
  const FieldSeries vartheta = boundary_solution(grid, hw, op, &diag);

  const auto w = trapezoid(time);
  double err2 = 0.0, q2 = 0.0;
  const std::size_t c = grid.zero_index(), half = grid.size() - c;
  for (std::size_t j = 0; j < time.size(); ++j) {
    const double tw = std::pow(time.t(j), a);
    const auto qv = v.snapshots[j].real_values();
    const auto th = theta.snapshots[j].real_values();
    const auto vt = vartheta.snapshots[j].real_values();
    std::vector<double> q(grid.size(), 0.0), r(grid.size(), 0.0);
    for (std::size_t i = c; i < c + half; ++i) {
      q[i] = tw * qv[i];
      r[i] = q[i] - th[i] - vt[i];
    }
    const double qn = hs_norm_halfline(grid, q, 0.0), rn = hs_norm_halfline(grid, r, 0.0);
    err2 += w[j] * rn * rn;
    q2 += w[j] * qn * qn;
  }
  SplittingCheck out;
  out.q_norm = std::sqrt(q2);
  out.relative_error = q2 > 0.0 ? std::sqrt(err2 / q2) : std::sqrt(err2);
  return out;
}

namespace {

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

WeightedBilinearSides weighted_bilinear_sides(const FieldSeries& u, const ModelParams& params) {
  params.require_weighted_branch();
  u.check_shape();
  const double a = params.weight_exponent();
  FieldSeries uxx(u.grid, u.time), uux(u.grid, u.time);
  for (const auto& s : u.snapshots) {
    uxx.snapshots.push_back(derivative(s, 2));
    const auto ux = derivative(s, 1).real_values();
    auto uv = s.real_values();
    for (std::size_t i = 0; i < uv.size(); ++i) uv[i] *= ux[i];
    uux.snapshots.push_back(SpectralField::from_real(u.grid, uv).sync());
  }
  return {l1_time_norm(uxx, params.s) + l1_time_norm(uxx, 0.0, a),
          l1_time_norm(uux, params.s) + l1_time_norm(uux, 0.0, a), weighted_solution_norm(u, params.s, params.eps)};
}

ExponentFit weighted_bilinear_exponent(const SpectralField& phi, const ModelParams& params,
                                       const std::vector<double>& horizons, double dt, const SolverOptions& opts) {
  params.require_weighted_branch();
  opts.validate();
  if (horizons.size() < 2) throw ConfigError("exponent fit needs at least two horizons");
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const BoundaryOperator op(params.delta, opts.quad);
  const Grid1D grid = phi.grid();
  ExponentFit fit;
  for (double T : horizons) {
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    const TimeGrid time(T, std::max<std::size_t>(steps, 2));
    MapContext ctx{grid, time, params.delta, &op, nullptr, initial_coeffs(phi), {}};
    const auto sides = weighted_bilinear_sides(apply_map(ctx, nullptr, nullptr), params);
    if (!(sides.norm > 0.0)) throw DomainError("exponent fit needs nonzero data");
    fit.horizons.push_back(T);
    fit.linear_ratio.push_back(sides.linear / sides.norm);
    fit.bilinear_ratio.push_back(sides.bilinear / (sides.norm * sides.norm));
  }
  fit.alpha_linear = log_slope(fit.horizons, fit.linear_ratio);
  fit.alpha_bilinear = log_slope(fit.horizons, fit.bilinear_ratio);
  return fit;
}

SpectralField initial_time_derivative(const SpectralField& phi, double delta, const SolverOptions& opts) {
  SpectralField p = phi;
  p.sync();
  const Grid1D& grid = p.grid();
  const auto& c = p.coeffs();
  std::vector<cplx> g(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (grid.is_nyquist(k)) continue;
    const cplx ik(0.0, grid.xi(k));
    const cplx ik2 = ik * ik;
    g[k] = -(ik2 * ik2 + delta * ik2 * ik) * c[k];
    if (opts.second_order) g[k] -= ik2 * c[k];
  }
  if (opts.nonlinear) {
    const auto sq = product_coeffs(grid, c, c);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (!grid.is_nyquist(k)) g[k] -= cplx(0.0, 0.5 * grid.xi(k)) * sq[k];
  }
  auto out = SpectralField::from_coeffs(grid, std::move(g));
  out.sync();
  if (out.max_imag() > 1e-8 * (1.0 + l2_half(out)))
    throw AccuracyError("initial time derivative is not real to working accuracy", out.max_imag());
  return out;
}

TimeDerivative bootstrap_time_derivative(const SolveRecord& u, const SpectralField& phi, const BoundaryData& h,
                                         const ModelParams& params, const SolverOptions& opts) {
  opts.validate();
  h.check();
  const Grid1D grid = phi.grid();
  const TimeGrid& time = h.grid;
  if (u.solution.time != time) throw ShapeError("solution and boundary data live on different time grids");
  const SpectralField psi = initial_time_derivative(phi, params.delta, opts);
  // Smoothness guard: psi carries four derivatives of phi.
  const double tail = edge_mass_fraction(psi);
  if (tail > 1e-6) throw AccuracyError("initial data too rough or too wide for the time derivative", tail);

  // h' by second-order differences
  BoundaryData hd = BoundaryData::zeros(time);
  const std::size_t m = time.steps();
  const double dt = time.dt();
  auto diff = [&](const std::vector<double>& v, std::vector<double>& out) {
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    out[m] = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * dt);
    for (std::size_t j = 1; j < m; ++j) out[j] = (v[j + 1] - v[j - 1]) / (2.0 * dt);
  };
  diff(h.h1, hd.h1);
  diff(h.h2, hd.h2);

  const BoundaryOperator op(params.delta, opts.quad);
  FieldSeries y(grid, time);
  std::size_t iterations = 0;
  SpectralField current = psi;
  std::size_t start = 0;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& p : u.patches) {
    const auto a = static_cast<std::size_t>(std::llround(p.t_start / dt));
    const auto b = static_cast<std::size_t>(std::llround(p.t_end / dt));
    spans.emplace_back(a, b - a);
  }
  if (spans.empty()) spans.emplace_back(0, m);
  for (const auto& [a, k] : spans) {
    if (a != start) throw ShapeError("solve record patches do not tile the time grid");
    const BoundaryData hp = slice(hd, a, k);
    SolverOptions lin = opts;
    MapContext ctx{grid, hp.grid, params.delta, &op, &hp, initial_coeffs(current),
                   [&, a](std::size_t j, const SpectralField& w) {
                     const auto& uc = u.solution.snapshots[a + j].coeffs();
                     const auto& wc = w.coeffs();
                     std::vector<cplx> g(wc.size(), cplx{});
                     if (opts.second_order)
                       for (std::size_t q = 0; q < wc.size(); ++q) g[q] -= grid.xi(q) * grid.xi(q) * wc[q];
                     if (opts.nonlinear) {
                       const auto pr = product_coeffs(grid, uc, wc);
                       for (std::size_t q = 0; q < wc.size(); ++q)
                         if (!grid.is_nyquist(q)) g[q] += cplx(0.0, grid.xi(q)) * pr[q];
                     }
                     return negated_source(grid, g);
                   }};
    const double scale = std::max(x_norm(apply_map(ctx, nullptr, nullptr), 0.0, opts.stations), 1e-300);
    const std::size_t stations = opts.stations;
    PicardState st = picard(ctx, scale, [stations](const FieldSeries& f) { return x_norm(f, 0.0, stations); }, lin);
    iterations += st.iterations;
    if (y.snapshots.empty()) y.snapshots.push_back(st.w.snapshots.front());
    for (std::size_t j = 1; j < st.w.snapshots.size(); ++j) y.snapshots.push_back(std::move(st.w.snapshots[j]));
    current = y.snapshots.back();
    start = a + k;
  }
  if (start != m) throw ShapeError("solve record patches do not cover the time grid");

  TimeDerivative out(std::move(y));
  out.iterations = iterations;
  double num = 0.0, den = 0.0;
  const std::size_t c = grid.zero_index();
  for (std::size_t j = 1; j < m; ++j) {
    const auto up = u.solution.snapshots[j + 1].real_values();
    const auto um = u.solution.snapshots[j - 1].real_values();
    const auto yv = out.y.snapshots[j].real_values();
    std::vector<double> dtu(grid.size(), 0.0), r(grid.size(), 0.0);
    for (std::size_t i = c; i < grid.size(); ++i) {
      dtu[i] = (up[i] - um[i]) / (2.0 * dt);
      r[i] = yv[i] - dtu[i];
    }
    const double a = hs_norm_halfline(grid, dtu, 0.0), b = hs_norm_halfline(grid, r, 0.0);
    num += b * b;
    den += a * a;
  }
  out.consistency = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return out;
}

ConstantsCalibration calibrate_constants(const Grid1D& grid, const ModelParams& params,
                                         const CalibrationSettings& settings, const SolverOptions& opts) {
  opts.validate();
  if (settings.ensemble < 1) throw ConfigError("calibration ensemble must be nonempty");
  const TimeGrid time(settings.horizon, settings.steps);
  const double T = settings.horizon;
  const BoundaryOperator op(params.delta, opts.quad);
  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u01(rng); };

  std::vector<double> r_ic, r_bdr, r_lin, r_nl, r_energy;
  const std::size_t stations = opts.stations;
  for (std::size_t i = 0; i < settings.ensemble; ++i) {
    const nlohmann::json ps{{"family", "gaussian"}, {"amp", uni(0.5, 1.5)}, {"center", uni(3.0, 8.0)},
                            {"width", uni(0.6, 1.5)}};
    const double a1 = uni(0.0, 0.2) * T, a2 = uni(0.0, 0.2) * T;
    const nlohmann::json h1{{"family", "raised_cosine"}, {"amp", uni(0.2, 1.0)}, {"start", a1},
                            {"stop", a1 + uni(0.4, 0.8) * T}};
    const nlohmann::json h2{{"family", "raised_cosine"}, {"amp", uni(-0.5, 0.5)}, {"start", a2},
                            {"stop", a2 + uni(0.4, 0.8) * T}};
    const double amp = std::pow(10.0, uni(-2.0, 0.5));
    const SpectralField phi = sample_initial(grid, ps);
    const BoundaryData h = sample_boundary(time, h1, h2);

    MapContext ic{grid, time, params.delta, &op, nullptr, initial_coeffs(phi), {}};
    const FieldSeries w_ic = apply_map(ic, nullptr, nullptr);
    const FieldSeries w_bdr = boundary_solution(grid, h, op, nullptr);
    MapContext both{grid, time, params.delta, &op, &h, initial_coeffs(phi), {}};
    const FieldSeries w_lin = apply_map(both, nullptr, nullptr);
    const double np = l2_half(phi), nh = boundary_pair_norm(h, 0.0);
    if (np > 0.0) r_ic.push_back(x_norm(w_ic, 0.0, stations) / np);
    if (nh > 0.0) r_bdr.push_back(x_norm(w_bdr, 0.0, stations) / nh);
    if (np + nh > 0.0) r_lin.push_back(x_norm(w_lin, 0.0, stations) / (np + nh));

    // Duhamel term of the nonlinearity at a random amplitude
    FieldSeries w(grid, time);
    for (const auto& s : w_ic.snapshots) {
      auto v = s.real_values();
      for (auto& x : v) x *= amp;
      w.snapshots.push_back(SpectralField::from_real(grid, v).sync());
    }
    MapContext nl{grid, time, params.delta, &op, nullptr, {},
                  [&opts](std::size_t, const SpectralField& f) { return equation_source(f, opts); }};
    const FieldSeries b = apply_map(nl, &w, nullptr);
    const double wn = x_norm(w, 0.0, stations);
    const double rhs = std::sqrt(T) * wn + (std::sqrt(T) + std::pow(T, 0.25)) * wn * wn;
    if (rhs > 0.0) r_nl.push_back(x_norm(b, 0.0, stations) / rhs);

    for (std::size_t j = 1; j < w.snapshots.size(); ++j) {
      const auto& s = w.snapshots[j];
      const double n0 = half_sq(s);
      if (!(n0 > 0.0)) continue;
      r_energy.push_back((2.0 * half_sq(derivative(s, 1)) - half_sq(derivative(s, 2))) / n0);
    }
  }
  auto mx = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
  ConstantsCalibration c;
  c.samples = settings.ensemble;
  c.seed = settings.seed;
  c.c1 = 1.5 * std::max({mx(r_ic), mx(r_bdr), mx(r_lin)});
  c.c2 = 1.5 * mx(r_nl);
  c.energy_c = std::max(1.0, 1.5 * mx(r_energy));
  c.ratios = {{"initial", r_ic}, {"boundary", r_bdr}, {"combined", r_lin}, {"nonlinear", r_nl}, {"energy", r_energy}};
  return c;
}

}  // namespace ksq
