#include "ksq/fd_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ksq {

void FDConfig::validate() const {
  if (!(length > 0.0)) throw ConfigError("fd.length must be positive");
  if (nx < 64) throw ConfigError("fd.nx must be at least 64");
  if (!(dt > 0.0)) throw ConfigError("fd.dt must be positive");
  if (scheme != "sbdf2") throw ConfigError("fd.scheme: only 'sbdf2' is implemented");
  if (startup_substeps < 1) throw ConfigError("fd.startup_substeps must be positive");
}

BandedLU::BandedLU(std::size_t n, std::size_t lower, std::size_t upper)
    : n_(n), kl_(lower), ku_(upper), width_(lower + upper + 1), a_(n * (lower + upper + 1), 0.0) {}

double& BandedLU::at(std::size_t i, std::size_t j) {
  if (j + kl_ < i || j > i + ku_) throw DomainError("banded matrix entry outside the band");
  return a_[i * width_ + (j + kl_ - i)];
}

void BandedLU::factor() {
  for (std::size_t k = 0; k < n_; ++k) {
    const double piv = a_[k * width_ + kl_];
    double scale = 0.0;
    for (std::size_t c = 0; c < width_; ++c) scale = std::max(scale, std::abs(a_[k * width_ + c]));
    if (!(std::abs(piv) > 1e-13 * scale))
      throw ConfigError("banded solve is singular at row " + std::to_string(k) + "; reduce dt or change the grid");
    for (std::size_t i = k + 1; i <= std::min(n_ - 1, k + kl_); ++i) {
      double& lik = a_[i * width_ + (k + kl_ - i)];
      lik /= piv;
      for (std::size_t j = k + 1; j <= std::min(n_ - 1, k + ku_); ++j)
        a_[i * width_ + (j + kl_ - i)] -= lik * a_[k * width_ + (j + kl_ - k)];
    }
  }
  factored_ = true;
}

void BandedLU::solve(std::vector<double>& b) const {
  if (!factored_) throw DomainError("banded matrix not factored");
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i > kl_ ? i - kl_ : 0;
    for (std::size_t j = j0; j < i; ++j) b[i] -= a_[i * width_ + (j + kl_ - i)] * b[j];
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    for (std::size_t j = ii + 1; j <= std::min(n_ - 1, ii + ku_); ++j) b[ii] -= a_[ii * width_ + (j + kl_ - ii)] * b[j];
    b[ii] /= a_[ii * width_ + kl_];
  }
}

namespace {

// Local cubic interpolation of boundary samples at time t.
double sample_at(const TimeGrid& g, const std::vector<double>& h, double t) {
  const double pos = std::clamp(t / g.dt(), 0.0, static_cast<double>(g.steps()));
  auto j = static_cast<std::ptrdiff_t>(std::floor(pos));
  const auto m = static_cast<std::ptrdiff_t>(g.steps());
  j = std::clamp<std::ptrdiff_t>(j - 1, 0, m - 3);
  const double th = pos - static_cast<double>(j);
  double acc = 0.0;
  for (int q = 0; q < 4; ++q) {
    double l = 1.0;
    for (int p = 0; p < 4; ++p)
      if (p != q) l *= (th - p) / static_cast<double>(q - p);
    acc += l * h[static_cast<std::size_t>(j + q)];
  }
  return acc;
}

struct Operator {
  std::size_t n;  // interior unknowns u_1..u_{N-1}
  double dx, delta;
  bool uxx;
  // stencil weights for offsets -2..2
  double w[5];
};

Operator make_operator(const FDConfig& cfg, double delta) {
  Operator op{};
  op.n = cfg.nx - 1;
  op.dx = cfg.length / static_cast<double>(cfg.nx);
  op.delta = delta;
  op.uxx = cfg.include_uxx;
  const double dx = op.dx, d4 = 1.0 / std::pow(dx, 4), d3 = delta / (2.0 * std::pow(dx, 3)),
               d2 = cfg.include_uxx ? 1.0 / (dx * dx) : 0.0;
  op.w[0] = d4 - d3;
  op.w[1] = -4.0 * d4 + 2.0 * d3 + d2;
  op.w[2] = 6.0 * d4 - 2.0 * d2;
  op.w[3] = -4.0 * d4 - 2.0 * d3 + d2;
  op.w[4] = d4 + d3;
  return op;
}

// diag * I + A  with boundary closures folded in.
BandedLU assemble(const Operator& op, double diag) {
  BandedLU lu(op.n, 2, 2);
  for (std::size_t r = 0; r < op.n; ++r) {
    const std::size_t i = r + 1;  // grid index
    for (int o = -2; o <= 2; ++o) {
      const auto g = static_cast<std::ptrdiff_t>(i) + o;
      double w = op.w[o + 2];
      std::ptrdiff_t col;
      if (g == -1) {
        col = 1;  // u_{-1} = u_1 - 2 dx h2
      } else if (g == 0 || g == static_cast<std::ptrdiff_t>(op.n + 1)) {
        continue;  // u_0 = h1 and u_N = 0 are known
      } else if (g == static_cast<std::ptrdiff_t>(op.n + 2)) {
        col = static_cast<std::ptrdiff_t>(op.n) - 1;  // u_{N+1} = u_{N-1}
      } else {
        col = g;
      }
      lu.at(r, static_cast<std::size_t>(col - 1)) += w;
    }
    lu.at(r, r) += diag;
  }
  lu.factor();
  return lu;
}

// Known-value contributions of A at time t (from u_0 and the ghost u_{-1}).
void boundary_terms(const Operator& op, double h1, double h2, std::vector<double>& b) {
  std::fill(b.begin(), b.end(), 0.0);
  // row i=1 sees u_{-1} (offset -2) and u_0 (offset -1); row i=2 sees u_0 (offset -2)
  b[0] += op.w[0] * (-2.0 * op.dx * h2) + op.w[1] * h1;
  if (op.n > 1) b[1] += op.w[0] * h1;
}

void nonlinear_term(const Operator& op, const std::vector<double>& u, double h1, std::vector<double>& out) {
  const std::size_t n = op.n;
  for (std::size_t r = 0; r < n; ++r) {
    const double left = r == 0 ? h1 : u[r - 1];
    const double right = r + 1 < n ? u[r + 1] : 0.0;
    out[r] = (right * right - left * left) / (4.0 * op.dx);
  }
}

}  // namespace

GridSolution fd_solve(const std::function<double(double)>& phi, const BoundaryData& h, const ModelParams& params,
                      const FDConfig& cfg) {
  cfg.validate();
  h.check();
  const TimeGrid& out_grid = h.grid;
  const double ratio = out_grid.dt() / cfg.dt;
  const auto per_out = static_cast<std::size_t>(std::llround(ratio));
  if (per_out < 1 || std::abs(ratio - static_cast<double>(per_out)) > 1e-9 * ratio)
    throw ConfigError("fd.dt must divide the output time step");
  const double dt = out_grid.dt() / static_cast<double>(per_out);
  const Operator op = make_operator(cfg, params.delta);
  const std::size_t n = op.n;

  GridSolution sol;
  sol.dx = op.dx;
  sol.time = out_grid;
  std::vector<double> u(n), uprev(n), rhs(n), b(n), nl(n), nlprev(n);
  for (std::size_t r = 0; r < n; ++r) u[r] = phi(op.dx * static_cast<double>(r + 1));

  double umax = std::abs(h.h1[0]);
  for (double v : u) umax = std::max(umax, std::abs(v));
  for (double v : h.h1) umax = std::max(umax, std::abs(v));
  if (cfg.include_nonlinear && dt * umax / op.dx > 1.0)
    throw ConfigError("fd.dt violates the advective limit dt*max|u|/dx <= 1");

  auto record = [&](double t) {
    std::vector<double> row(cfg.nx + 1);
    row[0] = sample_at(out_grid, h.h1, t);
    for (std::size_t r = 0; r < n; ++r) row[r + 1] = u[r];
    row[cfg.nx] = 0.0;
    sol.u.push_back(std::move(row));
  };
  record(0.0);

  auto nonlin = [&](const std::vector<double>& v, double t, std::vector<double>& out) {
    if (cfg.include_nonlinear)
      nonlinear_term(op, v, sample_at(out_grid, h.h1, t), out);
    else
      std::fill(out.begin(), out.end(), 0.0);
  };

  // Startup: backward-Euler substeps (explicit nonlinearity) to reach t = dt.
  {
    const double ds = dt / static_cast<double>(cfg.startup_substeps);
    const BandedLU be = assemble(op, 1.0 / ds);
    for (std::size_t k = 0; k < cfg.startup_substeps; ++k) {
      const double t0 = ds * static_cast<double>(k), t1 = t0 + ds;
      nonlin(u, t0, nl);
      boundary_terms(op, sample_at(out_grid, h.h1, t1), sample_at(out_grid, h.h2, t1), b);
      for (std::size_t r = 0; r < n; ++r) rhs[r] = u[r] / ds - b[r] - nl[r];
      be.solve(rhs);
      u.swap(rhs);
    }
  }
  // Need u at t=0 as the BDF2 history.
  for (std::size_t r = 0; r < n; ++r) uprev[r] = phi(op.dx * static_cast<double>(r + 1));
  nonlin(uprev, 0.0, nlprev);

  const BandedLU bdf = assemble(op, 1.5 / dt);
  const std::size_t total = out_grid.steps() * per_out;
  if (per_out == 1) record(dt);
  for (std::size_t step = 1; step < total; ++step) {
    const double t = dt * static_cast<double>(step), t1 = t + dt;
    nonlin(u, t, nl);
    boundary_terms(op, sample_at(out_grid, h.h1, t1), sample_at(out_grid, h.h2, t1), b);
    for (std::size_t r = 0; r < n; ++r)
      rhs[r] = (4.0 * u[r] - uprev[r]) / (2.0 * dt) - b[r] - (2.0 * nl[r] - nlprev[r]);
    bdf.solve(rhs);
    uprev.swap(u);
    u.swap(rhs);
    nlprev.swap(nl);
    for (double v : u)
      if (!std::isfinite(v)) throw DivergenceError("finite-difference solution blew up at t=" + std::to_string(t1));
    if ((step + 1) % per_out == 0) record(t1);
  }

  // Far-field monitor: the u = u_x = 0 closure at x = L is only valid if nothing reaches it.
  double peak = 0.0, edge = 0.0;
  const std::size_t band = std::max<std::size_t>(2, cfg.nx / 20);
  for (const auto& row : sol.u)
    for (std::size_t i = 0; i < row.size(); ++i) {
      peak = std::max(peak, std::abs(row[i]));
      if (i + band >= row.size()) edge = std::max(edge, std::abs(row[i]));
    }
  if (peak > 0.0 && edge > 1e-6 * peak)
    sol.diag.warn("finite-difference solution reaches the far boundary (relative level " +
                  std::to_string(edge / peak) + ")");
  return sol;
}

GridSolution to_grid_solution(const FieldSeries& u) {
  u.check_shape();
  GridSolution g;
  g.dx = u.grid.dx();
  g.time = u.time;
  for (const auto& snap : u.snapshots) g.u.push_back(half_line_part(u.grid, snap.real_values()));
  return g;
}

namespace {

double cubic_at(const std::vector<double>& row, double pos) {
  const auto n = static_cast<std::ptrdiff_t>(row.size());
  auto j = static_cast<std::ptrdiff_t>(std::floor(pos));
  j = std::clamp<std::ptrdiff_t>(j - 1, 0, n - 4);
  const double th = pos - static_cast<double>(j);
  double acc = 0.0;
  for (int q = 0; q < 4; ++q) {
    double l = 1.0;
    for (int p = 0; p < 4; ++p)
      if (p != q) l *= (th - p) / static_cast<double>(q - p);
    acc += l * row[static_cast<std::size_t>(j + q)];
  }
  return acc;
}

double sample(const GridSolution& s, double x, double t) {
  const double tp = t / s.time.dt();
  const auto nt = static_cast<std::ptrdiff_t>(s.u.size());
  auto j = static_cast<std::ptrdiff_t>(std::floor(tp + 1e-9));
  if (std::abs(tp - std::round(tp)) < 1e-9) return cubic_at(s.u[static_cast<std::size_t>(std::llround(tp))], x / s.dx);
  j = std::clamp<std::ptrdiff_t>(j - 1, 0, nt - 4);
  const double th = tp - static_cast<double>(j);
  double acc = 0.0;
  for (int q = 0; q < 4; ++q) {
    double l = 1.0;
    for (int p = 0; p < 4; ++p)
      if (p != q) l *= (th - p) / static_cast<double>(q - p);
    acc += l * cubic_at(s.u[static_cast<std::size_t>(j + q)], x / s.dx);
  }
  return acc;
}

}  // namespace

NormReport fd_compare(const GridSolution& a, const GridSolution& b) {
  if (a.u.empty() || b.u.empty()) throw ShapeError("empty solution in comparison");
  const double dx = std::max(a.dx, b.dx);
  const double dt = std::max(a.time.dt(), b.time.dt());
  const double xmax = std::min(a.dx * static_cast<double>(a.u[0].size() - 1), b.dx * static_cast<double>(b.u[0].size() - 1));
  const double tmax = std::min(a.time.horizon(), b.time.horizon());
  const auto nxp = static_cast<std::size_t>(std::floor(xmax / dx + 1e-9)) + 1;
  const auto ntp = static_cast<std::size_t>(std::floor(tmax / dt + 1e-9)) + 1;
  double diff2 = 0.0, a2 = 0.0, b2 = 0.0, sup = 0.0, supab = 0.0, sup_x = 0.0, sup_t = 0.0;
  for (std::size_t j = 0; j < ntp; ++j) {
    const double t = dt * static_cast<double>(j);
    for (std::size_t i = 0; i < nxp; ++i) {
      const double x = dx * static_cast<double>(i);
      const double va = sample(a, x, t), vb = sample(b, x, t);
      diff2 += (va - vb) * (va - vb);
      a2 += va * va;
      b2 += vb * vb;
      if (std::abs(va - vb) > sup) {
        sup = std::abs(va - vb);
        sup_x = x;
        sup_t = t;
      }
      supab = std::max({supab, std::abs(va), std::abs(vb)});
    }
  }
  const double w = dx * dt;
  const double diff = std::sqrt(diff2 * w), big = std::sqrt(std::max(a2, b2) * w);
  nlohmann::json data{{"sup_difference", sup},
                      {"sup_at_x", sup_x},
                      {"sup_at_t", sup_t},
                      {"relative_sup_difference", supab > 0.0 ? sup / supab : 0.0},
                      {"lattice_dx", dx},
                      {"lattice_dt", dt},
                      {"nx", nxp},
                      {"nt", ntp}};
  if (big == 0.0) return {"oracle_difference", diff, 0.0, 0.0, data};
  return NormReport::make("oracle_difference", diff, big, data);
}

NormReport fd_compare(const FieldSeries& spectral, const GridSolution& fd) {
  return fd_compare(to_grid_solution(spectral), fd);
}

}  // namespace ksq
