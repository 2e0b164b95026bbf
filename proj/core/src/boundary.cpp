#include "ksq/boundary.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"

namespace ksq {

using std::numbers::pi;

BoundaryData BoundaryData::zeros(const TimeGrid& g) {
  return {g, std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), 0.0)};
}

void BoundaryData::check() const {
  if (h1.size() != grid.size() || h2.size() != grid.size())
    throw ShapeError("boundary samples do not match their time grid");
  for (std::size_t j = 0; j < h1.size(); ++j)
    if (!std::isfinite(h1[j]) || !std::isfinite(h2[j])) throw DomainError("boundary samples must be finite");
}

bool BoundaryData::is_zero() const {
  return std::all_of(h1.begin(), h1.end(), [](double v) { return v == 0.0; }) &&
         std::all_of(h2.begin(), h2.end(), [](double v) { return v == 0.0; });
}

void QuadratureConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigError("quadrature.tol must be positive");
  if (period_factor < 3) throw ConfigError("quadrature.period_factor must be at least 3");
  if (!(damping > 0.0)) throw ConfigError("quadrature.damping must be positive");
  if (folds < 1) throw ConfigError("quadrature.folds must be at least 1");
  if (panels < 1) throw ConfigError("quadrature.panels must be at least 1");
  if (rho_max < 0.0) throw ConfigError("quadrature.rho_max must be nonnegative");
  if (!(rho_cap > 0.0)) throw ConfigError("quadrature.rho_cap must be positive");
}

namespace {

// Transform of the half hat (1 - u/dt) on [0, dt].
cplx half_hat(cplx s, double dt) {
  const cplx z = s * dt;
  if (std::abs(z) < 0.5) {
    cplx sum = 0.0, term = 1.0;
    double fact = 1.0;
    for (int n = 0; n < 25; ++n) {
      sum += term / (fact * (n + 1) * (n + 2));
      term *= -z;
      fact *= (n + 1);
    }
    return dt * sum;
  }
  return 1.0 / s - (1.0 - std::exp(-z)) / (s * s * dt);
}

// Transform of the full hat centred at 0 with half-width dt.
cplx full_hat(cplx s, double dt) {
  const cplx z = 0.5 * s * dt;
  cplx q;
  if (std::abs(z) < 0.5) {
    cplx sum = 0.0, term = 1.0;
    double fact = 1.0;
    for (int n = 0; n < 20; ++n) {
      sum += term / fact;
      term *= z * z;
      fact *= (2 * n + 2) * (2 * n + 3);
    }
    q = sum;
  } else {
    q = std::sinh(z) / z;
  }
  return dt * q * q;
}

// I_n = int_0^1 theta^n exp(-sigma theta) dtheta for n = 0..3.
std::array<cplx, 4> moments(cplx sigma) {
  std::array<cplx, 4> out{};
  if (std::abs(sigma) < 2.0) {
    for (int n = 0; n < 4; ++n) {
      cplx sum = 0.0, term = 1.0;
      double fact = 1.0;
      for (int k = 0; k < 40; ++k) {
        sum += term / (fact * (n + k + 1));
        term *= -sigma;
        fact *= (k + 1);
      }
      out[static_cast<std::size_t>(n)] = sum;
    }
    return out;
  }
  const cplx e = std::exp(-sigma);
  out[0] = (1.0 - e) / sigma;
  for (int n = 1; n < 4; ++n) out[static_cast<std::size_t>(n)] = (double(n) * out[static_cast<std::size_t>(n - 1)] - e) / sigma;
  return out;
}

// Monomial coefficients of the cubic Lagrange basis on four nodes.
std::array<std::array<double, 4>, 4> lagrange_monomials(const std::array<double, 4>& nodes) {
  std::array<std::array<double, 4>, 4> out{};
  for (std::size_t q = 0; q < 4; ++q) {
    std::array<double, 4> poly{1.0, 0.0, 0.0, 0.0};
    double denom = 1.0;
    for (std::size_t p = 0; p < 4; ++p) {
      if (p == q) continue;
      std::array<double, 4> next{};
      for (std::size_t d = 0; d < 3; ++d) {
        next[d + 1] += poly[d];
        next[d] -= nodes[p] * poly[d];
      }
      poly = next;
      denom *= nodes[q] - nodes[p];
    }
    for (auto& c : poly) c /= denom;
    out[q] = poly;
  }
  return out;
}

cplx laplace_linear(std::span<const double> h, double dt, cplx s) {
  const std::size_t m = h.size() - 1;
  const cplx step = std::exp(-s * dt);
  cplx e = 1.0, acc = 0.0;
  for (std::size_t j = 0; j <= m; ++j) {
    acc += h[j] * e;
    e *= step;
  }
  const cplx w = full_hat(s, dt);
  const cplx et = std::exp(-s * (dt * static_cast<double>(m)));
  return w * acc + h[0] * (half_hat(s, dt) - w) + h[m] * et * (half_hat(-s, dt) - w);
}

cplx laplace_cubic(std::span<const double> h, double dt, cplx s) {
  static const auto left = lagrange_monomials({0.0, 1.0, 2.0, 3.0});
  static const auto mid = lagrange_monomials({-1.0, 0.0, 1.0, 2.0});
  static const auto right = lagrange_monomials({-2.0, -1.0, 0.0, 1.0});
  const std::size_t m = h.size() - 1;
  if (m < 3) return laplace_linear(h, dt, s);
  const auto mom = moments(s * dt);
  auto weights = [&](const std::array<std::array<double, 4>, 4>& lm) {
    std::array<cplx, 4> w{};
    for (std::size_t q = 0; q < 4; ++q)
      for (std::size_t n = 0; n < 4; ++n) w[q] += lm[q][n] * mom[n];
    return w;
  };
  const auto wl = weights(left), wm = weights(mid), wr = weights(right);
  const cplx step = std::exp(-s * dt);
  cplx e = 1.0, acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    cplx seg;
    if (j == 0)
      seg = wl[0] * h[0] + wl[1] * h[1] + wl[2] * h[2] + wl[3] * h[3];
    else if (j == m - 1)
      seg = wr[0] * h[j - 2] + wr[1] * h[j - 1] + wr[2] * h[j] + wr[3] * h[j + 1];
    else
      seg = wm[0] * h[j - 1] + wm[1] * h[j] + wm[2] * h[j + 1] + wm[3] * h[j + 2];
    acc += e * seg;
    e *= step;
  }
  return dt * acc;
}

}  // namespace

std::vector<cplx> laplace_transform(const TimeGrid& grid, std::span<const double> samples,
                                    std::span<const cplx> s_nodes, LaplaceRule rule) {
  if (samples.size() != grid.size()) throw ShapeError("samples do not match time grid");
  std::vector<cplx> out(s_nodes.size());
  const bool zero = std::all_of(samples.begin(), samples.end(), [](double v) { return v == 0.0; });
  if (zero) return out;
  for (std::size_t k = 0; k < s_nodes.size(); ++k)
    out[k] = rule == LaplaceRule::linear ? laplace_linear(samples, grid.dt(), s_nodes[k])
                                         : laplace_cubic(samples, grid.dt(), s_nodes[k]);
  return out;
}

LaplaceSamples laplace_on_contour(const BoundaryData& h, std::span<const double> mu_nodes, LaplaceRule rule) {
  h.check();
  std::vector<cplx> s(mu_nodes.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!(mu_nodes[k] > 0.0)) throw DomainError("contour nodes must be positive");
    s[k] = cplx(0.0, mu_nodes[k]);
  }
  LaplaceSamples out;
  out.mu.assign(mu_nodes.begin(), mu_nodes.end());
  out.h1_hat = laplace_transform(h.grid, h.h1, s, rule);
  out.h2_hat = laplace_transform(h.grid, h.h2, s, rule);
  return out;
}

// Node set of a discretized inverse transform
//   v(x,t) = sum_k weight_k Re[ exp(s_k t) (c1_k exp(l1_k x) + c2_k exp(l2_k x)) ].
struct BoundaryOperator::Plan {
  QuadratureScheme scheme = QuadratureScheme::shifted_trapezoid;
  std::vector<cplx> s;
  std::vector<double> weight;
  std::vector<cplx> l1, l2;
  // shifted_trapezoid lattice data
  std::size_t m = 0, big_m = 0;
  double dt = 0.0, period = 0.0, r = 0.0;
};

namespace {

void fill_roots(BoundaryOperator::Plan& plan, double delta) {
  const std::size_t k_count = plan.s.size();
  plan.l1.resize(k_count);
  plan.l2.resize(k_count);
  RootPair prev{};
  bool have = false;
  for (std::size_t k = 0; k < k_count; ++k) {
    RootPair p = prev;
    if (!have || !track_roots(p, plan.s[k], delta)) p = characteristic_roots(plan.s[k], delta);
    plan.l1[k] = p.lambda1;
    plan.l2[k] = p.lambda2;
    prev = p;
    have = true;
  }
}

struct Coefficients {
  std::vector<cplx> c1, c2;
};

Coefficients kernel_coefficients(const BoundaryOperator::Plan& plan, const std::vector<cplx>& g1,
                                 const std::vector<cplx>& g2) {
  Coefficients c;
  c.c1.resize(plan.s.size());
  c.c2.resize(plan.s.size());
  for (std::size_t k = 0; k < plan.s.size(); ++k) {
    const cplx d = plan.l2[k] - plan.l1[k];
    c.c1[k] = (plan.l2[k] * g1[k] - g2[k]) / d;
    c.c2[k] = (g2[k] - plan.l1[k] * g1[k]) / d;
  }
  return c;
}

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Laplace transforms of the causally extended data at the shifted-trapezoid nodes.
void shifted_transforms(const BoundaryOperator::Plan& plan, std::span<const double> h, std::vector<cplx>& out) {
  const std::size_t m = plan.m, big_m = plan.big_m;
  out.assign(plan.s.size(), cplx{});
  if (std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; })) return;
  std::vector<cplx> a(big_m, cplx{});
  for (std::size_t j = 0; j <= 2 * m && j < big_m; ++j) {
    double g;
    if (j <= m) {
      g = h[j];
    } else {
      const double c = std::cos(0.5 * pi * static_cast<double>(j - m) / static_cast<double>(m));
      g = h[m] * c * c;
    }
    a[j] = g * std::exp(-plan.r * plan.dt * static_cast<double>(j));
  }
  detail::fft_inplace(a.data(), big_m, -1);
  for (std::size_t k = 0; k < plan.s.size(); ++k) {
    const cplx w = full_hat(plan.s[k], plan.dt);
    out[k] = w * a[k % big_m] + h[0] * (half_hat(plan.s[k], plan.dt) - w);
  }
}

}  // namespace

BoundaryOperator::BoundaryOperator(double delta, QuadratureConfig quad) : delta_(delta), quad_(quad) {
  quad_.validate();
}

std::shared_ptr<const BoundaryOperator::Plan> BoundaryOperator::plan_for(const BoundaryData& h,
                                                                         std::span<const double> t_nodes,
                                                                         Diagnostics* diag) const {
  const TimeGrid& g = h.grid;
  if (quad_.scheme == QuadratureScheme::shifted_trapezoid) {
    const auto key = std::make_pair(g.horizon(), g.steps());
    {
      std::lock_guard lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    auto plan = std::make_shared<Plan>();
    plan->scheme = quad_.scheme;
    plan->m = g.steps();
    plan->big_m = static_cast<std::size_t>(quad_.period_factor) * plan->m;
    plan->dt = g.dt();
    plan->period = plan->dt * static_cast<double>(plan->big_m);
    double damping = quad_.damping;
    // Keep the real node away from the double root at tau = 27 delta^4 / 256.
    const double d2 = delta_ * delta_;
    const double branch = 27.0 * d2 * d2 / 256.0;
    while (std::abs(damping / plan->period - branch) < 1e-3 * branch) damping *= 1.01;
    plan->r = damping / plan->period;
    const std::size_t k_count = static_cast<std::size_t>(quad_.folds) * plan->big_m;
    plan->s.resize(k_count);
    plan->weight.resize(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      plan->s[k] = cplx(plan->r, 2.0 * pi * static_cast<double>(k) / plan->period);
      plan->weight[k] = (k == 0 ? 1.0 : 2.0) / plan->period;
    }
    fill_roots(*plan, delta_);
    std::lock_guard lock(mu_);
    cache_.emplace(key, plan);
    return plan;
  }

  // rho panels: node set depends on the data (automatic rho_max) and the evaluation times.
  double t_eff = g.horizon();
  for (double t : t_nodes) t_eff = std::max(t_eff, t);
  double rho_max = quad_.rho_max;
  const double hscale = std::max(sup_abs(h.h1), sup_abs(h.h2));
  if (rho_max == 0.0) {
    constexpr int samples = 240;
    std::vector<double> rho(samples);
    std::vector<cplx> s(samples);
    for (int i = 0; i < samples; ++i) {
      rho[static_cast<std::size_t>(i)] =
          0.05 * std::pow(quad_.rho_cap / 0.05, static_cast<double>(i) / (samples - 1));
      const double r2 = rho[static_cast<std::size_t>(i)] * rho[static_cast<std::size_t>(i)];
      s[static_cast<std::size_t>(i)] = cplx(0.0, 8.0 * r2 * r2);
    }
    const auto a = laplace_transform(g, h.h1, s, quad_.laplace);
    const auto b = laplace_transform(g, h.h2, s, quad_.laplace);
    std::vector<double> f(samples);
    double fmax = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = (std::abs(a[i]) + std::abs(b[i])) * std::pow(rho[i], 3);
      fmax = std::max(fmax, f[i]);
    }
    std::size_t last = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] > quad_.tol * fmax) last = i;
    if (fmax == 0.0) {
      rho_max = 1.0;
    } else if (last + 1 >= f.size()) {
      rho_max = quad_.rho_cap;
      if (diag)
        diag->warn("boundary quadrature: |h~| rho^3 has not decayed to tol by rho_cap=" +
                   std::to_string(quad_.rho_cap) + " (relative level " + std::to_string(f.back() / fmax) +
                   "); boundary data may be too rough for pointwise evaluation at x=0");
    } else {
      rho_max = rho[last + 1];
    }
  }
  (void)hscale;

  // Panel breakpoints: geometric towards 0, then phase-limited panels.
  std::vector<double> br{0.0};
  const double rho_a = std::min(0.5, rho_max);
  for (int i = quad_.panels - 1; i >= 0; --i) br.push_back(rho_a * std::ldexp(1.0, -i));
  while (br.back() < rho_max) {
    const double rb = br.back();
    const double rate = 32.0 * rb * rb * rb * t_eff;
    const double step = std::min(0.25, 0.5 * pi / std::max(rate, 1e-12));
    br.push_back(std::min(rho_max, rb + step));
  }
  using gauss = boost::math::quadrature::gauss<double, 10>;
  const auto& absc = gauss::abscissa();
  const auto& wts = gauss::weights();
  auto plan = std::make_shared<Plan>();
  plan->scheme = quad_.scheme;
  const std::size_t needed = (br.size() - 1) * 10;
  if (needed > quad_.max_nodes)
    throw ConfigError("rho-panel quadrature needs " + std::to_string(needed) +
                      " nodes, above quadrature.max_nodes");
  for (std::size_t p = 0; p + 1 < br.size(); ++p) {
    const double a = br[p], b = br[p + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < absc.size(); ++q) {
      for (int sgn : {-1, 1}) {
        if (absc[q] == 0.0 && sgn < 0) continue;
        const double rho = mid + sgn * half * absc[q];
        const double r2 = rho * rho;
        plan->s.push_back(cplx(0.0, 8.0 * r2 * r2));
        // (1/pi) Re int e^{i mu t} v~ d mu  with  d mu = 32 rho^3 d rho.
        plan->weight.push_back(32.0 / pi * rho * r2 * half * wts[q]);
      }
    }
  }
  // Sort by rho so the root continuation walks monotonically.
  std::vector<std::size_t> order(plan->s.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return plan->s[i].imag() < plan->s[j].imag(); });
  Plan sorted;
  sorted.scheme = plan->scheme;
  for (std::size_t i : order) {
    sorted.s.push_back(plan->s[i]);
    sorted.weight.push_back(plan->weight[i]);
  }
  *plan = std::move(sorted);
  fill_roots(*plan, delta_);
  return plan;
}

namespace {

void data_transforms(const BoundaryOperator::Plan& plan, const BoundaryData& h, const QuadratureConfig& quad,
                     std::vector<cplx>& g1, std::vector<cplx>& g2) {
  if (plan.scheme == QuadratureScheme::shifted_trapezoid) {
    shifted_transforms(plan, h.h1, g1);
    shifted_transforms(plan, h.h2, g2);
  } else {
    g1 = laplace_transform(h.grid, h.h1, plan.s, quad.laplace);
    g2 = laplace_transform(h.grid, h.h2, plan.s, quad.laplace);
  }
}

void tail_check(const BoundaryOperator::Plan& plan, const BoundaryData& h, const QuadratureConfig& quad,
                const std::vector<cplx>& g1, const std::vector<cplx>& g2, Diagnostics* diag,
                double error_scale = 0.0) {
  if (!diag || plan.scheme != QuadratureScheme::shifted_trapezoid) return;
  const double scale = std::max({sup_abs(h.h1), sup_abs(h.h2), error_scale});
  if (scale == 0.0) return;
  double tail = 0.0;
  for (std::size_t k = plan.s.size() - plan.big_m; k < plan.s.size(); ++k)
    tail += plan.weight[k] * (std::abs(g1[k]) + std::abs(g2[k]));
  tail *= std::exp(plan.r * h.grid.horizon());
  if (tail > quad.warn_tol * scale)
    diag->warn("boundary quadrature: estimated truncation error " + std::to_string(tail / scale) +
               " (relative) at x=0; boundary data are rough or under-resolved in time");
}

}  // namespace

std::vector<std::vector<double>> BoundaryOperator::eval(const BoundaryData& h, std::span<const double> x_nodes,
                                                        std::span<const double> t_nodes, Diagnostics* diag,
                                                        bool derivative) const {
  h.check();
  for (double x : x_nodes)
    if (!(x >= 0.0)) throw DomainError("boundary solution is evaluated at x >= 0 only");
  for (double t : t_nodes)
    if (!(t >= 0.0) || t > h.grid.horizon() * (1.0 + 1e-12)) throw DomainError("evaluation time outside [0,T]");
  std::vector<std::vector<double>> out(x_nodes.size(), std::vector<double>(t_nodes.size(), 0.0));
  if (h.is_zero()) return out;
  auto plan = plan_for(h, t_nodes, diag);
  std::vector<cplx> g1, g2;
  data_transforms(*plan, h, quad_, g1, g2);
  tail_check(*plan, h, quad_, g1, g2, diag);
  const auto c = kernel_coefficients(*plan, g1, g2);
  const std::size_t k_count = plan->s.size();
  std::vector<cplx> kernel(k_count);
  for (std::size_t ix = 0; ix < x_nodes.size(); ++ix) {
    const double x = x_nodes[ix];
    for (std::size_t k = 0; k < k_count; ++k) {
      const cplx e1 = std::exp(plan->l1[k] * x), e2 = std::exp(plan->l2[k] * x);
      kernel[k] = derivative ? c.c1[k] * plan->l1[k] * e1 + c.c2[k] * plan->l2[k] * e2 : c.c1[k] * e1 + c.c2[k] * e2;
    }
    for (std::size_t it = 0; it < t_nodes.size(); ++it) {
      const double t = t_nodes[it];
      double acc = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) acc += plan->weight[k] * (std::exp(plan->s[k] * t) * kernel[k]).real();
      out[ix][it] = acc;
    }
  }
  return out;
}

BoundaryLattice BoundaryOperator::lattice(const BoundaryData& h, double dx, std::size_t nx, bool with_derivative,
                                          Diagnostics* diag, double error_scale) const {
  h.check();
  if (!(dx > 0.0)) throw DomainError("lattice spacing must be positive");
  const std::size_t nt = h.grid.size();
  BoundaryLattice out;
  out.dx = dx;
  out.v.assign(nt, std::vector<double>(nx, 0.0));
  if (with_derivative) out.vx.assign(nt, std::vector<double>(nx, 0.0));
  if (h.is_zero() || nx == 0) return out;

  std::vector<double> t_nodes(nt);
  for (std::size_t j = 0; j < nt; ++j) t_nodes[j] = h.grid.t(j);
  auto plan = plan_for(h, t_nodes, diag);

  if (plan->scheme != QuadratureScheme::shifted_trapezoid) {
    std::vector<double> x_nodes(nx);
    for (std::size_t i = 0; i < nx; ++i) x_nodes[i] = dx * static_cast<double>(i);
    const auto v = eval(h, x_nodes, t_nodes, diag, false);
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < nt; ++j) out.v[j][i] = v[i][j];
    if (with_derivative) {
      const auto vx = eval(h, x_nodes, t_nodes, nullptr, true);
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nt; ++j) out.vx[j][i] = vx[i][j];
    }
    return out;
  }

  std::vector<cplx> g1, g2;
  data_transforms(*plan, h, quad_, g1, g2);
  tail_check(*plan, h, quad_, g1, g2, diag, error_scale);
  const auto c = kernel_coefficients(*plan, g1, g2);
  const std::size_t k_count = plan->s.size(), big_m = plan->big_m;

  // Running exp(l x_i) for every node, advanced by one lattice step per x.
  std::vector<cplx> a1(k_count), a2(k_count), step1(k_count), step2(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    a1[k] = c.c1[k] * plan->weight[k] * plan->period;
    a2[k] = c.c2[k] * plan->weight[k] * plan->period;
    step1[k] = std::exp(plan->l1[k] * dx);
    step2[k] = std::exp(plan->l2[k] * dx);
  }
  std::vector<double> growth(nt);
  for (std::size_t j = 0; j < nt; ++j) growth[j] = std::exp(plan->r * h.grid.t(j)) / plan->period;

  std::vector<cplx> fold(big_m), fold_x(with_derivative ? big_m : 0);
  for (std::size_t i = 0; i < nx; ++i) {
    std::fill(fold.begin(), fold.end(), cplx{});
    if (with_derivative) std::fill(fold_x.begin(), fold_x.end(), cplx{});
    double mag = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      const std::size_t q = k % big_m;
      fold[q] += a1[k] + a2[k];
      if (with_derivative) fold_x[q] += a1[k] * plan->l1[k] + a2[k] * plan->l2[k];
      mag = std::max(mag, std::abs(a1[k]) + std::abs(a2[k]));
      a1[k] *= step1[k];
      a2[k] *= step2[k];
    }
    if (mag == 0.0) break;  // every mode has decayed below underflow
    detail::fft_inplace(fold.data(), big_m, +1);
    for (std::size_t j = 0; j < nt; ++j) out.v[j][i] = growth[j] * fold[j].real();
    if (with_derivative) {
      detail::fft_inplace(fold_x.data(), big_m, +1);
      for (std::size_t j = 0; j < nt; ++j) out.vx[j][i] = growth[j] * fold_x[j].real();
    }
  }
  return out;
}

std::vector<std::vector<double>> wbdr_eval(const BoundaryData& h, std::span<const double> x_nodes,
                                           std::span<const double> t_nodes, const ModelParams& params,
                                           const QuadratureConfig& quad, Diagnostics* diag) {
  return BoundaryOperator(params.delta, quad).eval(h, x_nodes, t_nodes, diag);
}

SpectralField wbdr_field(const BoundaryData& h, const Grid1D& grid, double t, const ModelParams& params,
                         const QuadratureConfig& quad, Diagnostics* diag) {
  const std::size_t c = grid.zero_index();
  const std::size_t half = grid.size() - c;
  std::vector<double> x(half);
  for (std::size_t i = 0; i < half; ++i) x[i] = grid.dx() * static_cast<double>(i);
  const std::array<double, 1> tn{t};
  const auto v = wbdr_eval(h, x, tn, params, quad, diag);
  std::vector<double> vals(half);
  for (std::size_t i = 0; i < half; ++i) vals[i] = v[i][0];
  return SpectralField::from_real(grid, extend_half_line(grid, vals, Extension::blend4));
}

}  // namespace ksq
