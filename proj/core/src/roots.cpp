#include "ksq/roots.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "ksq/errors.hpp"

namespace ksq {

namespace {

cplx poly(cplx l, cplx tau, double delta) { return l * l * l * (l + delta) + tau; }
cplx dpoly(cplx l, double delta) { return l * l * (4.0 * l + 3.0 * delta); }

// Newton steps that are kept only while they reduce the residual.
cplx newton(cplx l, cplx tau, double delta, int steps) {
  double res = std::abs(poly(l, tau, delta));
  for (int i = 0; i < steps && res > 0.0; ++i) {
    const cplx d = dpoly(l, delta);
    if (d == cplx{}) break;
    const cplx next = l - poly(l, tau, delta) / d;
    const double r = std::abs(poly(next, tau, delta));
    if (!(r < res)) break;
    l = next;
    res = r;
  }
  return l;
}

double residual(cplx l, cplx tau, double delta) { return std::abs(poly(l, tau, delta)); }

}  // namespace

std::array<cplx, 4> quartic_roots(cplx tau, double delta) {
  if (delta == 0.0) {
    // Fourth roots of -tau; the companion matrix is nearly nilpotent for small tau.
    const double mag = std::pow(std::abs(tau), 0.25);
    const double base = std::arg(-tau) / 4.0;
    std::array<cplx, 4> r;
    for (int i = 0; i < 4; ++i)
      r[static_cast<std::size_t>(i)] = newton(std::polar(mag, base + i * std::numbers::pi / 2.0), tau, 0.0, 1);
    return r;
  }
  // Companion matrix of the rescaled quartic in mu = lambda / m; unscaled, large tau
  // swamps the eigenvalue solver.
  const double m = std::max(std::pow(std::abs(tau), 0.25), std::abs(delta));
  Eigen::Matrix4cd c = Eigen::Matrix4cd::Zero();
  c(0, 0) = -delta / m;
  c(0, 3) = -tau / (m * m * m * m);
  c(1, 0) = 1.0;
  c(2, 1) = 1.0;
  c(3, 2) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(c, false);
  std::array<cplx, 4> r;
  for (int i = 0; i < 4; ++i) r[static_cast<std::size_t>(i)] = newton(m * es.eigenvalues()(i), tau, delta, 2);
  return r;
}

std::array<cplx, 2> zero_delta_roots(cplx tau) {
  const double mag = std::pow(std::abs(tau), 0.25);
  double a = std::arg(-tau);  // in [pi/2, 3pi/2] when Re tau >= 0
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  const double base = a / 4.0;
  return {std::polar(mag, base + std::numbers::pi / 2.0), std::polar(mag, base + std::numbers::pi)};
}

bool track_roots(RootPair& pair, cplx tau, double delta) {
  std::array<cplx, 2> l{pair.lambda1, pair.lambda2};
  const double scale = std::max(std::abs(l[0]), std::abs(l[1]));
  for (auto& z : l) {
    const cplx start = z;
    z = newton(z, tau, delta, 8);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    if (z.real() >= 0.0) return false;
    if (std::abs(z - start) > 0.25 * scale) return false;
    if (residual(z, tau, delta) > 1e-12 * (1.0 + std::abs(tau))) return false;
  }
  if (std::abs(l[0] - l[1]) < 1e-8 * scale) return false;
  pair.lambda1 = l[0];
  pair.lambda2 = l[1];
  pair.tau = tau;
  pair.delta = delta;
  pair.residuals = {residual(l[0], tau, delta), residual(l[1], tau, delta)};
  return true;
}

RootPair characteristic_roots(cplx tau, double delta) {
  if (tau == cplx{}) throw DegenerateError("tau = 0: triple root at the origin");
  if (tau.real() < 0.0) throw DomainError("characteristic roots need Re tau >= 0");

  const auto all = quartic_roots(tau, delta);
  std::array<cplx, 4> left{};
  int count = 0;
  for (cplx z : all)
    if (z.real() < 0.0) {
      if (count < 4) left[static_cast<std::size_t>(count)] = z;
      ++count;
    }
  if (count != 2) throw SelectionError("expected exactly two roots with negative real part", all);

  const auto start = zero_delta_roots(tau);
  std::array<cplx, 2> tracked = start;
  bool labeled = delta == 0.0;
  // Continuation in delta from the closed form, refining the path until the
  // tracked roots land on distinct selected roots.
  for (int n = 16; !labeled && n <= 4096; n *= 2) {
    std::array<cplx, 2> z = start;
    for (int i = 1; i <= n; ++i) {
      const double d = delta * static_cast<double>(i) / static_cast<double>(n);
      for (auto& w : z) w = newton(w, tau, d, 4);
    }
    const double gap = std::abs(left[0] - left[1]);
    const double e00 = std::abs(z[0] - left[0]) + std::abs(z[1] - left[1]);
    const double e01 = std::abs(z[0] - left[1]) + std::abs(z[1] - left[0]);
    if (std::min(e00, e01) < 0.25 * gap) {
      tracked = z;
      labeled = true;
    }
  }
  RootPair out;
  out.tau = tau;
  out.delta = delta;
  if (labeled) {
    const double e00 = std::abs(tracked[0] - left[0]) + std::abs(tracked[1] - left[1]);
    const double e01 = std::abs(tracked[0] - left[1]) + std::abs(tracked[1] - left[0]);
    if (e00 <= e01) {
      out.lambda1 = left[0];
      out.lambda2 = left[1];
    } else {
      out.lambda1 = left[1];
      out.lambda2 = left[0];
    }
  } else {
    // Real tau past the double-root branch point: both labels are equivalent there.
    out.lambda1 = left[0].imag() >= left[1].imag() ? left[0] : left[1];
    out.lambda2 = left[0].imag() >= left[1].imag() ? left[1] : left[0];
  }
  if (delta == 0.0) {
    // Exact closed form; the eigen-solver output only served to verify the count.
    out.lambda1 = newton(start[0], tau, 0.0, 1);
    out.lambda2 = newton(start[1], tau, 0.0, 1);
  }
  out.residuals = {residual(out.lambda1, tau, delta), residual(out.lambda2, tau, delta)};
  return out;
}

std::vector<RootPair> root_curve(std::span<const double> rho_nodes, double delta) {
  std::vector<RootPair> out;
  out.reserve(rho_nodes.size());
  for (std::size_t i = 0; i < rho_nodes.size(); ++i) {
    const double rho = rho_nodes[i];
    if (!(rho > 0.0)) throw DomainError("rho nodes must be positive");
    if (i > 0 && !(rho > rho_nodes[i - 1])) throw DomainError("rho nodes must be strictly increasing");
    const auto tau_at = [](double r) { return cplx(0.0, 8.0 * r * r * r * r); };
    RootPair p = characteristic_roots(tau_at(rho), delta);
    if (!out.empty()) {
      // Follow the previous pair along the contour with geometric substeps, doubling
      // them until every Newton continuation converges, then label p to match.
      const double prev = rho_nodes[i - 1];
      bool matched = false;
      for (int sub = 1; sub <= 4096 && !matched; sub *= 2) {
        RootPair q = out.back();
        bool ok = true;
        for (int k = 1; k <= sub && ok; ++k)
          ok = track_roots(q, tau_at(prev * std::pow(rho / prev, static_cast<double>(k) / sub)), delta);
        if (!ok) continue;
        const double tol = 1e-8 * std::abs(q.lambda1);
        if (std::abs(q.lambda1 - p.lambda2) < tol && std::abs(q.lambda2 - p.lambda1) < tol) {
          std::swap(p.lambda1, p.lambda2);
          std::swap(p.residuals[0], p.residuals[1]);
        }
        matched = std::abs(q.lambda1 - p.lambda1) < tol && std::abs(q.lambda2 - p.lambda2) < tol;
      }
      if (!matched)
        throw RefinementError("root labels could not be followed between rho = " + std::to_string(prev) +
                              " and " + std::to_string(rho) + "; refine the nodes");
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace ksq
