#include "ksq/compat.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <tuple>

#include "ksq/errors.hpp"

namespace ksq {

ExpPoly ExpPoly::monomial(double c, int p, double a, double b) {
  if (p < 0) throw DomainError("negative powers are not supported");
  ExpPoly e;
  if (c != 0.0) e.terms_.push_back({c, p, a, b});
  return e;
}

double ExpPoly::operator()(double x) const {
  double acc = 0.0;
  for (const auto& t : terms_) acc += t.c * std::pow(x, t.p) * std::exp(-t.a * x * x - t.b * x);
  return acc;
}

ExpPoly ExpPoly::derivative(int order) const {
  ExpPoly cur = *this;
  for (int o = 0; o < order; ++o) {
    ExpPoly next;
    for (const auto& t : cur.terms_) {
      if (t.p > 0) next.terms_.push_back({t.c * t.p, t.p - 1, t.a, t.b});
      if (t.a != 0.0) next.terms_.push_back({-2.0 * t.a * t.c, t.p + 1, t.a, t.b});
      if (t.b != 0.0) next.terms_.push_back({-t.b * t.c, t.p, t.a, t.b});
    }
    next.simplify();
    cur = std::move(next);
  }
  return cur;
}

ExpPoly& ExpPoly::operator+=(const ExpPoly& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  simplify();
  return *this;
}

ExpPoly& ExpPoly::operator*=(double s) {
  for (auto& t : terms_) t.c *= s;
  simplify();
  return *this;
}

ExpPoly operator*(const ExpPoly& x, const ExpPoly& y) {
  ExpPoly out;
  for (const auto& a : x.terms_)
    for (const auto& b : y.terms_) out.terms_.push_back({a.c * b.c, a.p + b.p, a.a + b.a, a.b + b.b});
  out.simplify();
  return out;
}

void ExpPoly::simplify() {
  std::sort(terms_.begin(), terms_.end(), [](const Term& l, const Term& r) {
    return std::tie(l.a, l.b, l.p) < std::tie(r.a, r.b, r.p);
  });
  std::vector<Term> merged;
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().p == t.p && merged.back().a == t.a && merged.back().b == t.b)
      merged.back().c += t.c;
    else
      merged.push_back(t);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const Term& t) { return t.c == 0.0; }), merged.end());
  terms_ = std::move(merged);
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::vector<ExpPoly> compatibility_sequence(const ExpPoly& phi, double delta, int k_max) {
  if (k_max < 0) throw DomainError("k_max must be nonnegative");
  std::vector<ExpPoly> seq{phi};
  for (int k = 1; k <= k_max; ++k) {
    const ExpPoly& prev = seq.back();
    ExpPoly next = prev.derivative(4) * -1.0 + prev.derivative(3) * -delta + prev.derivative(2) * -1.0;
    for (int j = 0; j <= k - 1; ++j)
      next += (seq[static_cast<std::size_t>(j)] * seq[static_cast<std::size_t>(k - 1 - j)].derivative(1)) *
              -binomial(k - 1, j);
    seq.push_back(std::move(next));
  }
  return seq;
}

namespace {

double tail_fraction(const SpectralField& f) {
  const auto& c = f.coeffs();
  const Grid1D& g = f.grid();
  const double cut = 0.75 * std::abs(g.xi(g.size() / 2));
  double tail = 0.0, total = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    total += std::norm(c[k]);
    if (std::abs(g.xi(k)) > cut) tail += std::norm(c[k]);
  }
  return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

}  // namespace

std::vector<SpectralField> compatibility_sequence(const SpectralField& phi, double delta, int k_max) {
  if (k_max < 0) throw DomainError("k_max must be nonnegative");
  SpectralField p0 = phi;
  p0.sync();
  std::vector<SpectralField> seq{p0};
  const Grid1D& grid = p0.grid();
  for (int k = 1; k <= k_max; ++k) {
    const SpectralField& prev = seq.back();
    auto& pc = prev.coeffs();
    std::vector<cplx> c(pc.size());
    for (std::size_t q = 0; q < c.size(); ++q) {
      const double xi = grid.xi(q);
      const cplx ik(0.0, xi);
      const cplx d3 = grid.is_nyquist(q) ? cplx{} : ik * ik * ik;
      c[q] = -(std::pow(xi, 4) + delta * d3 + ik * ik) * pc[q];
    }
    SpectralField next = SpectralField::from_coeffs(grid, std::move(c));
    next.sync();
    std::vector<cplx> vals = next.values();
    for (int j = 0; j <= k - 1; ++j) {
      const auto& a = seq[static_cast<std::size_t>(j)].values();
      const auto d = derivative(seq[static_cast<std::size_t>(k - 1 - j)], 1);
      const auto& b = d.values();
      const double w = binomial(k - 1, j);
      for (std::size_t i = 0; i < vals.size(); ++i) vals[i] -= w * a[i] * b[i];
    }
    next = SpectralField::from_values(grid, std::move(vals));
    next.sync();
    const double tail = tail_fraction(next);
    if (tail > 1e-8)
      throw AccuracyError("phi_" + std::to_string(k) + " is not resolved on this grid", tail);
    seq.push_back(std::move(next));
  }
  return seq;
}

std::string to_string(CompatCase c) {
  switch (c) {
    case CompatCase::i: return "i";
    case CompatCase::ii: return "ii";
    case CompatCase::iii: return "iii";
  }
  return "?";
}

CompatCase compat_case(double s) {
  const double frac = s - 4.0 * std::floor(s / 4.0);
  if (frac <= 0.5) return CompatCase::i;
  if (frac <= 1.5) return CompatCase::ii;
  return CompatCase::iii;
}

double boundary_derivative_at_zero(const TimeGrid& grid, std::span<const double> h, int k, double* error) {
  auto fit = [&](int degree) {
    const int npts = 2 * (degree);
    if (static_cast<std::size_t>(npts) > h.size()) throw DomainError("too few boundary samples for the derivative fit");
    Eigen::MatrixXd a(npts, degree + 1);
    Eigen::VectorXd y(npts);
    const double dt = grid.dt();
    for (int j = 0; j < npts; ++j) {
      // Scaled abscissa keeps the Vandermonde matrix well conditioned.
      const double tau = static_cast<double>(j);
      for (int d = 0; d <= degree; ++d) a(j, d) = std::pow(tau, d);
      y(j) = h[static_cast<std::size_t>(j)];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
    return std::tgamma(k + 1.0) * c(k) / std::pow(dt, k);
  };
  const double v = fit(k + 2);
  if (error) {
    try {
      *error = std::abs(fit(k + 3) - v);
    } catch (const DomainError&) {
      *error = std::abs(v);
    }
  }
  return v;
}

namespace {

template <class Eval>
CompatReport check_impl(Eval&& eval_phi, const BoundaryData& h, double s, CompatOptions opts) {
  h.check();
  CompatReport rep;
  rep.s = s;
  rep.k_max = static_cast<int>(std::floor(s / 4.0));
  rep.tag = compat_case(s);
  if (rep.k_max < 0) {
    rep.notes.push_back("s < 0: no corner conditions");
    return rep;
  }
  int both_upto = rep.k_max - 1;  // conditions on both traces for k <= both_upto
  bool value_at_kmax = false;
  if (rep.tag == CompatCase::ii) value_at_kmax = true;
  if (rep.tag == CompatCase::iii) both_upto = rep.k_max;
  const int needed = std::max(both_upto, value_at_kmax ? rep.k_max : -1);
  if (needed < 0) {
    rep.notes.push_back("no conditions required at this s");
    return rep;
  }
  std::vector<std::pair<double, double>> phi_vals;  // (phi_k(0), phi_k'(0))
  eval_phi(needed, phi_vals);
  auto add = [&](int k, const char* which, double pv, std::span<const double> hs) {
    CompatCondition c;
    c.k = k;
    c.trace = which;
    c.phi_value = pv;
    c.h_value = boundary_derivative_at_zero(h.grid, hs, k, &c.h_error);
    c.mismatch = std::abs(c.phi_value - c.h_value);
    const double thresh = opts.tol * (1.0 + std::abs(c.phi_value) + std::abs(c.h_value));
    if (c.h_error > thresh) rep.inconclusive = true;
    if (c.mismatch >= thresh) rep.compatible = false;
    rep.conditions.push_back(c);
  };
  for (int k = 0; k <= both_upto; ++k) {
    add(k, "u", phi_vals[static_cast<std::size_t>(k)].first, h.h1);
    add(k, "u_x", phi_vals[static_cast<std::size_t>(k)].second, h.h2);
  }
  if (value_at_kmax) add(rep.k_max, "u", phi_vals[static_cast<std::size_t>(rep.k_max)].first, h.h1);
  if (rep.inconclusive) {
    rep.compatible = false;
    rep.notes.push_back("boundary derivative estimate at t=0 is not accurate enough; report is inconclusive");
  }
  return rep;
}

}  // namespace

CompatReport check_compatibility(const ExpPoly& phi, const BoundaryData& h, double s, double delta,
                                 CompatOptions opts) {
  return check_impl(
      [&](int kmax, std::vector<std::pair<double, double>>& out) {
        for (const auto& p : compatibility_sequence(phi, delta, kmax)) out.emplace_back(p(0.0), p.derivative(1)(0.0));
      },
      h, s, opts);
}

CompatReport check_compatibility(const SpectralField& phi, const BoundaryData& h, double s, double delta,
                                 CompatOptions opts) {
  const std::size_t c = phi.grid().zero_index();
  return check_impl(
      [&](int kmax, std::vector<std::pair<double, double>>& out) {
        for (const auto& p : compatibility_sequence(phi, delta, kmax)) {
          const auto d = derivative(p, 1);
          out.emplace_back(p.values()[c].real(), d.values()[c].real());
        }
      },
      h, s, opts);
}

void to_json(nlohmann::json& j, const CompatReport& r) {
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : r.conditions)
    conds.push_back({{"k", c.k},
                     {"trace", c.trace},
                     {"phi_value", c.phi_value},
                     {"h_value", c.h_value},
                     {"mismatch", c.mismatch},
                     {"h_error", c.h_error}});
  j = nlohmann::json{{"s", r.s},         {"k_max", r.k_max},       {"case", to_string(r.tag)},
                     {"conditions", conds}, {"compatible", r.compatible}, {"inconclusive", r.inconclusive},
                     {"notes", r.notes}};
}

}  // namespace ksq
