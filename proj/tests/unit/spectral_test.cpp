#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ksq/errors.hpp"
#include "ksq/sobolev.hpp"
#include "ksq/spectral.hpp"

namespace ksq {
namespace {

std::vector<double> sample(const Grid1D& g, auto f) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.x(i));
  return v;
}

TEST(Grid, CenteredLayout) {
  const auto g = Grid1D::centered(40.0, 512);
  EXPECT_DOUBLE_EQ(g.x(0), -20.0);
  EXPECT_EQ(g.zero_index(), 256u);
  EXPECT_DOUBLE_EQ(g.x(g.zero_index()), 0.0);
  EXPECT_THROW(Grid1D::centered(40.0, 500), ConfigError);
}

TEST(Spectral, GaussianCoefficientsMatchAnalyticTransform) {
  const auto g = Grid1D::centered(40.0, 512);
  auto f = SpectralField::from_real(g, sample(g, [](double x) { return std::exp(-x * x); })).sync();
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double xi = g.xi(k);
    err = std::max(err, std::abs(f.coeffs()[k] - std::sqrt(std::numbers::pi) * std::exp(-xi * xi / 4.0)));
  }
  EXPECT_LT(err, 1e-8);
}

TEST(Spectral, RoundTrip) {
  const auto g = Grid1D::centered(20.0, 256);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<double> v(g.size());
  for (auto& x : v) x = n(rng);
  auto f = SpectralField::from_real(g, v).sync();
  auto back = SpectralField::from_coeffs(g, f.coeffs()).sync().real_values();
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(back[i], v[i], 1e-12);
}

TEST(Spectral, StaleAccessThrows) {
  const auto g = Grid1D::centered(20.0, 64);
  auto f = SpectralField::from_real(g, std::vector<double>(64, 1.0));
  EXPECT_THROW((void)f.coeffs(), DomainError);
  f.sync();
  EXPECT_NO_THROW((void)f.coeffs());
}

TEST(Spectral, SingleModeDecaysExactly) {
  const auto g = Grid1D::centered(2.0 * std::numbers::pi, 64);
  const double xi0 = 3.0, t = 0.01;
  auto f = SpectralField::from_values(g, [&] {
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(1.0, xi0 * g.x(i));
    return v;
  }());
  const auto u = propagate_whole_line(f, t, ModelParams{0.0, 0.0});
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(std::abs(u.values()[i] - std::exp(-std::pow(xi0, 4) * t) * std::polar(1.0, xi0 * g.x(i))), 0.0, 1e-13);
}

TEST(Spectral, PropagationMatchesCoefficientSum) {
  const auto g = Grid1D::centered(20.0, 256);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::vector<double> v(g.size());
  for (auto& x : v) x = n(rng);
  const auto f = SpectralField::from_real(g, v).sync();
  const double t = 0.1;
  const auto u = propagate_whole_line(f, t, ModelParams{1.0, 0.0});
  double expect = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    expect += std::norm(f.coeffs()[k]) * std::exp(-2.0 * std::pow(g.xi(k), 4) * t);
  expect = std::sqrt(expect / g.length());
  EXPECT_NEAR(hs_norm_line(u, 0.0), expect, 1e-10 * expect);
  EXPECT_LE(hs_norm_line(u, 0.0), hs_norm_line(f, 0.0));
}

TEST(Spectral, SemigroupLaw) {
  const auto g = Grid1D::centered(40.0, 512);
  const auto f = SpectralField::from_real(g, sample(g, [](double x) { return x * std::exp(-x * x); })).sync();
  const ModelParams p{0.8, 0.0};
  const auto a = propagate_whole_line(propagate_whole_line(f, 0.03, p), 0.05, p);
  const auto b = propagate_whole_line(f, 0.08, p);
  double diff = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) diff = std::max(diff, std::abs(a.values()[i] - b.values()[i]));
  EXPECT_LT(diff, 1e-12);
}

TEST(Spectral, DerivativeOfSine) {
  const auto g = Grid1D::centered(2.0 * std::numbers::pi, 64);
  const auto f = SpectralField::from_real(g, sample(g, [](double x) { return std::sin(2.0 * x); })).sync();
  const auto d3 = derivative(f, 3).real_values();
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(d3[i], -8.0 * std::cos(2.0 * g.x(i)), 1e-10);
}

TEST(Extension, BlendMatchesDerivativesAtZero) {
  // The order-4 blend extends a smooth function to a C^3 function: one-sided
  // difference quotients at x = 0 agree up to O(dx).
  const auto g = Grid1D::centered(40.0, 4096);
  const std::size_t c = g.zero_index();
  std::vector<double> half(g.size() - c);
  for (std::size_t i = 0; i < half.size(); ++i) half[i] = std::sin(g.x(c + i)) * std::exp(-0.1 * g.x(c + i));
  const auto full = extend_half_line(g, half, Extension::blend4);
  const double dx = g.dx();
  const double right = (full[c + 1] - full[c]) / dx, left = (full[c] - full[c - 1]) / dx;
  EXPECT_NEAR(left, right, 5.0 * dx);
  const double right2 = (full[c + 2] - 2 * full[c + 1] + full[c]) / (dx * dx);
  const double left2 = (full[c] - 2 * full[c - 1] + full[c - 2]) / (dx * dx);
  EXPECT_NEAR(left2, right2, 10.0 * dx);
  EXPECT_EQ(full[0], 0.0);  // only the near-boundary part is reflected
}

TEST(Extension, RegularityGuard) {
  EXPECT_EQ(resolve_extension(Extension::automatic, -1.0), Extension::zero);
  EXPECT_EQ(resolve_extension(Extension::automatic, 2.0), Extension::blend4);
  EXPECT_THROW((void)resolve_extension(Extension::even, 2.0), ConfigError);
}

TEST(Etd, WeightsIntegrateConstantSource) {
  // p' = a p + 1, p(0) = 0  =>  p(dt) = (e^{a dt} - 1) / a; real a uses expm1 for the reference
  const double dt = 0.01;
  for (double a : {-1e-4, -3.0, -5000.0}) {
    const auto w = etd_weights(a, dt);
    const double expect = std::expm1(a * dt) / a;
    EXPECT_NEAR(std::abs(w.a + w.b - expect), 0.0, 1e-14 * std::abs(expect));
  }
  const cplx a(-3.0, 2.0);
  const auto w = etd_weights(a, dt);
  EXPECT_NEAR(std::abs(w.a + w.b - (std::exp(a * dt) - 1.0) / a), 0.0, 1e-14);
}

}  // namespace
}  // namespace ksq
