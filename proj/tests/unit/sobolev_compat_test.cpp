#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ksq/compat.hpp"
#include "ksq/data_families.hpp"
#include "ksq/errors.hpp"
#include "ksq/sobolev.hpp"

namespace ksq {
namespace {

std::vector<double> exp_decay_on_half_line(const Grid1D& g) {
  std::vector<double> v(g.size(), 0.0);
  for (std::size_t i = g.zero_index(); i < g.size(); ++i) v[i] = std::exp(-g.x(i));
  return v;
}

TEST(Sobolev, GaussianLineNorm) {
  // sqrt(int (1 + xi^2) pi e^{-xi^2/2} dxi / 2pi), 30-digit quadrature
  const auto g = Grid1D::centered(40.0, 512);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-g.x(i) * g.x(i));
  EXPECT_NEAR(hs_norm_line(SpectralField::from_real(g, v).sync(), 1.0), 1.58323348708615953858, 1e-8);
}

TEST(Sobolev, HalfLineL2OfExponential) {
  const auto g = Grid1D::centered(40.0, 16384);
  EXPECT_NEAR(hs_norm_halfline(g, exp_decay_on_half_line(g), 0.0), 1.0 / std::sqrt(2.0), 1e-6);
}

TEST(Sobolev, HalfLineExtensionNormsOfExponential) {
  // Least-norm extensions of e^{-x}: e^{x} for s = 1 and (1 - 2x) e^{x} for s = 2 give
  // sqrt(2) and 2 sqrt(2).
  const auto g = Grid1D::centered(40.0, 2048);
  const auto v = exp_decay_on_half_line(g);
  EXPECT_NEAR(hs_norm_halfline(g, v, 1.0), std::sqrt(2.0), 0.01 * std::sqrt(2.0));
  EXPECT_NEAR(hs_norm_halfline(g, v, 2.0), 2.0 * std::sqrt(2.0), 0.01 * 2.0 * std::sqrt(2.0));
}

TEST(Sobolev, HalfLineNormConvergesUnderRefinement) {
  double prev = 1e300;
  for (std::size_t n : {512, 1024, 2048}) {
    const auto g = Grid1D::centered(40.0, n);
    const double err = std::abs(hs_norm_halfline(g, exp_decay_on_half_line(g), 1.0) - std::sqrt(2.0));
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Sobolev, HalfLineNormIgnoresNegativeSide) {
  const auto g = Grid1D::centered(40.0, 1024);
  auto a = exp_decay_on_half_line(g), b = a;
  for (std::size_t i = 0; i < g.zero_index(); ++i) b[i] = std::sin(g.x(i));
  for (double s : {-1.0, 0.0, 1.0}) EXPECT_DOUBLE_EQ(hs_norm_halfline(g, a, s), hs_norm_halfline(g, b, s));
}

TEST(Sobolev, TimeNormWeightIncreasesWithIndex) {
  const double T = 1.0;
  std::vector<double> g(129);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::pow(std::sin(std::numbers::pi * j / 128.0), 2);
  double prev = 0.0;
  for (double r : {0.0, 0.125, 0.375, 1.0}) {
    const double n = hr_norm_time(g, T, r);
    EXPECT_GT(n, prev);
    prev = n;
  }
}

TEST(Sobolev, WeightedSupOfConstantSeries) {
  const auto g = Grid1D::centered(40.0, 512);
  const TimeGrid tg(1.0, 16);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-std::pow(g.x(i) - 5.0, 2));
  const auto f = SpectralField::from_real(g, v).sync();
  FieldSeries u(g, tg);
  u.snapshots.assign(tg.size(), f);
  const auto parts = weighted_solution_norm_parts(u, -1.0, 0.1);
  EXPECT_NEAR(parts.weighted_sup_l2, hs_norm_halfline(f, 0.0), 1e-12);
}

TEST(Sobolev, DataNormOfExponential) {
  const auto g = Grid1D::centered(40.0, 16384);
  const auto phi = SpectralField::from_real(g, exp_decay_on_half_line(g)).sync();
  EXPECT_EQ(data_norm(phi, BoundaryData::zeros(TimeGrid(1.0, 8)), 0.0), hs_norm_halfline(phi, 0.0));
  EXPECT_NEAR(data_norm(phi, BoundaryData::zeros(TimeGrid(1.0, 8)), 0.0), 1.0 / std::sqrt(2.0), 1e-6);
}

TEST(Compat, LinearDataSymbolic) {
  for (double delta : {0.0, 1.3}) {
    const auto seq = compatibility_sequence(ExpPoly::monomial(1.0, 1), delta, 2);
    ASSERT_EQ(seq.size(), 3u);
    for (double x : {-1.0, 0.0, 0.5, 3.0}) {
      EXPECT_EQ(seq[1](x), -x);
      EXPECT_EQ(seq[2](x), 2.0 * x);
    }
  }
}

TEST(Compat, GridPathMatchesSymbolic) {
  const auto g = Grid1D::centered(40.0, 256);
  const ExpPoly phi = ExpPoly::monomial(1.0, 0, 1.0, 0.0);  // e^{-x^2}
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = phi(g.x(i));
  const auto sym = compatibility_sequence(phi, 0.5, 2);
  const auto num = compatibility_sequence(SpectralField::from_real(g, v).sync(), 0.5, 2);
  for (int k = 0; k <= 2; ++k) {
    const auto w = num[k].real_values();
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(w[i] - sym[k](g.x(i))));
      ref = std::max(ref, std::abs(sym[k](g.x(i))));
    }
    EXPECT_LT(err, 1e-6 * ref) << "k=" << k;
  }
}

TEST(Compat, UnresolvedIteratesRejected) {
  // the C^3 blend near x = 0 cannot carry eight derivatives
  const auto g = Grid1D::centered(40.0, 1024);
  const auto f = sample_initial(g, {{"family", "gaussian"}, {"amp", 1.0}, {"center", 2.0}, {"width", 1.0}});
  EXPECT_THROW((void)compatibility_sequence(f, 0.5, 2), AccuracyError);
}

TEST(Compat, CaseSelection) {
  EXPECT_EQ(compat_case(0.2), CompatCase::i);
  EXPECT_EQ(compat_case(1.0), CompatCase::ii);
  EXPECT_EQ(compat_case(2.0), CompatCase::iii);
}

TEST(Compat, ExponentialAgainstBoundaryValue) {
  const ExpPoly phi = ExpPoly::monomial(1.0, 0, 0.0, 1.0);  // e^{-x}
  const TimeGrid tg(1.0, 64);
  BoundaryData h = BoundaryData::zeros(tg);
  for (std::size_t j = 0; j < tg.size(); ++j) h.h1[j] = 1.0;
  const auto ok = check_compatibility(phi, h, 1.0, 0.0);
  EXPECT_TRUE(ok.compatible);
  EXPECT_EQ(ok.tag, CompatCase::ii);
  EXPECT_EQ(ok.conditions.size(), 1u);

  h.h1.assign(tg.size(), 0.0);
  EXPECT_FALSE(check_compatibility(phi, h, 1.0, 0.0).compatible);
  EXPECT_TRUE(check_compatibility(phi, h, 0.2, 0.0).compatible);  // no condition below s = 1/2
}

}  // namespace
}  // namespace ksq
