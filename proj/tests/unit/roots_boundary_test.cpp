#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ksq/boundary.hpp"
#include "ksq/data_families.hpp"
#include "ksq/roots.hpp"

namespace ksq {
namespace {

const double kA = std::sqrt(std::sqrt(2.0) + 1.0);
const double kB = std::sqrt(std::sqrt(2.0) - 1.0);

TEST(Roots, ClosedFormOnContour) {
  const RootPair r = characteristic_roots(cplx(0.0, 8.0), 0.0);
  EXPECT_NEAR(std::abs(r.lambda1 - cplx(-kA, kB)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r.lambda2 - cplx(-kB, -kA)), 0.0, 1e-12);
}

TEST(Roots, RealTau) {
  const RootPair r = characteristic_roots(cplx(16.0, 0.0), 0.0);
  const double s = std::sqrt(2.0);
  const bool a = std::abs(r.lambda1 - cplx(-s, s)) < 1e-12 && std::abs(r.lambda2 - cplx(-s, -s)) < 1e-12;
  const bool b = std::abs(r.lambda1 - cplx(-s, -s)) < 1e-12 && std::abs(r.lambda2 - cplx(-s, s)) < 1e-12;
  EXPECT_TRUE(a || b);
}

TEST(Roots, Residuals) {
  for (double delta : {-2.0, -0.3, 0.0, 1.0, 2.0})
    for (cplx tau : {cplx(0.0, 1e-3), cplx(2.0, -5.0), cplx(0.0, 8e4)}) {
      const RootPair r = characteristic_roots(tau, delta);
      for (cplx l : {r.lambda1, r.lambda2}) {
        EXPECT_LT(l.real(), 0.0);
        EXPECT_LT(std::abs(std::pow(l, 4) + delta * std::pow(l, 3) + tau), 1e-12 * (1.0 + std::abs(tau)));
      }
    }
}

TEST(Roots, LargeRhoAsymptotics) {
  double prev = 1e300;
  for (double rho : {10.0, 100.0, 1000.0}) {
    const RootPair r = characteristic_roots(cplx(0.0, 8.0 * std::pow(rho, 4)), 0.5);
    const double gap = std::abs(r.lambda1 / rho - cplx(-kA, kB));
    EXPECT_LT(gap, prev);
    prev = gap;
    if (rho == 100.0) EXPECT_LT(gap / std::abs(cplx(-kA, kB)), 1e-2);
  }
}

TEST(Roots, CurveLabelsStableUnderRefinement) {
  std::vector<double> coarse, fine;
  for (int i = 0; i < 64; ++i) coarse.push_back(0.1 * std::pow(100.0, i / 63.0));
  for (int i = 0; i < 127; ++i) fine.push_back(0.1 * std::pow(100.0, i / 126.0));
  const auto a = root_curve(coarse, 1.0), b = root_curve(fine, 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(std::abs(a[i].lambda1 - b[2 * i].lambda1), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(a[i].lambda2 - b[2 * i].lambda2), 0.0, 1e-10);
  }
}

TEST(Roots, RejectsLeftHalfPlane) { EXPECT_THROW((void)characteristic_roots(cplx(-1.0, 0.0), 0.0), DomainError); }

TEST(Laplace, MatchesAdaptiveQuadrature) {
  // int_0^1 sin(2 pi t) e^{-i mu t} dt, adaptive quadrature at 25 digits
  const double expect[3][2] = {{0.075064568070661804, 0.13740477018899499},
                               {-0.19092738082766017, 0.056478785177660979},
                               {-8.6850475807099029e-5, 0.00031941993498659656}};
  const TimeGrid tg(1.0, 2000);
  BoundaryData h = BoundaryData::zeros(tg);
  for (std::size_t j = 0; j < tg.size(); ++j) h.h1[j] = std::sin(2.0 * std::numbers::pi * tg.t(j));
  const std::vector<double> mu{1.0, 10.0, 100.0};
  const auto ls = laplace_on_contour(h, mu);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(ls.h1_hat[k].real(), expect[k][0], 1e-8);
    EXPECT_NEAR(ls.h1_hat[k].imag(), expect[k][1], 1e-8);
  }
}

BoundaryData bump(const TimeGrid& tg) {
  return sample_boundary(tg, {{"family", "raised_cosine"}, {"amp", 1.0}, {"start", 0.1}, {"stop", 0.7}},
                         {{"family", "zero"}});
}

TEST(BoundaryOperator, RecoversTraces) {
  const TimeGrid tg(1.0, 256);
  const BoundaryData h = bump(tg);
  const BoundaryOperator op(0.0);
  const auto lat = op.lattice(h, 0.05, 4, true);
  double num = 0.0, den = 0.0, vx = 0.0;
  for (std::size_t j = 0; j < tg.size(); ++j) {
    num += std::pow(lat.v[j][0] - h.h1[j], 2);
    den += h.h1[j] * h.h1[j];
    vx = std::max(vx, std::abs(lat.vx[j][0]));
  }
  EXPECT_LT(std::sqrt(num / den), 1e-3);
  EXPECT_LT(vx, 1e-3 * std::sqrt(den * tg.dt()));
}

TEST(BoundaryOperator, SchemesAgree) {
  const TimeGrid tg(1.0, 256);
  const BoundaryData h = bump(tg);
  QuadratureConfig q;
  q.scheme = QuadratureScheme::rho_panels;
  q.tol = 1e-8;
  const std::vector<double> xs{0.5, 1.0}, ts{0.3, 0.6};
  const auto a = BoundaryOperator(1.0).eval(h, xs, ts);
  const auto b = BoundaryOperator(1.0, q).eval(h, xs, ts);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(a[i][j], b[i][j], 1e-4);
}

TEST(BoundaryOperator, DecaysFarFromBoundary) {
  const TimeGrid tg(1.0, 256);
  const auto v = BoundaryOperator(0.0).eval(bump(tg), std::vector<double>{30.0}, std::vector<double>{0.4, 0.8});
  for (double x : v[0]) EXPECT_LT(std::abs(x), 1e-8);
}

TEST(BoundaryOperator, ZeroDataGivesZero) {
  const TimeGrid tg(0.5, 64);
  const auto lat = BoundaryOperator(0.3).lattice(BoundaryData::zeros(tg), 0.1, 5);
  for (const auto& row : lat.v)
    for (double x : row) EXPECT_EQ(x, 0.0);
}

}  // namespace
}  // namespace ksq
