#include <gtest/gtest.h>

#include <cmath>

#include "ksq/data_families.hpp"
#include "ksq/fd_oracle.hpp"
#include "ksq/nonlinear.hpp"

namespace ksq {
namespace {

SpectralField unit_data(const Grid1D& g) {
  auto f = sample_initial(g, {{"family", "gaussian"}, {"amp", 1.0}, {"center", 5.0}, {"width", 1.0}});
  auto v = f.real_values();
  const double n = hs_norm_halfline(f, 0.0);
  for (auto& x : v) x /= n;
  return SpectralField::from_real(g, v).sync();
}

TEST(LocalStep, UnitConstants) {
  // C1 = C2 = 1 and unit data: d = 2; T^{1/2} + T^{1/4} = 1/8 at T = ((sqrt(1.5) - 1) / 2)^4
  ConstantsCalibration c;
  c.c1 = 1.0;
  c.c2 = 1.0;
  const auto g = Grid1D::centered(40.0, 512);
  const auto ls = pick_local_step(unit_data(g), BoundaryData::zeros(TimeGrid(1.0, 64)), c);
  EXPECT_DOUBLE_EQ(ls.d, 2.0);
  EXPECT_NEAR(ls.t_bound, 1.59455380256844313e-4, 1e-12);
  EXPECT_DOUBLE_EQ(ls.t_star, std::pow(2.0, -13));
}

TEST(LocalStep, UncalibratedRejected) {
  const auto g = Grid1D::centered(40.0, 256);
  EXPECT_THROW((void)solve_global(unit_data(g), BoundaryData::zeros(TimeGrid(0.1, 8)), {}, ConstantsCalibration{}),
               ConfigError);
}

TEST(Picard, LinearLimitMatchesLinearSolve) {
  const auto g = Grid1D::centered(40.0, 512);
  const TimeGrid tg(0.25, 32);
  const auto phi = sample_initial(g, {{"family", "gaussian"}, {"amp", 0.1}, {"center", 5.0}, {"width", 1.0}});
  const auto h = sample_boundary(tg, {{"family", "raised_cosine"}, {"amp", 0.05}, {"start", 0.02}, {"stop", 0.2}},
                                 {{"family", "zero"}});
  SolverOptions o;
  o.nonlinear = false;
  o.second_order = false;
  const ModelParams p{0.5, 0.0};
  const auto st = solve_local(phi, h, p, 1.0, o);
  const auto lin = linear_solution(phi, h, p, o);
  double err = 0.0, ref = 0.0;
  for (std::size_t j = 0; j < tg.size(); ++j) {
    const auto a = st.w.snapshots[j].real_values(), b = lin.snapshots[j].real_values();
    for (std::size_t i = g.zero_index(); i < g.size(); ++i) {
      err = std::max(err, std::abs(a[i] - b[i]));
      ref = std::max(ref, std::abs(b[i]));
    }
  }
  EXPECT_LT(err, 1e-8 * ref);
  EXPECT_LE(st.iterations, 2u);
}

TEST(Picard, SmallDataContracts) {
  const auto g = Grid1D::centered(40.0, 512);
  const auto phi = sample_initial(g, {{"family", "gaussian"}, {"amp", 0.01}, {"center", 5.0}, {"width", 1.0}});
  const auto st = solve_local(phi, BoundaryData::zeros(TimeGrid(0.25, 32)), {}, 0.1);
  EXPECT_LT(st.kappa, 0.5);
  EXPECT_LT(st.residual, 1e-8);
  EXPECT_TRUE(st.within_ball);
}

TEST(Picard, DivergenceReported) {
  const auto g = Grid1D::centered(40.0, 512);
  const auto phi = sample_initial(g, {{"family", "gaussian"}, {"amp", 30.0}, {"center", 5.0}, {"width", 0.5}});
  SolverOptions o;
  o.max_iterations = 6;
  EXPECT_THROW((void)solve_local(phi, BoundaryData::zeros(TimeGrid(1.0, 32)), {}, 1.0, o), DivergenceError);
}

TEST(Energy, ZeroBoundaryReducesToPlainInequality) {
  const auto g = Grid1D::centered(40.0, 512);
  const TimeGrid tg(0.25, 32);
  const auto phi = sample_initial(g, {{"family", "gaussian"}, {"amp", 0.01}, {"center", 5.0}, {"width", 1.0}});
  const auto st = solve_local(phi, BoundaryData::zeros(tg), {}, 0.1);
  const auto ledger = energy_monitor(st.w, FieldSeries::zeros(g, tg), 2.0, hs_norm_halfline(phi, 0.0), 0.0);
  EXPECT_TRUE(ledger.inequality_holds);
  EXPECT_TRUE(ledger.envelope_holds);
  for (const auto& s : ledger.steps) EXPECT_EQ(s.y2, 0.0);
}

GridSolution ramp_solution(double scale) {
  GridSolution s;
  s.dx = 0.1;
  s.time = TimeGrid(1.0, 4);
  for (std::size_t j = 0; j < s.time.size(); ++j) {
    std::vector<double> row(11);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = scale * std::sin(0.3 * i + j);
    s.u.push_back(row);
  }
  return s;
}

TEST(FdCompare, TrivialCases) {
  EXPECT_EQ(fd_compare(ramp_solution(1.0), ramp_solution(1.0)).ratio, 0.0);
  EXPECT_NEAR(fd_compare(ramp_solution(1.0), ramp_solution(2.0)).ratio, 0.5, 1e-12);
}

TEST(BandedLU, SolvesTridiagonal) {
  const std::size_t n = 8;
  BandedLU lu(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    lu.at(i, i) = 4.0;
    if (i > 0) lu.at(i, i - 1) = -1.0;
    if (i + 1 < n) lu.at(i, i + 1) = -1.0;
  }
  lu.factor();
  std::vector<double> x(n), b(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + i;
  for (std::size_t i = 0; i < n; ++i) b[i] = 4.0 * x[i] - (i > 0 ? x[i - 1] : 0.0) - (i + 1 < n ? x[i + 1] : 0.0);
  lu.solve(b);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(b[i], x[i], 1e-13);
}

TEST(FdOracle, LinearSolutionAgreesWithSpectral) {
  const auto g = Grid1D::centered(80.0, 1024);
  const TimeGrid tg(0.25, 32);
  const nlohmann::json spec = {{"family", "gaussian"}, {"amp", 0.5}, {"center", 8.0}, {"width", 1.0}};
  const ModelParams p{0.0, 0.0};
  SolverOptions o;
  o.nonlinear = false;
  o.second_order = false;
  const auto u = linear_solution(sample_initial(g, spec), BoundaryData::zeros(tg), p, o);
  FDConfig fc;
  fc.nx = 2048;
  fc.dt = tg.dt() / 4.0;
  fc.include_nonlinear = false;
  fc.include_uxx = false;
  EXPECT_LT(fd_compare(u, fd_solve(make_profile(spec), BoundaryData::zeros(tg), p, fc)).ratio, 1e-3);
}

}  // namespace
}  // namespace ksq
