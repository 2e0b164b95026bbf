#include <benchmark/benchmark.h>

#include <cmath>

#include "ksq/boundary.hpp"
#include "ksq/data_families.hpp"
#include "ksq/nonlinear.hpp"
#include "ksq/roots.hpp"
#include "ksq/sobolev.hpp"

namespace {

using namespace ksq;

void BM_Transform(benchmark::State& state) {
  const auto g = Grid1D::centered(80.0, static_cast<std::size_t>(state.range(0)));
  std::vector<cplx> v(g.size()), c(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-g.x(i) * g.x(i));
  for (auto _ : state) {
    values_to_coeffs(g, v, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Transform)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNLogN);

void BM_CharacteristicRoots(benchmark::State& state) {
  double rho = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(characteristic_roots(cplx(0.0, 8.0 * std::pow(rho, 4)), 0.7));
    rho = rho > 10.0 ? 0.1 : rho * 1.01;
  }
}
BENCHMARK(BM_CharacteristicRoots);

void BM_BoundaryLattice(benchmark::State& state) {
  const TimeGrid tg(0.5, static_cast<std::size_t>(state.range(0)));
  const auto h = sample_boundary(tg, {{"family", "raised_cosine"}, {"amp", 1.0}, {"start", 0.05}, {"stop", 0.45}},
                                 {{"family", "zero"}});
  const BoundaryOperator op(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(op.lattice(h, 80.0 / 1024, 512));
}
BENCHMARK(BM_BoundaryLattice)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_HalfLineNorm(benchmark::State& state) {
  const auto g = Grid1D::centered(80.0, 1024);
  const auto f = sample_initial(g, {{"family", "gaussian"}, {"amp", 1.0}, {"center", 5.0}, {"width", 1.0}});
  const double s = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hs_norm_halfline(f, s));
}
BENCHMARK(BM_HalfLineNorm)->Arg(0)->Arg(1)->Arg(2);

void BM_FixedPointMap(benchmark::State& state) {
  const auto g = Grid1D::centered(80.0, 1024);
  const TimeGrid tg(0.5, static_cast<std::size_t>(state.range(0)));
  const auto phi = sample_initial(g, {{"family", "gaussian"}, {"amp", 0.01}, {"center", 5.0}, {"width", 1.0}});
  const auto h = BoundaryData::zeros(tg);
  const auto w = linear_solution(phi, h, {});
  for (auto _ : state) benchmark::DoNotOptimize(apply_fixed_point_map(w, phi, h, {}));
}
BENCHMARK(BM_FixedPointMap)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
