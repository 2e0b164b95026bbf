// Acceptance checks: one PASS/FAIL line per criterion.  With no arguments every
// criterion runs; otherwise only the listed numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ksq/boundary.hpp"
#include "ksq/compat.hpp"
#include "ksq/data_families.hpp"
#include "ksq/fd_oracle.hpp"
#include "ksq/harness.hpp"
#include "ksq/nonlinear.hpp"
#include "ksq/roots.hpp"
#include "ksq/sobolev.hpp"
#include "ksq/spectral.hpp"

using namespace ksq;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Gaussian at x = 5 of unit width, scaled to L2(R+) norm 0.01.
nlohmann::json small_gaussian() {
  const double amp = 0.01 / std::sqrt(std::sqrt(std::numbers::pi / 2.0));
  return {{"family", "gaussian"}, {"amp", amp}, {"center", 5.0}, {"width", 1.0}};
}

Grid1D standard_grid() { return Grid1D::centered(80.0, 1024); }

// ---- 1 ----------------------------------------------------------------------

Outcome multiplier_contraction() {
  const Grid1D grid = standard_grid();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  double worst = -1e300;
  for (int sample = 0; sample < 100; ++sample) {
    // white noise: every mode carries weight, the hardest case for a contraction check
    std::vector<double> v(grid.size());
    for (auto& x : v) x = normal(rng);
    const SpectralField phi = SpectralField::from_real(grid, v).sync();
    const ModelParams p{uni(rng), 0.0};
    for (double t : {0.01, 0.1, 1.0}) {
      const SpectralField u = propagate_whole_line(phi, t, p);
      for (double s : {-2.0, 0.0, 2.0}) worst = std::max(worst, hs_norm_line(u, s) - hs_norm_line(phi, s));
    }
  }
  return {worst <= 1e-12, fmt("max(|W(t)phi| - |phi|) = %.3e over 100 samples x 3 times x 3 indices", worst)};
}

// ---- 2 ----------------------------------------------------------------------

Outcome characteristic_roots_check() {
  double closed = 0.0;
  const double a = std::sqrt(std::sqrt(2.0) + 1.0), b = std::sqrt(std::sqrt(2.0) - 1.0);
  for (double rho : {0.5, 1.0, 2.0}) {
    const cplx tau(0.0, 8.0 * std::pow(rho, 4));
    const RootPair r = characteristic_roots(tau, 0.0);
    const cplx e1(-rho * a, rho * b), e2(-rho * b, -rho * a);
    const double direct = std::max(std::abs(r.lambda1 - e1), std::abs(r.lambda2 - e2));
    const double swapped = std::max(std::abs(r.lambda1 - e2), std::abs(r.lambda2 - e1));
    closed = std::max(closed, std::min(direct, swapped));
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> re(0.0, 10.0), im(-10.0, 10.0), dl(-2.0, 2.0);
  double vieta = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const cplx tau(re(rng), im(rng));
    const double delta = dl(rng);
    const auto z = quartic_roots(tau, delta);
    cplx e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 1.0;
    for (int p = 0; p < 4; ++p) {
      e1 += z[p];
      e4 *= z[p];
      for (int q = p + 1; q < 4; ++q) {
        e2 += z[p] * z[q];
        for (int r = q + 1; r < 4; ++r) e3 += z[p] * z[q] * z[r];
      }
    }
    // lambda^4 + delta lambda^3 + tau: e1 = -delta, e2 = e3 = 0, e4 = tau
    const double scale = std::max(1.0, std::abs(tau));
    vieta = std::max({vieta, std::abs(e1 + delta), std::abs(e2) / std::sqrt(scale),
                      std::abs(e3) / std::pow(scale, 0.75), std::abs(e4 - tau) / scale});
  }
  return {closed <= 1e-12 && vieta <= 1e-11,
          fmt("closed-form error %.2e (tol 1e-12), Vieta residual %.2e over 1000 draws (tol 1e-11)", closed, vieta)};
}

// ---- 3 ----------------------------------------------------------------------

Outcome trace_recovery() {
  double worst_rel = 0.0, worst_vx = 0.0;
  for (double delta : {0.0, 1.0}) {
    const TimeGrid tg(1.0, 400);
    const BoundaryData h = sample_boundary(tg, {{"family", "raised_cosine"}, {"amp", 1.0}, {"start", 0.0}, {"stop", 1.0}},
                                           {{"family", "zero"}});
    const BoundaryOperator op(delta);
    const BoundaryLattice lat = op.lattice(h, 0.05, 8, true);
    double num = 0.0, den = 0.0, full = 0.0, vx = 0.0;
    for (std::size_t j = 0; j < tg.size(); ++j) {
      full += h.h1[j] * h.h1[j] * tg.dt();
      vx = std::max(vx, std::abs(lat.vx[j][0]));
      const double t = tg.t(j);
      if (t < 0.1 || t > 0.9) continue;
      num += std::pow(lat.v[j][0] - h.h1[j], 2);
      den += h.h1[j] * h.h1[j];
    }
    worst_rel = std::max(worst_rel, std::sqrt(num / den));
    worst_vx = std::max(worst_vx, vx / std::sqrt(full));
  }
  return {worst_rel < 1e-3 && worst_vx < 1e-3,
          fmt("L2(0.1,0.9) trace error %.2e, sup|v_x(0,t)|/|h1| %.2e (both < 1e-3, delta in {0,1})", worst_rel,
              worst_vx)};
}

// ---- 4 ----------------------------------------------------------------------

Outcome linear_cross_validation() {
  const Grid1D grid = standard_grid();
  const TimeGrid tg(0.5, 128);
  const nlohmann::json phi_spec = {{"family", "gaussian"}, {"amp", 0.5}, {"center", 5.0}, {"width", 1.0}};
  // h1(0) = h2(0) = 0 and phi vanishes to round-off at x = 0: compatible at every order used
  const BoundaryData h = sample_boundary(tg, {{"family", "raised_cosine"}, {"amp", 0.3}, {"start", 0.05}, {"stop", 0.45}},
                                         {{"family", "raised_cosine"}, {"amp", -0.2}, {"start", 0.1}, {"stop", 0.4}});
  double worst = 0.0;
  for (double delta : {0.0, 1.0}) {
    const ModelParams p{delta, 0.0};
    const FieldSeries u = linear_solution(sample_initial(grid, phi_spec), h, p);
    FDConfig fc;
    fc.nx = 4096;
    fc.dt = tg.dt() / 8.0;
    fc.include_nonlinear = false;
    fc.include_uxx = false;
    const GridSolution fd = fd_solve(make_profile(phi_spec), h, p, fc);
    worst = std::max(worst, fd_compare(u, fd).ratio);
  }
  return {worst < 1e-3, fmt("relative space-time L2 difference %.2e (tol 1e-3, delta in {0,1})", worst)};
}

// ---- 5, 6, 8 share one run --------------------------------------------------

struct SmallDataRun {
  ConstantsCalibration calib;
  LocalStep step;
  std::optional<PicardState> state;
  SpectralField phi{standard_grid()};
  BoundaryData h = BoundaryData::zeros(TimeGrid(0.5, 128));
  double seconds = 0.0;
};

SmallDataRun& small_data_run() {
  static std::optional<SmallDataRun> run;
  if (run) return *run;
  const auto t0 = Clock::now();
  SmallDataRun r;
  const Grid1D grid = standard_grid();
  const ModelParams p{0.0, 0.0};
  CalibrationSettings cs;
  cs.ensemble = 4;
  r.calib = calibrate_constants(grid, p, cs);
  r.phi = sample_initial(grid, small_gaussian());
  r.step = pick_local_step(r.phi, r.h, r.calib);
  r.state.emplace(solve_local(r.phi, r.h, p, r.step.d));
  r.seconds = seconds_since(t0);
  run = std::move(r);
  return *run;
}

Outcome picard_contraction() {
  const auto& r = small_data_run();
  const auto& st = *r.state;
  return {st.kappa < 0.6 && st.residual < 1e-8 && st.within_ball,
          fmt("kappa %.3f (< 0.6), residual %.2e (< 1e-8), %zu iterations, within ball d=%.3g: %s; step rule T*=%g",
              st.kappa, st.residual, st.iterations, st.d, st.within_ball ? "yes" : "no", r.step.t_star)};
}

Outcome nonlinear_oracle() {
  const auto& r = small_data_run();
  FDConfig fc;
  fc.nx = 4096;
  fc.dt = r.h.grid.dt() / 8.0;
  const GridSolution fd = fd_solve(make_profile(small_gaussian()), r.h, ModelParams{0.0, 0.0}, fc);
  const NormReport cmp = fd_compare(r.state->w, fd);
  return {cmp.ratio < 1e-3, fmt("relative L2L2 difference vs finite differences %.2e (tol 1e-3)", cmp.ratio)};
}

Outcome energy_ledger() {
  const auto& r = small_data_run();
  // h = 0, so the boundary part y vanishes and z is the whole solution
  const FieldSeries& u = r.state->w;
  const FieldSeries y = FieldSeries::zeros(u.grid, u.time);
  const EnergyLedger e = energy_monitor(u, y, r.calib.energy_c, hs_norm_halfline(r.phi, 0.0), 0.0);
  return {e.inequality_holds && e.envelope_holds,
          fmt("C=%.3g over %zu steps: inequality %s (worst excess/slack %.3g), envelope %s (min margin %.3g)", e.c,
              e.steps.size(), e.inequality_holds ? "holds" : "fails", e.worst_excess,
              e.envelope_holds ? "holds" : "fails", e.envelope_margin)};
}

// ---- 7 ----------------------------------------------------------------------

Outcome global_patching() {
  const Grid1D grid = standard_grid();
  const ModelParams p{0.0, 0.0};
  CalibrationSettings cs;
  cs.ensemble = 8;
  const auto calib = calibrate_constants(grid, p, cs);
  const nlohmann::json spec = small_gaussian();
  const BoundaryData h = BoundaryData::zeros(TimeGrid(2.0, 512));
  const SolveRecord rec = solve_global(sample_initial(grid, spec), h, p, calib);
  FDConfig fc;
  fc.nx = 4096;
  fc.dt = h.grid.dt() / 8.0;
  const GridSolution fd = fd_solve(make_profile(spec), h, p, fc);
  const double diff = fd_compare(rec.solution, fd).ratio;
  const bool ok = rec.patches.size() >= 2 && diff < 2e-3 && rec.seam_jump < 1e-10;
  return {ok, fmt("%zu patches, difference vs fine finite differences %.2e (tol 2e-3), seam jump %.2e (tol 1e-10)",
                  rec.patches.size(), diff, rec.seam_jump)};
}

// ---- 9 ----------------------------------------------------------------------

Outcome compatibility_recursion() {
  const auto seq = compatibility_sequence(ExpPoly::monomial(1.0, 1), 0.7, 2);
  auto is_linear = [](const ExpPoly& f, double c) {
    return f.terms().size() == 1 && f.terms()[0].c == c && f.terms()[0].p == 1 && f.terms()[0].a == 0.0 &&
           f.terms()[0].b == 0.0;
  };
  const bool exact = seq.size() == 3 && is_linear(seq[1], -1.0) && is_linear(seq[2], 2.0);

  // e^{-x^2}, sampled on the whole grid: the recursion takes up to eight derivatives,
  // more than any finite-order half-line extension provides at x = 0
  const ExpPoly g = ExpPoly::monomial(1.0, 0, 1.0, 0.0);
  const Grid1D grid = Grid1D::centered(40.0, 256);
  std::vector<double> samples(grid.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = g(grid.x(i));
  const SpectralField f = SpectralField::from_real(grid, samples).sync();
  double worst = 0.0;
  for (double delta : {0.0, 1.0}) {
    const auto sym = compatibility_sequence(g, delta, 2);
    const auto num = compatibility_sequence(f, delta, 2);
    for (int k = 0; k <= 2; ++k) {
      const auto v = num[k].real_values();
      double err = 0.0, ref = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        err = std::max(err, std::abs(v[i] - sym[k](grid.x(i))));
        ref = std::max(ref, std::abs(sym[k](grid.x(i))));
      }
      worst = std::max(worst, err / ref);
    }
  }
  return {exact && worst < 1e-6, fmt("phi=x gives phi1=-x, phi2=2x exactly: %s; grid vs symbolic (Gaussian, k<=2) %.2e",
                                     exact ? "yes" : "no", worst)};
}

// ---- 10 ---------------------------------------------------------------------

Outcome weighted_branch() {
  const Grid1D grid = standard_grid();
  const ModelParams p{0.0, -1.0, 0.05};
  CalibrationSettings cs;
  cs.ensemble = 4;
  const auto calib = calibrate_constants(grid, ModelParams{0.0, 0.0}, cs);
  const SpectralField phi = sample_initial(grid, small_gaussian());
  const BoundaryData h = sample_boundary(TimeGrid(1.0, 256),
                                         {{"family", "raised_cosine"}, {"amp", 0.01}, {"start", 0.1}, {"stop", 0.6}},
                                         {{"family", "zero"}});
  const PicardState st = solve_weighted(phi, h, p, calib);
  const SplittingCheck split = weighted_splitting_check(grid, h, p);
  const ExponentFit fit = weighted_bilinear_exponent(phi, p, {0.125, 0.25, 0.5}, 1.0 / 256);
  const bool ok = st.kappa < 1.0 && split.relative_error < 1e-4 && fit.alpha_linear > 0.0 && fit.alpha_bilinear > 0.0;
  return {ok, fmt("kappa %.3f (< 1), splitting error %.2e (< 1e-4), fitted exponents %.3f / %.3f (> 0)", st.kappa,
                  split.relative_error, fit.alpha_linear, fit.alpha_bilinear)};
}

// ---- 11 ---------------------------------------------------------------------

Outcome estimate_ratio_stability() {
  ExperimentConfig cfg;
  cfg.pipeline = "verify";
  cfg.model.s = 0.0;
  cfg.verify.samples = 20;
  cfg.verify.estimates = {"boundary_operator_bound", "whole_line_smoothing", "forced_halfline_bound"};
  cfg.workers = std::max(1u, std::thread::hardware_concurrency());
  const EstimateRun run = verify_estimates(cfg);
  bool ok = true;
  std::string detail;
  for (const auto& id : cfg.verify.estimates) {
    const RatioSummary s = summarize_ratios(run.reports, id);
    ok = ok && s.count == 20 && s.max_over_median() <= 1.25;
    detail += fmt("%s%s n=%zu median %.3g max/median %.3f", detail.empty() ? "" : "; ", id.c_str(), s.count, s.median,
                  s.max_over_median());
  }
  return {ok, detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "multiplier contraction", 10, multiplier_contraction},
      {2, "characteristic roots", 5, characteristic_roots_check},
      {3, "boundary trace recovery", 60, trace_recovery},
      {4, "linear cross-validation", 120, linear_cross_validation},
      {5, "picard contraction", 120, picard_contraction},
      {6, "nonlinear oracle equivalence", 180, nonlinear_oracle},
      {7, "global patching", 300, global_patching},
      {8, "energy ledger", 120, energy_ledger},
      {9, "compatibility recursion", 5, compatibility_recursion},
      {10, "weighted branch", 300, weighted_branch},
      {11, "estimate-ratio stability", 300, estimate_ratio_stability},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    double secs = seconds_since(t0);
    // the shared small-data run is charged to criterion 5 only
    if (c.id == 5) secs = std::max(secs, small_data_run().seconds);
    const bool in_time = secs < c.budget;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s [%d] %s: %s; %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget, in_time ? "" : " over time");
    std::fflush(stdout);
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
