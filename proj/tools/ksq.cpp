#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ksq/harness.hpp"

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, divergence = 3, accuracy = 4 };

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  bool strict = false;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "override a config key, e.g. --set model.delta=0.5")->take_all();
  sub->add_option("--out", c.out, "output directory (default: the config's output)");
  sub->add_flag("--strict", c.strict, "exit 4 when accuracy warnings were issued");
  sub->add_option("--workers", c.workers, "concurrent sweep entries or verify samples");
}

nlohmann::json base_config(const Common& c) {
  nlohmann::json j = c.config.empty() ? nlohmann::json(ksq::ExperimentConfig{}) : nlohmann::json(ksq::load_config(c.config));
  for (const auto& s : c.sets) ksq::apply_override(j, s);
  return j;
}

int finish(const ksq::RunReport& rep, const ksq::ExperimentConfig& cfg, const Common& c, bool write) {
  if (write) {
    const std::string dir = c.out.empty() ? cfg.output : c.out;
    ksq::write_report(rep, dir);
    nlohmann::json line = {{"pipeline", cfg.pipeline},
                           {"output", dir},
                           {"digest", std::to_string(rep.digest())},
                           {"warnings", rep.diag.warnings.size()}};
    std::cout << line.dump() << '\n';
  }
  for (const auto& w : rep.diag.warnings) std::cerr << "warning: " << w << '\n';
  if (rep.diverged) return divergence;
  if (c.strict && !rep.diag.empty()) return accuracy;
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quarter-plane dispersive Kuramoto-Sivashinsky solver and estimate checks"};
  app.require_subcommand(1);
  Common common;

  bool weighted = false, monitor_energy = false;
  auto* solve = app.add_subcommand("solve", "global solve by patched Picard iteration");
  add_common(solve, common);
  solve->add_flag("--weighted", weighted, "weighted-norm solve (-2 < s < 0, T <= 1)");
  solve->add_flag("--monitor-energy", monitor_energy, "record the energy ledger");

  std::optional<double> delta, rho_min, rho_max;
  std::optional<std::size_t> points;
  auto* roots = app.add_subcommand("roots", "left-half-plane roots along the boundary contour (CSV on stdout)");
  add_common(roots, common);
  roots->add_option("--delta", delta);
  roots->add_option("--rho-min", rho_min);
  roots->add_option("--rho-max", rho_max);
  roots->add_option("--points", points);

  auto* compat = app.add_subcommand("compat", "compatibility conditions between initial and boundary data");
  add_common(compat, common);

  auto* wbdr = app.add_subcommand("wbdr", "boundary solution on an (x, t) lattice");
  add_common(wbdr, common);

  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  auto* verify = app.add_subcommand("verify", "measure estimate ratios over a random smooth ensemble");
  add_common(verify, common);
  verify->add_option("--samples", samples);
  verify->add_option("--seed", seed);

  auto* oracle = app.add_subcommand("oracle-compare", "spectral solve against the finite-difference reference");
  add_common(oracle, common);

  std::optional<std::size_t> ensemble;
  auto* calibrate = app.add_subcommand("calibrate", "measure the solver constants (JSON on stdout)");
  add_common(calibrate, common);
  calibrate->add_option("--ensemble", ensemble);
  calibrate->add_option("--seed", seed);

  auto* sweep = app.add_subcommand("sweep", "run the config's sweep entries");
  add_common(sweep, common);

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json j = base_config(common);
    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    j["pipeline"] = name;
    if (common.workers) j["workers"] = *common.workers;
    if (weighted) j["solver"]["weighted"] = true;
    if (monitor_energy) j["solver"]["monitor_energy"] = true;
    if (delta) j["model"]["delta"] = *delta;
    if (rho_min) j["roots"]["rho_min"] = *rho_min;
    if (rho_max) j["roots"]["rho_max"] = *rho_max;
    if (points) j["roots"]["points"] = *points;
    if (samples) j["verify"]["samples"] = *samples;
    if (seed) j[name == "calibrate" ? "calibration" : "verify"]["seed"] = *seed;
    if (ensemble) j["calibration"]["ensemble"] = *ensemble;
    const auto cfg = j.get<ksq::ExperimentConfig>();
    const auto rep = ksq::run_experiment(cfg);

    if (name == "roots") {
      std::cout << rep.tables.front().str();
      return finish(rep, cfg, common, !common.out.empty());
    }
    if (name == "calibrate") {
      std::cout << rep.summary["calibration"].dump(2) << '\n';
      return finish(rep, cfg, common, !common.out.empty());
    }
    return finish(rep, cfg, common, true);
  } catch (const ksq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const ksq::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return config_error;
  } catch (const ksq::ShapeError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return config_error;
  } catch (const ksq::RefinementError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return config_error;
  } catch (const ksq::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return divergence;
  } catch (const ksq::SelectionError& e) {
    std::cerr << "root selection: " << e.what() << '\n';
    return divergence;
  } catch (const ksq::AccuracyError& e) {
    std::cerr << "accuracy: " << e.what() << '\n';
    return accuracy;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
}
