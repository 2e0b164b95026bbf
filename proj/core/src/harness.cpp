#include "ksq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "ksq/compat.hpp"
#include "ksq/data_families.hpp"
#include "ksq/roots.hpp"

namespace ksq {

namespace {

using nlohmann::json;

const std::vector<std::string> kPipelines = {"solve", "verify",         "roots",     "compat",
                                             "wbdr",  "oracle-compare", "calibrate", "sweep"};

// Reads one JSON object, remembering which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + ": expected an object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(at(key) + ": wrong type");
    }
  }

  template <class F>
  void object(const std::string& key, F&& body) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    Reader sub(*it, at(key));
    body(sub);
    sub.finish();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(at(k) + ": unknown key");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string scheme_name(QuadratureScheme s) {
  return s == QuadratureScheme::rho_panels ? "rho_panels" : "shifted_trapezoid";
}

json quad_json(const QuadratureConfig& q) {
  return {{"scheme", scheme_name(q.scheme)},
          {"tol", q.tol},
          {"warn_tol", q.warn_tol},
          {"period_factor", q.period_factor},
          {"damping", q.damping},
          {"folds", q.folds},
          {"panels", q.panels},
          {"rho_max", q.rho_max},
          {"rho_cap", q.rho_cap},
          {"max_nodes", q.max_nodes},
          {"laplace", q.laplace == LaplaceRule::linear ? "linear" : "cubic"}};
}

void read_quad(Reader& r, QuadratureConfig& q) {
  std::string scheme = scheme_name(q.scheme), laplace = q.laplace == LaplaceRule::linear ? "linear" : "cubic";
  r.get("scheme", scheme);
  if (scheme == "shifted_trapezoid")
    q.scheme = QuadratureScheme::shifted_trapezoid;
  else if (scheme == "rho_panels")
    q.scheme = QuadratureScheme::rho_panels;
  else
    throw ConfigError(r.at("scheme") + ": unknown scheme '" + scheme + "'");
  r.get("tol", q.tol);
  r.get("warn_tol", q.warn_tol);
  r.get("period_factor", q.period_factor);
  r.get("damping", q.damping);
  r.get("folds", q.folds);
  r.get("panels", q.panels);
  r.get("rho_max", q.rho_max);
  r.get("rho_cap", q.rho_cap);
  r.get("max_nodes", q.max_nodes);
  r.get("laplace", laplace);
  if (laplace == "linear")
    q.laplace = LaplaceRule::linear;
  else if (laplace == "cubic")
    q.laplace = LaplaceRule::cubic;
  else
    throw ConfigError(r.at("laplace") + ": expected 'linear' or 'cubic'");
}

// Prefixes a ConfigError raised by a component's own validation with a field path.
template <class F>
void checked(const std::string& path, F&& body) {
  try {
    body();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void check_family(const std::string& path, const json& spec, bool initial) {
  if (!spec.is_object() || !spec.contains("family") || !spec["family"].is_string())
    throw ConfigError(path + ": expected an object with a \"family\" name");
  const auto name = spec["family"].get<std::string>();
  if (initial ? !is_initial_family(name) : !is_boundary_family(name))
    throw ConfigError(path + ".family: '" + name + "' is not " +
                      (initial ? "an initial-data family" : "a boundary-data family"));
  checked(path, [&] { (void)make_profile(spec); });
}

// Runs body(i) for i < n on up to `workers` threads; the first failure by index is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

json& node_at(json& root, const std::string& key) {
  json* cur = &root;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!cur->is_object()) {
      if (!cur->is_null()) throw ConfigError("override key '" + key + "' descends into a non-object");
      *cur = json::object();
    }
    cur = &(*cur)[part];
    if (dot == std::string::npos) return *cur;
    pos = dot + 1;
  }
}

}  // namespace

// --- configuration ---------------------------------------------------------

void to_json(json& j, const ExperimentConfig& c) {
  j = {{"pipeline", c.pipeline},
       {"model", {{"delta", c.model.delta}, {"s", c.model.s}, {"eps", c.model.eps}, {"horizon", c.horizon}}},
       {"grid", {{"length", c.length}, {"points", c.points}, {"steps", c.steps}}},
       {"data", {{"phi", c.phi}, {"h1", c.h1}, {"h2", c.h2}}},
       {"solver",
        {{"tol", c.solver.tol},
         {"max_iterations", c.solver.max_iterations},
         {"nonlinear", c.solver.nonlinear},
         {"second_order", c.solver.second_order},
         {"stations", c.solver.stations},
         {"patch_length", c.solver.patch_length},
         {"weighted", c.weighted},
         {"monitor_energy", c.monitor_energy}}},
       {"quadrature", quad_json(c.solver.quad)},
       {"calibration",
        {{"ensemble", c.calibration.ensemble},
         {"seed", c.calibration.seed},
         {"horizon", c.calibration.horizon},
         {"steps", c.calibration.steps}}},
       {"verify",
        {{"samples", c.verify.samples},
         {"seed", c.verify.seed},
         {"amplitude", c.verify.amplitude},
         {"estimates", c.verify.estimates}}},
       {"oracle",
        {{"length", c.oracle.length},
         {"nx", c.oracle.nx},
         {"dt", c.oracle.dt},
         {"scheme", c.oracle.scheme},
         {"include_uxx", c.oracle.include_uxx},
         {"include_nonlinear", c.oracle.include_nonlinear},
         {"startup_substeps", c.oracle.startup_substeps}}},
       {"roots", {{"rho_min", c.roots.rho_min}, {"rho_max", c.roots.rho_max}, {"points", c.roots.points}}},
       {"lattice", {{"x_max", c.lattice.x_max}, {"x_points", c.lattice.x_points}}},
       {"sweep", {{"entries", c.sweep.entries}}},
       {"workers", c.workers},
       {"output", c.output}};
  if (c.constants) j["constants"] = *c.constants;
}

void from_json(const json& j, ExperimentConfig& c) {
  Reader r(j, "");
  r.get("pipeline", c.pipeline);
  r.object("model", [&](Reader& m) {
    m.get("delta", c.model.delta);
    m.get("s", c.model.s);
    m.get("eps", c.model.eps);
    m.get("horizon", c.horizon);
  });
  r.object("grid", [&](Reader& g) {
    g.get("length", c.length);
    g.get("points", c.points);
    g.get("steps", c.steps);
  });
  r.object("data", [&](Reader& d) {
    d.get("phi", c.phi);
    d.get("h1", c.h1);
    d.get("h2", c.h2);
  });
  r.object("solver", [&](Reader& s) {
    s.get("tol", c.solver.tol);
    s.get("max_iterations", c.solver.max_iterations);
    s.get("nonlinear", c.solver.nonlinear);
    s.get("second_order", c.solver.second_order);
    s.get("stations", c.solver.stations);
    s.get("patch_length", c.solver.patch_length);
    s.get("weighted", c.weighted);
    s.get("monitor_energy", c.monitor_energy);
  });
  r.object("quadrature", [&](Reader& q) { read_quad(q, c.solver.quad); });
  r.object("calibration", [&](Reader& k) {
    k.get("ensemble", c.calibration.ensemble);
    k.get("seed", c.calibration.seed);
    k.get("horizon", c.calibration.horizon);
    k.get("steps", c.calibration.steps);
  });
  {
    json constants;
    r.get("constants", constants);
    if (!constants.is_null()) {
      try {
        c.constants = constants.get<ConstantsCalibration>();
      } catch (const json::exception&) {
        throw ConfigError("constants: expected an object with c1 and c2");
      }
    }
  }
  r.object("verify", [&](Reader& v) {
    v.get("samples", c.verify.samples);
    v.get("seed", c.verify.seed);
    v.get("amplitude", c.verify.amplitude);
    v.get("estimates", c.verify.estimates);
  });
  r.object("oracle", [&](Reader& o) {
    o.get("length", c.oracle.length);
    o.get("nx", c.oracle.nx);
    o.get("dt", c.oracle.dt);
    o.get("scheme", c.oracle.scheme);
    o.get("include_uxx", c.oracle.include_uxx);
    o.get("include_nonlinear", c.oracle.include_nonlinear);
    o.get("startup_substeps", c.oracle.startup_substeps);
  });
  r.object("roots", [&](Reader& o) {
    o.get("rho_min", c.roots.rho_min);
    o.get("rho_max", c.roots.rho_max);
    o.get("points", c.roots.points);
  });
  r.object("lattice", [&](Reader& o) {
    o.get("x_max", c.lattice.x_max);
    o.get("x_points", c.lattice.x_points);
  });
  r.object("sweep", [&](Reader& o) { o.get("entries", c.sweep.entries); });
  r.get("workers", c.workers);
  r.get("output", c.output);
  r.finish();
}

void ExperimentConfig::validate() const {
  if (std::find(kPipelines.begin(), kPipelines.end(), pipeline) == kPipelines.end())
    throw ConfigError("pipeline: unknown pipeline '" + pipeline + "'");
  if (!std::isfinite(model.delta)) throw ConfigError("model.delta: must be finite");
  if (!(model.eps > 0.0)) throw ConfigError("model.eps: must be positive");
  if (!(model.s >= -2.0 && model.s <= 8.0)) throw ConfigError("model.s: supported range is [-2, 8]");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("model.horizon: must be positive");
  if (!(length > 0.0)) throw ConfigError("grid.length: must be positive");
  if (points < 64 || !is_power_of_two(points)) throw ConfigError("grid.points: must be a power of two >= 64");
  if (steps < 2) throw ConfigError("grid.steps: must be at least 2");
  check_family("data.phi", phi, true);
  check_family("data.h1", h1, false);
  check_family("data.h2", h2, false);
  checked("solver", [&] { solver.validate(); });
  checked("quadrature", [&] { solver.quad.validate(); });
  if (weighted) {
    checked("model.s", [&] { model.require_weighted_branch(); });
    if (horizon > 1.0) throw ConfigError("model.horizon: the weighted solve needs T <= 1");
  }
  if (calibration.ensemble < 1) throw ConfigError("calibration.ensemble: must be at least 1");
  if (!(calibration.horizon > 0.0)) throw ConfigError("calibration.horizon: must be positive");
  if (calibration.steps < 2) throw ConfigError("calibration.steps: must be at least 2");
  if (constants && !constants->valid()) throw ConfigError("constants: c1 and c2 must be positive");
  if (verify.samples < 1) throw ConfigError("verify.samples: must be at least 1");
  if (!(verify.amplitude >= 0.0)) throw ConfigError("verify.amplitude: must be nonnegative");
  const auto& ids = estimate_ids();
  for (std::size_t i = 0; i < verify.estimates.size(); ++i) {
    const auto& e = verify.estimates[i];
    if (std::find(ids.begin(), ids.end(), e) == ids.end())
      throw ConfigError("verify.estimates[" + std::to_string(i) + "]: unknown estimate '" + e + "'");
    if (e.rfind("weighted_", 0) == 0) checked("model.s", [&] { model.require_weighted_branch(); });
    else if (e == "bilinear_bound" && model.s < 0.0)
      throw ConfigError("verify.estimates[" + std::to_string(i) + "]: bilinear_bound needs s >= 0");
  }
  if (oracle.dt < 0.0) throw ConfigError("oracle.dt: must be nonnegative");
  checked("oracle", [&] {
    FDConfig f = oracle;
    if (f.dt == 0.0) f.dt = 1e-3;
    f.validate();
  });
  if (!(roots.rho_min > 0.0 && roots.rho_max > roots.rho_min))
    throw ConfigError("roots: need 0 < rho_min < rho_max");
  if (roots.points < 2) throw ConfigError("roots.points: must be at least 2");
  if (!(lattice.x_max >= 0.0)) throw ConfigError("lattice.x_max: must be nonnegative");
  if (lattice.x_points < 1) throw ConfigError("lattice.x_points: must be at least 1");
  if (workers < 1) throw ConfigError("workers: must be at least 1");
  for (std::size_t i = 0; i < sweep.entries.size(); ++i)
    if (!sweep.entries[i].is_object())
      throw ConfigError("sweep.entries[" + std::to_string(i) + "]: expected an object of overrides");
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return j.get<ExperimentConfig>();
}

void apply_override(json& config, const std::string& key, const json& value) { node_at(config, key) = value; }

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  apply_override(config, key, value);
}

// --- output ----------------------------------------------------------------

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void CsvTable::add(std::vector<double> row) {
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (double v : row) cells.push_back(format_number(v));
  rows.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out = "# schema: " + schema + "\n";
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

std::size_t RunReport::digest() const {
  std::string all = summary.dump();
  for (const auto& t : tables) all += t.name + "\n" + t.str();
  return std::hash<std::string>{}(all);
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.json", std::ios::binary);
    out << report.summary.dump(2) << '\n';
    if (!out) throw Error("failed to write " + (dir / "summary.json").string());
  }
  for (const auto& t : report.tables) {
    std::ofstream out(dir / (t.name + ".csv"), std::ios::binary);
    out << t.str();
    if (!out) throw Error("failed to write " + (dir / (t.name + ".csv")).string());
  }
}

// --- estimates -------------------------------------------------------------

const std::vector<std::string>& estimate_ids() {
  static const std::vector<std::string> ids = {
      "boundary_operator_bound", "halfline_semigroup_bound", "whole_line_smoothing",
      "forced_halfline_bound",   "bilinear_bound",           "weighted_boundary_bound",
      "weighted_bilinear_uxx",   "weighted_bilinear_uvx"};
  return ids;
}

namespace {

std::vector<std::string> default_estimates(const ModelParams& p) {
  if (p.s >= 0.0)
    return {"boundary_operator_bound", "halfline_semigroup_bound", "whole_line_smoothing", "forced_halfline_bound",
            "bilinear_bound"};
  std::vector<std::string> out = {"boundary_operator_bound", "halfline_semigroup_bound", "whole_line_smoothing",
                                  "forced_halfline_bound"};
  try {
    p.require_weighted_branch();
    out.insert(out.end(), {"weighted_boundary_bound", "weighted_bilinear_uxx", "weighted_bilinear_uvx"});
  } catch (const ConfigError&) {
  }
  return out;
}

// One random draw of every datum an estimate may need.
struct Sample {
  json phi, phi2, h1, h2, force_x, force_t;
};

Sample draw_sample(std::uint64_t seed, std::size_t index, double T, double amp) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u01(rng); };
  auto bump = [&] {
    return json{{"family", "gaussian"}, {"amp", amp * uni(0.5, 1.5)}, {"center", uni(3.0, 8.0)},
                {"width", uni(0.6, 1.5)}};
  };
  auto window = [&](double lo, double hi) {
    const double a = uni(0.0, 0.2) * T;
    return json{{"family", "raised_cosine"}, {"amp", amp * uni(lo, hi)}, {"start", a},
                {"stop", a + uni(0.4, 0.8) * T}};
  };
  Sample s;
  s.phi = bump();
  s.phi2 = bump();
  s.h1 = window(0.2, 1.0);
  s.h2 = window(-0.5, 0.5);
  s.force_x = bump();
  s.force_t = window(0.5, 1.5);
  return s;
}

// sup_t ||p||_{H^s(R)} + (int_0^T ||p||^2_{H^{s+2}(R)} dt)^{1/2} for p = whole-line flow of phi.
// The time integral is exact for each discrete mode: int_0^T e^{2 Re(sym) t} dt.
double whole_line_lhs(const SpectralField& phi, const ModelParams& p, const TimeGrid& time) {
  const Grid1D& g = phi.grid();
  const auto& c = phi.coeffs();
  const double T = time.horizon(), inv_l = 1.0 / g.length();
  double sup2 = 0.0;
  for (std::size_t j = 0; j < time.size(); ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double decay = std::exp(2.0 * linear_symbol(g, k, p.delta).real() * time.t(j));
      acc += std::pow(1.0 + g.xi(k) * g.xi(k), p.s) * std::norm(c[k]) * decay;
    }
    sup2 = std::max(sup2, acc * inv_l);
  }
  double smooth2 = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double r = -2.0 * linear_symbol(g, k, p.delta).real();
    const double integral = r > 0.0 ? -std::expm1(-r * T) / r : T;
    smooth2 += std::pow(1.0 + g.xi(k) * g.xi(k), p.s + 2.0) * std::norm(c[k]) * integral;
  }
  return std::sqrt(sup2) + std::sqrt(smooth2 * inv_l);
}

// X-norm with its four parts, for the report data.
std::pair<double, json> x_norm_parts(const FieldSeries& u, double s, std::size_t stations) {
  FieldSeries c = u;
  c.traces = record_traces(c, stations);
  const auto p = solution_norm_parts(c, s);
  return {p.total(),
          {{"sup_hs", p.sup_hs}, {"l2_hs2", p.l2_hs2}, {"trace_u", p.trace_u}, {"trace_ux", p.trace_ux}}};
}

FieldSeries forcing(const Grid1D& grid, const TimeGrid& time, const json& fx, const json& ft) {
  const SpectralField shape = sample_initial(grid, fx);
  const auto base = shape.real_values();
  const auto bt = make_profile(ft);
  FieldSeries f(grid, time);
  std::vector<double> v(base.size());
  for (std::size_t j = 0; j < time.size(); ++j) {
    const double b = bt(time.t(j));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = base[i] * b;
    f.snapshots.push_back(SpectralField::from_real(grid, v).sync());
  }
  return f;
}

FieldSeries bilinear_term(const FieldSeries& u, const FieldSeries& v) {
  FieldSeries out(u.grid, u.time);
  for (std::size_t j = 0; j < u.snapshots.size(); ++j) {
    auto uv = u.snapshots[j].real_values();
    const auto vv = v.snapshots[j].real_values();
    for (std::size_t i = 0; i < uv.size(); ++i) uv[i] *= vv[i];
    const auto d1 = derivative(SpectralField::from_real(u.grid, uv).sync(), 1);
    const auto d2 = derivative(u.snapshots[j], 2);
    std::vector<cplx> c(d1.coeffs().size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = d1.coeffs()[k] + d2.coeffs()[k];
    out.snapshots.push_back(SpectralField::from_coeffs(u.grid, std::move(c)).sync());
  }
  return out;
}

}  // namespace

EstimateRun verify_estimates(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto ids = cfg.verify.estimates.empty() ? default_estimates(cfg.model) : cfg.verify.estimates;
  const Grid1D grid = Grid1D::centered(cfg.length, cfg.points);
  const TimeGrid time(cfg.horizon, cfg.steps);
  const ModelParams& p = cfg.model;
  const double T = cfg.horizon, s = p.s;
  const std::size_t stations = cfg.solver.stations;
  const SpectralField zero_phi = sample_initial(grid, {{"family", "zero"}});
  const BoundaryData zero_h = BoundaryData::zeros(time);
  const BoundaryOperator op(p.delta, cfg.solver.quad);

  const std::size_t n = cfg.verify.samples;
  // per_sample[i][e]: report for estimate e of sample i, or a note when skipped
  std::vector<std::vector<std::optional<NormReport>>> per_sample(n);
  std::vector<std::vector<std::string>> notes(n);
  parallel_for(n, cfg.workers, [&](std::size_t i) {
    const Sample smp = draw_sample(cfg.verify.seed, i, T, cfg.verify.amplitude);
    const SpectralField phi = sample_initial(grid, smp.phi);
    const BoundaryData h = sample_boundary(time, smp.h1, smp.h2);
    std::optional<FieldSeries> u_phi;
    auto free_solution = [&]() -> const FieldSeries& {
      if (!u_phi) u_phi = linear_solution(phi, zero_h, p, cfg.solver);
      return *u_phi;
    };
    std::optional<WeightedBilinearSides> sides;
    auto weighted_sides = [&]() -> const WeightedBilinearSides& {
      if (!sides) sides = weighted_bilinear_sides(free_solution(), p);
      return *sides;
    };
    // A zero right-hand side is not an error here: the sample is skipped with a note.
    auto measured = [](std::string id, double lhs, double rhs, json data = json::object()) {
      return rhs > 0.0 ? NormReport::make(std::move(id), lhs, rhs, std::move(data))
                       : NormReport{std::move(id), lhs, rhs, 0.0, std::move(data)};
    };
    for (const auto& id : ids) {
      NormReport r;
      if (id == "boundary_operator_bound") {
        const auto [lhs, parts] = x_norm_parts(linear_solution(zero_phi, h, p, cfg.solver), s, stations);
        r = measured(id, lhs, boundary_pair_norm(h, s), {{"parts", parts}});
      } else if (id == "halfline_semigroup_bound") {
        const auto [lhs, parts] = x_norm_parts(free_solution(), s, stations);
        r = measured(id, lhs, hs_norm_halfline(phi, s), {{"parts", parts}});
      } else if (id == "whole_line_smoothing") {
        r = measured(id, whole_line_lhs(phi, p, time), hs_norm_line(phi, s));
      } else if (id == "forced_halfline_bound") {
        const auto f = forcing(grid, time, smp.force_x, smp.force_t);
        const auto u = duhamel(f, p, Propagator::half_line, &op);
        const auto [lhs, parts] = x_norm_parts(u, s, stations);
        r = measured(id, lhs, l1_time_norm(f, s), {{"parts", parts}});
      } else if (id == "bilinear_bound") {
        const auto& u = free_solution();
        const auto v = linear_solution(sample_initial(grid, smp.phi2), zero_h, p, cfg.solver);
        const double un = x_norm(u, s, stations), vn = x_norm(v, s, stations);
        const double rhs = std::sqrt(T) * un + (std::sqrt(T) + std::pow(T, 0.25)) * un * vn;
        r = measured(id, l1_time_norm(bilinear_term(u, v), s), rhs, {{"u_norm", un}, {"v_norm", vn}});
      } else if (id == "weighted_boundary_bound") {
        const auto v = linear_solution(zero_phi, h, p, cfg.solver);
        const auto parts = weighted_solution_norm_parts(v, s, p.eps);
        // Weight-off comparison: sup_t ||t^a v|| <= T^a sup_t ||v||.
        const double envelope = std::pow(T, p.weight_exponent()) * sup_time_norm(v, 0.0);
        r = measured(id, parts.total(), boundary_pair_norm(h, s),
                             {{"weighted_sup_l2", parts.weighted_sup_l2},
                              {"unweighted_envelope", envelope},
                              {"envelope_holds", parts.weighted_sup_l2 <= envelope * (1.0 + 1e-12)}});
      } else if (id == "weighted_bilinear_uxx") {
        r = measured(id, weighted_sides().linear, weighted_sides().norm);
      } else if (id == "weighted_bilinear_uvx") {
        r = measured(id, weighted_sides().bilinear, weighted_sides().norm * weighted_sides().norm);
      }
      r.data["sample"] = i;
      if (!(r.rhs > 0.0)) {
        notes[i].push_back(id + ": sample " + std::to_string(i) + " skipped (zero right-hand side)");
        per_sample[i].push_back(std::nullopt);
      } else {
        per_sample[i].push_back(std::move(r));
      }
    }
  });
  EstimateRun run;
  for (std::size_t e = 0; e < ids.size(); ++e)
    for (std::size_t i = 0; i < n; ++i)
      if (per_sample[i][e]) run.reports.push_back(*per_sample[i][e]);
  for (const auto& v : notes) run.notes.insert(run.notes.end(), v.begin(), v.end());
  return run;
}

RatioSummary summarize_ratios(const std::vector<NormReport>& reports, const std::string& estimate) {
  std::vector<double> r;
  for (const auto& rep : reports)
    if (rep.estimate == estimate) r.push_back(rep.ratio);
  RatioSummary out;
  out.count = r.size();
  if (r.empty()) return out;
  std::sort(r.begin(), r.end());
  out.min = r.front();
  out.max = r.back();
  const std::size_t m = r.size() / 2;
  out.median = r.size() % 2 ? r[m] : 0.5 * (r[m - 1] + r[m]);
  return out;
}

// --- pipelines -------------------------------------------------------------

namespace {

struct Setup {
  Grid1D grid;
  TimeGrid time;
  SpectralField phi;
  BoundaryData h;
};

Setup make_setup(const ExperimentConfig& cfg) {
  const Grid1D grid = Grid1D::centered(cfg.length, cfg.points);
  const TimeGrid time(cfg.horizon, cfg.steps);
  return {grid, time, sample_initial(grid, cfg.phi), sample_boundary(time, cfg.h1, cfg.h2)};
}

ConstantsCalibration constants_for(const ExperimentConfig& cfg, const Grid1D& grid) {
  if (cfg.constants) return *cfg.constants;
  ModelParams base = cfg.model;
  base.s = 0.0;
  return calibrate_constants(grid, base, cfg.calibration, cfg.solver);
}

CsvTable series_table(const FieldSeries& u, double s, std::size_t stations) {
  const auto tr = u.traces ? *u.traces : record_traces(u, stations);
  CsvTable t{"series", "ksq.series/1", {"t", "l2", "hs", "u_at_0", "ux_at_0"}, {}};
  for (std::size_t j = 0; j < u.time.size(); ++j)
    t.add({u.time.t(j), hs_norm_halfline(u.snapshots[j], 0.0), hs_norm_halfline(u.snapshots[j], s), tr.u[0][j],
           tr.ux[0][j]});
  return t;
}

RunReport run_solve(const ExperimentConfig& cfg) {
  const Setup su = make_setup(cfg);
  const auto calib = constants_for(cfg, su.grid);
  RunReport rep;
  rep.summary["calibration"] = calib;
  if (cfg.weighted) {
    PicardState st = solve_weighted(su.phi, su.h, cfg.model, calib, cfg.solver);
    rep.summary["weighted"] = st;
    rep.diag.merge(st.diag);
    rep.tables.push_back(series_table(st.w, cfg.model.s, cfg.solver.stations));
    return rep;
  }
  SolveRecord rec = solve_global(su.phi, su.h, cfg.model, calib, cfg.solver, cfg.monitor_energy);
  rep.summary["record"] = rec;
  rep.diag.merge(rec.diag);
  rep.tables.push_back(series_table(rec.solution, cfg.model.s, cfg.solver.stations));
  if (rec.energy) {
    CsvTable e{"energy", "ksq.energy/1", {"t", "z2", "zxx2", "y2", "lhs", "rhs", "slack", "envelope", "ok"}, {}};
    for (const auto& st : rec.energy->steps)
      e.add({st.t, st.z2, st.zxx2, st.y2, st.lhs, st.rhs, st.slack, st.envelope, st.ok ? 1.0 : 0.0});
    rep.tables.push_back(std::move(e));
  }
  return rep;
}

RunReport run_verify(const ExperimentConfig& cfg) {
  const EstimateRun run = verify_estimates(cfg);
  RunReport rep;
  CsvTable t{"estimates", "ksq.estimates/1", {"estimate", "sample", "lhs", "rhs", "ratio"}, {}};
  std::vector<std::string> seen;
  for (const auto& r : run.reports) {
    t.rows.push_back({r.estimate, std::to_string(r.data.value("sample", std::size_t{0})), format_number(r.lhs),
                      format_number(r.rhs), format_number(r.ratio)});
    if (std::find(seen.begin(), seen.end(), r.estimate) == seen.end()) seen.push_back(r.estimate);
  }
  json est = json::object();
  for (const auto& id : seen) {
    const auto sm = summarize_ratios(run.reports, id);
    est[id] = {{"count", sm.count},
               {"min", sm.min},
               {"median", sm.median},
               {"max", sm.max},
               {"max_over_median", sm.max_over_median()},
               {"min_over_median", sm.min_over_median()}};
  }
  rep.summary["estimates"] = est;
  rep.summary["reports"] = run.reports;
  rep.summary["notes"] = run.notes;
  rep.tables.push_back(std::move(t));
  return rep;
}

RunReport run_roots(const ExperimentConfig& cfg) {
  std::vector<double> rho(cfg.roots.points);
  for (std::size_t i = 0; i < rho.size(); ++i)
    rho[i] = cfg.roots.rho_min +
             (cfg.roots.rho_max - cfg.roots.rho_min) * static_cast<double>(i) / static_cast<double>(rho.size() - 1);
  const auto curve = root_curve(rho, cfg.model.delta);
  RunReport rep;
  CsvTable t{"roots",
             "ksq.roots/1",
             {"rho", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "residual1", "residual2"},
             {}};
  double worst = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& c = curve[i];
    t.add({rho[i], c.lambda1.real(), c.lambda1.imag(), c.lambda2.real(), c.lambda2.imag(), c.residuals[0],
           c.residuals[1]});
    worst = std::max({worst, c.residuals[0], c.residuals[1]});
  }
  rep.summary = {{"delta", cfg.model.delta}, {"points", curve.size()}, {"max_residual", worst}};
  rep.tables.push_back(std::move(t));
  return rep;
}

RunReport run_compat(const ExperimentConfig& cfg) {
  const Setup su = make_setup(cfg);
  RunReport rep;
  rep.summary["compat"] = check_compatibility(su.phi, su.h, cfg.model.s, cfg.model.delta);
  return rep;
}

RunReport run_wbdr(const ExperimentConfig& cfg) {
  const TimeGrid time(cfg.horizon, cfg.steps);
  const BoundaryData h = sample_boundary(time, cfg.h1, cfg.h2);
  const BoundaryOperator op(cfg.model.delta, cfg.solver.quad);
  std::vector<double> x(cfg.lattice.x_points), t(time.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = x.size() == 1 ? 0.0 : cfg.lattice.x_max * static_cast<double>(i) / static_cast<double>(x.size() - 1);
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = time.t(j);
  RunReport rep;
  const auto v = op.eval(h, x, t, &rep.diag);
  const auto vx = op.eval(h, x, t, &rep.diag, true);
  CsvTable tab{"wbdr", "ksq.wbdr/1", {"x", "t", "v", "v_x"}, {}};
  double vmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) {
      tab.add({x[i], t[j], v[i][j], vx[i][j]});
      vmax = std::max(vmax, std::abs(v[i][j]));
    }
  double trace_err = 0.0, hmax = 0.0;
  if (x.front() == 0.0)
    for (std::size_t j = 0; j < t.size(); ++j) {
      trace_err = std::max({trace_err, std::abs(v[0][j] - h.h1[j]), std::abs(vx[0][j] - h.h2[j])});
      hmax = std::max({hmax, std::abs(h.h1[j]), std::abs(h.h2[j])});
    }
  rep.summary = {{"max_abs", vmax}, {"trace_error", trace_err}, {"data_max", hmax}};
  rep.tables.push_back(std::move(tab));
  return rep;
}

RunReport run_oracle(const ExperimentConfig& cfg) {
  const Setup su = make_setup(cfg);
  const auto calib = constants_for(cfg, su.grid);
  SolverOptions so = cfg.solver;
  FDConfig fc = cfg.oracle;
  if (fc.dt == 0.0) fc.dt = su.time.dt() / 8.0;
  fc.include_uxx = fc.include_uxx && so.second_order;
  fc.include_nonlinear = fc.include_nonlinear && so.nonlinear;
  SolveRecord rec = solve_global(su.phi, su.h, cfg.model, calib, so, false);
  const GridSolution fd = fd_solve(make_profile(cfg.phi), su.h, cfg.model, fc);
  RunReport rep;
  rep.diag.merge(rec.diag);
  rep.diag.merge(fd.diag);
  rep.summary["record"] = rec;
  rep.summary["comparison"] = fd_compare(rec.solution, fd);
  rep.summary["oracle"] = {{"length", fc.length}, {"nx", fc.nx}, {"dt", fc.dt}, {"scheme", fc.scheme}};
  rep.tables.push_back(series_table(rec.solution, cfg.model.s, so.stations));
  return rep;
}

RunReport run_calibrate(const ExperimentConfig& cfg) {
  const Grid1D grid = Grid1D::centered(cfg.length, cfg.points);
  ModelParams base = cfg.model;
  base.s = 0.0;
  RunReport rep;
  rep.summary["calibration"] = calibrate_constants(grid, base, cfg.calibration, cfg.solver);
  return rep;
}

RunReport run_sweep(const ExperimentConfig& cfg) {
  const json base = cfg;
  std::vector<ExperimentConfig> subs;
  for (std::size_t i = 0; i < cfg.sweep.entries.size(); ++i) {
    const std::string path = "sweep.entries[" + std::to_string(i) + "]";
    json j = base;
    j["sweep"]["entries"] = json::array();
    j["pipeline"] = "solve";
    checked(path, [&] {
      for (const auto& [k, v] : cfg.sweep.entries[i].items()) apply_override(j, k, v);
      auto sub = j.get<ExperimentConfig>();
      if (sub.pipeline == "sweep") throw ConfigError("pipeline: sweeps do not nest");
      sub.validate();
      subs.push_back(std::move(sub));
    });
  }
  std::vector<std::optional<RunReport>> results(subs.size());
  std::vector<std::string> failures(subs.size());
  std::vector<int> diverged(subs.size(), 0);
  parallel_for(subs.size(), cfg.workers, [&](std::size_t i) {
    try {
      results[i] = run_experiment(subs[i]);
    } catch (const DivergenceError& e) {
      failures[i] = e.what();
      diverged[i] = 1;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });
  RunReport rep;
  rep.summary["entries"] = json::array();
  for (std::size_t i = 0; i < subs.size(); ++i) {
    json entry = {{"index", i}, {"overrides", cfg.sweep.entries[i]}, {"pipeline", subs[i].pipeline}};
    if (results[i]) {
      entry["status"] = "ok";
      entry["summary"] = results[i]->summary;
      rep.diag.merge(results[i]->diag);
      for (auto& t : results[i]->tables) {
        t.name = "entry" + std::to_string(i) + "_" + t.name;
        rep.tables.push_back(std::move(t));
      }
    } else {
      entry["status"] = diverged[i] ? "diverged" : "failed";
      entry["error"] = failures[i];
      rep.diverged = rep.diverged || diverged[i];
    }
    rep.summary["entries"].push_back(std::move(entry));
  }
  return rep;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport rep;
  if (cfg.pipeline == "solve") rep = run_solve(cfg);
  else if (cfg.pipeline == "verify") rep = run_verify(cfg);
  else if (cfg.pipeline == "roots") rep = run_roots(cfg);
  else if (cfg.pipeline == "compat") rep = run_compat(cfg);
  else if (cfg.pipeline == "wbdr") rep = run_wbdr(cfg);
  else if (cfg.pipeline == "oracle-compare") rep = run_oracle(cfg);
  else if (cfg.pipeline == "calibrate") rep = run_calibrate(cfg);
  else rep = run_sweep(cfg);
  rep.summary["pipeline"] = cfg.pipeline;
  rep.summary["config"] = cfg;
  rep.summary["warnings"] = rep.diag.warnings;
  return rep;
}

}  // namespace ksq
