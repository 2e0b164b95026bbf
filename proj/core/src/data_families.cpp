#include "ksq/data_families.hpp"

#include <cmath>
#include <numbers>

#include "ksq/errors.hpp"

namespace ksq {

namespace {

double num(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("data parameter '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::string family_of(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("family") || !spec.at("family").is_string())
    throw ConfigError("data descriptor needs a string field 'family'");
  return spec.at("family").get<std::string>();
}

}  // namespace

bool is_initial_family(const std::string& n) {
  return n == "gaussian" || n == "exp_decay" || n == "compact_bump" || n == "x2_exp" || n == "zero";
}

bool is_boundary_family(const std::string& n) { return n == "raised_cosine" || n == "ramp" || n == "zero"; }

std::function<double(double)> make_profile(const nlohmann::json& spec) {
  const std::string f = family_of(spec);
  const double amp = num(spec, "amp", 1.0);
  if (f == "zero") return [](double) { return 0.0; };
  if (f == "gaussian") {
    const double c = num(spec, "center", 5.0), w = num(spec, "width", 1.0);
    if (!(w > 0.0)) throw ConfigError("gaussian.width must be positive");
    return [=](double x) { return amp * std::exp(-((x - c) / w) * ((x - c) / w)); };
  }
  if (f == "exp_decay") {
    const double r = num(spec, "rate", 1.0);
    if (!(r > 0.0)) throw ConfigError("exp_decay.rate must be positive");
    return [=](double x) { return amp * std::exp(-r * x); };
  }
  if (f == "compact_bump") {
    const double c = num(spec, "center", 5.0), r = num(spec, "radius", 2.0);
    if (!(r > 0.0)) throw ConfigError("compact_bump.radius must be positive");
    return [=](double x) {
      const double y = (x - c) / r;
      return std::abs(y) < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - y * y)) : 0.0;
    };
  }
  if (f == "x2_exp") {
    const double r = num(spec, "rate", 1.0);
    return [=](double x) { return amp * x * x * std::exp(-r * x); };
  }
  if (f == "raised_cosine") {
    const double a = num(spec, "start", 0.0), b = num(spec, "stop", 1.0);
    if (!(b > a)) throw ConfigError("raised_cosine needs stop > start");
    return [=](double t) {
      if (t <= a || t >= b) return 0.0;
      return amp * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (t - a) / (b - a)));
    };
  }
  if (f == "ramp") {
    const double p = num(spec, "power", 2.0), sc = num(spec, "scale", 1.0);
    if (!(p >= 1.0)) throw ConfigError("ramp.power must be at least 1");
    return [=](double t) { return t > 0.0 ? amp * std::pow(t / sc, p) : 0.0; };
  }
  throw ConfigError("unknown data family '" + f + "'");
}

SpectralField sample_initial(const Grid1D& grid, const nlohmann::json& spec) {
  if (!is_initial_family(family_of(spec))) throw ConfigError("'" + family_of(spec) + "' is not an initial-data family");
  const auto f = make_profile(spec);
  const std::size_t c = grid.zero_index();
  std::vector<double> half(grid.size() - c);
  for (std::size_t i = 0; i < half.size(); ++i) half[i] = f(grid.dx() * static_cast<double>(i));
  auto field = SpectralField::from_real(grid, extend_half_line(grid, half, Extension::blend4));
  field.sync();
  return field;
}

BoundaryData sample_boundary(const TimeGrid& time, const nlohmann::json& h1, const nlohmann::json& h2) {
  for (const auto* s : {&h1, &h2})
    if (!is_boundary_family(family_of(*s))) throw ConfigError("'" + family_of(*s) + "' is not a boundary-data family");
  const auto f1 = make_profile(h1), f2 = make_profile(h2);
  BoundaryData h = BoundaryData::zeros(time);
  for (std::size_t j = 0; j < time.size(); ++j) {
    h.h1[j] = f1(time.t(j));
    h.h2[j] = f2(time.t(j));
  }
  return h;
}

}  // namespace ksq
