#include "ksq/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ksq/errors.hpp"

namespace ksq {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

Grid1D::Grid1D(double length, std::size_t n, double origin) : length_(length), n_(n), origin_(origin) {
  if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("grid length must be positive");
  if (n < 8 || !is_power_of_two(n))
    throw ConfigError("grid size must be a power of two >= 8, got " + std::to_string(n));
}

Grid1D Grid1D::centered(double length, std::size_t n) { return Grid1D(length, n, -0.5 * length); }

double Grid1D::xi(std::size_t k) const noexcept {
  const auto n = static_cast<std::ptrdiff_t>(n_);
  auto kk = static_cast<std::ptrdiff_t>(k);
  if (kk >= n / 2) kk -= n;
  return dxi() * static_cast<double>(kk);
}

double Grid1D::dxi() const noexcept { return 2.0 * std::numbers::pi / length_; }

std::size_t Grid1D::zero_index() const {
  const double j = -origin_ / dx();
  const double r = std::round(j);
  if (std::abs(j - r) > 1e-9 || r < 0 || r >= static_cast<double>(n_))
    throw ShapeError("grid has no node at x = 0");
  return static_cast<std::size_t>(r);
}

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("time horizon must be positive");
  if (steps < 2) throw ConfigError("time grid needs at least 2 steps");
}

double ModelParams::weight_exponent() const noexcept { return std::abs(s) / 4.0 + eps; }

void ModelParams::require_weighted_branch() const {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(s < 0.0 && s > -2.0 + 4.0 * eps))
    throw ConfigError("weighted branch needs -2 + 4 eps < s < 0 (s=" + std::to_string(s) +
                      ", eps=" + std::to_string(eps) + ")");
}

}  // namespace ksq
