#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <string>

#include "ksq/boundary.hpp"
#include "ksq/spectral.hpp"

namespace ksq {

// Named smooth data profiles, described as {"family": name, ...parameters}.
//   initial data:  gaussian {amp, center, width}, exp_decay {amp, rate},
//                  compact_bump {amp, center, radius}, x2_exp {amp, rate}
//   boundary data: raised_cosine {amp, start, stop}, ramp {amp, power, scale}, zero
std::function<double(double)> make_profile(const nlohmann::json& spec);

bool is_initial_family(const std::string& name);
bool is_boundary_family(const std::string& name);

// x >= 0 samples of the profile, extended to x < 0 with the order-4 blend.
SpectralField sample_initial(const Grid1D& grid, const nlohmann::json& spec);
BoundaryData sample_boundary(const TimeGrid& time, const nlohmann::json& h1, const nlohmann::json& h2);

}  // namespace ksq
