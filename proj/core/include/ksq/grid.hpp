#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace ksq {

using cplx = std::complex<double>;

// Uniform periodic grid x_j = origin + j*dx, j = 0..n-1, with n a power of two.
class Grid1D {
 public:
  Grid1D(double length, std::size_t n, double origin);

  // Symmetric grid on [-L/2, L/2); x = 0 sits at index n/2.
  static Grid1D centered(double length, std::size_t n);

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return length_ / static_cast<double>(n_); }
  double origin() const noexcept { return origin_; }
  double x(std::size_t j) const noexcept { return origin_ + dx() * static_cast<double>(j); }

  // Wavenumber of DFT slot k (standard FFT ordering). The Nyquist slot maps to -pi/dx.
  double xi(std::size_t k) const noexcept;
  double dxi() const noexcept;
  bool is_nyquist(std::size_t k) const noexcept { return k == n_ / 2; }

  // Index of the node at x = 0; throws ShapeError when the grid is not centered.
  std::size_t zero_index() const;

  bool operator==(const Grid1D& o) const noexcept {
    return n_ == o.n_ && length_ == o.length_ && origin_ == o.origin_;
  }
  bool operator!=(const Grid1D& o) const noexcept { return !(*this == o); }

 private:
  double length_;
  std::size_t n_;
  double origin_;
};

class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
  double t(std::size_t j) const noexcept { return horizon_ * static_cast<double>(j) / static_cast<double>(steps_); }

  bool operator==(const TimeGrid& o) const noexcept { return horizon_ == o.horizon_ && steps_ == o.steps_; }
  bool operator!=(const TimeGrid& o) const noexcept { return !(*this == o); }

 private:
  double horizon_;
  std::size_t steps_;
};

struct ModelParams {
  double delta = 0.0;
  double s = 0.0;
  double eps = 0.05;

  // Exponent of the temporal weight t^{|s|/4 + eps}.
  double weight_exponent() const noexcept;
  // Throws ConfigError unless -2 + 4 eps < s < 0.
  void require_weighted_branch() const;
};

bool is_power_of_two(std::size_t n) noexcept;

}  // namespace ksq
