#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or an unsupported combination of options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Grids or time lattices that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

// The quartic did not have exactly two roots in the open left half plane.
class SelectionError : public Error {
 public:
  SelectionError(const std::string& what, std::array<std::complex<double>, 4> roots)
      : Error(what), roots_(roots) {}
  const std::array<std::complex<double>, 4>& roots() const noexcept { return roots_; }

 private:
  std::array<std::complex<double>, 4> roots_;
};

class RefinementError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> increments = {})
      : Error(what), increments_(std::move(increments)) {}
  const std::vector<double>& increments() const noexcept { return increments_; }

 private:
  std::vector<double> increments_;
};

class IncompleteRecordError : public Error {
 public:
  using Error::Error;
};

class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double estimate) : Error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

// Non-fatal accuracy notes collected along a computation.
struct Diagnostics {
  std::vector<std::string> warnings;
  // Repeats of an identical message are dropped.
  void warn(std::string msg) {
    if (std::find(warnings.begin(), warnings.end(), msg) == warnings.end()) warnings.push_back(std::move(msg));
  }
  bool empty() const noexcept { return warnings.empty(); }
  void merge(const Diagnostics& other) {
    for (const auto& w : other.warnings) warn(w);
  }
};

}  // namespace ksq
