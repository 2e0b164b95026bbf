#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "ksq/boundary.hpp"
#include "ksq/spectral.hpp"

namespace ksq {

// Finite sums of c * x^p * exp(-a x^2 - b x); closed under d/dx and products.
class ExpPoly {
 public:
  struct Term {
    double c;
    int p;
    double a;
    double b;
  };

  ExpPoly() = default;
  static ExpPoly monomial(double c, int p, double a = 0.0, double b = 0.0);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  double operator()(double x) const;
  ExpPoly derivative(int order = 1) const;

  ExpPoly& operator+=(const ExpPoly& o);
  ExpPoly& operator*=(double s);
  friend ExpPoly operator+(ExpPoly a, const ExpPoly& b) { return a += b; }
  friend ExpPoly operator-(ExpPoly a, ExpPoly b) { return a += (b *= -1.0); }
  friend ExpPoly operator*(ExpPoly a, double s) { return a *= s; }
  friend ExpPoly operator*(const ExpPoly& a, const ExpPoly& b);

  bool is_zero() const noexcept { return terms_.empty(); }

 private:
  void simplify();
  std::vector<Term> terms_;
};

// phi_0 = phi,
// phi_k = -phi_{k-1}'''' - delta phi_{k-1}''' - phi_{k-1}'' - sum_j C(k-1,j) phi_j phi_{k-1-j}'.
std::vector<ExpPoly> compatibility_sequence(const ExpPoly& phi, double delta, int k_max);
// Same recursion with spectral derivatives; throws AccuracyError when the iterates are
// not resolved by the grid.
std::vector<SpectralField> compatibility_sequence(const SpectralField& phi, double delta, int k_max);

enum class CompatCase { i, ii, iii };
std::string to_string(CompatCase c);
CompatCase compat_case(double s);

struct CompatCondition {
  int k = 0;
  std::string trace;  // "u" (phi_k(0) vs h1^(k)(0)) or "u_x" (phi_k'(0) vs h2^(k)(0))
  double phi_value = 0.0;
  double h_value = 0.0;
  double mismatch = 0.0;
  double h_error = 0.0;  // uncertainty of the boundary derivative estimate
};

struct CompatReport {
  double s = 0.0;
  int k_max = 0;  // floor(s/4)
  CompatCase tag = CompatCase::i;
  std::vector<CompatCondition> conditions;
  bool compatible = true;
  bool inconclusive = false;
  std::vector<std::string> notes;
};
void to_json(nlohmann::json& j, const CompatReport& r);

struct CompatOptions {
  double tol = 1e-6;
};

// k-th derivative at t = 0 from a least-squares polynomial of degree k+2 through the
// first 2(k+2) samples; `error` is its difference from the degree k+3 fit.
double boundary_derivative_at_zero(const TimeGrid& grid, std::span<const double> h, int k, double* error = nullptr);

CompatReport check_compatibility(const ExpPoly& phi, const BoundaryData& h, double s, double delta,
                                 CompatOptions opts = {});
// Grid path: phi on a centered grid; derivatives at x = 0 from its spectral representation.
CompatReport check_compatibility(const SpectralField& phi, const BoundaryData& h, double s, double delta,
                                 CompatOptions opts = {});

}  // namespace ksq
