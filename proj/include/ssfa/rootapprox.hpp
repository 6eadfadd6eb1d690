#pragma once

#include <vector>

#include "ssfa/types.hpp"

namespace ssfa {

// Self-similar root approximants for the vortex profile, used as the
// comparison baseline: R_k(r) = scale * r * P(r^2)^{outer_exponent}.
struct RootForm {
  Real scale = 1;
  std::vector<Real> polynomial;  // coefficients in r^2, constant term first
  Real outer_exponent = 0;
  int order = 0;

  Real value(Real r) const;
  void derivatives(Real r, Real& v, Real& dv, Real& d2v) const;
  // Coefficients of the expansion in u = r^-2 at large r (c_0 + c_1 u + ...).
  std::vector<Real> large_r_expansion(int terms) const;
  // Number of large-r coefficients the construction reproduces exactly.
  int construction_order() const { return order - 2; }
};

RootForm root_approximant(int k);  // k in {2,3,4,5}

}  // namespace ssfa
