#pragma once

#include <span>
#include <vector>

#include "ssfa/problems.hpp"
#include "ssfa/rootapprox.hpp"
#include "ssfa/types.hpp"

namespace ssfa {

// Grids of defect |E[y*]| and error |y* - y| values with their suprema D,
// Delta and the ratio delta = Delta/D.
struct DefectReport {
  std::vector<Real> grid;
  std::vector<Real> defect_values;
  std::vector<Real> error_values;  // empty when no reference was used
  Real max_defect = 0;
  Real max_error = std::numeric_limits<Real>::quiet_NaN();
  Real ratio = std::numeric_limits<Real>::quiet_NaN();
  int order = 0;
  Real epsilon = std::numeric_limits<Real>::quiet_NaN();
  int warnings = 0;  // grid points excluded because evaluation failed
  bool has_error() const { return !error_values.empty(); }
};

std::vector<Real> default_grid(const ProblemSpec& spec, int points = 2001);

// Pointwise |E[y_k*]| with analytic derivatives; failures are excluded and
// counted.
DefectReport defect(const Solution& sol, std::span<const Real> grid);

// High-accuracy numeric reference (adaptive embedded Runge-Kutta plus
// shooting for two-point problems), Richardson-verified to `tolerance`.
class Reference {
public:
  Reference(std::vector<Real> ts, std::vector<NativeEval> states, Real verified);
  NativeEval eval(Real t) const;  // cubic Hermite between stored nodes
  Real verified_tolerance() const { return verified_; }

private:
  std::vector<Real> ts_;
  std::vector<NativeEval> states_;
  Real verified_ = 0;
};

Reference reference_solution(const ProblemSpec& spec, Real tolerance,
                             std::span<const Real> grid);

// Defect plus deviation from the reference, with the error-to-defect ratio.
DefectReport error(const Solution& sol, const Reference& ref, std::span<const Real> grid);

// Defect of an Appendix-style root approximant against the vortex equation.
DefectReport defect_of_root(int k, std::span<const Real> grid);

}  // namespace ssfa
