#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ssfa/factor.hpp"
#include "ssfa/moments.hpp"
#include "ssfa/series.hpp"
#include "ssfa/types.hpp"

namespace ssfa {

// A scalar condition imposed on a factor approximant in its working variable.
struct Condition {
  enum class Kind { value_at_point, derivative_at_point, asymptotic_power };
  Kind kind = Kind::value_at_point;
  Real location = 0;  // ignored for asymptotic_power (location is infinity)
  Real target = 0;    // boundary value, derivative value, or amplitude B
  Real exponent = 0;  // beta, asymptotic_power only
};

// Residual pair (amplitude, exponent sum) of the power-law boundary condition
// f(x) ~ B x^beta at infinity: (c*prod A_i^{n_i} - B, alpha + s*sum n_i - beta)
// with s = 2 for squared-argument forms.
std::pair<Real, Real> apply_asymptotic(const FactorForm& f, const Condition& c);

struct Bracket {
  Real lo = 1e-3L;
  Real hi = 10;
  int points = 64;
};

struct ConstrainedSolveSpec {
  SeriesOracle oracle;
  std::vector<Condition> conditions;
  int order = 0;
  Bracket bracket{};
  // Optional quality metric used to rank multiple shooting roots (problems
  // install the coarse-grid defect here). Smaller is better.
  std::function<Real(const FactorForm&, Real theta)> rank_metric;
  // Extra starting values for the joint Newton (continuation from adjacent
  // orders); explored alongside the bracket scan roots.
  std::vector<Real> seed_thetas;
};

struct SolveOutcome {
  FactorForm form;
  Real theta = std::numeric_limits<Real>::quiet_NaN();
  Real moment_residual = 0;
  Real condition_residual = 0;
  struct Alternate {
    Real theta = 0;
    Real metric = 0;
  };
  std::vector<Alternate> alternates;  // ranked, first entry is the returned one
};

// Solves the moment system together with the imposed conditions: an outer
// root find over the shooting parameter wrapped around the power-sum solve,
// then a full Newton on the joint system.
SolveOutcome solve_constrained(const ConstrainedSolveSpec& spec);

}  // namespace ssfa
