#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ssfa/constraints.hpp"
#include "ssfa/factor.hpp"
#include "ssfa/series.hpp"
#include "ssfa/types.hpp"

namespace ssfa {

struct NativeEval {
  Real y = 0;
  Real dy = 0;
  Real d2y = 0;
};

// Configuration for the high-accuracy numeric reference (initial-value
// integration, optionally with shooting for two-point problems).
struct ReferenceConfig {
  bool supported = false;
  int dim = 0;  // 1 or 2 state components
  Real a = 0, b = 0;
  std::array<Real, 2> init{0, 0};
  bool shoot = false;  // vary init[1] until u[0](b) == shoot_target
  Real shoot_target = 0;
  std::function<void(Real, const Real*, Real*)> rhs;
  std::function<NativeEval(Real, const Real*)> to_native;
  std::function<Real(Real)> x_of_t;  // native t -> integration variable
};

// One benchmark problem as an executable specification: residual operator,
// variable transform, conditions, series generator, optional exact solution.
class ProblemSpec {
public:
  static ProblemSpec builtin(const std::string& name, Real epsilon, Real p0 = 2);
  static const std::vector<std::string>& names();

  const std::string& name() const;
  const std::string& label() const;
  Real epsilon() const;
  Real p0() const;
  std::pair<Real, Real> domain() const;
  int min_order() const;
  bool has_exact() const;
  bool has_shooting() const;

  NativeEval exact(Real t) const;
  // Residual of the original equation E[y] at one native point.
  Real native_residual(Real y, Real dy, Real d2y, Real t) const;
  Real working_from_native(Real t) const;
  Real native_from_working(Real w) const;

  // Raw expansion-variable series (before prefactor normalization).
  TruncatedSeries raw_series(int order, Cplx theta) const;
  SeriesOracle oracle() const;
  std::vector<Condition> conditions() const;
  Bracket bracket() const;
  ReferenceConfig reference_config() const;

  // Evaluate a working-variable form in native variables via the transform's
  // chain rule.
  NativeEval eval_native(const FactorForm& form, Real t) const;

  struct Impl;

private:
  std::shared_ptr<const Impl> impl_;
  explicit ProblemSpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

// A solved benchmark: the factor approximant plus everything needed to
// evaluate it in native variables.
struct Solution {
  ProblemSpec problem;
  FactorForm form;
  Real theta = std::numeric_limits<Real>::quiet_NaN();
  Real moment_residual = 0;
  Real condition_residual = 0;
  std::vector<SolveOutcome::Alternate> alternates;
  // When this order had no usable solution of its own, the returned form is
  // the stabilized solution of this (higher) order.
  int stabilized_from = 0;

  NativeEval eval(Real t) const { return problem.eval_native(form, t); }
  Real value(Real t) const { return eval(t).y; }
};

Solution solve_problem(const ProblemSpec& spec, int k);

}  // namespace ssfa
