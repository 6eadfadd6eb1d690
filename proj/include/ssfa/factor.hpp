#pragma once

#include <span>
#include <vector>

#include "ssfa/moments.hpp"
#include "ssfa/series.hpp"
#include "ssfa/types.hpp"

namespace ssfa {

// One binomial factor (1 + A x)^n, or its confluent limit
// lim_{A->0} (1 + A x)^(b/A) = exp(b x).
struct Factor {
  enum class Kind { power, exponential };
  Kind kind = Kind::power;
  Cplx A{0};
  Cplx n{0};
  Cplx b{0};  // rate, exponential kind only
};

// Product form f(x) = f0(x) * prod_i (1 + A_i w)^{n_i} with w = x (or x^2
// when squared_argument). The object built by the even/odd solvers.
struct FactorForm {
  Prefactor prefactor;
  std::vector<Factor> factors;
  int order = 0;
  bool squared_argument = false;
  // quality metadata filled by the solvers
  Real moment_residual = 0;
  Real reexpansion_error = 0;

  Cplx exponent_sum() const;  // sum n_i (exponential factors excluded)
};

struct EvalDerivs {
  Real value = 0;
  Real d1 = 0;
  Real d2 = 0;
};

// Principal-branch evaluation with conjugate pairs collapsed to a real
// result. Real nodes with non-integer exponent require 1 + A w > 0.
Real evaluate(const FactorForm& f, Real x);
EvalDerivs evaluate_with_derivatives(const FactorForm& f, Real x);
// Unpoliced complex evaluation of the factor product (no prefactor).
Cplx factor_product(std::span<const Factor> factors, bool squared_argument, Cplx x);

// Maclaurin expansion of the factor product (prefactor excluded), for
// accuracy-through-order checks.
TruncatedSeries expand_factors(std::span<const Factor> factors, int order);

// --- power-sum engine -------------------------------------------------------
//
// Recover factors from  sum_i n_i A_i^m = mu_m  for m = lo .. lo+rhs.size()-1.
// lo = 1 is the plain moment problem of the even/odd approximants; lo = 0
// prepends the exponent-sum equation used by asymptotic boundary conditions.
struct PowerSumSpec {
  std::vector<Cplx> rhs;
  int lo = 1;
  bool fix_first_node = false;   // A_1 = 1 with only n_1 free
  bool allow_exponential = true; // confluent limit allowed (lo = 1 only)
  // Residual gate; raise it to obtain best-effort seeds for an outer Newton.
  Real accept = tol::accept;
  // Reduced multistart effort, for bracketing scans that only need a signed
  // residual rather than the polished solution.
  bool quick = false;
};

struct PowerSumBranch {
  std::vector<Factor> factors;
  Real residual = 0;
};

struct PowerSumSolution {
  std::vector<Factor> factors;
  Real residual = 0;        // max_m |r_m| / (1 + |mu_m|)
  bool fixed_first = false; // factors[0] is the pinned A_1 = 1 node
  // Distinct admissible solutions beyond the tie-break winner (the odd-order
  // system is genuinely multivalued); used by outer solvers to follow every
  // branch.
  std::vector<PowerSumBranch> alternates;
};

PowerSumSolution solve_power_sums(const PowerSumSpec& spec);

// Residual of a factor set against power-sum equations (diagnostic).
Real power_sum_residual(std::span<const Factor> factors, std::span<const Cplx> rhs, int lo);

// Newton-refine an existing factor set against new right-hand sides (warm
// start for continuation in an outer parameter). Returns the final relative
// residual.
Real polish_power_sums(std::vector<Factor>& factors, std::span<const Cplx> rhs, int lo,
                       bool fix_first_node);

// --- even / odd approximants ------------------------------------------------

// Even order k = 2p: p factors from B_1..B_2p (Prony reduction + Newton).
FactorForm solve_even(const MomentVector& B);
// Odd order k = 2p+1: p+1 factors with A_1 = 1 from B_1..B_2p+1.
FactorForm solve_odd(const MomentVector& B);
// Dispatch on parity of B.order().
FactorForm solve_moments(const MomentVector& B);

// Enforce conjugate pairing on a solved factor set (within tol::pair);
// returns false if a complex factor cannot be paired.
bool symmetrize_conjugates(std::vector<Factor>& factors);

// --- stabilization ----------------------------------------------------------

struct StabilizationReport {
  std::vector<Real> sup_diffs;  // consecutive pairs
  bool stabilized = false;
  int first_stable_index = -1;  // index of the first form of a stable pair
};

StabilizationReport detect_fixed_form(std::span<const FactorForm> forms,
                                      std::span<const Real> grid);

}  // namespace ssfa
