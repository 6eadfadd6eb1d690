#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace ssfa {

// All solver-critical arithmetic runs in extended precision; the C API
// narrows to double at the boundary.
using Real = long double;
using Cplx = std::complex<Real>;

enum class Errc {
  invalid_argument = 1,
  unknown_problem,
  order_too_low,
  no_solution,
  degenerate_moments,
  branch_cut,
  conjugation_broken,
  underdetermined,
  unsupported,
  internal,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) { throw Error(c, msg); }

namespace tol {
// Newton convergence target and the acceptance threshold for returned forms,
// both measured rowwise relative to 1+|rhs|.
inline constexpr Real newton = 1e-12L;
inline constexpr Real accept = 1e-10L;
inline constexpr int newton_max_iter = 50;
// A recovered node below node_zero * max|A_j| is the confluent (exponential) limit.
inline constexpr Real node_zero = 1e-8L;
// Conjugate pairing and drop thresholds for solved factor sets.
inline constexpr Real pair = 1e-8L;
inline constexpr Real weight_drop = 1e-11L;
// Imaginary residue allowed when a real-valued result is collapsed from
// complex arithmetic.
inline constexpr Real imag_residue = 1e-9L;
inline constexpr Real stabilized = 1e-8L;
inline constexpr Real reexpansion = 1e-8L;
}  // namespace tol

}  // namespace ssfa
