#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ssfa/types.hpp"

namespace ssfa {

// Truncated power series sum_{n=0..K} a_n x^n. Immutable after construction.
class TruncatedSeries {
public:
  TruncatedSeries() = default;
  explicit TruncatedSeries(std::vector<Cplx> coeffs, std::string variable = "x");

  static TruncatedSeries zero(int order, std::string variable = "x");

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Cplx>& coefficients() const { return coeffs_; }
  Cplx coeff(int n) const;
  const std::string& variable() const { return variable_; }

  bool is_real(Real tolerance = 1e-12L) const;
  Cplx evaluate(Cplx x) const;  // Horner

private:
  std::vector<Cplx> coeffs_{Cplx(0)};
  std::string variable_ = "x";
};

// Arithmetic at a common truncation order. add/sub/mul/div require equal
// orders; div and log require a nonzero constant term.
TruncatedSeries add(const TruncatedSeries& s, const TruncatedSeries& t);
TruncatedSeries sub(const TruncatedSeries& s, const TruncatedSeries& t);
TruncatedSeries mul(const TruncatedSeries& s, const TruncatedSeries& t);
TruncatedSeries div(const TruncatedSeries& s, const TruncatedSeries& t);
TruncatedSeries log(const TruncatedSeries& s);
TruncatedSeries exp(const TruncatedSeries& s);

TruncatedSeries scale(const TruncatedSeries& s, Cplx factor);
// d/dx; order drops by one.
TruncatedSeries derivative(const TruncatedSeries& s);
// Multiply by x^powers and truncate back to `order`.
TruncatedSeries shift_up(const TruncatedSeries& s, int powers, int order);
TruncatedSeries truncate(const TruncatedSeries& s, int order);
// Substitute x -> c*x.
TruncatedSeries scale_variable(const TruncatedSeries& s, Cplx c);

// Leading factor carried in front of a normalized series: f0(x) = scale * x^sigma.
struct Prefactor {
  enum class Tag { unit, power };
  Tag tag = Tag::unit;
  Cplx scale{1};
  Real zero_exponent = 0;      // sigma: f0 ~ scale * x^sigma as x -> 0
  Real infinity_exponent = 0;  // alpha: f0 ~ scale * x^alpha as x -> inf
};

// A normalized expansion ready for moment extraction: series has a_0 = 1 and
// lives in the factor variable (x itself, or u = x^2 when squared_argument).
struct NormalizedExpansion {
  TruncatedSeries series;
  Prefactor prefactor;
  bool squared_argument = false;
};

// Deterministic map (order, theta) -> normalized expansion. Regenerated per
// theta during outer root finds; prefix-stable in the order.
struct SeriesOracle {
  std::function<NormalizedExpansion(int order, Cplx theta)> generate;
  std::vector<std::string> parameter_names;  // empty: no shooting parameter
  bool has_parameter() const { return !parameter_names.empty(); }
};

// Order-by-order generation of a series from a polynomial ODE residual by
// undetermined coefficients. `residual` must return the residual series of
// the working equation for a trial solution series; each unknown coefficient
// must enter some residual order affinely (checked).
struct OdeSeriesDef {
  std::function<TruncatedSeries(const TruncatedSeries& y)> residual;
  std::vector<std::pair<int, Cplx>> prescribed;  // (index, value)
  int free_index = -1;                           // slot filled by theta, -1 if none
  std::string variable = "x";
};

TruncatedSeries series_from_ode(const OdeSeriesDef& def, int order, Cplx theta = Cplx(0));

}  // namespace ssfa
