#include "ssfa/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ssfa {

namespace {
constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();
}

struct ProblemSpec::Impl {
  std::string name;
  std::string label;
  Real eps = 1;
  Real p0 = kNaN;
  std::pair<Real, Real> domain{0, 1};
  int min_order = 1;

  enum class Norm { unit, scaled_const, linear_prefactor, odd_prefactor };
  Norm norm = Norm::unit;

  OdeSeriesDef ode;
  bool shooting = false;
  std::vector<Condition> conditions;
  Bracket bracket{};

  std::function<NativeEval(Real)> exact;  // empty when unknown
  std::function<Real(Real, Real, Real, Real)> residual;  // (y, y', y'', t)
  std::function<Real(Real)> w_of_t;
  std::function<Real(Real)> t_of_w;
  std::function<NativeEval(const FactorForm&, Real)> native_eval;
  ReferenceConfig ref;
};

namespace {

using Impl = ProblemSpec::Impl;

// The order label k follows the paper's counting per problem family: for the
// theta*x-prefactor problems it is the truncation order of the raw series
// (coefficients a_1..a_k, hence k-1 moment equations); for the odd-series
// problems it is the truncation order in u = z^2 after the prefactor.
int native_series_order(const Impl& im, int k) {
  switch (im.norm) {
    case Impl::Norm::unit:
    case Impl::Norm::scaled_const:
      return k;
    case Impl::Norm::linear_prefactor:
      return k;
    case Impl::Norm::odd_prefactor:
      return 2 * k + 1;
  }
  return k;
}

NormalizedExpansion normalize(const Impl& im, const TruncatedSeries& raw, int k, Cplx theta) {
  NormalizedExpansion ex;
  switch (im.norm) {
    case Impl::Norm::unit: {
      ex.series = raw;
      ex.prefactor.tag = Prefactor::Tag::unit;
      break;
    }
    case Impl::Norm::scaled_const: {
      const Cplx a0 = raw.coeff(0);
      if (std::abs(a0) < 1e-300L) fail(Errc::invalid_argument, "zero leading coefficient");
      ex.series = scale(raw, Cplx(1) / a0);
      ex.prefactor.tag = Prefactor::Tag::power;
      ex.prefactor.scale = a0;
      ex.prefactor.zero_exponent = 0;
      ex.prefactor.infinity_exponent = 0;
      break;
    }
    case Impl::Norm::linear_prefactor: {
      if (std::abs(theta) < 1e-300L) fail(Errc::invalid_argument, "zero shooting parameter");
      std::vector<Cplx> c(static_cast<size_t>(k));
      for (int n = 0; n < k; ++n) c[static_cast<size_t>(n)] = raw.coeff(n + 1) / theta;
      ex.series = TruncatedSeries(std::move(c), raw.variable());
      ex.prefactor.tag = Prefactor::Tag::power;
      ex.prefactor.scale = theta;
      ex.prefactor.zero_exponent = 1;
      ex.prefactor.infinity_exponent = 1;
      break;
    }
    case Impl::Norm::odd_prefactor: {
      if (std::abs(theta) < 1e-300L) fail(Errc::invalid_argument, "zero shooting parameter");
      std::vector<Cplx> c(static_cast<size_t>(k) + 1);
      for (int n = 0; n <= k; ++n) c[static_cast<size_t>(n)] = raw.coeff(2 * n + 1) / theta;
      ex.series = TruncatedSeries(std::move(c), "u");
      ex.prefactor.tag = Prefactor::Tag::power;
      ex.prefactor.scale = theta;
      ex.prefactor.zero_exponent = 1;
      ex.prefactor.infinity_exponent = 1;
      ex.squared_argument = true;
      break;
    }
  }
  return ex;
}

// Chain-rule evaluations shared by several transforms.

NativeEval direct_eval(const FactorForm& f, Real w) {
  const EvalDerivs d = evaluate_with_derivatives(f, w);
  return {d.value, d.d1, d.d2};
}

// --- catalog construction ---------------------------------------------------

std::shared_ptr<Impl> make_linear_singular(Real eps) {
  auto im = std::make_shared<Impl>();
  im->name = "linear_singular";
  im->label = "linear singular initial-value problem eps*y'' + 2y' + y/eps = 0";
  im->eps = eps;
  im->domain = {0, 10 * std::abs(eps)};
  im->norm = Impl::Norm::unit;
  im->ode.prescribed = {{0, Cplx(1)}, {1, Cplx(-1 / eps)}};
  im->ode.variable = "t";
  im->ode.residual = [eps](const TruncatedSeries& y) {
    const int R = std::max(y.order() - 2, 0);
    const TruncatedSeries d1 = derivative(y);
    const TruncatedSeries d2 = derivative(d1);
    TruncatedSeries r = scale(truncate(d2, R), Cplx(eps));
    r = add(r, scale(truncate(d1, R), Cplx(2)));
    r = add(r, scale(truncate(y, R), Cplx(1 / eps)));
    return r;
  };
  im->residual = [eps](Real y, Real dy, Real d2y, Real) { return eps * d2y + 2 * dy + y / eps; };
  im->exact = [eps](Real t) -> NativeEval {
    const Real v = std::exp(-t / eps);
    return {v, -v / eps, v / (eps * eps)};
  };
  im->w_of_t = [](Real t) { return t; };
  im->t_of_w = [](Real w) { return w; };
  im->native_eval = [](const FactorForm& f, Real t) { return direct_eval(f, t); };
  im->ref.supported = true;
  im->ref.dim = 2;
  im->ref.a = 0;
  im->ref.b = im->domain.second;
  im->ref.init = {1, -1 / eps};
  im->ref.rhs = [eps](Real, const Real* u, Real* du) {
    du[0] = u[1];
    du[1] = -(2 * u[1] + u[0] / eps) / eps;
  };
  im->ref.to_native = [eps](Real, const Real* u) -> NativeEval {
    return {u[0], u[1], -(2 * u[1] + u[0] / eps) / eps};
  };
  im->ref.x_of_t = [](Real t) { return t; };
  return im;
}

std::shared_ptr<Impl> make_carrier(Real eps) {
  auto im = std::make_shared<Impl>();
  im->name = "carrier_transfer";
  im->label = "carrier transfer (eps*y + t)y' + y - 1 = 0, working z z' = 1 + x";
  im->eps = eps;
  im->domain = {0, 10 * std::abs(eps)};
  im->norm = Impl::Norm::scaled_const;
  im->ode.prescribed = {{0, Cplx(2)}};
  im->ode.residual = [](const TruncatedSeries& y) {
    const int R = std::max(y.order() - 1, 0);
    const TruncatedSeries d1 = derivative(y);
    TruncatedSeries r = mul(truncate(y, R), truncate(d1, R));
    std::vector<Cplx> c(static_cast<size_t>(R) + 1, Cplx(0));
    c[0] = Cplx(1);
    if (R >= 1) c[1] = Cplx(1);
    return sub(r, TruncatedSeries(std::move(c)));
  };
  im->residual = [eps](Real y, Real dy, Real, Real t) { return (eps * y + t) * dy + y - 1; };
  im->exact = [eps](Real t) -> NativeEval {
    const Real tau = t / eps;
    const Real s = std::sqrt(4 + 2 * tau + tau * tau);
    const Real y = s - tau;
    const Real dy = ((1 + tau) / s - 1) / eps;
    const Real d2y = 3 / (s * s * s) / (eps * eps);
    return {y, dy, d2y};
  };
  im->w_of_t = [eps](Real t) { return t / eps; };
  im->t_of_w = [eps](Real w) { return w * eps; };
  im->native_eval = [eps](const FactorForm& f, Real t) -> NativeEval {
    const Real x = t / eps;
    const EvalDerivs d = evaluate_with_derivatives(f, x);
    return {d.value - x, (d.d1 - 1) / eps, d.d2 / (eps * eps)};
  };
  im->ref.supported = true;
  im->ref.dim = 1;
  im->ref.a = 0;
  im->ref.b = im->domain.second;
  im->ref.init = {2, 0};
  im->ref.rhs = [eps](Real t, const Real* u, Real* du) { du[0] = (1 - u[0]) / (eps * u[0] + t); };
  im->ref.to_native = [eps](Real t, const Real* u) -> NativeEval {
    return {u[0], (1 - u[0]) / (eps * u[0] + t), kNaN};
  };
  im->ref.x_of_t = [](Real t) { return t; };
  return im;
}

std::shared_ptr<Impl> make_logistic(Real eps, Real p0) {
  if (!(p0 > 0)) fail(Errc::invalid_argument, "logistic needs p0 > 0");
  auto im = std::make_shared<Impl>();
  im->name = "logistic";
  im->label = "singular logistic equation eps*p' = p(1-p), working x y' = y(y-1)";
  im->eps = eps;
  im->p0 = p0;
  im->domain = {0, 10 * std::abs(eps)};
  im->min_order = 3;
  im->norm = Impl::Norm::unit;
  im->shooting = true;
  im->ode.prescribed = {{0, Cplx(1)}};
  im->ode.free_index = 1;
  im->ode.residual = [](const TruncatedSeries& y) {
    const int R = y.order();
    const TruncatedSeries d1 = derivative(y);
    TruncatedSeries r = shift_up(d1, 1, R);
    r = sub(r, mul(y, y));
    return add(r, y);
  };
  im->conditions = {{Condition::Kind::value_at_point, 1, p0, 0}};
  if (p0 < 1) im->bracket = {-10, -1e-3L, 64};
  im->residual = [eps](Real y, Real dy, Real, Real) { return eps * dy - y * (1 - y); };
  im->exact = [eps, p0](Real t) -> NativeEval {
    const Real p = p0 / (p0 - (p0 - 1) * std::exp(-t / eps));
    const Real dp = p * (1 - p) / eps;
    return {p, dp, dp * (1 - 2 * p) / eps};
  };
  im->w_of_t = [eps](Real t) { return std::exp(-t / eps); };
  im->t_of_w = [eps](Real w) { return -eps * std::log(w); };
  im->native_eval = [eps](const FactorForm& f, Real t) -> NativeEval {
    const Real x = std::exp(-t / eps);
    const EvalDerivs d = evaluate_with_derivatives(f, x);
    return {d.value, -x * d.d1 / eps, (x * d.d1 + x * x * d.d2) / (eps * eps)};
  };
  im->ref.supported = true;
  im->ref.dim = 1;
  im->ref.a = 0;
  im->ref.b = im->domain.second;
  im->ref.init = {p0, 0};
  im->ref.rhs = [eps](Real, const Real* u, Real* du) { du[0] = u[0] * (1 - u[0]) / eps; };
  im->ref.to_native = [eps](Real, const Real* u) -> NativeEval {
    return {u[0], u[0] * (1 - u[0]) / eps, kNaN};
  };
  im->ref.x_of_t = [](Real t) { return t; };
  return im;
}

std::shared_ptr<Impl> make_kink(Real eps) {
  if (!(eps > 0)) fail(Errc::invalid_argument, "kink soliton needs eps > 0");
  auto im = std::make_shared<Impl>();
  im->name = "kink";
  im->label = "kink soliton (eps/2)phi'' + phi - phi^3 = 0, working variable z = exp(2x/sqrt(eps))";
  im->eps = eps;
  const Real rt = std::sqrt(eps);
  im->domain = {-6 * rt, 6 * rt};
  im->min_order = 2;
  im->norm = Impl::Norm::unit;
  im->shooting = true;
  im->ode.prescribed = {{0, Cplx(1)}};
  im->ode.free_index = 1;
  im->ode.variable = "z";
  im->ode.residual = [](const TruncatedSeries& y) {
    const int R = y.order();
    const TruncatedSeries d1 = derivative(y);
    const TruncatedSeries d2 = y.order() >= 2 ? derivative(d1) : TruncatedSeries::zero(0);
    const TruncatedSeries y2 = mul(y, y);
    const TruncatedSeries y3 = mul(y2, y);
    TruncatedSeries r = scale(shift_up(d2, 2, R), Cplx(2));
    r = add(r, scale(shift_up(d1, 1, R), Cplx(2)));
    std::vector<Cplx> six(static_cast<size_t>(R) + 1, Cplx(0));
    six[0] = Cplx(6);
    r = add(r, TruncatedSeries(std::move(six)));
    r = sub(r, scale(y, Cplx(11)));
    r = add(r, scale(y2, Cplx(6)));
    return sub(r, y3);
  };
  im->conditions = {{Condition::Kind::value_at_point, 1, 2, 0}};
  im->residual = [eps](Real y, Real, Real d2y, Real) { return eps / 2 * d2y + y - y * y * y; };
  im->exact = [eps, rt](Real x) -> NativeEval {
    const Real v = std::tanh(x / rt);
    const Real dv = (1 - v * v) / rt;
    return {v, dv, -2 * v * (1 - v * v) / eps};
  };
  im->w_of_t = [rt](Real x) { return std::exp(2 * x / rt); };
  im->t_of_w = [rt](Real z) { return rt / 2 * std::log(z); };
  im->native_eval = [eps, rt](const FactorForm& f, Real x) -> NativeEval {
    const Real z = std::exp(2 * x / rt);
    const EvalDerivs d = evaluate_with_derivatives(f, z);
    return {d.value - 2, 2 / rt * z * d.d1, 4 / eps * (z * z * d.d2 + z * d.d1)};
  };
  return im;
}

std::shared_ptr<Impl> make_bell(Real eps) {
  if (!(eps > 0)) fail(Errc::invalid_argument, "bell soliton needs eps > 0");
  auto im = std::make_shared<Impl>();
  im->name = "bell";
  im->label = "bell soliton (eps/2)phi'' - phi + phi^3 = 0, working variable z = exp(sqrt(2/eps)x)";
  im->eps = eps;
  const Real rt = std::sqrt(eps);
  const Real q = std::sqrt(2 / eps);
  im->domain = {-6 * rt, 6 * rt};
  im->norm = Impl::Norm::odd_prefactor;
  im->shooting = true;
  im->ode.prescribed = {{0, Cplx(0)}};
  im->ode.free_index = 1;
  im->ode.variable = "z";
  im->ode.residual = [](const TruncatedSeries& y) {
    const int R = y.order();
    const TruncatedSeries d1 = derivative(y);
    const TruncatedSeries d2 = y.order() >= 2 ? derivative(d1) : TruncatedSeries::zero(0);
    const TruncatedSeries y3 = mul(mul(y, y), y);
    TruncatedSeries r = shift_up(d2, 2, R);
    r = add(r, shift_up(d1, 1, R));
    r = sub(r, y);
    return add(r, y3);
  };
  im->conditions = {{Condition::Kind::derivative_at_point, 1, 0, 0}};
  im->residual = [eps](Real y, Real, Real d2y, Real) { return eps / 2 * d2y - y + y * y * y; };
  im->exact = [q](Real x) -> NativeEval {
    const Real sech = 1 / std::cosh(q * x);
    const Real v = std::sqrt(Real(2)) * sech;
    const Real th = std::tanh(q * x);
    const Real dv = -q * v * th;
    const Real d2v = q * q * v * (th * th - sech * sech);
    return {v, dv, d2v};
  };
  im->w_of_t = [q](Real x) { return std::exp(q * x); };
  im->t_of_w = [q](Real z) { return std::log(z) / q; };
  im->native_eval = [q](const FactorForm& f, Real x) -> NativeEval {
    const Real z = std::exp(q * x);
    const EvalDerivs d = evaluate_with_derivatives(f, z);
    return {d.value, q * z * d.d1, q * q * (z * z * d.d2 + z * d.d1)};
  };
  return im;
}

std::shared_ptr<Impl> make_boundary_layer(Real eps) {
  auto im = std::make_shared<Impl>();
  im->name = "boundary_layer";
  im->label = "boundary layer eps*y'' + x y' - x y = 0 on [0,1], working z = y e^{-x}";
  im->eps = eps;
  im->domain = {0, 1};
  im->min_order = 2;
  im->norm = Impl::Norm::linear_prefactor;
  im->shooting = true;
  im->ode.prescribed = {{0, Cplx(0)}};
  im->ode.free_index = 1;
  im->ode.residual = [eps](const TruncatedSeries& y) {
    const int R = std::max(y.order() - 2, 0);
    const TruncatedSeries d1 = derivative(y);
    const TruncatedSeries d2 = y.order() >= 2 ? derivative(d1) : TruncatedSeries::zero(0);
    TruncatedSeries r = truncate(d2, R);
    r = add(r, scale(truncate(d1, R), Cplx(2)));
    r = add(r, scale(shift_up(d1, 1, R), Cplx(1 / eps)));
    return add(r, truncate(y, R));
  };
  im->conditions = {{Condition::Kind::value_at_point, 1, 1, 0}};
  im->residual = [eps](Real y, Real dy, Real d2y, Real x) { return eps * d2y + x * dy - x * y; };
  im->w_of_t = [](Real x) { return x; };
  im->t_of_w = [](Real w) { return w; };
  im->native_eval = [](const FactorForm& f, Real x) -> NativeEval {
    const EvalDerivs d = evaluate_with_derivatives(f, x);
    const Real ex = std::exp(x);
    return {d.value * ex, (d.d1 + d.value) * ex, (d.d2 + 2 * d.d1 + d.value) * ex};
  };
  im->ref.supported = true;
  im->ref.dim = 2;
  im->ref.a = 0;
  im->ref.b = 1;
  im->ref.init = {0, 1};
  im->ref.shoot = true;
  im->ref.shoot_target = 1;
  im->ref.rhs = [eps](Real x, const Real* u, Real* du) {
    du[0] = u[1];
    du[1] = -(2 + x / eps) * u[1] - u[0];
  };
  im->ref.to_native = [eps](Real x, const Real* u) -> NativeEval {
    const Real ex = std::exp(x);
    const Real zpp = -(2 + x / eps) * u[1] - u[0];
    return {u[0] * ex, (u[1] + u[0]) * ex, (zpp + 2 * u[1] + u[0]) * ex};
  };
  im->ref.x_of_t = [](Real t) { return t; };
  return im;
}

std::shared_ptr<Impl> make_gp_vortex() {
  auto im = std::make_shared<Impl>();
  im->name = "gp_vortex";
  im->label = "Gross-Pitaevskii vortex phi'' + phi'/r - phi/r^2 + phi - phi^3 = 0";
  im->eps = kNaN;
  im->domain = {0, 20};
  im->norm = Impl::Norm::odd_prefactor;
  im->shooting = true;
  im->ode.prescribed = {{0, Cplx(0)}};
  im->ode.free_index = 1;
  im->ode.variable = "r";
  im->ode.residual = [](const TruncatedSeries& y) {
    // r^2-weighted form: r^2 y'' + r y' - y + r^2 y - r^2 y^3.
    const int R = y.order();
    const TruncatedSeries d1 = derivative(y);
    const TruncatedSeries d2 = y.order() >= 2 ? derivative(d1) : TruncatedSeries::zero(0);
    const TruncatedSeries y3 = mul(mul(y, y), y);
    TruncatedSeries r = shift_up(d2, 2, R);
    r = add(r, shift_up(d1, 1, R));
    r = sub(r, y);
    r = add(r, shift_up(y, 2, R));
    return sub(r, shift_up(y3, 2, R));
  };
  im->conditions = {{Condition::Kind::asymptotic_power, 0, 1, 0}};
  im->residual = [](Real y, Real dy, Real d2y, Real r) {
    return d2y + dy / r - y / (r * r) + y - y * y * y;
  };
  im->w_of_t = [](Real r) { return r; };
  im->t_of_w = [](Real w) { return w; };
  im->native_eval = [](const FactorForm& f, Real r) { return direct_eval(f, r); };
  return im;
}

std::shared_ptr<Impl> make_stokes_oseen(Real eps) {
  auto im = std::make_shared<Impl>();
  im->name = "stokes_oseen";
  im->label = "Stokes-Oseen u'' + (2/r)u' + eps*u u' = 0 on r >= 1, working x = r - 1";
  im->eps = eps;
  im->domain = {1, 50};
  im->min_order = 2;
  im->norm = Impl::Norm::linear_prefactor;
  im->shooting = true;
  im->ode.prescribed = {{0, Cplx(0)}};
  im->ode.free_index = 1;
  im->ode.residual = [eps](const TruncatedSeries& y) {
    // (1+x) y'' + 2 y' + eps (1+x) y y'.
    const int R = std::max(y.order() - 2, 0);
    const TruncatedSeries d1 = derivative(y);
    const TruncatedSeries d2 = y.order() >= 2 ? derivative(d1) : TruncatedSeries::zero(0);
    TruncatedSeries r = add(truncate(d2, R), shift_up(d2, 1, R));
    r = add(r, scale(truncate(d1, R), Cplx(2)));
    const TruncatedSeries p = mul(truncate(y, R), truncate(d1, R));
    r = add(r, scale(add(p, shift_up(p, 1, R)), Cplx(eps)));
    return r;
  };
  im->conditions = {{Condition::Kind::asymptotic_power, 0, 1, 0}};
  im->residual = [eps](Real y, Real dy, Real d2y, Real r) {
    return d2y + 2 * dy / r + eps * y * dy;
  };
  im->w_of_t = [](Real r) { return r - 1; };
  im->t_of_w = [](Real x) { return x + 1; };
  im->native_eval = [](const FactorForm& f, Real r) { return direct_eval(f, r - 1); };
  return im;
}

std::shared_ptr<Impl> make_strongly_singular(Real eps) {
  auto im = std::make_shared<Impl>();
  im->name = "strongly_singular";
  im->label = "strongly singular u'' + u'/r + (u')^2 + eps*u u' = 0 on r >= 1";
  im->eps = eps;
  im->domain = {1, 50};
  im->min_order = 2;
  im->norm = Impl::Norm::linear_prefactor;
  im->shooting = true;
  im->ode.prescribed = {{0, Cplx(0)}};
  im->ode.free_index = 1;
  im->ode.residual = [eps](const TruncatedSeries& y) {
    // (1+x) y'' + y' + (1+x)(y')^2 + eps (1+x) y y'.
    const int R = std::max(y.order() - 2, 0);
    const TruncatedSeries d1 = derivative(y);
    const TruncatedSeries d2 = y.order() >= 2 ? derivative(d1) : TruncatedSeries::zero(0);
    const TruncatedSeries d1t = truncate(d1, R);
    TruncatedSeries r = add(truncate(d2, R), shift_up(d2, 1, R));
    r = add(r, d1t);
    const TruncatedSeries sq = mul(d1t, d1t);
    r = add(r, add(sq, shift_up(sq, 1, R)));
    const TruncatedSeries p = mul(truncate(y, R), d1t);
    r = add(r, scale(add(p, shift_up(p, 1, R)), Cplx(eps)));
    return r;
  };
  im->conditions = {{Condition::Kind::asymptotic_power, 0, 1, 0}};
  im->residual = [eps](Real y, Real dy, Real d2y, Real r) {
    return d2y + dy / r + dy * dy + eps * y * dy;
  };
  im->w_of_t = [](Real r) { return r - 1; };
  im->t_of_w = [](Real x) { return x + 1; };
  im->native_eval = [](const FactorForm& f, Real r) { return direct_eval(f, r - 1); };
  return im;
}

Real coarse_defect(const ProblemSpec& spec, const FactorForm& form) {
  const auto [lo, hi] = spec.domain();
  const int n = 201;
  Real worst = 0;
  int failures = 0;
  for (int i = 0; i < n; ++i) {
    const Real t = lo + (hi - lo) * i / Real(n - 1);
    try {
      const NativeEval e = spec.eval_native(form, t);
      const Real d = std::abs(spec.native_residual(e.y, e.dy, e.d2y, t));
      if (std::isfinite(d))
        worst = std::max(worst, d);
      else
        ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  if (failures > n / 2) return std::numeric_limits<Real>::infinity();
  return worst * (1 + failures);
}

}  // namespace

ProblemSpec ProblemSpec::builtin(const std::string& name, Real epsilon, Real p0) {
  if (name != "gp_vortex" && !(std::abs(epsilon) > 0))
    fail(Errc::invalid_argument, "epsilon must be nonzero");
  std::shared_ptr<Impl> im;
  if (name == "linear_singular") im = make_linear_singular(epsilon);
  else if (name == "carrier_transfer") im = make_carrier(epsilon);
  else if (name == "logistic") im = make_logistic(epsilon, p0);
  else if (name == "kink") im = make_kink(epsilon);
  else if (name == "bell") im = make_bell(epsilon);
  else if (name == "boundary_layer") im = make_boundary_layer(epsilon);
  else if (name == "gp_vortex") im = make_gp_vortex();
  else if (name == "stokes_oseen") im = make_stokes_oseen(epsilon);
  else if (name == "strongly_singular") im = make_strongly_singular(epsilon);
  else fail(Errc::unknown_problem, "unknown problem '" + name + "'");
  return ProblemSpec(std::move(im));
}

const std::vector<std::string>& ProblemSpec::names() {
  static const std::vector<std::string> n = {
      "linear_singular", "carrier_transfer", "logistic",     "kink",          "bell",
      "boundary_layer",  "gp_vortex",        "stokes_oseen", "strongly_singular"};
  return n;
}

const std::string& ProblemSpec::name() const { return impl_->name; }
const std::string& ProblemSpec::label() const { return impl_->label; }
Real ProblemSpec::epsilon() const { return impl_->eps; }
Real ProblemSpec::p0() const { return impl_->p0; }
std::pair<Real, Real> ProblemSpec::domain() const { return impl_->domain; }
int ProblemSpec::min_order() const { return impl_->min_order; }
bool ProblemSpec::has_exact() const { return static_cast<bool>(impl_->exact); }
bool ProblemSpec::has_shooting() const { return impl_->shooting; }

NativeEval ProblemSpec::exact(Real t) const {
  if (!impl_->exact) fail(Errc::unsupported, "no closed-form solution for " + impl_->name);
  return impl_->exact(t);
}

Real ProblemSpec::native_residual(Real y, Real dy, Real d2y, Real t) const {
  return impl_->residual(y, dy, d2y, t);
}

Real ProblemSpec::working_from_native(Real t) const { return impl_->w_of_t(t); }
Real ProblemSpec::native_from_working(Real w) const { return impl_->t_of_w(w); }

TruncatedSeries ProblemSpec::raw_series(int order, Cplx theta) const {
  return series_from_ode(impl_->ode, order, theta);
}

SeriesOracle ProblemSpec::oracle() const {
  const auto impl = impl_;
  SeriesOracle o;
  if (impl->shooting) o.parameter_names = {"a1"};
  o.generate = [impl](int k, Cplx theta) {
    if (k < 1) fail(Errc::invalid_argument, "order must be >= 1");
    const TruncatedSeries raw = series_from_ode(impl->ode, native_series_order(*impl, k), theta);
    return normalize(*impl, raw, k, theta);
  };
  return o;
}

std::vector<Condition> ProblemSpec::conditions() const { return impl_->conditions; }
Bracket ProblemSpec::bracket() const { return impl_->bracket; }
ReferenceConfig ProblemSpec::reference_config() const { return impl_->ref; }

NativeEval ProblemSpec::eval_native(const FactorForm& form, Real t) const {
  return impl_->native_eval(form, t);
}

namespace {

Solution solve_problem_impl(const ProblemSpec& spec, int k, bool allow_stabilized) {
  if (k < spec.min_order())
    fail(Errc::order_too_low, spec.name() + " needs order >= " +
                                  std::to_string(spec.min_order()) + ", got " + std::to_string(k));
  ConstrainedSolveSpec cs;
  cs.oracle = spec.oracle();
  cs.conditions = spec.conditions();
  cs.order = k;
  cs.bracket = spec.bracket();
  const ProblemSpec copy = spec;
  cs.rank_metric = [copy](const FactorForm& f, Real) { return coarse_defect(copy, f); };

  SolveOutcome out;
  try {
    out = solve_constrained(cs);
  } catch (const Error& e) {
    if (!spec.has_shooting() || e.code() != Errc::no_solution) throw;
    try {
      // Retry with a bracket centred on the previous order's shooting value;
      // high orders occasionally push the root outside the default scan.
      if (k <= spec.min_order()) throw;
      const Solution prev = solve_problem_impl(spec, k - 1, false);
      if (!std::isfinite(prev.theta) || prev.theta == 0) throw;
      Bracket br;
      const Real th = prev.theta;
      br.lo = th > 0 ? th / 5 : th * 5;
      br.hi = th > 0 ? th * 5 : th / 5;
      br.points = 192;
      cs.bracket = br;
      out = solve_constrained(cs);
    } catch (const Error&) {
      // A stabilized next order satisfies this order's accuracy-through-order
      // contract exactly (its equations are a superset); use it when this
      // order has no usable solution of its own.
      if (!allow_stabilized) throw e;
      Solution up = solve_problem_impl(spec, k + 1, false);
      up.form.order = k;
      up.stabilized_from = k + 1;
      return up;
    }
  }

  Solution sol{spec, std::move(out.form), out.theta, out.moment_residual,
               out.condition_residual, std::move(out.alternates)};
  return sol;
}

}  // namespace

Solution solve_problem(const ProblemSpec& spec, int k) {
  return solve_problem_impl(spec, k, true);
}

}  // namespace ssfa
