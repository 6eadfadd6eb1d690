#include "ssfa/series.hpp"

#include <algorithm>
#include <cmath>

namespace ssfa {

TruncatedSeries::TruncatedSeries(std::vector<Cplx> coeffs, std::string variable)
    : coeffs_(std::move(coeffs)), variable_(std::move(variable)) {
  if (coeffs_.empty()) fail(Errc::invalid_argument, "series needs at least the constant term");
}

TruncatedSeries TruncatedSeries::zero(int order, std::string variable) {
  if (order < 0) fail(Errc::invalid_argument, "negative truncation order");
  return TruncatedSeries(std::vector<Cplx>(static_cast<size_t>(order) + 1, Cplx(0)),
                         std::move(variable));
}

Cplx TruncatedSeries::coeff(int n) const {
  if (n < 0 || n > order()) fail(Errc::invalid_argument, "coefficient index out of range");
  return coeffs_[static_cast<size_t>(n)];
}

bool TruncatedSeries::is_real(Real tolerance) const {
  for (const Cplx& c : coeffs_)
    if (std::abs(c.imag()) > tolerance * (1 + std::abs(c.real()))) return false;
  return true;
}

Cplx TruncatedSeries::evaluate(Cplx x) const {
  Cplx acc(0);
  for (int n = order(); n >= 0; --n) acc = acc * x + coeffs_[static_cast<size_t>(n)];
  return acc;
}

namespace {

void require_same_order(const TruncatedSeries& s, const TruncatedSeries& t) {
  if (s.order() != t.order())
    fail(Errc::invalid_argument, "series truncation orders differ (" +
                                     std::to_string(s.order()) + " vs " +
                                     std::to_string(t.order()) + ")");
}

}  // namespace

TruncatedSeries add(const TruncatedSeries& s, const TruncatedSeries& t) {
  require_same_order(s, t);
  std::vector<Cplx> c(s.coefficients());
  for (size_t i = 0; i < c.size(); ++i) c[i] += t.coefficients()[i];
  return TruncatedSeries(std::move(c), s.variable());
}

TruncatedSeries sub(const TruncatedSeries& s, const TruncatedSeries& t) {
  require_same_order(s, t);
  std::vector<Cplx> c(s.coefficients());
  for (size_t i = 0; i < c.size(); ++i) c[i] -= t.coefficients()[i];
  return TruncatedSeries(std::move(c), s.variable());
}

TruncatedSeries mul(const TruncatedSeries& s, const TruncatedSeries& t) {
  require_same_order(s, t);
  const int K = s.order();
  std::vector<Cplx> c(static_cast<size_t>(K) + 1, Cplx(0));
  for (int i = 0; i <= K; ++i) {
    const Cplx si = s.coefficients()[static_cast<size_t>(i)];
    if (si == Cplx(0)) continue;
    for (int j = 0; j + i <= K; ++j) c[static_cast<size_t>(i + j)] += si * t.coefficients()[static_cast<size_t>(j)];
  }
  return TruncatedSeries(std::move(c), s.variable());
}

TruncatedSeries div(const TruncatedSeries& s, const TruncatedSeries& t) {
  require_same_order(s, t);
  const int K = s.order();
  const Cplx t0 = t.coefficients()[0];
  if (std::abs(t0) == 0) fail(Errc::invalid_argument, "division by series with zero constant term");
  std::vector<Cplx> c(static_cast<size_t>(K) + 1, Cplx(0));
  for (int n = 0; n <= K; ++n) {
    Cplx acc = s.coefficients()[static_cast<size_t>(n)];
    for (int j = 1; j <= n; ++j) acc -= t.coefficients()[static_cast<size_t>(j)] * c[static_cast<size_t>(n - j)];
    c[static_cast<size_t>(n)] = acc / t0;
  }
  return TruncatedSeries(std::move(c), s.variable());
}

TruncatedSeries log(const TruncatedSeries& s) {
  const int K = s.order();
  const Cplx s0 = s.coefficients()[0];
  if (std::abs(s0) == 0) fail(Errc::invalid_argument, "log of series with zero constant term");
  // l' = s'/s gives the triangular recurrence  n*l_n = n*s_n/s0 - sum_{j=1}^{n-1} j*l_j*s_{n-j}/s0.
  std::vector<Cplx> l(static_cast<size_t>(K) + 1, Cplx(0));
  l[0] = std::log(s0);
  for (int n = 1; n <= K; ++n) {
    Cplx acc = Real(n) * s.coefficients()[static_cast<size_t>(n)];
    for (int j = 1; j < n; ++j) acc -= Real(j) * l[static_cast<size_t>(j)] * s.coefficients()[static_cast<size_t>(n - j)];
    l[static_cast<size_t>(n)] = acc / (Real(n) * s0);
  }
  return TruncatedSeries(std::move(l), s.variable());
}

TruncatedSeries exp(const TruncatedSeries& s) {
  const int K = s.order();
  // e' = s' e: n*e_n = sum_{j=1}^{n} j*s_j*e_{n-j}.
  std::vector<Cplx> e(static_cast<size_t>(K) + 1, Cplx(0));
  e[0] = std::exp(s.coefficients()[0]);
  for (int n = 1; n <= K; ++n) {
    Cplx acc(0);
    for (int j = 1; j <= n; ++j) acc += Real(j) * s.coefficients()[static_cast<size_t>(j)] * e[static_cast<size_t>(n - j)];
    e[static_cast<size_t>(n)] = acc / Real(n);
  }
  return TruncatedSeries(std::move(e), s.variable());
}

TruncatedSeries scale(const TruncatedSeries& s, Cplx factor) {
  std::vector<Cplx> c(s.coefficients());
  for (Cplx& x : c) x *= factor;
  return TruncatedSeries(std::move(c), s.variable());
}

TruncatedSeries derivative(const TruncatedSeries& s) {
  if (s.order() == 0) return TruncatedSeries::zero(0, s.variable());
  std::vector<Cplx> c(static_cast<size_t>(s.order()), Cplx(0));
  for (int n = 1; n <= s.order(); ++n) c[static_cast<size_t>(n - 1)] = Real(n) * s.coefficients()[static_cast<size_t>(n)];
  return TruncatedSeries(std::move(c), s.variable());
}

TruncatedSeries shift_up(const TruncatedSeries& s, int powers, int order) {
  if (powers < 0) fail(Errc::invalid_argument, "shift_up needs a non-negative power");
  std::vector<Cplx> c(static_cast<size_t>(order) + 1, Cplx(0));
  for (int n = 0; n <= s.order() && n + powers <= order; ++n)
    c[static_cast<size_t>(n + powers)] = s.coefficients()[static_cast<size_t>(n)];
  return TruncatedSeries(std::move(c), s.variable());
}

TruncatedSeries truncate(const TruncatedSeries& s, int order) {
  if (order > s.order()) fail(Errc::invalid_argument, "truncate cannot extend a series");
  std::vector<Cplx> c(s.coefficients().begin(), s.coefficients().begin() + order + 1);
  return TruncatedSeries(std::move(c), s.variable());
}

TruncatedSeries scale_variable(const TruncatedSeries& s, Cplx c) {
  std::vector<Cplx> out(s.coefficients());
  Cplx pw(1);
  for (size_t n = 1; n < out.size(); ++n) {
    pw *= c;
    out[n] *= pw;
  }
  return TruncatedSeries(std::move(out), s.variable());
}

TruncatedSeries series_from_ode(const OdeSeriesDef& def, int order, Cplx theta) {
  if (order < 0) fail(Errc::invalid_argument, "negative series order");
  std::vector<Cplx> a(static_cast<size_t>(order) + 1, Cplx(0));
  std::vector<bool> known(static_cast<size_t>(order) + 1, false);
  for (const auto& [idx, val] : def.prescribed) {
    if (idx >= 0 && idx <= order) {
      a[static_cast<size_t>(idx)] = val;
      known[static_cast<size_t>(idx)] = true;
    }
  }
  if (def.free_index >= 0 && def.free_index <= order) {
    a[static_cast<size_t>(def.free_index)] = theta;
    known[static_cast<size_t>(def.free_index)] = true;
  }

  auto residual_of = [&](const std::vector<Cplx>& coeffs) {
    return def.residual(TruncatedSeries(coeffs, def.variable));
  };

  for (int m = 0; m <= order; ++m) {
    if (known[static_cast<size_t>(m)]) continue;
    a[static_cast<size_t>(m)] = Cplx(0);
    const TruncatedSeries r0 = residual_of(a);
    a[static_cast<size_t>(m)] = Cplx(1);
    const TruncatedSeries r1 = residual_of(a);
    // The new coefficient must enter some residual order affinely; pick the
    // lowest order it touches.
    int pin = -1;
    for (int j = 0; j <= r0.order(); ++j) {
      if (std::abs(r1.coeff(j) - r0.coeff(j)) > Real(1e-300L)) {
        pin = j;
        break;
      }
    }
    if (pin < 0)
      fail(Errc::underdetermined,
           "series coefficient a_" + std::to_string(m) + " is not determined by the residual");
    const Cplx slope = r1.coeff(pin) - r0.coeff(pin);
    a[static_cast<size_t>(m)] = -r0.coeff(pin) / slope;
    known[static_cast<size_t>(m)] = true;
  }
  return TruncatedSeries(std::move(a), def.variable);
}

}  // namespace ssfa
