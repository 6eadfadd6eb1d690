#include "ssfa/rootapprox.hpp"

#include <cmath>

#include "ssfa/series.hpp"

namespace ssfa {

Real RootForm::value(Real r) const {
  Real p = 0, r2 = r * r, pw = 1;
  for (Real c : polynomial) {
    p += c * pw;
    pw *= r2;
  }
  return scale * r * std::pow(p, outer_exponent);
}

void RootForm::derivatives(Real r, Real& v, Real& dv, Real& d2v) const {
  // R = s r P^e: log-derivative L = 1/r + e P'/P (P in r, via r^2 powers).
  Real p = 0, p1 = 0, p2 = 0;
  const Real r2 = r * r;
  Real pw = 1;  // r^{2j}
  for (size_t j = 0; j < polynomial.size(); ++j) {
    const Real c = polynomial[j];
    p += c * pw;
    if (j >= 1) p1 += c * 2 * Real(j) * pw / r;
    if (j >= 1) p2 += c * 2 * Real(j) * (2 * Real(j) - 1) * pw / r2;
    pw *= r2;
  }
  v = scale * r * std::pow(p, outer_exponent);
  const Real L = 1 / r + outer_exponent * p1 / p;
  const Real Lp = -1 / r2 + outer_exponent * (p2 / p - (p1 / p) * (p1 / p));
  dv = v * L;
  d2v = v * (L * L + Lp);
}

std::vector<Real> RootForm::large_r_expansion(int terms) const {
  // P(r^2) = p_d r^{2d} (1 + c_1 u + ... ), u = r^{-2}; the prefactor powers
  // cancel by construction so R = (s p_d^e) (1 + sum c_j u^j)^e.
  const int d = static_cast<int>(polynomial.size()) - 1;
  const Real pd = polynomial[static_cast<size_t>(d)];
  std::vector<Cplx> inner(static_cast<size_t>(terms) + 1, Cplx(0));
  for (int j = 0; j <= std::min(d, terms); ++j)
    inner[static_cast<size_t>(j)] = polynomial[static_cast<size_t>(d - j)] / pd;
  const TruncatedSeries base(std::move(inner), "u");
  const TruncatedSeries powed = ssfa::exp(ssfa::scale(ssfa::log(base), Cplx(outer_exponent)));
  const Real front = scale * std::pow(pd, outer_exponent);
  std::vector<Real> out(static_cast<size_t>(terms) + 1);
  for (int j = 0; j <= terms; ++j) out[static_cast<size_t>(j)] = front * powed.coeff(j).real();
  return out;
}

RootForm root_approximant(int k) {
  RootForm f;
  f.order = k;
  switch (k) {
    case 2:
      f.scale = 0.5L;
      f.polynomial = {1, 0.25L};
      f.outer_exponent = -0.5L;
      break;
    case 3:
      f.scale = 1 / std::sqrt(Real(2));
      f.polynomial = {1, 0.5L, 0.25L};
      f.outer_exponent = -0.25L;
      break;
    case 4:
      f.scale = std::pow(Real(4), -Real(1) / 3);
      f.polynomial = {1, 0.75L, Real(3) / 16, Real(1) / 16};
      f.outer_exponent = -Real(1) / 6;
      break;
    case 5:
      f.scale = std::pow(Real(136), -Real(1) / 8);
      f.polynomial = {1, 1, Real(9) / 68, Real(1) / 34, Real(1) / 136};
      f.outer_exponent = -Real(1) / 8;
      break;
    default:
      fail(Errc::unsupported, "root approximant defined for orders 2..5 only");
  }
  return f;
}

}  // namespace ssfa
