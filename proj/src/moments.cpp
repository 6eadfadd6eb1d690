#include "ssfa/moments.hpp"

#include <cmath>

namespace ssfa {

Cplx MomentVector::value(int n) const {
  if (n < 1 || n > order()) fail(Errc::invalid_argument, "moment index out of range");
  return values[static_cast<size_t>(n - 1)];
}

bool MomentVector::is_real(Real tolerance) const {
  for (const Cplx& b : values)
    if (std::abs(b.imag()) > tolerance * (1 + std::abs(b.real()))) return false;
  return true;
}

MomentVector moments_from_series(const TruncatedSeries& s) {
  if (s.order() < 1) fail(Errc::invalid_argument, "moments need truncation order >= 1");
  const Cplx a0 = s.coefficients()[0];
  if (std::abs(a0 - Cplx(1)) > 1e-12L)
    fail(Errc::invalid_argument, "moments require a normalized series with a_0 = 1");
  const TruncatedSeries l = log(s);
  MomentVector B;
  B.values.resize(static_cast<size_t>(s.order()));
  Real sign = 1;
  for (int n = 1; n <= s.order(); ++n) {
    B.values[static_cast<size_t>(n - 1)] = sign * Real(n) * l.coeff(n);
    sign = -sign;
  }
  return B;
}

}  // namespace ssfa
