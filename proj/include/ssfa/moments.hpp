#pragma once

#include <vector>

#include "ssfa/series.hpp"
#include "ssfa/types.hpp"

namespace ssfa {

// Log-derivative moments B_1..B_k of a normalized series: B_n is the weighted
// power sum sum_i n_i A_i^n when the series is exactly a product of binomial
// factors.
struct MomentVector {
  std::vector<Cplx> values;  // B_1..B_k
  int order() const { return static_cast<int>(values.size()); }
  Cplx value(int n) const;  // 1-based, B_n
  bool is_real(Real tolerance = 1e-12L) const;
};

// Requires a_0 = 1 and order >= 1. Computed from the series logarithm:
// B_n = (-1)^(n-1) * n * [x^n] log s.
MomentVector moments_from_series(const TruncatedSeries& s);

}  // namespace ssfa
