#include "ssfa/factor.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace ssfa {

namespace {

using Mat = Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Cplx, Eigen::Dynamic, 1>;

constexpr Real kTiny = std::numeric_limits<Real>::min() * 1e4L;

bool finite(Cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

Cplx ipow(Cplx z, int m) {
  Cplx acc(1);
  for (int i = 0; i < m; ++i) acc *= z;
  return acc;
}

bool near_integer(Real x, Real eps = 1e-9L) { return std::abs(x - std::round(x)) < eps; }

// ---------------------------------------------------------------------------
// evaluation

struct CplxDerivs {
  Cplx value{0}, d1{0}, d2{0};
};

// Derivatives of f0(x) * prod_i g_i(x^s) via the logarithmic derivative.
CplxDerivs eval_complex_derivs(const Prefactor& pre, std::span<const Factor> factors,
                               bool squared, Real x, bool police_branch) {
  const Real s = squared ? 2 : 1;
  const Real w = squared ? x * x : x;

  Cplx P(1);     // factor product
  Cplx M(0);     // P'/P in x
  Cplx Mp(0);    // d/dx of M
  const Real xs1 = squared ? x : 1;         // x^{s-1}
  const Real xs2 = squared ? 1 : 0;         // (s-1) x^{s-2}
  for (const Factor& f : factors) {
    if (f.kind == Factor::Kind::exponential) {
      P *= std::exp(f.b * w);
      M += f.b * s * xs1;
      Mp += f.b * s * xs2;
      continue;
    }
    const Cplx base = Cplx(1) + f.A * w;
    if (police_branch) {
      const bool real_node = std::abs(f.A.imag()) <= 1e-12L * (1 + std::abs(f.A.real()));
      const bool real_exp = std::abs(f.n.imag()) <= 1e-12L * (1 + std::abs(f.n.real()));
      if (real_node && real_exp && !near_integer(f.n.real()) && base.real() <= 0) {
        std::ostringstream os;
        os << "branch cut: 1 + A*w <= 0 at x = " << static_cast<double>(x)
           << " for real node A = " << static_cast<double>(f.A.real());
        fail(Errc::branch_cut, os.str());
      }
    }
    P *= std::exp(f.n * std::log(base));
    const Cplx q = f.A / base;
    M += f.n * q * s * xs1;
    Mp += f.n * (q * s * xs2 - q * q * s * s * xs1 * xs1);
  }

  CplxDerivs out;
  const Cplx c = pre.scale;
  if (pre.tag == Prefactor::Tag::unit || pre.zero_exponent == 0) {
    out.value = c * P;
    out.d1 = c * P * M;
    out.d2 = c * P * (M * M + Mp);
    return out;
  }
  const Real sg = pre.zero_exponent;
  if (sg == 1) {
    out.value = c * x * P;
    out.d1 = c * P * (Cplx(1) + x * M);
    out.d2 = c * P * (Real(2) * M + x * (M * M + Mp));
    return out;
  }
  if (x == 0) fail(Errc::unsupported, "prefactor exponent not supported at x = 0");
  const Real xp = std::pow(x, sg);
  out.value = c * xp * P;
  out.d1 = c * xp / x * P * (sg + x * M);
  out.d2 = c * xp / (x * x) * P * (sg * (sg - 1) + 2 * sg * x * M + x * x * (M * M + Mp));
  return out;
}

Real collapse_real(Cplx z, const char* what) {
  if (std::abs(z.imag()) > tol::imag_residue * (1 + std::abs(z.real()))) {
    std::ostringstream os;
    os << "conjugation broken: " << what << " has imaginary residue "
       << static_cast<double>(std::abs(z.imag()));
    fail(Errc::conjugation_broken, os.str());
  }
  return z.real();
}

// ---------------------------------------------------------------------------
// power-sum engine internals

Cplx contribution(const Factor& f, int m) {
  if (f.kind == Factor::Kind::exponential) return m == 1 ? f.b : Cplx(0);
  return f.n * ipow(f.A, m);
}

Real relative_residual(std::span<const Factor> factors, std::span<const Cplx> rhs, int lo) {
  Real worst = 0;
  for (size_t i = 0; i < rhs.size(); ++i) {
    const int m = lo + static_cast<int>(i);
    Cplx acc(0);
    for (const Factor& f : factors) acc += contribution(f, m);
    const Real r = std::abs(acc - rhs[i]) / (1 + std::abs(rhs[i]));
    if (!std::isfinite(r)) return std::numeric_limits<Real>::infinity();
    worst = std::max(worst, r);
  }
  return worst;
}

// Diagonal similarity balancing with powers of two before the eigensolve.
void balance(Mat& a) {
  const int n = static_cast<int>(a.rows());
  for (int sweep = 0; sweep < 6; ++sweep) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      Real cn = 0, rn = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        cn += std::abs(a(j, i));
        rn += std::abs(a(i, j));
      }
      if (cn == 0 || rn == 0) continue;
      Real f = 1;
      while (cn < rn / 2) {
        cn *= 2;
        rn /= 2;
        f *= 2;
      }
      while (cn >= rn * 2) {
        cn /= 2;
        rn *= 2;
        f /= 2;
      }
      if (f != 1) {
        changed = true;
        a.col(i) *= f;
        a.row(i) /= f;
      }
    }
    if (!changed) break;
  }
}

// Roots of z^p + q_{p-1} z^{p-1} + ... + q_0 via the balanced companion matrix.
std::vector<Cplx> companion_roots(const std::vector<Cplx>& q) {
  const int p = static_cast<int>(q.size());
  if (p == 0) return {};
  if (p == 1) return {-q[0]};
  Mat c = Mat::Zero(p, p);
  for (int i = 1; i < p; ++i) c(i, i - 1) = Cplx(1);
  for (int i = 0; i < p; ++i) c(i, p - 1) = -q[static_cast<size_t>(i)];
  balance(c);
  Eigen::ComplexEigenSolver<Mat> es(c, false);
  if (es.info() != Eigen::Success) fail(Errc::internal, "companion eigensolver failed");
  std::vector<Cplx> roots(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) roots[static_cast<size_t>(i)] = es.eigenvalues()(i);
  return roots;
}

struct PackedUnknowns {
  // index of each unknown: (factor, slot) with slot 0 = A or b, 1 = n
  std::vector<std::pair<int, int>> slots;
};

PackedUnknowns pack_unknowns(const std::vector<Factor>& factors, bool fix_first_node) {
  PackedUnknowns p;
  for (int i = 0; i < static_cast<int>(factors.size()); ++i) {
    if (factors[static_cast<size_t>(i)].kind == Factor::Kind::exponential) {
      p.slots.emplace_back(i, 0);
    } else {
      if (!(fix_first_node && i == 0)) p.slots.emplace_back(i, 0);
      p.slots.emplace_back(i, 1);
    }
  }
  return p;
}

template <typename MatT, typename VecT>
VecT lsq_solve(const MatT& a, const VecT& b) {
  Eigen::CompleteOrthogonalDecomposition<MatT> cod(a);
  return cod.solve(b);
}

// Damped Gauss-Newton on the power-sum equations; rows weighted by 1/(1+|mu|).
// Returns the final weighted infinity-norm residual.
Real newton_polish(std::vector<Factor>& factors, std::span<const Cplx> rhs, int lo,
                   bool fix_first_node) {
  const int rows = static_cast<int>(rhs.size());
  const PackedUnknowns pk = pack_unknowns(factors, fix_first_node);
  const int cols = static_cast<int>(pk.slots.size());
  if (cols == 0) return relative_residual(factors, rhs, lo);

  auto residual_vec = [&](const std::vector<Factor>& fs) {
    Vec r(rows);
    for (int i = 0; i < rows; ++i) {
      const int m = lo + i;
      Cplx acc(0);
      for (const Factor& f : fs) acc += contribution(f, m);
      r(i) = (acc - rhs[static_cast<size_t>(i)]) / (1 + std::abs(rhs[static_cast<size_t>(i)]));
    }
    return r;
  };
  auto norm_inf = [](const Vec& v) {
    Real w = 0;
    for (int i = 0; i < v.size(); ++i) {
      const Real a = std::abs(v(i));
      if (!std::isfinite(a)) return std::numeric_limits<Real>::infinity();
      w = std::max(w, a);
    }
    return w;
  };

  Vec r = residual_vec(factors);
  Real res = norm_inf(r);
  int stagnant = 0;
  for (int iter = 0; iter < tol::newton_max_iter && res > tol::newton; ++iter) {
    Mat J(rows, cols);
    for (int i = 0; i < rows; ++i) {
      const int m = lo + i;
      const Real w = 1 / (1 + std::abs(rhs[static_cast<size_t>(i)]));
      for (int c = 0; c < cols; ++c) {
        const auto [fi, slot] = pk.slots[static_cast<size_t>(c)];
        const Factor& f = factors[static_cast<size_t>(fi)];
        Cplx d(0);
        if (f.kind == Factor::Kind::exponential) {
          d = (m == 1) ? Cplx(1) : Cplx(0);
        } else if (slot == 0) {
          d = (m == 0) ? Cplx(0) : f.n * Real(m) * ipow(f.A, m - 1);
        } else {
          d = ipow(f.A, m);
        }
        J(i, c) = d * w;
      }
    }
    if (!J.allFinite()) break;
    const Vec step = lsq_solve(J, Vec(-r));
    if (!step.allFinite()) break;

    bool improved = false;
    const Real before = res;
    Real t = 1;
    for (int halving = 0; halving < 14; ++halving, t /= 2) {
      std::vector<Factor> trial = factors;
      for (int c = 0; c < cols; ++c) {
        const auto [fi, slot] = pk.slots[static_cast<size_t>(c)];
        Factor& f = trial[static_cast<size_t>(fi)];
        const Cplx delta = t * step(c);
        if (f.kind == Factor::Kind::exponential)
          f.b += delta;
        else if (slot == 0)
          f.A += delta;
        else
          f.n += delta;
      }
      const Vec rt = residual_vec(trial);
      const Real nt = norm_inf(rt);
      if (nt < res) {
        factors = std::move(trial);
        r = rt;
        res = nt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
    // Far from a root and barely moving: give up early.
    stagnant = (res > before * Real(0.7L)) ? stagnant + 1 : 0;
    if (stagnant >= 3 && res > 1000 * tol::newton) break;
  }
  return res;
}

// Near-coincident nodes stall the plain Gauss-Newton iteration. Retries from
// deterministically perturbed starts recover the nearly-confluent solutions
// without an explicit Jordan-type representation.
Real polish_with_restarts(std::vector<Factor>& factors, std::span<const Cplx> rhs, int lo,
                          bool fix_first_node) {
  Real res = newton_polish(factors, rhs, lo, fix_first_node);
  if (res < tol::accept || !(res < Real(0.5L))) return res;

  std::vector<Factor> best = factors;
  Real best_res = res;
  for (int pattern = 0; pattern < 4 && best_res >= tol::accept; ++pattern) {
    std::vector<Factor> trial = best;
    for (size_t i = 0; i < trial.size(); ++i) {
      if (trial[i].kind != Factor::Kind::power) continue;
      if (fix_first_node && i == 0) continue;
      const Real tag = Real(1 + static_cast<int>(i));
      switch (pattern) {
        case 0: trial[i].A *= 1 + Real(0.004L) * tag; break;
        case 1: trial[i].A *= 1 - Real(0.004L) * tag; break;
        case 2: {
          // push nodes off their nearest sibling (and off a pinned A_1 = 1)
          for (size_t j = 0; j < trial.size(); ++j) {
            if (j == i || trial[j].kind != Factor::Kind::power) continue;
            if (std::abs(trial[i].A - trial[j].A) < Real(0.05L) * (1 + std::abs(trial[i].A)))
              trial[i].A *= (i > j) ? Real(1.03L) : Real(0.97L);
          }
          break;
        }
        case 3: trial[i].A += Cplx(0, Real(0.005L)) * (1 + std::abs(trial[i].A)) *
                              ((i % 2) ? Real(1) : Real(-1));
          break;
      }
    }
    const Real r2 = newton_polish(trial, rhs, lo, fix_first_node);
    if (r2 < best_res) {
      best = std::move(trial);
      best_res = r2;
    }
  }
  factors = std::move(best);
  return best_res;
}

// Exponential rates add, so several confluent factors collapse into one.
void merge_exponentials(std::vector<Factor>& factors) {
  Cplx rate(0);
  size_t count = 0;
  std::vector<Factor> kept;
  for (const Factor& f : factors) {
    if (f.kind == Factor::Kind::exponential) {
      rate += f.b;
      ++count;
    } else {
      kept.push_back(f);
    }
  }
  if (count > 0) {
    Factor e;
    e.kind = Factor::Kind::exponential;
    e.b = rate;
    kept.push_back(e);
  }
  if (count > 1) factors = std::move(kept);
}

// Removes null-weight factors; reports whether the first factor survived.
bool drop_null_factors(std::vector<Factor>& factors) {
  Real max_n = 0;
  for (const Factor& f : factors)
    max_n = std::max(max_n, f.kind == Factor::Kind::exponential ? std::abs(f.b) : std::abs(f.n));
  const Real cut = tol::weight_drop * (1 + max_n);
  std::vector<Factor> kept;
  bool first_kept = false;
  for (size_t i = 0; i < factors.size(); ++i) {
    const Factor& f = factors[i];
    const Real weight = f.kind == Factor::Kind::exponential ? std::abs(f.b) : std::abs(f.n);
    if (weight <= cut) continue;
    if (i == 0) first_kept = true;
    kept.push_back(f);
  }
  factors = std::move(kept);
  return first_kept;
}

struct CoreResult {
  std::vector<Factor> factors;
  Real residual = std::numeric_limits<Real>::infinity();
  bool ok = false;
  bool any_candidate = false;
  bool fixed_first = false;  // factors[0] is the pinned A_1 = 1 node
  std::vector<PowerSumBranch> alternates;
};

// Prony reduction plus Newton refinement, with deflation p -> p-1 on
// singular or non-converging systems.
CoreResult even_core(std::span<const Cplx> mu, int lo, bool allow_exponential) {
  CoreResult best;
  const int M = static_cast<int>(mu.size());
  if (M == 0) {
    best.ok = true;
    best.residual = 0;
    best.any_candidate = true;
    return best;
  }

  // All-zero right-hand side: the empty product.
  {
    Real flat = 0;
    for (const Cplx& v : mu) flat = std::max(flat, std::abs(v) / (1 + std::abs(v)));
    if (flat < tol::accept) {
      best.ok = true;
      best.residual = flat;
      best.any_candidate = true;
      return best;
    }
  }

  // Variable rescale A -> lambda*Atilde so the scaled moments are O(1).
  Real lambda = 0;
  for (int i = 0; i < M; ++i) {
    const int m = lo + i;
    if (m == 0) continue;
    const Real a = std::abs(mu[static_cast<size_t>(i)]);
    if (a > kTiny) lambda = std::max(lambda, std::pow(a, Real(1) / m));
  }
  if (!(lambda > 0) || !std::isfinite(lambda)) lambda = 1;
  lambda = std::clamp(lambda, Real(1e-6L), Real(1e6L));

  // nu_i = mu_{lo+i} / lambda^{lo+i} = sum_j c_j Atilde_j^i, where the weight
  // c_j is n_j*Atilde_j for lo = 1 and n_j itself for lo = 0.
  std::vector<Cplx> nu(static_cast<size_t>(M));
  {
    Real lp = std::pow(lambda, Real(lo));
    for (int i = 0; i < M; ++i) {
      nu[static_cast<size_t>(i)] = mu[static_cast<size_t>(i)] / lp;
      lp *= lambda;
    }
  }

  const int pmax = M / 2;
  // Deflation levels: the full count first, then the Hankel numerical rank
  // (degenerate moment sets collapse cleanly), then one generic step down.
  std::vector<int> levels{pmax};
  for (size_t li = 0; li < levels.size(); ++li) {
    const int p = levels[li];
    // Hankel system sum_{l=0}^{p-1} q_l nu_{i+l} = -nu_{i+p}, all rows.
    const int hrows = M - p;
    Mat H(hrows, p);
    Vec hb(hrows);
    for (int i = 0; i < hrows; ++i) {
      for (int l = 0; l < p; ++l) H(i, l) = nu[static_cast<size_t>(i + l)];
      hb(i) = -nu[static_cast<size_t>(i + p)];
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> hcod(H);
    if (p == pmax) {
      const int rank = static_cast<int>(hcod.rank());
      if (rank >= 1 && rank < pmax) levels.push_back(rank);
      if (pmax - 1 >= 1 && pmax - 1 != rank) levels.push_back(pmax - 1);
      if (rank - 1 >= 1) levels.push_back(rank - 1);
    }
    const Vec q = hcod.solve(hb);
    if (!q.allFinite()) continue;
    std::vector<Cplx> qv(static_cast<size_t>(p));
    for (int l = 0; l < p; ++l) qv[static_cast<size_t>(l)] = q(l);
    std::vector<Cplx> nodes;
    try {
      nodes = companion_roots(qv);
    } catch (const Error&) {
      continue;
    }
    if (std::any_of(nodes.begin(), nodes.end(), [](Cplx z) { return !finite(z); })) continue;

    // Weights from the Vandermonde least-squares over every equation.
    Mat V(M, p);
    Vec vb(M);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < p; ++j) V(i, j) = ipow(nodes[static_cast<size_t>(j)], i);
      vb(i) = nu[static_cast<size_t>(i)];
    }
    const Vec c = lsq_solve(V, vb);
    if (!c.allFinite()) continue;

    Real max_node = 0;
    for (const Cplx& z : nodes) max_node = std::max(max_node, std::abs(z));

    std::vector<Factor> factors;
    bool bad = false;
    for (int j = 0; j < p; ++j) {
      const Cplx At = nodes[static_cast<size_t>(j)];
      const Cplx cj = c(j);
      if (std::abs(At) <= tol::node_zero * std::max(max_node, Real(1))) {
        if (lo == 0) {
          // A zero node cannot carry an asymptotic power-law factor; only a
          // null weight is tolerable here.
          if (std::abs(cj) > tol::weight_drop) {
            bad = true;
            break;
          }
          continue;
        }
        if (!allow_exponential) {
          bad = true;
          break;
        }
        Factor f;
        f.kind = Factor::Kind::exponential;
        f.b = lambda * cj;
        factors.push_back(f);
      } else {
        Factor f;
        f.A = lambda * At;
        f.n = (lo == 1) ? cj / At : cj;
        factors.push_back(f);
      }
    }
    if (bad) continue;
    merge_exponentials(factors);

    Real res = polish_with_restarts(factors, mu, lo, false);
    best.any_candidate = best.any_candidate || std::isfinite(res);
    if (res < tol::accept) {
      std::vector<Factor> trimmed = factors;
      drop_null_factors(trimmed);
      if (trimmed.size() < factors.size()) {
        const Real res2 = newton_polish(trimmed, mu, lo, false);
        if (res2 <= std::max(res, tol::newton)) {
          factors = std::move(trimmed);
          res = res2;
        }
      }
    }
    if (res < best.residual) {
      best.residual = res;
      best.factors = factors;
      best.ok = res < tol::accept;
    }
    if (best.ok) return best;
  }
  return best;
}

std::vector<Cplx> shifted(std::span<const Cplx> mu, Cplx n1, int count) {
  std::vector<Cplx> out(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<size_t>(i)] = mu[static_cast<size_t>(i)] - n1;
  return out;
}

struct OddCandidate {
  std::vector<Factor> factors;
  Real residual = std::numeric_limits<Real>::infinity();
  Real im_sum = 0;
  Real n_sum = 0;
};

// Odd-style solve: A_1 = 1 fixed, root-find over n_1 with the even core on
// the shifted moments, then a full-system Newton.
CoreResult odd_core(std::span<const Cplx> mu, int lo, bool allow_exponential,
                    bool quick = false) {
  const int M = static_cast<int>(mu.size());
  CoreResult out;
  if (M < 1) fail(Errc::invalid_argument, "odd solver needs at least one equation");

  const Cplx last_rhs = mu[static_cast<size_t>(M - 1)];
  const Real last_w = 1 + std::abs(last_rhs);

  // Inner fits only seed the full-system Newton below, so a looser gate keeps
  // the n_1 search alive where the even core converges marginally.
  const Real inner_accept = quick ? 1e-4L : 1e-6L;
  auto inner_solve = [&](Cplx n1) -> std::optional<std::vector<Factor>> {
    const std::vector<Cplx> sh = shifted(mu, n1, M - 1);
    CoreResult inner = even_core(sh, lo, allow_exponential);
    if (!inner.ok && !(inner.residual < inner_accept)) return std::nullopt;
    return inner.factors;
  };
  auto last_gap = [&](Cplx n1, const std::vector<Factor>& inner) {
    Cplx acc = n1;  // fixed node A_1 = 1 contributes n1 at every order
    const int m = lo + M - 1;
    for (const Factor& f : inner) acc += contribution(f, m);
    return (acc - last_rhs) / last_w;
  };
  auto score = [&](Cplx n1) -> Cplx {
    auto inner = inner_solve(n1);
    if (!inner) return Cplx(std::numeric_limits<Real>::quiet_NaN(), 0);
    return last_gap(n1, *inner);
  };

  // Deterministic grid over n_1 (real for real moment input; the fixed node
  // A_1 = 1 is real, so a real form needs a real n_1), then bisection on the
  // sign changes of the last-equation gap. The gap jumps where the inner
  // solve switches branches, so a secant is not reliable here.
  const Cplx b1 = (lo == 1) ? mu[0] : (M > 1 ? mu[1] : mu[0]);
  const Real span = 1 + std::abs(b1);
  std::vector<Real> offsets;
  if (quick)
    offsets = {0, 0.05L, -0.05L, 0.2L, -0.2L, 0.5L, -0.5L, 1, -1};
  else
    offsets = {0,     0.01L, -0.01L, 0.025L, -0.025L, 0.05L, -0.05L, 0.1L,  -0.1L,
               0.2L,  -0.2L, 0.35L,  -0.35L, 0.5L,    -0.5L, 0.75L,  -0.75L, 1,
               -1,    1.5L,  -1.5L,  2,      -2};
  std::vector<Real> grid;
  grid.reserve(offsets.size());
  for (Real o : offsets) grid.push_back(o * span);
  std::sort(grid.begin(), grid.end());

  std::vector<std::pair<Real, Real>> samples;  // (n1, Re gap), finite only
  std::vector<std::pair<Real, Real>> by_mag;   // (|gap|, n1)
  for (Real x : grid) {
    const Cplx gx = score(Cplx(x));
    if (!finite(gx)) continue;
    samples.emplace_back(x, gx.real());
    by_mag.emplace_back(std::abs(gx), x);
  }

  std::vector<Cplx> n1_candidates{Cplx(0), b1};
  auto bisect = [&](Real a, Real ga, Real b, Real gb) {
    const int iters = quick ? 16 : 44;
    for (int it = 0; it < iters; ++it) {
      const Real m = (a + b) / 2;
      const Cplx gm = score(Cplx(m));
      if (!finite(gm)) {
        b = m;  // deterministic shrink; the candidate polish decides anyway
        continue;
      }
      if (std::abs(gm) < 1e-13L) return m;
      if ((ga < 0) != (gm.real() < 0)) {
        b = m;
        gb = gm.real();
      } else {
        a = m;
        ga = gm.real();
      }
    }
    (void)gb;
    return (a + b) / 2;
  };
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    const auto [xa, ga] = samples[i];
    const auto [xb, gb] = samples[i + 1];
    if ((ga < 0) != (gb < 0)) n1_candidates.push_back(Cplx(bisect(xa, ga, xb, gb)));
  }
  // A few best grid points cover minima without a sign change.
  std::sort(by_mag.begin(), by_mag.end());
  for (size_t i = 0; i < by_mag.size() && i < 3; ++i)
    n1_candidates.push_back(Cplx(by_mag[i].second));

  std::vector<OddCandidate> cands;
  for (const Cplx& n1 : n1_candidates) {
    auto inner = inner_solve(n1);
    if (!inner) continue;
    std::vector<Factor> factors;
    Factor lead;
    lead.A = Cplx(1);
    lead.n = n1;
    factors.push_back(lead);
    factors.insert(factors.end(), inner->begin(), inner->end());
    const Real res = polish_with_restarts(factors, mu, lo, true);
    out.any_candidate = out.any_candidate || std::isfinite(res);
    if (!std::isfinite(res)) continue;
    OddCandidate cand;
    cand.factors = std::move(factors);
    cand.residual = res;
    for (const Factor& f : cand.factors) {
      const Cplx wgt = f.kind == Factor::Kind::exponential ? f.b : f.n;
      cand.im_sum += std::abs(wgt.imag());
      cand.n_sum += std::abs(wgt);
    }
    cands.push_back(std::move(cand));
  }
  if (cands.empty()) return out;

  // Smallest residual wins; admissible solutions tie and fall through to the
  // smallest imaginary content, then the tamest exponents.
  auto key = [](const OddCandidate& c) {
    const Real bucket = c.residual < tol::accept ? Real(0) : c.residual;
    const Real im = std::floor(c.im_sum / tol::pair);
    return std::tuple<Real, Real, Real>(bucket, im, c.n_sum);
  };
  const OddCandidate* bestc = &cands[0];
  for (const OddCandidate& c : cands)
    if (key(c) < key(*bestc)) bestc = &c;

  // Keep the distinct admissible runners-up; the outer shooting solve tracks
  // every branch of this multivalued system.
  auto node_distance = [](const std::vector<Factor>& a, const std::vector<Factor>& b) {
    if (a.size() != b.size()) return std::numeric_limits<Real>::infinity();
    auto keyfn = [](const Factor& f) {
      return f.kind == Factor::Kind::exponential ? f.b : f.A;
    };
    std::vector<Cplx> na, nb;
    for (const Factor& f : a) na.push_back(keyfn(f));
    for (const Factor& f : b) nb.push_back(keyfn(f));
    auto lt = [](Cplx x, Cplx y) {
      return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    };
    std::sort(na.begin(), na.end(), lt);
    std::sort(nb.begin(), nb.end(), lt);
    Real d = 0;
    for (size_t i = 0; i < na.size(); ++i)
      d = std::max(d, std::abs(na[i] - nb[i]) / (1 + std::abs(na[i])));
    return d;
  };
  std::vector<const OddCandidate*> ordered;
  for (const OddCandidate& c : cands) ordered.push_back(&c);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const OddCandidate* a, const OddCandidate* b) { return key(*a) < key(*b); });
  for (const OddCandidate* c : ordered) {
    if (c == bestc || !(c->residual < 1e-6L)) continue;
    bool dup = node_distance(c->factors, bestc->factors) < 1e-5L;
    for (const PowerSumBranch& alt : out.alternates)
      dup = dup || node_distance(c->factors, alt.factors) < 1e-5L;
    if (!dup) out.alternates.push_back({c->factors, c->residual});
    if (out.alternates.size() >= 4) break;
  }

  out.factors = bestc->factors;
  const bool lead_kept = drop_null_factors(out.factors);
  out.residual = newton_polish(out.factors, mu, lo, lead_kept);
  // Dropping may only discard null weights; keep the better of the two.
  if (out.residual > bestc->residual + tol::newton) {
    out.factors = bestc->factors;
    out.residual = bestc->residual;
    out.fixed_first = true;
  } else {
    out.fixed_first = lead_kept;
  }
  out.ok = out.residual < tol::accept;
  return out;
}

TruncatedSeries series_from_moments(std::span<const Cplx> B, int order) {
  std::vector<Cplx> l(static_cast<size_t>(order) + 1, Cplx(0));
  Real sign = 1;
  for (int n = 1; n <= order && n <= static_cast<int>(B.size()); ++n) {
    l[static_cast<size_t>(n)] = sign * B[static_cast<size_t>(n - 1)] / Real(n);
    sign = -sign;
  }
  return exp(TruncatedSeries(std::move(l)));
}

Real reexpansion_gap(std::span<const Factor> factors, std::span<const Cplx> B) {
  const int k = static_cast<int>(B.size());
  const TruncatedSeries want = series_from_moments(B, k);
  const TruncatedSeries got = expand_factors(factors, k);
  Real max_mag = 0;
  for (int n = 1; n <= k; ++n) max_mag = std::max(max_mag, std::abs(want.coeff(n)));
  Real worst = 0;
  for (int n = 1; n <= k; ++n) {
    const Real denom = std::max(std::abs(want.coeff(n)), Real(1e-6L) * std::max(max_mag, Real(1)));
    worst = std::max(worst, std::abs(got.coeff(n) - want.coeff(n)) / denom);
  }
  return worst;
}

FactorForm finish_form(CoreResult&& core, const MomentVector& B) {
  std::vector<Factor> factors = std::move(core.factors);
  if (B.is_real()) {
    if (symmetrize_conjugates(factors)) {
      const Real res = newton_polish(factors, B.values, 1, core.fixed_first);
      symmetrize_conjugates(factors);
      core.residual = std::max(res, relative_residual(factors, B.values, 1));
    }
  }
  FactorForm form;
  form.factors = std::move(factors);
  form.order = B.order();
  form.moment_residual = core.residual;
  form.reexpansion_error = reexpansion_gap(form.factors, B.values);
  return form;
}

[[noreturn]] void raise_solver_failure(const CoreResult& core, const char* which) {
  std::ostringstream os;
  if (!core.any_candidate) {
    os << which << ": Hankel system singular beyond deflation";
    fail(Errc::degenerate_moments, os.str());
  }
  os << which << ": Newton did not converge (best residual "
     << static_cast<double>(core.residual) << ")";
  fail(Errc::no_solution, os.str());
}

}  // namespace

Cplx FactorForm::exponent_sum() const {
  Cplx acc(0);
  for (const Factor& f : factors)
    if (f.kind == Factor::Kind::power) acc += f.n;
  return acc;
}

Real evaluate(const FactorForm& f, Real x) {
  const CplxDerivs d = eval_complex_derivs(f.prefactor, f.factors, f.squared_argument, x, true);
  return collapse_real(d.value, "value");
}

EvalDerivs evaluate_with_derivatives(const FactorForm& f, Real x) {
  const CplxDerivs d = eval_complex_derivs(f.prefactor, f.factors, f.squared_argument, x, true);
  EvalDerivs out;
  out.value = collapse_real(d.value, "value");
  out.d1 = collapse_real(d.d1, "first derivative");
  out.d2 = collapse_real(d.d2, "second derivative");
  return out;
}

Cplx factor_product(std::span<const Factor> factors, bool squared_argument, Cplx x) {
  const Cplx w = squared_argument ? x * x : x;
  Cplx P(1);
  for (const Factor& f : factors) {
    if (f.kind == Factor::Kind::exponential)
      P *= std::exp(f.b * w);
    else
      P *= std::exp(f.n * std::log(Cplx(1) + f.A * w));
  }
  return P;
}

TruncatedSeries expand_factors(std::span<const Factor> factors, int order) {
  TruncatedSeries acc = [&] {
    std::vector<Cplx> one(static_cast<size_t>(order) + 1, Cplx(0));
    one[0] = Cplx(1);
    return TruncatedSeries(std::move(one));
  }();
  for (const Factor& f : factors) {
    std::vector<Cplx> c(static_cast<size_t>(order) + 1, Cplx(0));
    c[0] = Cplx(1);
    if (f.kind == Factor::Kind::exponential) {
      for (int j = 1; j <= order; ++j) c[static_cast<size_t>(j)] = c[static_cast<size_t>(j - 1)] * f.b / Real(j);
    } else {
      for (int j = 1; j <= order; ++j)
        c[static_cast<size_t>(j)] = c[static_cast<size_t>(j - 1)] * f.A * (f.n - Real(j - 1)) / Real(j);
    }
    acc = mul(acc, TruncatedSeries(std::move(c)));
  }
  return acc;
}

PowerSumSolution solve_power_sums(const PowerSumSpec& spec) {
  if (spec.lo != 0 && spec.lo != 1) fail(Errc::invalid_argument, "power-sum lo must be 0 or 1");
  const bool allow_exp = spec.allow_exponential && spec.lo == 1;
  CoreResult core = spec.fix_first_node ? odd_core(spec.rhs, spec.lo, allow_exp, spec.quick)
                                        : even_core(spec.rhs, spec.lo, allow_exp);
  if (!core.ok && !(core.residual < spec.accept)) raise_solver_failure(core, "power-sum solve");
  return PowerSumSolution{std::move(core.factors), core.residual, core.fixed_first,
                          std::move(core.alternates)};
}

Real power_sum_residual(std::span<const Factor> factors, std::span<const Cplx> rhs, int lo) {
  return relative_residual(factors, rhs, lo);
}

Real polish_power_sums(std::vector<Factor>& factors, std::span<const Cplx> rhs, int lo,
                       bool fix_first_node) {
  return polish_with_restarts(factors, rhs, lo, fix_first_node);
}

FactorForm solve_even(const MomentVector& B) {
  if (B.order() < 2 || B.order() % 2 != 0)
    fail(Errc::invalid_argument, "even solver needs 2p moments, p >= 1");
  CoreResult core = even_core(B.values, 1, true);
  if (!core.ok) raise_solver_failure(core, "even-order solve");
  return finish_form(std::move(core), B);
}

FactorForm solve_odd(const MomentVector& B) {
  if (B.order() < 1 || B.order() % 2 != 1)
    fail(Errc::invalid_argument, "odd solver needs 2p+1 moments, p >= 0");
  CoreResult core = odd_core(B.values, 1, true);
  if (!core.ok) raise_solver_failure(core, "odd-order solve");
  return finish_form(std::move(core), B);
}

FactorForm solve_moments(const MomentVector& B) {
  return B.order() % 2 == 0 ? solve_even(B) : solve_odd(B);
}

bool symmetrize_conjugates(std::vector<Factor>& factors) {
  bool all_paired = true;
  std::vector<bool> done(factors.size(), false);
  for (size_t i = 0; i < factors.size(); ++i) {
    if (done[i]) continue;
    Factor& f = factors[i];
    const Cplx wi = f.kind == Factor::Kind::exponential ? f.b : f.n;
    const Cplx ai = f.kind == Factor::Kind::exponential ? f.b : f.A;
    const bool realish = std::abs(ai.imag()) <= tol::pair * (1 + std::abs(ai.real())) &&
                         std::abs(wi.imag()) <= tol::pair * (1 + std::abs(wi.real()));
    if (realish) {
      if (f.kind == Factor::Kind::exponential) {
        f.b = Cplx(f.b.real());
      } else {
        f.A = Cplx(f.A.real());
        f.n = Cplx(f.n.real());
      }
      done[i] = true;
      continue;
    }
    bool paired = false;
    for (size_t j = i + 1; j < factors.size() && !paired; ++j) {
      if (done[j] || factors[j].kind != f.kind) continue;
      Factor& g = factors[j];
      const bool match =
          f.kind == Factor::Kind::exponential
              ? std::abs(g.b - std::conj(f.b)) <= tol::pair * (1 + std::abs(f.b))
              : std::abs(g.A - std::conj(f.A)) <= tol::pair * (1 + std::abs(f.A)) &&
                    std::abs(g.n - std::conj(f.n)) <= tol::pair * (1 + std::abs(f.n));
      if (!match) continue;
      if (f.kind == Factor::Kind::exponential) {
        const Cplx b = (f.b + std::conj(g.b)) / Real(2);
        f.b = b;
        g.b = std::conj(b);
      } else {
        const Cplx A = (f.A + std::conj(g.A)) / Real(2);
        const Cplx n = (f.n + std::conj(g.n)) / Real(2);
        f.A = A;
        f.n = n;
        g.A = std::conj(A);
        g.n = std::conj(n);
      }
      done[i] = done[j] = true;
      paired = true;
    }
    if (!paired) {
      all_paired = false;
      done[i] = true;
    }
  }
  return all_paired;
}

StabilizationReport detect_fixed_form(std::span<const FactorForm> forms,
                                      std::span<const Real> grid) {
  if (forms.size() < 2) fail(Errc::invalid_argument, "stabilization needs at least two forms");
  StabilizationReport rep;
  std::vector<std::vector<Real>> values;
  values.reserve(forms.size());
  for (const FactorForm& f : forms) {
    std::vector<Real> v;
    v.reserve(grid.size());
    for (Real x : grid) {
      try {
        v.push_back(evaluate(f, x));
      } catch (const Error&) {
        v.push_back(std::numeric_limits<Real>::quiet_NaN());
      }
    }
    values.push_back(std::move(v));
  }
  for (size_t i = 0; i + 1 < values.size(); ++i) {
    Real sup = 0;
    for (size_t j = 0; j < grid.size(); ++j) {
      const Real d = std::abs(values[i][j] - values[i + 1][j]);
      sup = std::isfinite(d) ? std::max(sup, d) : std::numeric_limits<Real>::infinity();
    }
    rep.sup_diffs.push_back(sup);
  }
  rep.first_stable_index = -1;
  for (int i = static_cast<int>(rep.sup_diffs.size()) - 1; i >= 0; --i) {
    if (rep.sup_diffs[static_cast<size_t>(i)] < tol::stabilized)
      rep.first_stable_index = i;
    else
      break;
  }
  rep.stabilized = rep.first_stable_index >= 0;
  return rep;
}

}  // namespace ssfa
