#include "ssfa/constraints.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace ssfa {

namespace {

using Mat = Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Cplx, Eigen::Dynamic, 1>;

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

bool finite(Cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

Cplx ipow(Cplx z, int m) {
  Cplx acc(1);
  for (int i = 0; i < m; ++i) acc *= z;
  return acc;
}

Cplx amplitude_product(std::span<const Factor> factors) {
  Cplx acc(0);
  for (const Factor& f : factors) {
    if (f.kind == Factor::Kind::exponential)
      fail(Errc::invalid_argument, "exponential factor is incompatible with a power-law tail");
    acc += f.n * std::log(f.A);
  }
  return std::exp(acc);
}

// Value or first derivative of the working form at a point, complex-safe for
// use inside the joint Newton iteration.
Cplx condition_probe(const Prefactor& pre, std::span<const Factor> factors, bool squared,
                     const Condition& c) {
  const Real x = c.location;
  const Real s = squared ? 2 : 1;
  const Real w = squared ? x * x : x;
  Cplx P(1), M(0);
  const Real xs1 = squared ? x : 1;
  for (const Factor& f : factors) {
    if (f.kind == Factor::Kind::exponential) {
      P *= std::exp(f.b * w);
      M += f.b * s * xs1;
    } else {
      const Cplx base = Cplx(1) + f.A * w;
      P *= std::exp(f.n * std::log(base));
      M += f.n * f.A / base * s * xs1;
    }
  }
  const Real sg = pre.tag == Prefactor::Tag::unit ? 0 : pre.zero_exponent;
  Cplx value, deriv;
  if (sg == 0) {
    value = pre.scale * P;
    deriv = value * M;
  } else if (sg == 1) {
    value = pre.scale * x * P;
    deriv = pre.scale * P * (Cplx(1) + x * M);
  } else {
    const Real xp = std::pow(x, sg);
    value = pre.scale * xp * P;
    deriv = pre.scale * xp / x * P * (sg + x * M);
  }
  return c.kind == Condition::Kind::derivative_at_point ? deriv : value;
}

struct Split {
  std::vector<Condition> pointwise;
  std::optional<Condition> asym;
};

Split split_conditions(const std::vector<Condition>& conds) {
  Split s;
  for (const Condition& c : conds) {
    if (c.kind == Condition::Kind::asymptotic_power) {
      if (s.asym) fail(Errc::unsupported, "at most one asymptotic condition is supported");
      s.asym = c;
    } else {
      s.pointwise.push_back(c);
    }
  }
  return s;
}

struct InnerSolve {
  NormalizedExpansion ex;
  std::vector<Cplx> mu;  // power-sum right-hand sides
  int lo = 1;
  std::vector<Factor> factors;
  bool fixed_first = false;
  std::vector<PowerSumBranch> alt_branches;
};

// theta -> series -> moments (with the exponent-sum equation prepended for
// asymptotic conditions).
InnerSolve build_mu(const ConstrainedSolveSpec& spec, const Split& split, Cplx theta) {
  InnerSolve in;
  in.ex = spec.oracle.generate(spec.order, theta);
  const MomentVector B = moments_from_series(in.ex.series);
  if (split.asym) {
    const Real s = in.ex.squared_argument ? 2 : 1;
    const Cplx sum_n_target =
        (split.asym->exponent - in.ex.prefactor.infinity_exponent) / s;
    in.lo = 0;
    in.mu.push_back(sum_n_target);
  } else {
    in.lo = 1;
  }
  in.mu.insert(in.mu.end(), B.values.begin(), B.values.end());
  return in;
}

// theta -> series -> moments -> factor parameters, for one trial value.
InnerSolve run_inner(const ConstrainedSolveSpec& spec, const Split& split, Cplx theta,
                     bool quick = false) {
  InnerSolve in = build_mu(spec, split, theta);
  PowerSumSpec ps;
  ps.rhs = in.mu;
  ps.lo = in.lo;
  ps.fix_first_node = in.mu.size() % 2 == 1;
  ps.allow_exponential = !split.asym.has_value();
  // Best-effort seeds are fine here: the joint Newton repolishes everything
  // and the final acceptance gate stays strict.
  ps.accept = quick ? 1e-3L : 1e-4L;
  ps.quick = quick;
  PowerSumSolution sol = solve_power_sums(ps);
  in.factors = std::move(sol.factors);
  in.fixed_first = sol.fixed_first;
  in.alt_branches = std::move(sol.alternates);
  return in;
}

// Signed gap of the one remaining outer condition for a solved inner system.
Real signed_gap(const Split& split, const InnerSolve& in) {
  if (split.asym) {
    const Cplx amp = in.ex.prefactor.scale * amplitude_product(in.factors);
    return (amp.real() - split.asym->target) / (1 + std::abs(split.asym->target));
  }
  const Condition& c = split.pointwise.front();
  const Cplx v = condition_probe(in.ex.prefactor, in.factors, in.ex.squared_argument, c);
  return (v - c.target).real() / (1 + std::abs(c.target));
}

// Signed outer residual used for bracketing the shooting parameter.
Real outer_residual(const ConstrainedSolveSpec& spec, const Split& split, Real theta) {
  try {
    const InnerSolve in = run_inner(spec, split, Cplx(theta), /*quick=*/true);
    return signed_gap(split, in);
  } catch (const Error&) {
    return kNaN;
  }
}

std::vector<Real> scan_points(const Bracket& br) {
  if (!(br.lo != 0 && br.hi != 0) || (br.lo < 0) != (br.hi < 0))
    fail(Errc::invalid_argument, "shooting bracket must not straddle zero");
  const Real sign = br.lo < 0 ? -1 : 1;
  const Real a = std::min(std::abs(br.lo), std::abs(br.hi));
  const Real b = std::max(std::abs(br.lo), std::abs(br.hi));
  const int n = std::max(br.points, 2);
  std::vector<Real> pts(static_cast<size_t>(n));
  const Real la = std::log(a), lb = std::log(b);
  for (int i = 0; i < n; ++i)
    pts[static_cast<size_t>(i)] = sign * std::exp(la + (lb - la) * i / Real(n - 1));
  if (sign < 0) std::reverse(pts.begin(), pts.end());
  return pts;
}

// Safeguarded secant/bisection refinement of a sign change.
Real refine_root(const std::function<Real(Real)>& g, Real a, Real b, Real ga, Real gb) {
  for (int it = 0; it < 90; ++it) {
    if (std::abs(b - a) < 1e-14L * (1 + std::abs(a) + std::abs(b))) break;
    Real m = (std::abs(gb - ga) > 0) ? b - gb * (b - a) / (gb - ga) : (a + b) / 2;
    const Real lofrac = a + Real(0.01L) * (b - a), hifrac = b - Real(0.01L) * (b - a);
    if (!(m > std::min(lofrac, hifrac) && m < std::max(lofrac, hifrac))) m = (a + b) / 2;
    const Real gm = g(m);
    if (!std::isfinite(gm)) {
      b = m;
      gb = std::isfinite(gb) ? gb : -ga;
      continue;
    }
    if (std::abs(gm) < 1e-13L) return m;
    if ((ga < 0) != (gm < 0)) {
      b = m;
      gb = gm;
    } else {
      a = m;
      ga = gm;
    }
  }
  return (a + b) / 2;
}

struct Packed {
  std::vector<std::pair<int, int>> slots;  // (factor, 0=A|b, 1=n)
};

Packed pack(const std::vector<Factor>& factors, bool fixed_first) {
  Packed p;
  for (int i = 0; i < static_cast<int>(factors.size()); ++i) {
    if (factors[static_cast<size_t>(i)].kind == Factor::Kind::exponential) {
      p.slots.emplace_back(i, 0);
    } else {
      if (!(fixed_first && i == 0)) p.slots.emplace_back(i, 0);
      p.slots.emplace_back(i, 1);
    }
  }
  return p;
}

struct Candidate {
  std::vector<Factor> factors;
  Real theta = 0;
  Real moment_residual = 0;
  Real condition_residual = 0;
  Real metric = 0;
};

// Full Newton on the joint system: shooting parameter + factor parameters
// against all moment equations plus the imposed conditions. Holomorphic in
// every unknown, so the Jacobian comes from complex central differences.
std::optional<Candidate> joint_polish(const ConstrainedSolveSpec& spec, const Split& split,
                                      Real theta0, const InnerSolve& seed) {
  std::vector<Factor> factors = seed.factors;
  const Packed pk = pack(factors, seed.fixed_first);
  const int nf = static_cast<int>(pk.slots.size());
  const int nx = nf + 1;  // + theta
  const int n_mu = static_cast<int>(seed.mu.size());
  const int n_cond = static_cast<int>(split.pointwise.size()) + (split.asym ? 1 : 0);
  const int rows = n_mu + n_cond;

  std::vector<Real> wts(static_cast<size_t>(n_mu));
  for (int i = 0; i < n_mu; ++i) wts[static_cast<size_t>(i)] = 1 / (1 + std::abs(seed.mu[static_cast<size_t>(i)]));

  auto unpackf = [&](const Vec& x) {
    std::vector<Factor> fs = factors;
    for (int c = 0; c < nf; ++c) {
      const auto [fi, slot] = pk.slots[static_cast<size_t>(c)];
      Factor& f = fs[static_cast<size_t>(fi)];
      if (f.kind == Factor::Kind::exponential)
        f.b = x(c + 1);
      else if (slot == 0)
        f.A = x(c + 1);
      else
        f.n = x(c + 1);
    }
    return fs;
  };

  auto residual = [&](const Vec& x) -> Vec {
    Vec r(rows);
    const Cplx theta = x(0);
    const std::vector<Factor> fs = unpackf(x);
    NormalizedExpansion ex;
    try {
      ex = spec.oracle.generate(spec.order, theta);
    } catch (const Error&) {
      r.setConstant(Cplx(kNaN, 0));
      return r;
    }
    const MomentVector B = moments_from_series(ex.series);
    int row = 0;
    if (split.asym) {
      const Real s = ex.squared_argument ? 2 : 1;
      const Cplx target = (split.asym->exponent - ex.prefactor.infinity_exponent) / s;
      Cplx acc(0);
      for (const Factor& f : fs) acc += f.n;
      r(row) = (acc - target) * wts[0];
      ++row;
    }
    for (int m = 1; m <= B.order(); ++m, ++row) {
      Cplx acc(0);
      for (const Factor& f : fs)
        acc += f.kind == Factor::Kind::exponential ? (m == 1 ? f.b : Cplx(0)) : f.n * ipow(f.A, m);
      r(row) = (acc - B.value(m)) * wts[static_cast<size_t>(row)];
    }
    for (const Condition& c : split.pointwise) {
      const Cplx v = condition_probe(ex.prefactor, fs, ex.squared_argument, c);
      r(row++) = (v - c.target) / (1 + std::abs(c.target));
    }
    if (split.asym) {
      Cplx amp;
      try {
        amp = ex.prefactor.scale * amplitude_product(fs);
      } catch (const Error&) {
        amp = Cplx(kNaN, 0);
      }
      // Real part only: a negative real node under the principal branch
      // carries an imaginary component no real parameter change can cancel.
      r(row++) = Cplx((amp.real() - split.asym->target) / (1 + std::abs(split.asym->target)));
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

  Vec x(nx);
  x(0) = Cplx(theta0);
  for (int c = 0; c < nf; ++c) {
    const auto [fi, slot] = pk.slots[static_cast<size_t>(c)];
    const Factor& f = factors[static_cast<size_t>(fi)];
    x(c + 1) = f.kind == Factor::Kind::exponential ? f.b : (slot == 0 ? f.A : f.n);
  }

  Vec r = residual(x);
  Real res = norm_inf(r);
  if (!std::isfinite(res)) return std::nullopt;

  for (int iter = 0; iter < tol::newton_max_iter && res > tol::newton; ++iter) {
    Mat J(rows, nx);
    for (int c = 0; c < nx; ++c) {
      const Real h = 1e-7L * (1 + std::abs(x(c)));
      Vec xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      const Vec rp = residual(xp);
      const Vec rm = residual(xm);
      for (int i = 0; i < rows; ++i) J(i, c) = (rp(i) - rm(i)) / (2 * h);
    }
    if (!J.allFinite()) break;
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec step = svd.solve(-r);
    if (!step.allFinite()) break;
    bool improved = false;
    Real t = 1;
    for (int halving = 0; halving < 14; ++halving, t /= 2) {
      const Vec xt = x + t * step;
      const Vec rt = residual(xt);
      const Real nt = norm_inf(rt);
      if (nt < res) {
        x = xt;
        r = rt;
        res = nt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  const bool debug = std::getenv("SSFA_DEBUG") != nullptr;
  if (!(res < tol::accept)) {
    if (debug)
      std::fprintf(stderr, "[joint] theta0=%.8Lg stalled at res=%.3Lg\n", theta0, res);
    return std::nullopt;
  }
  const Cplx theta = x(0);
  if (std::abs(theta.imag()) > tol::imag_residue * (1 + std::abs(theta.real()))) {
    if (debug)
      std::fprintf(stderr, "[joint] theta0=%.8Lg complex theta (%.3Lg, %.3Lg)\n", theta0,
                   theta.real(), theta.imag());
    return std::nullopt;
  }

  Candidate cand;
  cand.theta = theta.real();
  cand.factors = unpackf(x);
  symmetrize_conjugates(cand.factors);
  // Re-evaluate after symmetrization with the exact real theta.
  Vec xs(nx);
  xs(0) = Cplx(cand.theta);
  {
    const Packed pk2 = pack(cand.factors, seed.fixed_first);
    if (static_cast<int>(pk2.slots.size()) == nf) {
      for (int c = 0; c < nf; ++c) {
        const auto [fi, slot] = pk2.slots[static_cast<size_t>(c)];
        const Factor& f = cand.factors[static_cast<size_t>(fi)];
        xs(c + 1) = f.kind == Factor::Kind::exponential ? f.b : (slot == 0 ? f.A : f.n);
      }
      const Vec rs = residual(xs);
      const Real rn = norm_inf(rs);
      if (rn < tol::accept) res = rn;
      else cand.factors = unpackf(x);
    }
  }
  cand.moment_residual = res;

  // Condition residuals of the final assembled form.
  try {
    const NormalizedExpansion ex = spec.oracle.generate(spec.order, Cplx(cand.theta));
    Real worst = 0;
    (void)debug;
    for (const Condition& c : split.pointwise) {
      const Cplx v = condition_probe(ex.prefactor, cand.factors, ex.squared_argument, c);
      worst = std::max(worst, std::abs(v - c.target));
    }
    if (split.asym) {
      const Cplx amp = ex.prefactor.scale * amplitude_product(cand.factors);
      worst = std::max(worst, std::abs(amp.real() - split.asym->target));
      Cplx sn(0);
      for (const Factor& f : cand.factors) sn += f.n;
      const Real s = ex.squared_argument ? 2 : 1;
      worst = std::max(worst,
                       std::abs(ex.prefactor.infinity_exponent + s * sn - split.asym->exponent));
    }
    cand.condition_residual = worst;
  } catch (const Error&) {
    return std::nullopt;
  }
  return cand;
}

FactorForm assemble(const ConstrainedSolveSpec& spec, const std::vector<Factor>& factors,
                    Real theta) {
  const NormalizedExpansion ex = spec.oracle.generate(spec.order, Cplx(theta));
  FactorForm form;
  form.prefactor = ex.prefactor;
  form.factors = factors;
  form.order = spec.order;
  form.squared_argument = ex.squared_argument;
  // accuracy-through-order check against the source series
  const int kk = ex.series.order();
  if (kk >= 1) {
    const TruncatedSeries got = expand_factors(form.factors, kk);
    Real max_mag = 0;
    for (int n = 1; n <= kk; ++n) max_mag = std::max(max_mag, std::abs(ex.series.coeff(n)));
    Real worst = 0;
    for (int n = 1; n <= kk; ++n) {
      const Real denom =
          std::max(std::abs(ex.series.coeff(n)), Real(1e-6L) * std::max(max_mag, Real(1)));
      worst = std::max(worst, std::abs(got.coeff(n) - ex.series.coeff(n)) / denom);
    }
    form.reexpansion_error = worst;
  }
  return form;
}

}  // namespace

std::pair<Real, Real> apply_asymptotic(const FactorForm& f, const Condition& c) {
  if (c.kind != Condition::Kind::asymptotic_power)
    fail(Errc::invalid_argument, "apply_asymptotic needs an asymptotic_power condition");
  for (const Factor& fac : f.factors) {
    if (fac.kind == Factor::Kind::exponential)
      fail(Errc::invalid_argument, "exponential factor is incompatible with a power-law tail");
    const bool neg_real_node = std::abs(fac.A.imag()) <= 1e-12L * (1 + std::abs(fac.A.real())) &&
                               fac.A.real() < 0;
    const bool int_exp = std::abs(fac.n.imag()) <= 1e-12L * (1 + std::abs(fac.n.real())) &&
                         std::abs(fac.n.real() - std::round(fac.n.real())) < 1e-9L;
    if (neg_real_node && !int_exp)
      fail(Errc::branch_cut, "negative node with non-integer exponent has no real amplitude");
  }
  const Cplx amp = f.prefactor.scale * amplitude_product(f.factors);
  if (std::abs(amp.imag()) > tol::imag_residue * (1 + std::abs(amp.real())))
    fail(Errc::conjugation_broken, "asymptotic amplitude has imaginary residue");
  const Real s = f.squared_argument ? 2 : 1;
  Cplx sum_n(0);
  for (const Factor& fac : f.factors) sum_n += fac.n;
  const Real r_amp = amp.real() - c.target;
  const Real r_exp = f.prefactor.infinity_exponent + s * sum_n.real() - c.exponent;
  return {r_amp, r_exp};
}

SolveOutcome solve_constrained(const ConstrainedSolveSpec& spec) {
  if (spec.order < 1) fail(Errc::invalid_argument, "order must be >= 1");
  const Split split = split_conditions(spec.conditions);
  const bool has_theta = spec.oracle.has_parameter();
  const int outer_eqs = static_cast<int>(split.pointwise.size()) + (split.asym ? 1 : 0);
  if (outer_eqs != (has_theta ? 1 : 0)) {
    std::ostringstream os;
    os << "parameter-count imbalance: " << outer_eqs
       << " outer condition(s) against " << (has_theta ? 1 : 0) << " shooting parameter(s)";
    fail(Errc::underdetermined, os.str());
  }

  if (!has_theta) {
    NormalizedExpansion ex = spec.oracle.generate(spec.order, Cplx(0));
    const MomentVector B = moments_from_series(ex.series);
    FactorForm form = solve_moments(B);
    form.prefactor = ex.prefactor;
    form.squared_argument = ex.squared_argument;
    form.order = spec.order;
    SolveOutcome out;
    out.form = std::move(form);
    out.moment_residual = out.form.moment_residual;
    return out;
  }

  auto g = [&](Real theta) { return outer_residual(spec, split, theta); };

  struct Seed {
    Real theta = 0;
    std::optional<InnerSolve> inner;  // warm branch seed; cold when absent
  };

  auto collect_seeds = [&](const Bracket& br) {
    const std::vector<Real> pts = scan_points(br);
    std::vector<Real> gs(pts.size(), kNaN);
    std::vector<Seed> seeds;
    struct BranchSeed {
      Real gap;
      Seed seed;
    };
    std::vector<BranchSeed> branch_pool;
    Real prev_t = kNaN, prev_g = kNaN;
    for (size_t i = 0; i < pts.size(); ++i) {
      const Real t = pts[i];
      std::optional<InnerSolve> in;
      try {
        in = run_inner(spec, split, Cplx(t), /*quick=*/true);
      } catch (const Error&) {
      }
      Real gt = kNaN;
      if (in) {
        try {
          gt = signed_gap(split, *in);
        } catch (const Error&) {
        }
        // Runner-up branches of the multivalued inner system feed the joint
        // Newton directly when their outer gap is already small.
        for (const PowerSumBranch& alt : in->alt_branches) {
          InnerSolve ai = *in;
          ai.factors = alt.factors;
          Real ga = kNaN;
          try {
            ga = signed_gap(split, ai);
          } catch (const Error&) {
          }
          if (std::isfinite(ga) && std::abs(ga) < 0.3L)
            branch_pool.push_back({std::abs(ga), Seed{t, std::move(ai)}});
        }
      }
      gs[i] = gt;
      if (std::isfinite(gt)) {
        if (std::abs(gt) < 1e-11L) seeds.push_back({t, std::nullopt});
        else if (std::isfinite(prev_g) && (prev_g < 0) != (gt < 0))
          seeds.push_back({refine_root(g, prev_t, t, prev_g, gt), std::nullopt});
        prev_t = t;
        prev_g = gt;
      }
    }
    std::stable_sort(branch_pool.begin(), branch_pool.end(),
                     [](const BranchSeed& a, const BranchSeed& b) { return a.gap < b.gap; });
    for (size_t i = 0; i < branch_pool.size() && i < 8; ++i)
      seeds.push_back(std::move(branch_pool[i].seed));
    // Near-zero local minima of |g| seed the joint Newton even without a sign
    // change (double roots, or pockets where the inner solve is marginal).
    for (size_t i = 1; i + 1 < pts.size(); ++i) {
      if (!std::isfinite(gs[i])) continue;
      const Real a = std::abs(gs[i]);
      if (a > 0.5L) continue;
      const Real left = std::isfinite(gs[i - 1]) ? std::abs(gs[i - 1])
                                                 : std::numeric_limits<Real>::infinity();
      const Real right = std::isfinite(gs[i + 1]) ? std::abs(gs[i + 1])
                                                  : std::numeric_limits<Real>::infinity();
      if (a <= left && a <= right) seeds.push_back({pts[i], std::nullopt});
    }
    // Warm continuation pass: follow one solution branch across the scan by
    // re-polishing the previous factor set. The cold scan jumps branches
    // where the Prony start changes; this pass keeps coherent sign data and
    // supplies the matching factor seeds directly.
    std::optional<InnerSolve> carry;
    Real wprev_t = kNaN, wprev_g = kNaN;
    int warm_budget = 8;
    for (size_t i = 0; i < pts.size() && warm_budget > 0; ++i) {
      const Real t = pts[i];
      std::optional<InnerSolve> cur;
      if (carry) {
        try {
          InnerSolve w = build_mu(spec, split, Cplx(t));
          w.factors = carry->factors;
          w.fixed_first = carry->fixed_first;
          if (polish_power_sums(w.factors, w.mu, w.lo, w.fixed_first) < 1e-8L)
            cur = std::move(w);
        } catch (const Error&) {
        }
      }
      if (!cur) {
        try {
          cur = run_inner(spec, split, Cplx(t), /*quick=*/true);
        } catch (const Error&) {
        }
      }
      if (!cur) {
        carry.reset();
        wprev_g = kNaN;
        continue;
      }
      carry = cur;
      Real gw = kNaN;
      try {
        gw = signed_gap(split, *cur);
      } catch (const Error&) {
      }
      if (!std::isfinite(gw)) {
        wprev_g = kNaN;
        continue;
      }
      if (std::isfinite(wprev_g) && (wprev_g < 0) != (gw < 0)) {
        seeds.push_back({(wprev_t + t) / 2, *cur});
        --warm_budget;
      }
      wprev_t = t;
      wprev_g = gw;
    }
    return seeds;
  };

  std::vector<Seed> seeds = collect_seeds(spec.bracket);
  if (seeds.empty()) {
    Bracket wide = spec.bracket;
    if (wide.lo > 0) {
      wide.lo = 1e-6L;
      wide.hi = 1e4L;
    } else {
      wide.lo = -1e4L;
      wide.hi = -1e-6L;
    }
    wide.points = 128;
    seeds = collect_seeds(wide);
  }
  if (seeds.empty())
    fail(Errc::no_solution, "no shooting root in bracket for order " + std::to_string(spec.order));

  // Deduplicate cold seeds by theta; warm seeds carry distinct branches.
  std::stable_sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) {
    return a.theta < b.theta;
  });
  std::vector<Seed> uniq;
  for (Seed& sd : seeds) {
    if (!sd.inner && !uniq.empty() && !uniq.back().inner &&
        std::abs(sd.theta - uniq.back().theta) <= 1e-7L * (1 + std::abs(sd.theta)))
      continue;
    uniq.push_back(std::move(sd));
  }

  // Continuation seeds from adjacent orders join the scan roots.
  for (Real th : spec.seed_thetas)
    if (std::isfinite(th) && th != 0) uniq.push_back({th, std::nullopt});

  std::vector<Candidate> cands;
  auto try_candidate = [&](Real theta, const InnerSolve& seed) -> std::optional<Candidate> {
    auto cand = joint_polish(spec, split, theta, seed);
    if (!cand) return std::nullopt;
    if (cand->condition_residual > 1e-9L) {
      if (std::getenv("SSFA_DEBUG"))
        std::fprintf(stderr, "[cand] theta=%.8Lg rejected cond_res=%.3Lg\n", cand->theta,
                     cand->condition_residual);
      return std::nullopt;
    }
    return cand;
  };
  for (const Seed& sd : uniq) {
    const Real theta = sd.theta;
    InnerSolve seed;
    if (sd.inner) {
      seed = *sd.inner;
    } else {
      try {
        seed = run_inner(spec, split, Cplx(theta));
      } catch (const Error& e) {
        if (std::getenv("SSFA_DEBUG"))
          std::fprintf(stderr, "[seed] theta=%.8Lg inner failed: %s\n", theta, e.what());
        continue;
      }
    }
    // The inner system is multivalued near degenerate pockets; chase every
    // branch the inner solve reports, not just the tie-break winner.
    std::vector<InnerSolve> branch_seeds{seed};
    for (const PowerSumBranch& alt : seed.alt_branches) {
      InnerSolve b = seed;
      b.factors = alt.factors;
      b.alt_branches.clear();
      branch_seeds.push_back(std::move(b));
    }
    std::optional<Candidate> cand;
    for (const InnerSolve& bs : branch_seeds) {
      auto c = try_candidate(theta, bs);
      if (!c) continue;
      if (spec.rank_metric) {
        try {
          c->metric = spec.rank_metric(assemble(spec, c->factors, c->theta), c->theta);
        } catch (const Error&) {
          c->metric = std::numeric_limits<Real>::infinity();
        }
      } else {
        c->metric = c->moment_residual + c->condition_residual;
      }
      cands.push_back(std::move(*c));
    }
  }
  if (cands.empty())
    fail(Errc::no_solution,
         "shooting roots found but Newton refinement failed at order " +
             std::to_string(spec.order));

  // Merge duplicates (warm and cold seeds often land on the same root) and
  // push solutions that cannot be evaluated on the diagnostic domain to the
  // back; they only survive when nothing else does.
  {
    std::vector<Candidate> uniq_c;
    for (Candidate& c : cands) {
      bool dup = false;
      for (const Candidate& u : uniq_c)
        dup = dup || (std::abs(c.theta - u.theta) <= 1e-7L * (1 + std::abs(c.theta)) &&
                      c.factors.size() == u.factors.size());
      if (!dup) uniq_c.push_back(std::move(c));
    }
    cands = std::move(uniq_c);
    std::erase_if(cands, [](const Candidate& c) { return !std::isfinite(c.metric); });
    if (cands.empty())
      fail(Errc::no_solution,
           "solutions at order " + std::to_string(spec.order) +
               " violate the branch-cut precondition on most of the domain");
  }

  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.metric < b.metric; });

  SolveOutcome out;
  const Candidate& best = cands.front();
  out.form = assemble(spec, best.factors, best.theta);
  out.form.moment_residual = best.moment_residual;
  out.theta = best.theta;
  out.moment_residual = best.moment_residual;
  out.condition_residual = best.condition_residual;
  for (const Candidate& c : cands) out.alternates.push_back({c.theta, c.metric});
  return out;
}

}  // namespace ssfa
