#include "ssfa/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace ssfa {

namespace {

// Dormand-Prince 5(4) adaptive step integrator for the tiny systems used by
// the reference oracle.
struct Dopri5 {
  std::function<void(Real, const Real*, Real*)> rhs;
  int dim = 1;
  Real rtol = 1e-13L;
  Real atol = 1e-13L;

  using State = std::array<Real, 2>;

  void step(Real x, const State& y, Real h, State& out, State& err) const {
    static constexpr Real c2 = 1.0L / 5, c3 = 3.0L / 10, c4 = 4.0L / 5, c5 = 8.0L / 9;
    static constexpr Real a21 = 1.0L / 5;
    static constexpr Real a31 = 3.0L / 40, a32 = 9.0L / 40;
    static constexpr Real a41 = 44.0L / 45, a42 = -56.0L / 15, a43 = 32.0L / 9;
    static constexpr Real a51 = 19372.0L / 6561, a52 = -25360.0L / 2187, a53 = 64448.0L / 6561,
                          a54 = -212.0L / 729;
    static constexpr Real a61 = 9017.0L / 3168, a62 = -355.0L / 33, a63 = 46732.0L / 5247,
                          a64 = 49.0L / 176, a65 = -5103.0L / 18656;
    static constexpr Real b1 = 35.0L / 384, b3 = 500.0L / 1113, b4 = 125.0L / 192,
                          b5 = -2187.0L / 6784, b6 = 11.0L / 84;
    static constexpr Real e1 = 71.0L / 57600, e3 = -71.0L / 16695, e4 = 71.0L / 1920,
                          e5 = -17253.0L / 339200, e6 = 22.0L / 525, e7 = -1.0L / 40;

    State k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, tmp{};
    rhs(x, y.data(), k1.data());
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(x + c2 * h, tmp.data(), k2.data());
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(x + c3 * h, tmp.data(), k3.data());
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(x + c4 * h, tmp.data(), k4.data());
    for (int i = 0; i < dim; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(x + c5 * h, tmp.data(), k5.data());
    for (int i = 0; i < dim; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(x + h, tmp.data(), k6.data());
    for (int i = 0; i < dim; ++i)
      out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(x + h, out.data(), k7.data());
    for (int i = 0; i < dim; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  }

  // Integrate from a to b, recording the state at each sorted target point.
  std::vector<State> integrate(Real a, Real b, State y0, std::span<const Real> targets) const {
    std::vector<State> out;
    out.reserve(targets.size());
    size_t next = 0;
    State y = y0;
    Real x = a;
    while (next < targets.size() && targets[next] <= a + 1e-300L) {
      out.push_back(y);
      ++next;
    }
    Real h = (b - a) / 100;
    const Real hmin = (b - a) * 1e-14L;
    long steps = 0;
    while (x < b && next < targets.size()) {
      if (++steps > 4000000L) fail(Errc::internal, "reference integrator exceeded step budget");
      Real hx = std::min(h, b - x);
      bool hit_target = false;
      if (next < targets.size() && x + hx >= targets[next]) {
        hx = targets[next] - x;
        hit_target = true;
        if (hx <= hmin) {
          out.push_back(y);
          ++next;
          continue;
        }
      }
      State ynew{}, err{};
      step(x, y, hx, ynew, err);
      Real emax = 0;
      for (int i = 0; i < dim; ++i) {
        const Real sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        emax = std::max(emax, std::abs(err[i]) / sc);
      }
      if (emax <= 1) {
        x += hx;
        y = ynew;
        if (hit_target) {
          out.push_back(y);
          ++next;
        }
        if (!hit_target || emax > 0) {
          const Real fac = emax > 0 ? Real(0.9L) * std::pow(emax, -Real(0.2L)) : 5;
          h = hx * std::clamp(fac, Real(0.2L), Real(5));
        }
      } else {
        const Real fac = Real(0.9L) * std::pow(emax, -Real(0.2L));
        h = hx * std::clamp(fac, Real(0.1L), Real(1));
        if (h < hmin) fail(Errc::internal, "reference integrator step underflow");
      }
    }
    while (next < targets.size()) {
      out.push_back(y);
      ++next;
    }
    return out;
  }
};

std::vector<NativeEval> integrate_reference(const ReferenceConfig& rc, Real rtol,
                                            std::span<const Real> xs) {
  Dopri5 ode;
  ode.rhs = rc.rhs;
  ode.dim = rc.dim;
  ode.rtol = rtol;
  ode.atol = rtol;

  Dopri5::State y0{rc.init[0], rc.init[1]};
  if (rc.shoot) {
    // Secant on the unknown initial slope; the problems here are smooth and
    // the boundary map is monotone enough for this to converge quickly.
    auto end_value = [&](Real s) {
      Dopri5::State y{rc.init[0], s};
      const std::array<Real, 1> tgt{rc.b};
      const auto states = ode.integrate(rc.a, rc.b, y, tgt);
      return states.back()[0] - rc.shoot_target;
    };
    Real s0 = 0.5L, s1 = 1.5L;
    Real g0 = end_value(s0), g1 = end_value(s1);
    for (int it = 0; it < 60 && std::abs(g1) > 1e-13L; ++it) {
      const Real d = g1 - g0;
      if (std::abs(d) < 1e-300L) break;
      const Real s2 = s1 - g1 * (s1 - s0) / d;
      s0 = s1;
      g0 = g1;
      s1 = s2;
      g1 = end_value(s1);
      if (!std::isfinite(g1)) fail(Errc::no_solution, "reference shooting diverged");
    }
    if (std::abs(g1) > 1e-9L) fail(Errc::no_solution, "reference shooting did not converge");
    y0[1] = s1;
  }

  const auto states = ode.integrate(rc.a, rc.b, y0, xs);
  std::vector<NativeEval> out(states.size());
  for (size_t i = 0; i < states.size(); ++i) out[i] = rc.to_native(xs[i], states[i].data());
  return out;
}

}  // namespace

std::vector<Real> default_grid(const ProblemSpec& spec, int points) {
  if (points < 2) fail(Errc::invalid_argument, "grid needs at least two points");
  const auto [lo, hi] = spec.domain();
  std::vector<Real> g(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<size_t>(i)] = lo + (hi - lo) * i / Real(points - 1);
  return g;
}

DefectReport defect(const Solution& sol, std::span<const Real> grid) {
  DefectReport rep;
  rep.order = sol.form.order;
  rep.epsilon = sol.problem.epsilon();
  rep.grid.assign(grid.begin(), grid.end());
  rep.defect_values.reserve(grid.size());
  for (Real t : grid) {
    Real d = std::numeric_limits<Real>::quiet_NaN();
    try {
      const NativeEval e = sol.eval(t);
      d = std::abs(sol.problem.native_residual(e.y, e.dy, e.d2y, t));
    } catch (const Error&) {
    }
    if (std::isfinite(d)) {
      rep.defect_values.push_back(d);
      rep.max_defect = std::max(rep.max_defect, d);
    } else {
      rep.defect_values.push_back(std::numeric_limits<Real>::quiet_NaN());
      ++rep.warnings;
    }
  }
  return rep;
}

Reference::Reference(std::vector<Real> ts, std::vector<NativeEval> states, Real verified)
    : ts_(std::move(ts)), states_(std::move(states)), verified_(verified) {}

NativeEval Reference::eval(Real t) const {
  const auto it = std::lower_bound(ts_.begin(), ts_.end(), t);
  if (it == ts_.end()) return states_.back();
  size_t j = static_cast<size_t>(it - ts_.begin());
  if (std::abs(ts_[j] - t) < 1e-13L * (1 + std::abs(t)) || j == 0) return states_[j];
  // cubic Hermite on [j-1, j]
  const size_t i = j - 1;
  const Real h = ts_[j] - ts_[i];
  const Real s = (t - ts_[i]) / h;
  const Real h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const Real h10 = s * (1 - s) * (1 - s);
  const Real h01 = s * s * (3 - 2 * s);
  const Real h11 = s * s * (s - 1);
  NativeEval out;
  out.y = h00 * states_[i].y + h10 * h * states_[i].dy + h01 * states_[j].y +
          h11 * h * states_[j].dy;
  out.dy = (states_[j].y - states_[i].y) / h;  // adequate for diagnostics
  out.d2y = std::numeric_limits<Real>::quiet_NaN();
  return out;
}

Reference reference_solution(const ProblemSpec& spec, Real tolerance,
                             std::span<const Real> grid) {
  const ReferenceConfig rc = spec.reference_config();
  if (!rc.supported)
    fail(Errc::unsupported, "no numeric reference for " + spec.name() +
                                " (infinite working interval)");
  std::vector<Real> xs(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) xs[i] = rc.x_of_t(grid[i]);
  if (!std::is_sorted(xs.begin(), xs.end()))
    fail(Errc::invalid_argument, "reference grid must be increasing");

  const Real rtol = std::max(tolerance * 1e-3L, Real(1e-16L));
  const std::vector<NativeEval> fine = integrate_reference(rc, rtol, xs);
  const std::vector<NativeEval> coarse = integrate_reference(rc, rtol * 100, xs);
  Real diff = 0;
  for (size_t i = 0; i < fine.size(); ++i) diff = std::max(diff, std::abs(fine[i].y - coarse[i].y));
  if (diff > tolerance)
    fail(Errc::no_solution, "reference solution failed Richardson verification");

  std::vector<Real> ts(grid.begin(), grid.end());
  return Reference(std::move(ts), fine, diff);
}

DefectReport error(const Solution& sol, const Reference& ref, std::span<const Real> grid) {
  DefectReport rep = defect(sol, grid);
  rep.error_values.reserve(grid.size());
  Real max_err = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    Real e = std::numeric_limits<Real>::quiet_NaN();
    try {
      e = std::abs(sol.value(grid[i]) - ref.eval(grid[i]).y);
    } catch (const Error&) {
    }
    if (std::isfinite(e))
      max_err = std::max(max_err, e);
    else
      ++rep.warnings;
    rep.error_values.push_back(e);
  }
  rep.max_error = max_err;
  rep.ratio = rep.max_defect > 0 ? rep.max_error / rep.max_defect
                                 : std::numeric_limits<Real>::quiet_NaN();
  return rep;
}

DefectReport defect_of_root(int k, std::span<const Real> grid) {
  const RootForm f = root_approximant(k);
  const ProblemSpec gp = ProblemSpec::builtin("gp_vortex", 1);
  DefectReport rep;
  rep.order = k;
  rep.grid.assign(grid.begin(), grid.end());
  for (Real r : grid) {
    Real d = std::numeric_limits<Real>::quiet_NaN();
    Real v = 0, dv = 0, d2v = 0;
    if (r > 0) {
      f.derivatives(r, v, dv, d2v);
      d = std::abs(gp.native_residual(v, dv, d2v, r));
    }
    if (std::isfinite(d)) {
      rep.defect_values.push_back(d);
      rep.max_defect = std::max(rep.max_defect, d);
    } else {
      rep.defect_values.push_back(std::numeric_limits<Real>::quiet_NaN());
      ++rep.warnings;
    }
  }
  return rep;
}

}  // namespace ssfa
