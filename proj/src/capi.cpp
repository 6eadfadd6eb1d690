#include "ssfa/ssfa.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "ssfa/diagnostics.hpp"
#include "ssfa/problems.hpp"

namespace {

thread_local std::string g_last_error;

ssfa_status map_code(ssfa::Errc c) {
  using ssfa::Errc;
  switch (c) {
    case Errc::invalid_argument: return SSFA_ERR_INVALID_ARG;
    case Errc::unknown_problem: return SSFA_ERR_UNKNOWN_PROBLEM;
    case Errc::order_too_low: return SSFA_ERR_ORDER_TOO_LOW;
    case Errc::no_solution: return SSFA_ERR_NO_SOLUTION;
    case Errc::degenerate_moments: return SSFA_ERR_DEGENERATE_MOMENTS;
    case Errc::branch_cut: return SSFA_ERR_BRANCH_CUT;
    case Errc::conjugation_broken: return SSFA_ERR_CONJUGATION;
    case Errc::underdetermined: return SSFA_ERR_UNDERDETERMINED;
    case Errc::unsupported: return SSFA_ERR_UNSUPPORTED;
    case Errc::internal: return SSFA_ERR_INTERNAL;
  }
  return SSFA_ERR_INTERNAL;
}

template <typename Fn>
ssfa_status guarded(Fn&& fn) {
  try {
    fn();
    return SSFA_OK;
  } catch (const ssfa::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SSFA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SSFA_ERR_INTERNAL;
  }
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

struct ssfa_problem {
  ssfa::ProblemSpec spec;
};

struct ssfa_solution {
  ssfa::Solution sol;
};

struct ssfa_report {
  ssfa::DefectReport rep;
};

extern "C" {

const char* ssfa_version(void) { return "1.0.0"; }

const char* ssfa_status_name(ssfa_status status) {
  switch (status) {
    case SSFA_OK: return "ok";
    case SSFA_ERR_INVALID_ARG: return "invalid argument";
    case SSFA_ERR_UNKNOWN_PROBLEM: return "unknown problem";
    case SSFA_ERR_ORDER_TOO_LOW: return "order too low";
    case SSFA_ERR_NO_SOLUTION: return "no solution";
    case SSFA_ERR_DEGENERATE_MOMENTS: return "degenerate moments";
    case SSFA_ERR_BRANCH_CUT: return "branch cut violation";
    case SSFA_ERR_CONJUGATION: return "conjugation broken";
    case SSFA_ERR_UNDERDETERMINED: return "underdetermined system";
    case SSFA_ERR_UNSUPPORTED: return "unsupported";
    case SSFA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ssfa_last_error(void) { return g_last_error.c_str(); }

int ssfa_problem_count(void) {
  return static_cast<int>(ssfa::ProblemSpec::names().size());
}

const char* ssfa_problem_name(int index) {
  const auto& names = ssfa::ProblemSpec::names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  return names[static_cast<size_t>(index)].c_str();
}

ssfa_status ssfa_problem_open(const char* name, double epsilon, double p0,
                              ssfa_problem** out) {
  if (!name || !out) {
    g_last_error = "null argument";
    return SSFA_ERR_INVALID_ARG;
  }
  return guarded([&] {
    auto spec = ssfa::ProblemSpec::builtin(name, static_cast<ssfa::Real>(epsilon),
                                           static_cast<ssfa::Real>(p0));
    *out = new ssfa_problem{std::move(spec)};
  });
}

void ssfa_problem_close(ssfa_problem* p) { delete p; }

const char* ssfa_problem_label(const ssfa_problem* p) { return p->spec.label().c_str(); }
int ssfa_problem_min_order(const ssfa_problem* p) { return p->spec.min_order(); }
int ssfa_problem_has_exact(const ssfa_problem* p) { return p->spec.has_exact() ? 1 : 0; }

void ssfa_problem_domain(const ssfa_problem* p, double* lo, double* hi) {
  const auto [a, b] = p->spec.domain();
  if (lo) *lo = static_cast<double>(a);
  if (hi) *hi = static_cast<double>(b);
}

ssfa_status ssfa_problem_exact(const ssfa_problem* p, double t, double* y) {
  if (!p || !y) return SSFA_ERR_INVALID_ARG;
  return guarded([&] { *y = static_cast<double>(p->spec.exact(t).y); });
}

ssfa_status ssfa_solve(const ssfa_problem* p, int order, const ssfa_solve_options* opts,
                       ssfa_solution** out) {
  if (!p || !out) {
    g_last_error = "null argument";
    return SSFA_ERR_INVALID_ARG;
  }
  return guarded([&] {
    if (opts && opts->theta_lo != 0 && opts->theta_hi != 0) {
      ssfa::ConstrainedSolveSpec cs;
      cs.oracle = p->spec.oracle();
      cs.conditions = p->spec.conditions();
      cs.order = order;
      cs.bracket = {static_cast<ssfa::Real>(opts->theta_lo),
                    static_cast<ssfa::Real>(opts->theta_hi), 64};
      if (order < p->spec.min_order())
        ssfa::fail(ssfa::Errc::order_too_low, "order below the problem minimum");
      ssfa::SolveOutcome so = ssfa::solve_constrained(cs);
      ssfa::Solution sol{p->spec, std::move(so.form), so.theta, so.moment_residual,
                         so.condition_residual, std::move(so.alternates)};
      *out = new ssfa_solution{std::move(sol)};
      return;
    }
    *out = new ssfa_solution{ssfa::solve_problem(p->spec, order)};
  });
}

void ssfa_solution_close(ssfa_solution* s) { delete s; }

ssfa_status ssfa_solution_eval(const ssfa_solution* s, double t, double* y) {
  if (!s || !y) return SSFA_ERR_INVALID_ARG;
  return guarded([&] { *y = static_cast<double>(s->sol.value(t)); });
}

ssfa_status ssfa_solution_eval_derivs(const ssfa_solution* s, double t, double* y,
                                      double* dy, double* d2y) {
  if (!s) return SSFA_ERR_INVALID_ARG;
  return guarded([&] {
    const ssfa::NativeEval e = s->sol.eval(t);
    if (y) *y = static_cast<double>(e.y);
    if (dy) *dy = static_cast<double>(e.dy);
    if (d2y) *d2y = static_cast<double>(e.d2y);
  });
}

int ssfa_solution_factor_count(const ssfa_solution* s) {
  return static_cast<int>(s->sol.form.factors.size());
}

ssfa_status ssfa_solution_factor(const ssfa_solution* s, int index, int* kind, double* a_re,
                                 double* a_im, double* n_re, double* n_im, double* rate) {
  if (!s || index < 0 || index >= static_cast<int>(s->sol.form.factors.size())) {
    g_last_error = "factor index out of range";
    return SSFA_ERR_INVALID_ARG;
  }
  const ssfa::Factor& f = s->sol.form.factors[static_cast<size_t>(index)];
  if (kind) *kind = f.kind == ssfa::Factor::Kind::exponential ? 1 : 0;
  if (a_re) *a_re = static_cast<double>(f.A.real());
  if (a_im) *a_im = static_cast<double>(f.A.imag());
  if (n_re) *n_re = static_cast<double>(f.n.real());
  if (n_im) *n_im = static_cast<double>(f.n.imag());
  if (rate) *rate = static_cast<double>(f.b.real());
  return SSFA_OK;
}

void ssfa_solution_prefactor(const ssfa_solution* s, double* scale, double* sigma,
                             int* squared) {
  const ssfa::Prefactor& pre = s->sol.form.prefactor;
  if (scale) *scale = static_cast<double>(pre.scale.real());
  if (sigma)
    *sigma = pre.tag == ssfa::Prefactor::Tag::unit ? 0
                                                   : static_cast<double>(pre.zero_exponent);
  if (squared) *squared = s->sol.form.squared_argument ? 1 : 0;
}

double ssfa_solution_shooting(const ssfa_solution* s) {
  return static_cast<double>(s->sol.theta);
}

int ssfa_solution_stabilized_from(const ssfa_solution* s) { return s->sol.stabilized_from; }

double ssfa_solution_moment_residual(const ssfa_solution* s) {
  return static_cast<double>(s->sol.moment_residual);
}

double ssfa_solution_condition_residual(const ssfa_solution* s) {
  return static_cast<double>(s->sol.condition_residual);
}

double ssfa_solution_reexpansion_error(const ssfa_solution* s) {
  return static_cast<double>(s->sol.form.reexpansion_error);
}

int ssfa_solution_alternate_count(const ssfa_solution* s) {
  return static_cast<int>(s->sol.alternates.size());
}

ssfa_status ssfa_solution_alternate(const ssfa_solution* s, int index, double* theta,
                                    double* metric) {
  if (!s || index < 0 || index >= static_cast<int>(s->sol.alternates.size())) {
    g_last_error = "alternate index out of range";
    return SSFA_ERR_INVALID_ARG;
  }
  if (theta) *theta = static_cast<double>(s->sol.alternates[static_cast<size_t>(index)].theta);
  if (metric) *metric = static_cast<double>(s->sol.alternates[static_cast<size_t>(index)].metric);
  return SSFA_OK;
}

ssfa_status ssfa_defect_report(const ssfa_problem* p, const ssfa_solution* s, int grid_points,
                               int with_error, double ref_tolerance, ssfa_report** out) {
  if (!p || !s || !out) {
    g_last_error = "null argument";
    return SSFA_ERR_INVALID_ARG;
  }
  return guarded([&] {
    const int n = grid_points > 1 ? grid_points : 2001;
    const ssfa::Real rtol = ref_tolerance > 0 ? static_cast<ssfa::Real>(ref_tolerance) : 1e-10L;
    const std::vector<ssfa::Real> grid = ssfa::default_grid(p->spec, n);
    ssfa::DefectReport rep;
    if (with_error) {
      if (p->spec.has_exact()) {
        rep = ssfa::defect(s->sol, grid);
        rep.error_values.reserve(grid.size());
        ssfa::Real mx = 0;
        for (ssfa::Real t : grid) {
          const ssfa::Real e = std::abs(s->sol.value(t) - p->spec.exact(t).y);
          rep.error_values.push_back(e);
          if (std::isfinite(e)) mx = std::max(mx, e);
        }
        rep.max_error = mx;
        rep.ratio = rep.max_defect > 0 ? mx / rep.max_defect
                                       : std::numeric_limits<ssfa::Real>::quiet_NaN();
      } else {
        const ssfa::Reference ref = ssfa::reference_solution(p->spec, rtol, grid);
        rep = ssfa::error(s->sol, ref, grid);
      }
    } else {
      rep = ssfa::defect(s->sol, grid);
    }
    *out = new ssfa_report{std::move(rep)};
  });
}

void ssfa_report_close(ssfa_report* r) { delete r; }

double ssfa_report_max_defect(const ssfa_report* r) {
  return static_cast<double>(r->rep.max_defect);
}

double ssfa_report_max_error(const ssfa_report* r) {
  return r->rep.has_error() ? static_cast<double>(r->rep.max_error) : kNaN;
}

double ssfa_report_error_defect_ratio(const ssfa_report* r) {
  return r->rep.has_error() ? static_cast<double>(r->rep.ratio) : kNaN;
}

int ssfa_report_point_count(const ssfa_report* r) {
  return static_cast<int>(r->rep.grid.size());
}

ssfa_status ssfa_report_point(const ssfa_report* r, int index, double* x, double* defect,
                              double* error) {
  if (!r || index < 0 || index >= static_cast<int>(r->rep.grid.size())) {
    g_last_error = "report index out of range";
    return SSFA_ERR_INVALID_ARG;
  }
  const size_t i = static_cast<size_t>(index);
  if (x) *x = static_cast<double>(r->rep.grid[i]);
  if (defect) *defect = static_cast<double>(r->rep.defect_values[i]);
  if (error)
    *error = r->rep.has_error() ? static_cast<double>(r->rep.error_values[i]) : kNaN;
  return SSFA_OK;
}

int ssfa_report_warning_count(const ssfa_report* r) { return r->rep.warnings; }

ssfa_status ssfa_root_eval(int order, double r, double* value) {
  if (!value) return SSFA_ERR_INVALID_ARG;
  return guarded([&] {
    *value = static_cast<double>(ssfa::root_approximant(order).value(static_cast<ssfa::Real>(r)));
  });
}

ssfa_status ssfa_root_max_defect(int order, int grid_points, double* out) {
  if (!out) return SSFA_ERR_INVALID_ARG;
  return guarded([&] {
    const int n = grid_points > 1 ? grid_points : 2001;
    const ssfa::ProblemSpec gp = ssfa::ProblemSpec::builtin("gp_vortex", 1);
    const std::vector<ssfa::Real> grid = ssfa::default_grid(gp, n);
    *out = static_cast<double>(ssfa::defect_of_root(order, grid).max_defect);
  });
}

}  // extern "C"
