/*
 * C interface to the factor-approximant ODE solver.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions that can fail return an ssfa_status; on failure the handle
 * outputs are untouched and ssfa_last_error() describes the problem for the
 * calling thread.
 */
#ifndef SSFA_H
#define SSFA_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssfa_status {
  SSFA_OK = 0,
  SSFA_ERR_INVALID_ARG = 1,
  SSFA_ERR_UNKNOWN_PROBLEM = 2,
  SSFA_ERR_ORDER_TOO_LOW = 3,
  SSFA_ERR_NO_SOLUTION = 4,
  SSFA_ERR_DEGENERATE_MOMENTS = 5,
  SSFA_ERR_BRANCH_CUT = 6,
  SSFA_ERR_CONJUGATION = 7,
  SSFA_ERR_UNDERDETERMINED = 8,
  SSFA_ERR_UNSUPPORTED = 9,
  SSFA_ERR_INTERNAL = 10
} ssfa_status;

typedef struct ssfa_problem ssfa_problem;
typedef struct ssfa_solution ssfa_solution;
typedef struct ssfa_report ssfa_report;

const char* ssfa_version(void);
const char* ssfa_status_name(ssfa_status status);
/* Thread-local message for the most recent failure. */
const char* ssfa_last_error(void);

/* --- problem catalog ----------------------------------------------------- */

int ssfa_problem_count(void);
const char* ssfa_problem_name(int index);

/* p0 is only read by the logistic problem; pass any value otherwise. */
ssfa_status ssfa_problem_open(const char* name, double epsilon, double p0,
                              ssfa_problem** out);
void ssfa_problem_close(ssfa_problem* p);

const char* ssfa_problem_label(const ssfa_problem* p);
int ssfa_problem_min_order(const ssfa_problem* p);
int ssfa_problem_has_exact(const ssfa_problem* p);
void ssfa_problem_domain(const ssfa_problem* p, double* lo, double* hi);
ssfa_status ssfa_problem_exact(const ssfa_problem* p, double t, double* y);

/* --- solving ------------------------------------------------------------- */

typedef struct ssfa_solve_options {
  double theta_lo;   /* shooting bracket override, 0 = problem default */
  double theta_hi;
  unsigned seed;     /* reserved for retry jitter; 0 = none */
} ssfa_solve_options;

ssfa_status ssfa_solve(const ssfa_problem* p, int order, const ssfa_solve_options* opts,
                       ssfa_solution** out);
void ssfa_solution_close(ssfa_solution* s);

ssfa_status ssfa_solution_eval(const ssfa_solution* s, double t, double* y);
ssfa_status ssfa_solution_eval_derivs(const ssfa_solution* s, double t, double* y,
                                      double* dy, double* d2y);

int ssfa_solution_factor_count(const ssfa_solution* s);
/* kind: 0 = power (1 + A w)^n, 1 = exponential exp(b w). */
ssfa_status ssfa_solution_factor(const ssfa_solution* s, int index, int* kind,
                                 double* a_re, double* a_im, double* n_re, double* n_im,
                                 double* rate);
/* scale*x^sigma prefactor; squared is 1 when factors take w = x^2. */
void ssfa_solution_prefactor(const ssfa_solution* s, double* scale, double* sigma,
                             int* squared);
double ssfa_solution_shooting(const ssfa_solution* s); /* NaN when none */
/* 0 when this order solved directly; otherwise the higher order whose
 * stabilized solution was returned because this order has no usable root. */
int ssfa_solution_stabilized_from(const ssfa_solution* s);
double ssfa_solution_moment_residual(const ssfa_solution* s);
double ssfa_solution_condition_residual(const ssfa_solution* s);
double ssfa_solution_reexpansion_error(const ssfa_solution* s);
int ssfa_solution_alternate_count(const ssfa_solution* s);
ssfa_status ssfa_solution_alternate(const ssfa_solution* s, int index, double* theta,
                                    double* metric);

/* --- diagnostics ---------------------------------------------------------- */

/* with_error != 0 also computes |y* - y| against the exact solution or the
 * numeric reference; fails with SSFA_ERR_UNSUPPORTED when neither exists.
 * ref_tolerance <= 0 selects the default 1e-10 reference verification. */
ssfa_status ssfa_defect_report(const ssfa_problem* p, const ssfa_solution* s,
                               int grid_points, int with_error, double ref_tolerance,
                               ssfa_report** out);
void ssfa_report_close(ssfa_report* r);

double ssfa_report_max_defect(const ssfa_report* r);
double ssfa_report_max_error(const ssfa_report* r);  /* NaN when absent */
double ssfa_report_error_defect_ratio(const ssfa_report* r);
int ssfa_report_point_count(const ssfa_report* r);
ssfa_status ssfa_report_point(const ssfa_report* r, int index, double* x, double* defect,
                              double* error);
int ssfa_report_warning_count(const ssfa_report* r);

/* --- root approximant baseline ------------------------------------------- */

ssfa_status ssfa_root_eval(int order, double r, double* value);
ssfa_status ssfa_root_max_defect(int order, int grid_points, double* out);

#ifdef __cplusplus
}
#endif

#endif /* SSFA_H */
