// Command-line front end: solves the benchmark problems, reproduces the
// defect/error tables and the per-point curve data, and dumps approximant
// parameters. Talks to the solver only through the C API.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "ssfa/ssfa.h"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

struct ProblemCloser {
  void operator()(ssfa_problem* p) const { ssfa_problem_close(p); }
};
struct SolutionCloser {
  void operator()(ssfa_solution* s) const { ssfa_solution_close(s); }
};
struct ReportCloser {
  void operator()(ssfa_report* r) const { ssfa_report_close(r); }
};
using ProblemPtr = std::unique_ptr<ssfa_problem, ProblemCloser>;
using SolutionPtr = std::unique_ptr<ssfa_solution, SolutionCloser>;
using ReportPtr = std::unique_ptr<ssfa_report, ReportCloser>;

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string complex_text(double re, double im) {
  if (im == 0) return fmt6(re);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s%s%si", fmt6(re).c_str(), im < 0 ? " - " : " + ",
                fmt6(std::abs(im)).c_str());
  return buf;
}

json error_record(const std::string& where, ssfa_status st) {
  return json{{"error", ssfa_status_name(st)},
              {"detail", ssfa_last_error()},
              {"context", where}};
}

// One solved table/curve cell.
struct Cell {
  bool ok = false;
  double D = NAN, Delta = NAN, delta = NAN;
  int warnings = 0;
  int stabilized_from = 0;
  double theta = NAN;
  std::string error;
  std::vector<double> xs, defects, errors;  // curves only
};

Cell compute_cell(const std::string& problem, double eps, double p0, int k, bool with_error,
                  const RunConfig& cfg, bool keep_points) {
  Cell cell;
  ssfa_problem* praw = nullptr;
  ssfa_status st = ssfa_problem_open(problem.c_str(), eps, p0, &praw);
  if (st != SSFA_OK) {
    cell.error = std::string(ssfa_status_name(st)) + ": " + ssfa_last_error();
    return cell;
  }
  ProblemPtr p(praw);
  ssfa_solve_options opts{};
  opts.seed = cfg.seed;
  ssfa_solution* sraw = nullptr;
  st = ssfa_solve(p.get(), k, &opts, &sraw);
  if (st != SSFA_OK) {
    cell.error = std::string(ssfa_status_name(st)) + ": " + ssfa_last_error();
    return cell;
  }
  SolutionPtr s(sraw);
  cell.theta = ssfa_solution_shooting(s.get());
  cell.stabilized_from = ssfa_solution_stabilized_from(s.get());
  ssfa_report* rraw = nullptr;
  st = ssfa_defect_report(p.get(), s.get(), cfg.grid_points, with_error ? 1 : 0, cfg.tol, &rraw);
  if (st != SSFA_OK) {
    cell.error = std::string(ssfa_status_name(st)) + ": " + ssfa_last_error();
    return cell;
  }
  ReportPtr r(rraw);
  cell.ok = true;
  cell.D = ssfa_report_max_defect(r.get());
  cell.Delta = ssfa_report_max_error(r.get());
  cell.delta = ssfa_report_error_defect_ratio(r.get());
  cell.warnings = ssfa_report_warning_count(r.get());
  if (keep_points) {
    const int n = ssfa_report_point_count(r.get());
    cell.xs.resize(static_cast<size_t>(n));
    cell.defects.resize(static_cast<size_t>(n));
    cell.errors.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      ssfa_report_point(r.get(), i, &cell.xs[static_cast<size_t>(i)],
                        &cell.defects[static_cast<size_t>(i)],
                        &cell.errors[static_cast<size_t>(i)]);
  }
  return cell;
}

std::ostream& open_out(const RunConfig& cfg, std::ofstream& file) {
  if (cfg.out.empty()) return std::cout;
  file.open(cfg.out, std::ios::binary | std::ios::trunc);
  if (!file) {
    std::cerr << "cannot open output file: " << cfg.out << "\n";
    std::exit(kExitUsage);
  }
  return file;
}

int cmd_list() {
  const int n = ssfa_problem_count();
  for (int i = 0; i < n; ++i) {
    const char* name = ssfa_problem_name(i);
    ProblemPtr p;
    {
      ssfa_problem* raw = nullptr;
      if (ssfa_problem_open(name, 1.0, 2.0, &raw) == SSFA_OK) p.reset(raw);
    }
    std::printf("%-18s %s\n", name, p ? ssfa_problem_label(p.get()) : "");
  }
  return 0;
}

int cmd_solve(const RunConfig& cfg) {
  const double eps = cfg.eps.empty() ? 1.0 : cfg.eps.front();
  if (cfg.orders.size() != 1) {
    std::cerr << "solve needs exactly one --order\n";
    return kExitUsage;
  }
  const int k = cfg.orders.front();

  ssfa_problem* praw = nullptr;
  ssfa_status st = ssfa_problem_open(cfg.problem.c_str(), eps, cfg.p0, &praw);
  if (st != SSFA_OK) {
    std::cerr << error_record("open " + cfg.problem, st).dump() << "\n";
    return st == SSFA_ERR_UNKNOWN_PROBLEM || st == SSFA_ERR_INVALID_ARG ? kExitUsage : kExitSolver;
  }
  ProblemPtr p(praw);
  ssfa_solve_options opts{};
  opts.seed = cfg.seed;
  ssfa_solution* sraw = nullptr;
  st = ssfa_solve(p.get(), k, &opts, &sraw);
  if (st != SSFA_OK) {
    std::cerr << error_record("solve " + cfg.problem + " order " + std::to_string(k), st).dump()
              << "\n";
    return kExitSolver;
  }
  SolutionPtr s(sraw);

  double scale = 0, sigma = 0;
  int squared = 0;
  ssfa_solution_prefactor(s.get(), &scale, &sigma, &squared);
  const int nf = ssfa_solution_factor_count(s.get());

  ReportPtr rep;
  {
    ssfa_report* rraw = nullptr;
    if (ssfa_defect_report(p.get(), s.get(), cfg.grid_points, 0, cfg.tol, &rraw) == SSFA_OK)
      rep.reset(rraw);
  }

  json jfactors = json::array();
  for (int i = 0; i < nf; ++i) {
    int kind = 0;
    double ar = 0, ai = 0, nr = 0, ni = 0, rate = 0;
    ssfa_solution_factor(s.get(), i, &kind, &ar, &ai, &nr, &ni, &rate);
    if (kind == 1)
      jfactors.push_back({{"kind", "exponential"}, {"rate", rate}});
    else
      jfactors.push_back(
          {{"kind", "power"}, {"A_re", ar}, {"A_im", ai}, {"n_re", nr}, {"n_im", ni}});
  }
  json jalts = json::array();
  for (int i = 0; i < ssfa_solution_alternate_count(s.get()); ++i) {
    double th = 0, metric = 0;
    ssfa_solution_alternate(s.get(), i, &th, &metric);
    jalts.push_back({{"theta", th}, {"metric", metric}});
  }
  json doc{
      {"problem", cfg.problem},
      {"epsilon", eps},
      {"p0", cfg.p0},
      {"order", k},
      {"prefactor",
       {{"scale", scale}, {"zero_exponent", sigma}, {"squared_argument", squared != 0}}},
      {"factors", jfactors},
      {"shooting", ssfa_solution_shooting(s.get())},
      {"moment_residual", ssfa_solution_moment_residual(s.get())},
      {"condition_residual", ssfa_solution_condition_residual(s.get())},
      {"reexpansion_error", ssfa_solution_reexpansion_error(s.get())},
      {"stabilized_from", ssfa_solution_stabilized_from(s.get())},
      {"alternates", jalts}};
  if (rep) {
    doc["max_defect"] = ssfa_report_max_defect(rep.get());
    doc["excluded_points"] = ssfa_report_warning_count(rep.get());
  }

  std::ofstream file;
  std::ostream& os = open_out(cfg, file);
  if (cfg.format == "json") {
    os << doc.dump(2) << "\n";
  } else if (cfg.format == "csv") {
    os << "index,kind,A_re,A_im,n_re,n_im,rate\n";
    for (int i = 0; i < nf; ++i) {
      int kind = 0;
      double ar = 0, ai = 0, nr = 0, ni = 0, rate = 0;
      ssfa_solution_factor(s.get(), i, &kind, &ar, &ai, &nr, &ni, &rate);
      os << i << "," << (kind == 1 ? "exponential" : "power") << "," << fmt17(ar) << ","
         << fmt17(ai) << "," << fmt17(nr) << "," << fmt17(ni) << "," << fmt17(rate) << "\n";
    }
  } else {
    os << cfg.problem << " order " << k;
    if (!std::isnan(eps)) os << ", eps = " << fmt6(eps);
    if (cfg.problem == "logistic") os << ", p0 = " << fmt6(cfg.p0);
    os << "\n";
    const double theta = ssfa_solution_shooting(s.get());
    if (!std::isnan(theta)) os << "  shooting parameter  " << fmt6(theta) << "\n";
    os << "  prefactor           " << fmt6(scale) << (sigma == 1 ? " * x" : "")
       << (squared ? "   (factors in x^2)" : "") << "\n";
    for (int i = 0; i < nf; ++i) {
      int kind = 0;
      double ar = 0, ai = 0, nr = 0, ni = 0, rate = 0;
      ssfa_solution_factor(s.get(), i, &kind, &ar, &ai, &nr, &ni, &rate);
      if (kind == 1)
        os << "  factor " << i + 1 << "   exp(" << fmt6(rate) << " x)\n";
      else
        os << "  factor " << i + 1 << "   A = " << complex_text(ar, ai)
           << "   n = " << complex_text(nr, ni) << "\n";
    }
    os << "  moment residual     " << fmt6(ssfa_solution_moment_residual(s.get())) << "\n";
    os << "  condition residual  " << fmt6(ssfa_solution_condition_residual(s.get())) << "\n";
    os << "  re-expansion error  " << fmt6(ssfa_solution_reexpansion_error(s.get())) << "\n";
    if (rep) os << "  max defect D        " << fmt6(ssfa_report_max_defect(rep.get())) << "\n";
    if (ssfa_solution_stabilized_from(s.get()) > 0)
      os << "  note: no usable root at this order; stabilized solution of order "
         << ssfa_solution_stabilized_from(s.get()) << "\n";
    const int nalt = ssfa_solution_alternate_count(s.get());
    if (nalt > 1) {
      os << "  alternates (theta : coarse defect)\n";
      for (int i = 0; i < nalt; ++i) {
        double th = 0, metric = 0;
        ssfa_solution_alternate(s.get(), i, &th, &metric);
        os << "    " << fmt6(th) << " : " << fmt6(metric) << "\n";
      }
    }
  }
  return 0;
}

struct TablePlan {
  std::string problem;
  std::vector<double> eps;
  std::vector<int> orders;
  bool with_error = false;
  bool root_column = false;  // table3
};

std::optional<TablePlan> preset_plan(const RunConfig& cfg) {
  TablePlan t;
  if (cfg.name == "table1") {
    t.problem = "boundary_layer";
    t.eps = {0.1};
    t.orders = {8, 9, 10, 11, 12, 13, 14, 15, 16, 17};
    t.with_error = true;
  } else if (cfg.name == "table2") {
    t.problem = "boundary_layer";
    t.eps = {1, 10};
    t.orders = {4, 5, 6, 7};
    t.with_error = true;
  } else if (cfg.name == "table3") {
    t.problem = "gp_vortex";
    t.eps = {1};
    t.orders = {2, 3, 4, 5, 6};
    t.root_column = true;
  } else if (cfg.name == "table4") {
    t.problem = "stokes_oseen";
    t.eps = {0.1, 1, 10};
    t.orders = {4, 5, 6, 7, 8, 9, 10, 11, 12};
  } else if (cfg.name == "table5") {
    // only odd orders are attempted for the strongly singular problem
    t.problem = "strongly_singular";
    t.eps = {0.1, 1, 10};
    t.orders = {3, 5, 7, 9, 11};
  } else {
    return std::nullopt;
  }
  return t;
}

int cmd_table(RunConfig cfg) {
  TablePlan plan;
  if (!cfg.name.empty()) {
    auto p = preset_plan(cfg);
    if (!p) {
      std::cerr << "unknown table name '" << cfg.name << "' (table1..table5)\n";
      return kExitUsage;
    }
    plan = *p;
  } else {
    if (cfg.problem.empty() || cfg.orders.empty()) {
      std::cerr << "table needs --name or both --problem and --orders\n";
      return kExitUsage;
    }
    plan.problem = cfg.problem;
    plan.orders = cfg.orders;
    for (int k : plan.orders)
      if (k < 1) {
        std::cerr << "orders must be positive\n";
        return kExitUsage;
      }
    plan.eps = cfg.eps.empty() ? std::vector<double>{1.0} : cfg.eps;
    // single-parameter sweeps include the error columns when a reference or
    // closed form exists
    if (plan.eps.size() == 1) {
      ssfa_problem* raw = nullptr;
      if (ssfa_problem_open(plan.problem.c_str(), plan.eps[0], cfg.p0, &raw) == SSFA_OK) {
        ProblemPtr p(raw);
        plan.with_error =
            ssfa_problem_has_exact(p.get()) != 0 || plan.problem == "boundary_layer";
      }
    }
  }

  // Cells run concurrently; assembly stays ordered.
  struct Key {
    int k;
    double eps;
  };
  std::vector<Key> keys;
  for (int k : plan.orders)
    for (double e : plan.eps) keys.push_back({k, e});
  std::vector<std::future<Cell>> futs;
  futs.reserve(keys.size());
  for (const Key& key : keys)
    futs.push_back(std::async(std::launch::async, [&plan, &cfg, key] {
      return compute_cell(plan.problem, key.eps, cfg.p0, key.k, plan.with_error, cfg, false);
    }));
  std::vector<Cell> cells;
  cells.reserve(keys.size());
  for (auto& f : futs) cells.push_back(f.get());

  std::vector<double> root_defects(plan.orders.size(), NAN);
  if (plan.root_column) {
    for (size_t i = 0; i < plan.orders.size(); ++i) {
      double d = NAN;
      if (ssfa_root_max_defect(plan.orders[i], cfg.grid_points, &d) == SSFA_OK)
        root_defects[i] = d;
    }
  }

  auto cell_at = [&](size_t oi, size_t ei) -> const Cell& {
    return cells[oi * plan.eps.size() + ei];
  };

  std::ofstream file;
  std::ostream& os = open_out(cfg, file);

  if (cfg.format == "json") {
    json rows = json::array();
    for (size_t oi = 0; oi < plan.orders.size(); ++oi) {
      json row{{"k", plan.orders[oi]}};
      json jcells = json::array();
      for (size_t ei = 0; ei < plan.eps.size(); ++ei) {
        const Cell& c = cell_at(oi, ei);
        json jc{{"eps", plan.eps[ei]}};
        if (c.ok) {
          jc["D"] = c.D;
          if (plan.with_error && !std::isnan(c.Delta)) {
            jc["Delta"] = c.Delta;
            jc["delta"] = c.delta;
          }
          jc["theta"] = c.theta;
          jc["warnings"] = c.warnings;
          if (c.stabilized_from > 0) jc["stabilized_from"] = c.stabilized_from;
        } else {
          jc["D"] = nullptr;
          jc["error"] = c.error;
        }
        jcells.push_back(std::move(jc));
      }
      row["cells"] = std::move(jcells);
      if (plan.root_column)
        row["D_root"] = std::isnan(root_defects[oi]) ? json(nullptr) : json(root_defects[oi]);
      rows.push_back(std::move(row));
    }
    json doc{{"command", "table"}, {"problem", plan.problem}, {"config", cfg}, {"rows", rows}};
    if (!cfg.name.empty()) doc["name"] = cfg.name;
    os << doc.dump(2) << "\n";
    return 0;
  }

  const bool csv = cfg.format == "csv";
  auto num = [&](double v) { return csv ? fmt17(v) : fmt6(v); };
  auto blank = [&]() { return csv ? std::string() : std::string("n/a"); };

  std::vector<std::string> header{"k"};
  if (plan.root_column) {
    header = {"k", "D_factor", "D_root"};
  } else if (plan.with_error && plan.eps.size() == 1) {
    header.insert(header.end(), {"D", "Delta", "delta"});
  } else if (plan.with_error) {
    for (double e : plan.eps) {
      header.push_back("D_eps" + fmt6(e));
      header.push_back("Delta_eps" + fmt6(e));
      header.push_back("delta_eps" + fmt6(e));
    }
  } else {
    for (double e : plan.eps) header.push_back("D_eps" + fmt6(e));
  }

  std::vector<std::vector<std::string>> body;
  for (size_t oi = 0; oi < plan.orders.size(); ++oi) {
    std::vector<std::string> row{std::to_string(plan.orders[oi])};
    if (plan.root_column) {
      const Cell& c = cell_at(oi, 0);
      row.push_back(c.ok ? num(c.D) : blank());
      row.push_back(std::isnan(root_defects[oi]) ? blank() : num(root_defects[oi]));
    } else {
      for (size_t ei = 0; ei < plan.eps.size(); ++ei) {
        const Cell& c = cell_at(oi, ei);
        row.push_back(c.ok ? num(c.D) : blank());
        if (plan.with_error) {
          row.push_back(c.ok && !std::isnan(c.Delta) ? num(c.Delta) : blank());
          row.push_back(c.ok && !std::isnan(c.delta) ? num(c.delta) : blank());
        }
      }
    }
    body.push_back(std::move(row));
  }

  if (csv) {
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : body) {
      for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << "\n";
    }
  } else {
    std::vector<size_t> width(header.size());
    for (size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& row : body)
      for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    auto print_row = [&](const std::vector<std::string>& row) {
      for (size_t i = 0; i < row.size(); ++i)
        os << (i ? "  " : "") << std::string(width[i] - row[i].size(), ' ') << row[i];
      os << "\n";
    };
    print_row(header);
    for (const auto& row : body) print_row(row);
    for (size_t oi = 0; oi < plan.orders.size(); ++oi)
      for (size_t ei = 0; ei < plan.eps.size(); ++ei) {
        const Cell& c = cell_at(oi, ei);
        if (!c.ok)
          os << "# k=" << plan.orders[oi] << " eps=" << fmt6(plan.eps[ei]) << ": " << c.error
             << "\n";
        else if (c.stabilized_from > 0)
          os << "# k=" << plan.orders[oi] << " eps=" << fmt6(plan.eps[ei])
             << ": stabilized solution of order " << c.stabilized_from << "\n";
      }
  }
  return 0;
}

int cmd_curve(const RunConfig& cfg) {
  if (cfg.problem.empty() || cfg.orders.empty()) {
    std::cerr << "curve needs --problem and a non-empty --orders list\n";
    return kExitUsage;
  }
  for (int k : cfg.orders)
    if (k < 1) {
      std::cerr << "orders must be positive\n";
      return kExitUsage;
    }
  if (cfg.metric != "defect" && cfg.metric != "error") {
    std::cerr << "--metric must be defect or error\n";
    return kExitUsage;
  }
  const double eps = cfg.eps.empty() ? 1.0 : cfg.eps.front();
  const bool with_error = cfg.metric == "error";

  std::vector<std::future<Cell>> futs;
  for (int k : cfg.orders)
    futs.push_back(std::async(std::launch::async, [&cfg, eps, k, with_error] {
      return compute_cell(cfg.problem, eps, cfg.p0, k, with_error, cfg, true);
    }));
  std::vector<Cell> cells;
  for (auto& f : futs) cells.push_back(f.get());

  const Cell* ref = nullptr;
  for (const Cell& c : cells)
    if (c.ok && !ref) ref = &c;
  if (!ref) {
    std::cerr << "all orders failed";
    for (const Cell& c : cells)
      if (!c.error.empty()) std::cerr << "; " << c.error;
    std::cerr << "\n";
    return kExitSolver;
  }

  std::ofstream file;
  std::ostream& os = open_out(cfg, file);
  if (cfg.format == "json") {
    json doc{{"command", "curve"}, {"problem", cfg.problem}, {"eps", eps}, {"config", cfg}};
    json cols = json::array();
    for (size_t ci = 0; ci < cells.size(); ++ci) {
      json col{{"k", cfg.orders[ci]}};
      if (cells[ci].ok)
        col["values"] = with_error ? cells[ci].errors : cells[ci].defects;
      else
        col["error"] = cells[ci].error;
      cols.push_back(std::move(col));
    }
    doc["x"] = json(ref->xs);
    doc["columns"] = cols;
    os << doc.dump(2) << "\n";
    return 0;
  }

  os << "x";
  for (size_t ci = 0; ci < cells.size(); ++ci)
    os << "," << (with_error ? "error_k" : "defect_k") << cfg.orders[ci];
  os << "\n";
  for (size_t i = 0; i < ref->xs.size(); ++i) {
    os << fmt17(ref->xs[i]);
    for (const Cell& c : cells) {
      os << ",";
      if (!c.ok || i >= c.xs.size()) continue;
      const double v = with_error ? c.errors[i] : c.defects[i];
      if (!std::isnan(v)) os << fmt17(v);
    }
    os << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // --config provides the base configuration; explicit flags override it.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        std::cerr << "cannot read config file: " << argv[i + 1] << "\n";
        return kExitUsage;
      }
      try {
        json j;
        in >> j;
        cfg = j.get<RunConfig>();
      } catch (const std::exception& e) {
        std::cerr << "bad config file: " << e.what() << "\n";
        return kExitUsage;
      }
    }
  }

  CLI::App app{"self-similar factor approximants for ODE initial- and boundary-value problems"};
  app.set_version_flag("--version", std::string(ssfa_version()));
  std::string config_path;

  int order = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", cfg.problem, "problem name (see list-problems)");
    sub->add_option("--eps", cfg.eps, "equation parameter epsilon (list for sweeps)")
        ->delimiter(',');
    sub->add_option("--p0", cfg.p0, "initial population for the logistic problem");
    sub->add_option("--format", cfg.format, "text, csv or json")
        ->check(CLI::IsMember({"text", "csv", "json"}));
    sub->add_option("--out", cfg.out, "write output to this file instead of stdout");
    sub->add_option("--grid-points", cfg.grid_points, "diagnostic grid size (default 2001)");
    sub->add_option("--seed", cfg.seed, "seed for multistart retry jitter");
    sub->add_option("--tol", cfg.tol, "reference-solution verification tolerance override");
    sub->add_option("--config", config_path, "JSON run configuration (flags override it)");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one problem and dump the approximant");
  add_common(solve);
  solve->add_option("--order", order, "approximant order k");

  CLI::App* table =
      app.add_subcommand("table", "defect/error table. CSV columns: k then D (and Delta, delta "
                                  "where a reference exists) per epsilon; table3 emits "
                                  "k,D_factor,D_root; absent cells are empty");
  add_common(table);
  table->add_option("--name", cfg.name, "preset: table1, table2, table3, table4, table5");
  table->add_option("--orders", cfg.orders, "orders for an explicit sweep")->delimiter(',');

  CLI::App* curve = app.add_subcommand(
      "curve", "per-point data for plotting. CSV columns: x, then defect_k<K> or error_k<K>");
  add_common(curve);
  curve->add_option("--orders", cfg.orders, "orders, e.g. 4,5,6,7")->delimiter(',');
  curve->add_option("--metric", cfg.metric, "defect or error");

  app.add_subcommand("list-problems", "print the problem catalog");
  app.add_option("--config", config_path, "JSON run configuration");

  app.require_subcommand(0, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (solve->parsed()) {
      cfg.command = "solve";
      if (solve->count("--order")) cfg.orders = {order};
      if (cfg.problem.empty()) {
        std::cerr << "solve needs --problem\n";
        return kExitUsage;
      }
      return cmd_solve(cfg);
    }
    if (table->parsed()) {
      cfg.command = "table";
      return cmd_table(cfg);
    }
    if (curve->parsed()) {
      cfg.command = "curve";
      return cmd_curve(cfg);
    }
    if (app.get_subcommand_ptr("list-problems")->parsed()) {
      cfg.command = "list-problems";
      return cmd_list();
    }
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << "\n";
    return kExitSolver;
  }
  std::cout << app.help();
  return kExitUsage;
}
