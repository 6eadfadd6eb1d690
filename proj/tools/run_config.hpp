#pragma once

#include <string>
#include <vector>

#include "json.hpp"

// Effective configuration of one CLI invocation. Round-trips through JSON so
// a run can be replayed from a --config file.
struct RunConfig {
  std::string command;  // solve | table | curve | list-problems
  std::string problem;
  std::string name;  // table preset
  std::vector<int> orders;
  std::vector<double> eps;
  double p0 = 2.0;
  std::string format = "text";  // text | csv | json
  std::string out;
  int grid_points = 2001;
  unsigned seed = 0;
  double tol = 0;  // 0 = defaults
  std::string metric = "defect";

  bool operator==(const RunConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"command", c.command}, {"problem", c.problem},   {"name", c.name},
                     {"orders", c.orders},   {"eps", c.eps},           {"p0", c.p0},
                     {"format", c.format},   {"out", c.out},           {"grid_points", c.grid_points},
                     {"seed", c.seed},       {"tol", c.tol},           {"metric", c.metric}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  c.command = j.value("command", "");
  c.problem = j.value("problem", "");
  c.name = j.value("name", "");
  c.orders = j.value("orders", std::vector<int>{});
  c.eps = j.value("eps", std::vector<double>{});
  c.p0 = j.value("p0", 2.0);
  c.format = j.value("format", "text");
  c.out = j.value("out", "");
  c.grid_points = j.value("grid_points", 2001);
  c.seed = j.value("seed", 0u);
  c.tol = j.value("tol", 0.0);
  c.metric = j.value("metric", "defect");
}
