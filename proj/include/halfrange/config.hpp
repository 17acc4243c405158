#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "halfrange/admissibility.hpp"
#include "halfrange/coefficients.hpp"
#include "halfrange/errors.hpp"

#include <json.hpp>

namespace halfrange {

// Boundary-value profile for one side of the slab.
struct BoundaryProfile {
  std::string profile = "zero";  // zero|indicator|gaussian_bump|eigenmode|csv
  double lo = 0, hi = 0;         // indicator support
  double value = 1.0;            // indicator height
  double center = 0, width = 1, amplitude = 1;  // gaussian bump
  int index = 0;                 // eigenmode number within the family
  std::string path;              // per-node CSV
};

struct RunConfig {
  // problem
  std::string preset;  // signum_power|fokker_planck|power_with_r|custom_sampled
  double alpha = 0.0, k = 0.0;                      // signum_power
  std::string b_form = "quadratic_abs";             // fokker_planck
  double b_a = 1.0;
  double alpha_plus = 1.0, alpha_minus = 1.0;       // power_with_r
  std::string r_form = "constant";
  double r_c = 1.0, r_p = 0.2;
  std::string coefficients_csv;                     // custom_sampled

  // discretization
  double M = 4.0;
  int n = 128;
  double grading = 1.0;

  // slab
  bool halfspace = false;
  double tau = 1.0;

  // boundary data
  BoundaryProfile boundary_plus, boundary_minus;

  // forcing
  std::string forcing_type = "none";  // none|constant|csv
  double forcing_value = 0.0;
  std::string forcing_csv;
  std::string tail_kind = "zero";  // zero|exponential|constant
  double tail_rate = 0.0;

  // outputs
  std::string solution_csv = "solution.csv";
  std::string report_json = "report.json";
  std::vector<double> x_samples;  // explicit positions; wins over x_count
  int x_count = 41;
  double x_max = -1.0;  // <0 means: tau on the slab, 10/min|lambda| on the half-space

  // tolerances and knobs
  double tol_boundary = 1e-8;
  double tol_oracle = 2e-2;
  int oracle_nx = 400;
  AdmissibilityOptions admissibility;
  std::string cache_dir;
  bool neumann_check = false;
};

namespace cfg {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ConfigError("section '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("unknown key '" + it.key() + "' in section '" + where +
                        "'");
  }
}

inline double num(const json& j, const char* key, double defv) {
  if (!j.contains(key)) return defv;
  if (!j[key].is_number())
    throw ConfigError(std::string("key '") + key + "' must be a number");
  return j[key].get<double>();
}

inline int integer(const json& j, const char* key, int defv) {
  if (!j.contains(key)) return defv;
  if (!j[key].is_number_integer())
    throw ConfigError(std::string("key '") + key + "' must be an integer");
  return j[key].get<int>();
}

inline std::string str(const json& j, const char* key,
                       const std::string& defv) {
  if (!j.contains(key)) return defv;
  if (!j[key].is_string())
    throw ConfigError(std::string("key '") + key + "' must be a string");
  return j[key].get<std::string>();
}

inline bool flag(const json& j, const char* key, bool defv) {
  if (!j.contains(key)) return defv;
  if (!j[key].is_boolean())
    throw ConfigError(std::string("key '") + key + "' must be a boolean");
  return j[key].get<bool>();
}

inline BoundaryProfile parse_profile(const json& j, const std::string& where) {
  check_keys(j, where,
             {"profile", "lo", "hi", "value", "center", "width", "amplitude",
              "index", "path"});
  BoundaryProfile p;
  p.profile = str(j, "profile", "zero");
  if (p.profile != "zero" && p.profile != "indicator" &&
      p.profile != "gaussian_bump" && p.profile != "eigenmode" &&
      p.profile != "csv")
    throw ConfigError("unknown boundary profile '" + p.profile + "' in '" +
                      where + "'");
  p.lo = num(j, "lo", 0.0);
  p.hi = num(j, "hi", 0.0);
  p.value = num(j, "value", 1.0);
  p.center = num(j, "center", 0.0);
  p.width = num(j, "width", 1.0);
  p.amplitude = num(j, "amplitude", 1.0);
  p.index = integer(j, "index", 0);
  p.path = str(j, "path", "");
  if (p.profile == "csv" && p.path.empty())
    throw ConfigError("boundary profile 'csv' in '" + where +
                      "' needs a 'path'");
  if (p.profile == "indicator" && !(p.hi > p.lo))
    throw ConfigError("indicator profile in '" + where + "' needs hi > lo");
  if (p.profile == "gaussian_bump" && !(p.width > 0))
    throw ConfigError("gaussian_bump profile in '" + where +
                      "' needs width > 0");
  return p;
}

}  // namespace cfg

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config '" + path + "': " + e.what());
  }

  cfg::check_keys(j, "(top level)",
                  {"problem", "discretization", "slab", "boundary", "forcing",
                   "output", "tolerances", "oracle", "admissibility",
                   "cache_dir", "neumann_check"});
  RunConfig c;

  if (!j.contains("problem")) throw ConfigError("config needs a 'problem' section");
  {
    const auto& p = j["problem"];
    cfg::check_keys(p, "problem",
                    {"preset", "alpha", "k", "b_form", "b_a", "alpha_plus",
                     "alpha_minus", "r_form", "r_c", "r_p", "csv"});
    c.preset = cfg::str(p, "preset", "");
    if (c.preset != "signum_power" && c.preset != "fokker_planck" &&
        c.preset != "power_with_r" && c.preset != "custom_sampled")
      throw ConfigError("unknown preset '" + c.preset + "'");
    c.alpha = cfg::num(p, "alpha", 0.0);
    c.k = cfg::num(p, "k", 0.0);
    c.b_form = cfg::str(p, "b_form", "quadratic_abs");
    c.b_a = cfg::num(p, "b_a", 1.0);
    c.alpha_plus = cfg::num(p, "alpha_plus", 1.0);
    c.alpha_minus = cfg::num(p, "alpha_minus", 1.0);
    c.r_form = cfg::str(p, "r_form", "constant");
    c.r_c = cfg::num(p, "r_c", 1.0);
    c.r_p = cfg::num(p, "r_p", 0.2);
    c.coefficients_csv = cfg::str(p, "csv", "");
    if (c.preset == "custom_sampled" && c.coefficients_csv.empty())
      throw ConfigError("preset 'custom_sampled' needs problem.csv");
  }

  if (j.contains("discretization")) {
    const auto& d = j["discretization"];
    cfg::check_keys(d, "discretization", {"M", "n", "grading"});
    c.M = cfg::num(d, "M", c.M);
    c.n = cfg::integer(d, "n", c.n);
    c.grading = cfg::num(d, "grading", c.grading);
  }
  if (!(c.M > 0)) throw ConfigError("discretization.M must be positive");
  if (c.n < 2) throw ConfigError("discretization.n must be at least 2");

  if (!j.contains("slab")) throw ConfigError("config needs a 'slab' section");
  {
    const auto& s = j["slab"];
    cfg::check_keys(s, "slab", {"tau", "halfspace"});
    c.halfspace = cfg::flag(s, "halfspace", false);
    const bool has_tau = s.contains("tau");
    if (c.halfspace == has_tau)
      throw ConfigError("slab needs exactly one of 'tau' or 'halfspace': true");
    if (has_tau) {
      c.tau = cfg::num(s, "tau", 1.0);
      if (!(c.tau > 0) || std::isinf(c.tau))
        throw ConfigError("slab.tau must be finite and positive");
    }
  }

  if (j.contains("boundary")) {
    const auto& b = j["boundary"];
    cfg::check_keys(b, "boundary", {"plus", "minus"});
    if (b.contains("plus"))
      c.boundary_plus = cfg::parse_profile(b["plus"], "boundary.plus");
    if (b.contains("minus"))
      c.boundary_minus = cfg::parse_profile(b["minus"], "boundary.minus");
  }
  if (c.halfspace && c.boundary_minus.profile != "zero")
    throw ConfigError("half-space runs take incoming data on the plus side only");

  if (j.contains("forcing")) {
    const auto& f = j["forcing"];
    cfg::check_keys(f, "forcing", {"type", "value", "path", "tail", "rate"});
    c.forcing_type = cfg::str(f, "type", "none");
    if (c.forcing_type != "none" && c.forcing_type != "constant" &&
        c.forcing_type != "csv")
      throw ConfigError("unknown forcing type '" + c.forcing_type + "'");
    c.forcing_value = cfg::num(f, "value", 0.0);
    c.forcing_csv = cfg::str(f, "path", "");
    c.tail_kind = cfg::str(f, "tail", "zero");
    if (c.tail_kind != "zero" && c.tail_kind != "exponential" &&
        c.tail_kind != "constant")
      throw ConfigError("unknown forcing tail '" + c.tail_kind + "'");
    c.tail_rate = cfg::num(f, "rate", 0.0);
    if (c.forcing_type == "csv" && c.forcing_csv.empty())
      throw ConfigError("forcing type 'csv' needs a 'path'");
  }

  if (j.contains("output")) {
    const auto& o = j["output"];
    cfg::check_keys(o, "output",
                    {"solution_csv", "report_json", "x_samples", "x_count",
                     "x_max"});
    c.solution_csv = cfg::str(o, "solution_csv", c.solution_csv);
    c.report_json = cfg::str(o, "report_json", c.report_json);
    if (o.contains("x_samples")) {
      if (!o["x_samples"].is_array())
        throw ConfigError("output.x_samples must be an array of numbers");
      for (const auto& v : o["x_samples"]) {
        if (!v.is_number())
          throw ConfigError("output.x_samples must be an array of numbers");
        c.x_samples.push_back(v.get<double>());
      }
    }
    c.x_count = cfg::integer(o, "x_count", c.x_count);
    c.x_max = cfg::num(o, "x_max", c.x_max);
    if (c.x_count < 2) throw ConfigError("output.x_count must be at least 2");
  }

  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    cfg::check_keys(t, "tolerances", {"boundary_residual", "oracle_delta"});
    c.tol_boundary = cfg::num(t, "boundary_residual", c.tol_boundary);
    c.tol_oracle = cfg::num(t, "oracle_delta", c.tol_oracle);
  }

  if (j.contains("oracle")) {
    const auto& o = j["oracle"];
    cfg::check_keys(o, "oracle", {"nx"});
    c.oracle_nx = cfg::integer(o, "nx", c.oracle_nx);
    if (c.oracle_nx < 4) throw ConfigError("oracle.nx must be at least 4");
  }

  if (j.contains("admissibility")) {
    const auto& a = j["admissibility"];
    cfg::check_keys(a, "admissibility",
                    {"probe_points", "positivity_threshold", "kos_cap"});
    c.admissibility.probe_points =
        cfg::integer(a, "probe_points", c.admissibility.probe_points);
    c.admissibility.positivity_threshold = cfg::num(
        a, "positivity_threshold", c.admissibility.positivity_threshold);
    c.admissibility.kos.cap = cfg::num(a, "kos_cap", c.admissibility.kos.cap);
  }

  c.cache_dir = cfg::str(j, "cache_dir", "");
  c.neumann_check = cfg::flag(j, "neumann_check", false);
  return c;
}

}  // namespace halfrange
