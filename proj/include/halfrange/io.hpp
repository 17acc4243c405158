#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "halfrange/coefficients.hpp"
#include "halfrange/errors.hpp"
#include "halfrange/kinetic.hpp"

#include <json.hpp>

namespace halfrange {
namespace io {

namespace detail {

inline std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_num(const std::string& s, const std::string& where) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0')
    throw ConfigError("cannot parse number '" + t + "' in " + where);
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

}  // namespace detail

// ---- solution CSV -----------------------------------------------------
// # weighted_masses,<W_11>,...,<W_nn>
// x,<mu_1>,...,<mu_n>
// <x>,<psi_1>,...,<psi_n>

inline std::string solution_csv_text(const std::vector<double>& xs,
                                     const Eigen::MatrixXd& psi,
                                     const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& masses) {
  const Eigen::Index n = psi.rows();
  if (mu.size() != n || masses.size() != n ||
      psi.cols() != static_cast<Eigen::Index>(xs.size()))
    throw Error("solution table dimensions disagree");
  std::string out = "# weighted_masses";
  for (Eigen::Index i = 0; i < n; ++i) out += "," + detail::fmt(masses[i]);
  out += "\nx";
  for (Eigen::Index i = 0; i < n; ++i) out += "," + detail::fmt(mu[i]);
  out += "\n";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    out += detail::fmt(xs[k]);
    for (Eigen::Index i = 0; i < n; ++i)
      out += "," + detail::fmt(psi(i, static_cast<Eigen::Index>(k)));
    out += "\n";
  }
  return out;
}

inline void write_solution_csv(const std::string& path,
                               const std::vector<double>& xs,
                               const Eigen::MatrixXd& psi,
                               const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& masses) {
  detail::write_text(path, solution_csv_text(xs, psi, mu, masses));
}

struct SolutionTable {
  Eigen::VectorXd mu, masses;
  std::vector<double> xs;
  Eigen::MatrixXd psi;  // one column per x
};

inline SolutionTable read_solution_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.size() < 3 || lines[0].rfind("# weighted_masses", 0) != 0)
    throw ConfigError("'" + path + "' is not a solution table");
  const auto mrow = detail::split_csv(lines[0]);
  const auto hrow = detail::split_csv(lines[1]);
  if (hrow.empty() || hrow[0] != "x")
    throw ConfigError("solution table '" + path + "' lacks the x header row");
  const std::size_t n = hrow.size() - 1;
  if (mrow.size() != n + 1)
    throw ConfigError("mass row and node row disagree in '" + path + "'");
  SolutionTable t;
  t.mu.resize(static_cast<Eigen::Index>(n));
  t.masses.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    t.masses[static_cast<Eigen::Index>(i)] =
        detail::parse_num(mrow[i + 1], path);
    t.mu[static_cast<Eigen::Index>(i)] = detail::parse_num(hrow[i + 1], path);
  }
  const std::size_t rows = lines.size() - 2;
  t.xs.resize(rows);
  t.psi.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows));
  for (std::size_t k = 0; k < rows; ++k) {
    const auto cells = detail::split_csv(lines[k + 2]);
    if (cells.size() != n + 1)
      throw ConfigError("row " + std::to_string(k + 3) + " of '" + path +
                        "' has the wrong column count");
    t.xs[k] = detail::parse_num(cells[0], path);
    for (std::size_t i = 0; i < n; ++i)
      t.psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          detail::parse_num(cells[i + 1], path);
  }
  return t;
}

// ---- forcing CSV ------------------------------------------------------
// # grid_hash,<16 hex digits>
// x,f_1,...,f_n
// <x>,<f values...>

inline void write_forcing_csv(const std::string& path,
                              const std::vector<double>& xs,
                              const Eigen::MatrixXd& values,
                              const std::string& grid_hash) {
  const Eigen::Index n = values.rows();
  if (values.cols() != static_cast<Eigen::Index>(xs.size()))
    throw Error("forcing table dimensions disagree");
  std::string out = "# grid_hash," + grid_hash + "\nx";
  for (Eigen::Index i = 0; i < n; ++i)
    out += ",f_" + std::to_string(i + 1);
  out += "\n";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    out += detail::fmt(xs[k]);
    for (Eigen::Index i = 0; i < n; ++i)
      out += "," + detail::fmt(values(i, static_cast<Eigen::Index>(k)));
    out += "\n";
  }
  detail::write_text(path, out);
}

struct ForcingTable {
  std::vector<double> xs;
  Eigen::MatrixXd values;  // one column per x
};

inline ForcingTable read_forcing_csv(const std::string& path,
                                     const std::string& expected_grid_hash) {
  const auto lines = detail::read_lines(path);
  if (lines.size() < 3 || lines[0].rfind("# grid_hash,", 0) != 0)
    throw ConfigError("'" + path + "' is not a forcing table (grid_hash header missing)");
  const std::string hash = detail::trim(lines[0].substr(12));
  if (hash != expected_grid_hash)
    throw GridHashMismatch("forcing table '" + path + "' was sampled on grid " +
                           hash + " but the run uses grid " +
                           expected_grid_hash);
  const auto hrow = detail::split_csv(lines[1]);
  if (hrow.empty() || hrow[0] != "x")
    throw ConfigError("forcing table '" + path + "' lacks the x header row");
  const std::size_t n = hrow.size() - 1;
  const std::size_t rows = lines.size() - 2;
  ForcingTable t;
  t.xs.resize(rows);
  t.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rows));
  for (std::size_t k = 0; k < rows; ++k) {
    const auto cells = detail::split_csv(lines[k + 2]);
    if (cells.size() != n + 1)
      throw ConfigError("row " + std::to_string(k + 3) + " of '" + path +
                        "' has the wrong column count");
    t.xs[k] = detail::parse_num(cells[0], path);
    for (std::size_t i = 0; i < n; ++i)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          detail::parse_num(cells[i + 1], path);
  }
  return t;
}

// ---- per-node vector CSV (boundary data) ------------------------------
// # grid_hash,<16 hex digits>
// value
// <v_1> ... one row per grid node

inline void write_vector_csv(const std::string& path, const Eigen::VectorXd& v,
                             const std::string& grid_hash) {
  std::string out = "# grid_hash," + grid_hash + "\nvalue\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += detail::fmt(v[i]) + "\n";
  detail::write_text(path, out);
}

inline Eigen::VectorXd read_vector_csv(const std::string& path,
                                       const std::string& expected_grid_hash,
                                       Eigen::Index expected_size) {
  const auto lines = detail::read_lines(path);
  if (lines.size() < 2 || lines[0].rfind("# grid_hash,", 0) != 0)
    throw ConfigError("'" + path + "' is not a per-node value table");
  const std::string hash = detail::trim(lines[0].substr(12));
  if (hash != expected_grid_hash)
    throw GridHashMismatch("value table '" + path + "' was sampled on grid " +
                           hash + " but the run uses grid " +
                           expected_grid_hash);
  if (detail::trim(lines[1]) != "value")
    throw ConfigError("value table '" + path + "' lacks the 'value' header");
  if (static_cast<Eigen::Index>(lines.size()) - 2 != expected_size)
    throw ConfigError("value table '" + path + "' has " +
                      std::to_string(lines.size() - 2) + " rows; grid has " +
                      std::to_string(expected_size) + " nodes");
  Eigen::VectorXd v(expected_size);
  for (Eigen::Index i = 0; i < expected_size; ++i)
    v[i] = detail::parse_num(lines[static_cast<std::size_t>(i) + 2], path);
  return v;
}

// ---- sampled coefficient CSV ------------------------------------------
// mu,w,p,q
// <mu>,<w>,<p>,<q> with mu strictly increasing and covering [-M, M]

inline CoefficientSet read_coefficients_csv(const std::string& path,
                                            double half_width) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ConfigError("coefficient table '" + path + "' is empty");
  const auto header = detail::split_csv(lines[0]);
  if (header.size() != 4 || header[0] != "mu" || header[1] != "w" ||
      header[2] != "p" || header[3] != "q")
    throw ConfigError("coefficient table '" + path +
                      "' must start with the header 'mu,w,p,q'");
  std::vector<double> mu, w, p, q;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = detail::split_csv(lines[k]);
    if (cells.size() != 4)
      throw ConfigError("row " + std::to_string(k + 1) + " of '" + path +
                        "' has the wrong column count");
    mu.push_back(detail::parse_num(cells[0], path));
    w.push_back(detail::parse_num(cells[1], path));
    p.push_back(detail::parse_num(cells[2], path));
    q.push_back(detail::parse_num(cells[3], path));
  }
  return custom_sampled(mu, w, p, q, half_width);
}

inline void write_coefficients_csv(const std::string& path,
                                   const std::vector<double>& mu,
                                   const std::vector<double>& w,
                                   const std::vector<double>& p,
                                   const std::vector<double>& q) {
  std::string out = "mu,w,p,q\n";
  for (std::size_t k = 0; k < mu.size(); ++k)
    out += detail::fmt(mu[k]) + "," + detail::fmt(w[k]) + "," +
           detail::fmt(p[k]) + "," + detail::fmt(q[k]) + "\n";
  detail::write_text(path, out);
}

// ---- weighted-direction model JSON ------------------------------------
// {"T": [t_1,...,t_n], "A": [[...],...]}

inline TModel read_tmodel_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  if (!j.contains("T") || !j.contains("A"))
    throw ConfigError("'" + path + "' must contain fields 'T' and 'A'");
  const auto& jt = j["T"];
  const auto& ja = j["A"];
  if (!jt.is_array() || !ja.is_array())
    throw ConfigError("'T' must be an array and 'A' an array of rows");
  const Eigen::Index n = static_cast<Eigen::Index>(jt.size());
  TModel tm;
  tm.T_diag.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    tm.T_diag[i] = jt[static_cast<std::size_t>(i)].get<double>();
  if (static_cast<Eigen::Index>(ja.size()) != n)
    throw ConfigError("'A' must be " + std::to_string(n) + " rows");
  tm.A.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = ja[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ConfigError("'A' row " + std::to_string(i) + " must have " +
                        std::to_string(n) + " entries");
    for (Eigen::Index k = 0; k < n; ++k)
      tm.A(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return tm;
}

}  // namespace io
}  // namespace halfrange
