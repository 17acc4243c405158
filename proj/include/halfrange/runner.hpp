#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "halfrange/admissibility.hpp"
#include "halfrange/bruteforce.hpp"
#include "halfrange/cache.hpp"
#include "halfrange/config.hpp"
#include "halfrange/duhamel.hpp"
#include "halfrange/io.hpp"
#include "halfrange/krein.hpp"
#include "halfrange/model.hpp"
#include "halfrange/slab.hpp"

#include <json.hpp>

namespace halfrange {

enum ExitCode : int {
  kOk = 0,
  kConfigExit = 2,
  kAdmissibilityExit = 3,
  kSolverExit = 4,
  kOracleExit = 5,
};

// ---- config materialization -------------------------------------------

inline CoefficientSet build_coefficients(const RunConfig& c) {
  if (c.preset == "signum_power") return signum_power(c.alpha, c.k, c.M);
  if (c.preset == "fokker_planck") {
    std::function<double(double)> b;
    if (c.b_form == "quadratic_abs") {
      b = [](double mu) { return mu * mu + std::fabs(mu); };
    } else if (c.b_form == "one_plus_gauss") {
      const double a = c.b_a;
      if (!(a > -1.0))
        throw ConfigError("b_form 'one_plus_gauss' needs b_a > -1");
      b = [a](double mu) { return 1.0 + a * std::exp(-mu * mu); };
    } else if (c.b_form == "constant") {
      const double a = c.b_a;
      if (a == 0.0) throw ConfigError("b_form 'constant' needs b_a != 0");
      b = [a](double) { return a; };
    } else {
      throw ConfigError("unknown b_form '" + c.b_form + "'");
    }
    return fokker_planck(b, c.M);
  }
  if (c.preset == "power_with_r") {
    std::function<double(double)> r;
    double cp = 0, cm = 0;
    if (c.r_form == "constant") {
      const double rc = c.r_c;
      if (!(rc > 0)) throw ConfigError("r_form 'constant' needs r_c > 0");
      r = [rc](double) { return rc; };
      cp = cm = rc;
    } else if (c.r_form == "two_plus_gauss") {
      r = [](double mu) { return 2.0 + std::exp(-mu * mu); };
      cp = cm = 2.0;
    } else if (c.r_form == "one_plus_inverse_power") {
      const double pp = c.r_p;
      if (!(pp > 0))
        throw ConfigError("r_form 'one_plus_inverse_power' needs r_p > 0");
      r = [pp](double mu) {
        return 1.0 + 1.0 / (1.0 + std::pow(std::fabs(mu), pp));
      };
      cp = cm = 1.0;
    } else {
      throw ConfigError("unknown r_form '" + c.r_form + "'");
    }
    return power_with_r(c.alpha_plus, c.alpha_minus, r, cp, cm, c.M);
  }
  return io::read_coefficients_csv(c.coefficients_csv, c.M);
}

inline std::vector<double> grid_anchors(const CoefficientSet& c,
                                        const AdmissibilityOptions& opt) {
  if (c.analytic && !c.analytic->turning_points.empty())
    return c.analytic->turning_points;
  const Grid probe = build_grid(c.half_width, opt.probe_points, 1.0, {}, false);
  try {
    return detect_turning_points(c, probe, opt.turning);
  } catch (const NoSignChange&) {
    return {};
  }
}

// ---- boundary and forcing materialization -----------------------------

inline Eigen::VectorXd build_boundary_side(const BoundaryProfile& p,
                                           const DiscreteModel& m,
                                           const KreinDecomposition& k,
                                           double side) {
  const Eigen::Index n = m.size();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  if (p.profile == "zero") return phi;
  if (!m.grid && p.profile != "eigenmode")
    throw ConfigError("node-position boundary profiles need a gridded model");

  if (p.profile == "indicator") {
    for (Eigen::Index i = 0; i < n; ++i)
      if (m.J_diag[i] * side > 0 && m.grid->nodes[i] >= p.lo &&
          m.grid->nodes[i] <= p.hi)
        phi[i] = p.value;
    return phi;
  }
  if (p.profile == "gaussian_bump") {
    for (Eigen::Index i = 0; i < n; ++i)
      if (m.J_diag[i] * side > 0) {
        const double t = (m.grid->nodes[i] - p.center) / p.width;
        phi[i] = p.amplitude * std::exp(-0.5 * t * t);
      }
    return phi;
  }
  if (p.profile == "eigenmode") {
    const auto& fam = side > 0 ? k.plus : k.minus;
    if (p.index < 0 || p.index >= static_cast<int>(fam.size()))
      throw ConfigError("eigenmode index " + std::to_string(p.index) +
                        " out of range (family size " +
                        std::to_string(fam.size()) + ")");
    const Eigen::VectorXd v = k.V.col(fam[static_cast<std::size_t>(p.index)]);
    for (Eigen::Index i = 0; i < n; ++i)
      if (m.J_diag[i] * side > 0) phi[i] = v[i];
    return phi;
  }
  // csv
  const Eigen::VectorXd v =
      io::read_vector_csv(p.path, detail::hex64(m.grid->hash()), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m.J_diag[i] * side > 0) {
      phi[i] = v[i];
    } else if (v[i] != 0.0) {
      throw ConfigError("boundary table '" + p.path +
                        "' has nonzero entries on the opposite sign side");
    }
  }
  return phi;
}

inline std::optional<ForcingFunction> build_forcing(const RunConfig& cfg,
                                                    const DiscreteModel& m) {
  if (cfg.forcing_type == "none") return std::nullopt;
  ForcingFunction f;
  if (cfg.forcing_type == "constant") {
    const double horizon = cfg.halfspace ? 1.0 : cfg.tau;
    f.xs = {0.0, horizon};
    f.values.resize(m.size(), 2);
    f.values.col(0).setConstant(cfg.forcing_value);
    f.values.col(1).setConstant(cfg.forcing_value);
    f.tail.kind = (cfg.halfspace && cfg.forcing_value != 0.0)
                      ? TailKind::Constant
                      : TailKind::Zero;
    return f;
  }
  // csv
  if (!m.grid) throw ConfigError("forcing tables need a gridded model");
  io::ForcingTable t =
      io::read_forcing_csv(cfg.forcing_csv, detail::hex64(m.grid->hash()));
  if (t.values.rows() != m.size())
    throw ConfigError("forcing table '" + cfg.forcing_csv + "' has " +
                      std::to_string(t.values.rows()) +
                      " components; the grid has " + std::to_string(m.size()));
  if (t.xs.empty() || t.xs.front() != 0.0)
    throw ConfigError("forcing samples must start at x = 0");
  for (std::size_t i = 1; i < t.xs.size(); ++i)
    if (!(t.xs[i] > t.xs[i - 1]))
      throw ConfigError("forcing sample positions must increase strictly");
  f.xs = std::move(t.xs);
  f.values = std::move(t.values);
  if (cfg.tail_kind == "zero") f.tail.kind = TailKind::Zero;
  if (cfg.tail_kind == "exponential") {
    f.tail.kind = TailKind::ExponentialDecay;
    f.tail.rate = cfg.tail_rate;
  }
  if (cfg.tail_kind == "constant") f.tail.kind = TailKind::Constant;
  return f;
}

inline std::vector<double> sample_positions(const RunConfig& cfg,
                                            double min_abs_lambda) {
  std::vector<double> xs = cfg.x_samples;
  double xmax = cfg.x_max;
  if (xmax < 0)
    xmax = cfg.halfspace ? 10.0 / std::max(min_abs_lambda, 1e-12) : cfg.tau;
  if (xs.empty())
    for (int i = 0; i < cfg.x_count; ++i)
      xs.push_back(xmax * i / (cfg.x_count - 1));
  xs.push_back(0.0);
  if (!cfg.halfspace) xs.push_back(cfg.tau);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs) {
    if (x < 0.0) throw ConfigError("x samples must be nonnegative");
    if (!cfg.halfspace && x > cfg.tau)
      throw ConfigError("x sample beyond the slab length");
  }
  return xs;
}

// ---- report assembly --------------------------------------------------

namespace report {

using nlohmann::json;

inline json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline json admissibility_json(const AdmissibilityReport& rep) {
  json a;
  a["turning_points"] = rep.turning_points;
  a["sign_constant"] = rep.sign_constant;
  json certs = json::array();
  for (const auto& s : rep.simplicity) {
    json c;
    c["mu0"] = num(s.mu0);
    c["beta_left"] = num(s.beta_left);
    c["beta_right"] = num(s.beta_right);
    c["rho_left"] = num(s.rho_left);
    c["rho_right"] = num(s.rho_right);
    c["residual_left"] = num(s.residual_left);
    c["residual_right"] = num(s.residual_right);
    c["pass"] = s.pass;
    certs.push_back(c);
  }
  a["simplicity"] = certs;
  a["simplicity_pass"] = rep.simplicity_pass;
  json k;
  if (rep.kos) {
    auto side = [](const KosSide& s) {
      json o;
      o["alpha"] = num(s.alpha);
      o["c_limit"] = num(s.c_limit);
      o["declared"] = s.declared;
      o["integral"] = num(s.integral);
      o["tail"] = num(s.tail);
      return o;
    };
    k["plus"] = side(rep.kos->plus);
    k["minus"] = side(rep.kos->minus);
  }
  k["pass"] = rep.kos_pass;
  if (!rep.kos_note.empty()) k["note"] = rep.kos_note;
  a["kos"] = k;
  a["uniform_positivity"] = {{"infimum", num(rep.positivity_infimum)},
                            {"pass", rep.positivity_pass}};
  a["overall_pass"] = rep.overall_pass;
  return a;
}

inline json grid_json(const Grid& g, const RunConfig& cfg) {
  json o;
  o["n"] = static_cast<long long>(g.size());
  o["M"] = cfg.M;
  o["grading"] = cfg.grading;
  o["adjusted"] = g.adjusted;
  o["hash"] = detail::hex64(g.hash());
  return o;
}

}  // namespace report

// ---- run modes --------------------------------------------------------

inline int run_check(const RunConfig& cfg, bool strict) {
  const auto t0 = std::chrono::steady_clock::now();
  const CoefficientSet co = build_coefficients(cfg);
  const std::vector<double> anchors = grid_anchors(co, cfg.admissibility);
  const Grid grid = build_grid(cfg.M, cfg.n, cfg.grading, anchors, co.symmetric);
  const AdmissibilityReport rep = run_admissibility(co, grid, cfg.admissibility);

  const int code =
      (strict && !rep.overall_pass) ? kAdmissibilityExit : kOk;
  nlohmann::json out;
  out["mode"] = "check";
  out["admissibility"] = report::admissibility_json(rep);
  out["grid"] = report::grid_json(grid, cfg);
  out["timings_ms"] = {
      {"total", std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count()}};
  out["exit_status"] = code;
  io::detail::write_text(cfg.report_json, out.dump(2) + "\n");
  return code;
}

inline int run_solve(const RunConfig& cfg, bool strict, bool with_oracle,
                     const std::string& cache_dir_override) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point a) {
    return std::chrono::duration<double, std::milli>(clock::now() - a).count();
  };
  const auto t0 = clock::now();

  if (with_oracle && cfg.halfspace)
    throw ConfigError("oracle comparison needs a finite slab");

  const CoefficientSet co = build_coefficients(cfg);
  const std::vector<double> anchors = grid_anchors(co, cfg.admissibility);
  const Grid grid = build_grid(cfg.M, cfg.n, cfg.grading, anchors, co.symmetric);
  const DiscreteModel model = assemble_operators(co, grid);
  const AdmissibilityReport adm = run_admissibility(co, grid, cfg.admissibility);

  nlohmann::json out;
  out["mode"] = with_oracle ? "compare" : "solve";
  out["admissibility"] = report::admissibility_json(adm);
  out["grid"] = report::grid_json(grid, cfg);

  if (strict && !adm.overall_pass) {
    out["exit_status"] = kAdmissibilityExit;
    out["timings_ms"] = {{"total", ms_since(t0)}};
    io::detail::write_text(cfg.report_json, out.dump(2) + "\n");
    return kAdmissibilityExit;
  }

  const std::string cache_dir =
      cache_dir_override.empty() ? cfg.cache_dir : cache_dir_override;
  const auto t_dec = clock::now();
  cache::CachedDecomposition cached = cache::decompose_cached(model, cache_dir);
  const double decompose_ms = ms_since(t_dec);
  const KreinDecomposition& k = cached.k;
  const Restrictions restr = build_restrictions(k);

  BoundaryData bd;
  bd.tau = cfg.halfspace ? kHalfSpace : cfg.tau;
  bd.phi_plus = build_boundary_side(cfg.boundary_plus, model, k, +1.0);
  bd.phi_minus = cfg.halfspace
                     ? Eigen::VectorXd::Zero(model.size()).eval()
                     : build_boundary_side(cfg.boundary_minus, model, k, -1.0);
  const std::optional<ForcingFunction> forcing = build_forcing(cfg, model);

  SolveOptions sopt;
  sopt.neumann_check = cfg.neumann_check;

  const auto t_solve = clock::now();
  std::optional<Couplings> couplings;
  if (!cfg.halfspace) couplings = build_couplings(k, restr, cfg.tau);

  std::optional<HalfRangeSolution> homogeneous;
  std::optional<NonhomogeneousSolution> forced;
  if (forcing) {
    if (cfg.halfspace) {
      forced = solve_nonhomogeneous_half_space(k, restr, bd.phi_plus, *forcing);
    } else {
      forced = solve_nonhomogeneous(k, restr, bd, *forcing, sopt);
    }
  } else {
    if (cfg.halfspace) {
      homogeneous = solve_half_space(k, restr, bd.phi_plus);
    } else {
      homogeneous = solve_boundary_system(k, restr, *couplings, bd, sopt);
    }
  }
  const double solve_ms = ms_since(t_solve);
  auto eval = [&](double x) {
    return forced ? forced->at(x) : homogeneous->at(x);
  };
  const SolveDiagnostics& diag =
      forced ? forced->homogeneous.diag : homogeneous->diag;

  const double min_abs = k.lambda.cwiseAbs().minCoeff();
  const std::vector<double> xs = sample_positions(cfg, min_abs);
  Eigen::MatrixXd psi(model.size(), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j)
    psi.col(static_cast<Eigen::Index>(j)) = eval(xs[j]);
  io::write_solution_csv(cfg.solution_csv, xs, psi, grid.nodes, model.W_diag);

  // Residuals are recomputed from the emitted table, not solver internals.
  const io::SolutionTable emitted = io::read_solution_csv(cfg.solution_csv);
  Eigen::Index col0 = -1, coltau = -1;
  for (std::size_t j = 0; j < emitted.xs.size(); ++j) {
    if (emitted.xs[j] == 0.0) col0 = static_cast<Eigen::Index>(j);
    if (!cfg.halfspace && emitted.xs[j] == cfg.tau)
      coltau = static_cast<Eigen::Index>(j);
  }
  if (col0 < 0 || (!cfg.halfspace && coltau < 0))
    throw Error("emitted solution table lost a boundary sample");
  const double res_plus =
      detail::masked_residual(model, emitted.psi.col(col0), bd.phi_plus, +1.0);
  const double res_minus =
      cfg.halfspace ? 0.0
                    : detail::masked_residual(model, emitted.psi.col(coltau),
                                              bd.phi_minus, -1.0);

  int code = kOk;
  if (res_plus > cfg.tol_boundary || res_minus > cfg.tol_boundary)
    code = kSolverExit;

  out["spectrum"] = {{"min_abs", report::num(min_abs)},
                     {"max_abs", report::num(k.lambda.cwiseAbs().maxCoeff())},
                     {"n_plus", static_cast<long long>(k.n_plus())},
                     {"n_minus", static_cast<long long>(k.n_minus())}};
  out["constants"] = {{"gamma", report::num(k.gamma)},
                      {"gamma_plus", report::num(k.gamma_plus)},
                      {"gamma_minus", report::num(k.gamma_minus)},
                      {"beta_proj", report::num(k.beta_proj)},
                      {"beta_plus", report::num(k.beta_plus)},
                      {"beta_minus", report::num(k.beta_minus)}};
  if (couplings) {
    out["contraction"] = {
        {"norm_G_plus", report::num(couplings->norm_plus)},
        {"norm_G_minus", report::num(couplings->norm_minus)},
        {"bound", report::num(k.beta_proj * std::exp(-cfg.tau * min_abs))}};
  }
  out["boundary_residuals"] = {{"plus", report::num(res_plus)},
                               {"minus", report::num(res_minus)},
                               {"tolerance", cfg.tol_boundary}};
  if (forced) {
    out["forcing_residuals"] = {{"plus", report::num(forced->residual_plus)},
                                {"minus", report::num(forced->residual_minus)}};
  }
  if (cfg.neumann_check) {
    out["neumann"] = {
        {"iterations_plus", diag.neumann_iterations_plus},
        {"iterations_minus", diag.neumann_iterations_minus},
        {"agreement_plus", report::num(diag.neumann_agreement_plus)},
        {"agreement_minus", report::num(diag.neumann_agreement_minus)}};
  }
  out["cache"] = {{"enabled", !cache_dir.empty()},
                  {"hit", cached.hit},
                  {"path", cached.path}};
  out["solution_csv"] = cfg.solution_csv;

  double oracle_ms = 0;
  if (with_oracle) {
    const auto t_oracle = clock::now();
    std::function<Eigen::VectorXd(double)> ffun;
    if (forcing) {
      const ForcingFunction& fr = *forcing;
      ffun = [&fr](double x) { return fr.value_at(x); };
    }
    const SpaceTimeSolution st = brute_force_bvp(
        model, bd.phi_plus, bd.phi_minus, cfg.tau, cfg.oracle_nx, ffun);
    oracle_ms = ms_since(t_oracle);

    double ref = 0;
    std::vector<double> norms(st.xs.size());
    Eigen::MatrixXd diff(model.size(), static_cast<Eigen::Index>(st.xs.size()));
    for (std::size_t j = 0; j < st.xs.size(); ++j) {
      const Eigen::VectorXd spec = eval(st.xs[j]);
      diff.col(static_cast<Eigen::Index>(j)) =
          spec - st.psi.col(static_cast<Eigen::Index>(j));
      norms[j] = model.norm(spec);
      ref = std::max(ref, norms[j]);
    }
    double num_l2 = 0, den_l2 = 0, max_delta = 0;
    nlohmann::json per_x = nlohmann::json::array();
    for (std::size_t j = 0; j < st.xs.size(); ++j) {
      const double wq =
          (j == 0 || j + 1 == st.xs.size()) ? 0.5 : 1.0;  // trapezoid
      const double dn = model.norm(diff.col(static_cast<Eigen::Index>(j)));
      num_l2 += wq * dn * dn;
      den_l2 += wq * norms[j] * norms[j];
      const double d = dn / std::max(ref, 1e-300);
      max_delta = std::max(max_delta, d);
      per_x.push_back({{"x", st.xs[j]}, {"delta", report::num(d)}});
    }
    const double l2_delta =
        std::sqrt(num_l2 / std::max(den_l2, 1e-300));
    out["oracle"] = {{"nx", cfg.oracle_nx},
                     {"solver_residual", report::num(st.residual)},
                     {"l2_delta", report::num(l2_delta)},
                     {"max_delta", report::num(max_delta)},
                     {"tolerance", cfg.tol_oracle},
                     {"per_x", per_x}};
    if (code == kOk && l2_delta > cfg.tol_oracle) code = kOracleExit;
  }

  out["timings_ms"] = {{"decompose", decompose_ms},
                       {"solve", solve_ms},
                       {"oracle", oracle_ms},
                       {"total", ms_since(t0)}};
  out["exit_status"] = code;
  io::detail::write_text(cfg.report_json, out.dump(2) + "\n");
  return code;
}

// Entry point shared by the command-line tool and the tests.
inline int run_mode(const std::string& mode, const std::string& config_path,
                    bool strict, const std::string& cache_dir_override) {
  const RunConfig cfg = parse_config(config_path);
  if (mode == "check") return run_check(cfg, strict);
  if (mode == "solve") return run_solve(cfg, strict, false, cache_dir_override);
  if (mode == "compare") return run_solve(cfg, strict, true, cache_dir_override);
  throw ConfigError("unknown mode '" + mode + "'");
}

}  // namespace halfrange
