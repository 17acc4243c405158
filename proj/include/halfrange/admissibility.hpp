#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "halfrange/coefficients.hpp"
#include "halfrange/errors.hpp"
#include "halfrange/grid.hpp"

namespace halfrange {

namespace detail {

inline int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// Least squares y ~ a + b*x; returns {intercept, slope, rms residual}.
struct LineFit {
  double intercept = 0, slope = 0, rms = 0;
  bool finite = false;
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  LineFit out;
  const std::size_t n = x.size();
  if (n < 2) return out;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) return out;
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double rr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (out.intercept + out.slope * x[i]);
    rr += e * e;
  }
  out.rms = std::sqrt(rr / n);
  out.finite = true;
  return out;
}

// Adaptive Simpson quadrature with absolute tolerance.
inline double simpson_step(const std::function<double(double)>& f, double a,
                           double fa, double b, double fb, double m, double fm,
                           double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol, int depth = 28) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, depth);
}

}  // namespace detail

// ---- turning points ---------------------------------------------------

struct TurningPointOptions {
  int max_count = 8;           // more sign changes than this is rejected
  double nudge = 1e-9;         // relative probe shift off an exact zero
};

// Locations where w changes sign between adjacent grid nodes, refined by
// bisection on the sign of w.
inline std::vector<double> detect_turning_points(
    const CoefficientSet& c, const Grid& g,
    const TurningPointOptions& opt = {}) {
  const auto& nodes = g.nodes;
  if (nodes.size() < 2) throw Error("turning-point scan needs >= 2 nodes");

  auto sample_sign = [&](double mu) {
    int s = detail::sign_of(c.w(mu));
    if (s != 0) return s;
    // A probe landing exactly on a zero of w carries no sign information;
    // shift it by a relative nudge (zero set has measure zero).
    const double h = opt.nudge * std::max(1.0, std::fabs(mu));
    s = detail::sign_of(c.w(mu + h));
    if (s == 0) s = detail::sign_of(c.w(mu - h));
    return s;
  };

  std::vector<double> found;
  int prev = sample_sign(nodes[0]);
  double prev_mu = nodes[0];
  for (Eigen::Index i = 1; i < nodes.size(); ++i) {
    const double mu = nodes[i];
    const int s = sample_sign(mu);
    if (s != 0 && prev != 0 && s != prev) {
      double lo = prev_mu, hi = mu;
      int slo = prev;
      for (int it = 0; it < 120 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi));
           ++it) {
        const double mid = 0.5 * (lo + hi);
        const int sm = sample_sign(mid);
        if (sm == slo) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      found.push_back(0.5 * (lo + hi));
      if (static_cast<int>(found.size()) > opt.max_count)
        throw AmbiguousSign("weight changes sign more than " +
                            std::to_string(opt.max_count) + " times");
    }
    if (s != 0) {
      prev = s;
      prev_mu = mu;
    }
  }
  if (found.empty())
    throw NoSignChange("weight has constant sign on the sampled interval");
  return found;
}

// ---- simplicity -------------------------------------------------------

struct SimplicityOptions {
  double slope_tol = 1e-2;     // stabilization of the log-log slope
  double residual_tol = 1e-2;  // rms residual of the power-law fit
  int samples_per_window = 16;
  int max_windows = 24;
  double initial_window = 0.5;
  // Distance to the nearest other turning point (caps the first window).
  double neighbor_distance = std::numeric_limits<double>::infinity();
};

struct SimplicityCertificate {
  double mu0 = 0;
  double beta_left = std::numeric_limits<double>::quiet_NaN();
  double beta_right = std::numeric_limits<double>::quiet_NaN();
  double rho_left = std::numeric_limits<double>::quiet_NaN();
  double rho_right = std::numeric_limits<double>::quiet_NaN();
  double residual_left = std::numeric_limits<double>::quiet_NaN();
  double residual_right = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
};

namespace detail {

struct SideFit {
  double beta, rho, residual;
};

// Fits |w(mu0 + s*d)| ~ rho * d^beta on geometrically shrinking windows
// [d/2, d]; accepts once the slope stops drifting and the fit is tight.
inline SideFit fit_power_side(const CoefficientSet& c, double mu0, int s,
                              const SimplicityOptions& opt) {
  const double edge =
      s > 0 ? c.half_width - mu0 : mu0 + c.half_width;  // room to the boundary
  double delta =
      std::min({opt.initial_window, 0.4 * edge, 0.4 * opt.neighbor_distance});
  if (!(delta > 0))
    throw FitFailure("no room for a one-sided window at the turning point");

  const double floor_delta = 1e-9 * std::max(1.0, std::fabs(mu0));
  bool have_prev = false;
  double prev_slope = 0;
  std::vector<double> xs(static_cast<std::size_t>(opt.samples_per_window)),
      ys(static_cast<std::size_t>(opt.samples_per_window));
  for (int k = 0; k < opt.max_windows && delta >= floor_delta; ++k, delta *= 0.5) {
    const double lo = 0.5 * delta, hi = delta;
    const double ratio = std::pow(hi / lo, 1.0 / (opt.samples_per_window - 1));
    double d = lo;
    bool bad = false;
    for (int j = 0; j < opt.samples_per_window; ++j, d *= ratio) {
      const double wv = std::fabs(c.w(mu0 + s * d));
      if (!(wv > 0) || !std::isfinite(wv)) {
        bad = true;
        break;
      }
      xs[static_cast<std::size_t>(j)] = std::log(d);
      ys[static_cast<std::size_t>(j)] = std::log(wv);
    }
    if (bad)
      throw FitFailure("weight vanishes or is not finite near the turning point");
    const LineFit fit = fit_line(xs, ys);
    if (!fit.finite)
      throw FitFailure("power-law regression near the turning point is degenerate");
    if (have_prev && std::fabs(fit.slope - prev_slope) <=
                         opt.slope_tol * std::max(1.0, std::fabs(fit.slope)) &&
        fit.rms <= opt.residual_tol) {
      return {fit.slope, std::exp(fit.intercept), fit.rms};
    }
    have_prev = true;
    prev_slope = fit.slope;
  }
  throw FitFailure("log-log slope keeps drifting as the window shrinks; "
                   "the weight is not a local power law");
}

}  // namespace detail

// Certifies local power-law behavior |w| ~ rho*|mu - mu0|^beta on each side
// of a turning point. Throws FitFailure when no stable power law emerges.
inline SimplicityCertificate check_simplicity(const CoefficientSet& c,
                                              double mu0,
                                              const SimplicityOptions& opt = {}) {
  SimplicityCertificate cert;
  cert.mu0 = mu0;
  const detail::SideFit right = detail::fit_power_side(c, mu0, +1, opt);
  const detail::SideFit left = detail::fit_power_side(c, mu0, -1, opt);
  cert.beta_right = right.beta;
  cert.rho_right = right.rho;
  cert.residual_right = right.residual;
  cert.beta_left = left.beta;
  cert.rho_left = left.rho;
  cert.residual_left = left.residual;
  cert.pass = cert.beta_left > -1.0 && cert.beta_right > -1.0 &&
              cert.rho_left > 0.0 && cert.rho_right > 0.0 &&
              std::isfinite(cert.rho_left) && std::isfinite(cert.rho_right);
  return cert;
}

// ---- decay-rate (weighted prefactor) conditions -----------------------

struct KosOptions {
  double cap = 1e6;       // integrals above this count as failed
  double quad_tol = 1e-11;
  int fit_samples = 24;   // power-law fit window [M/2, M] when not declared
  double zero_floor = 1e-250;
};

struct KosSide {
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double c_limit = std::numeric_limits<double>::quiet_NaN();
  bool declared = false;   // exponents taken from the analytic descriptor
  double integral = 0;     // computed on [1, M]
  double tail = 0;         // extrapolated contribution beyond M
  double block_ratio = 0;  // decay factor between the last two dyadic blocks
};

struct KosReport {
  KosSide plus, minus;
  bool pass = false;
};

namespace detail {

inline KosSide kos_one_side(const CoefficientSet& c, int s,
                            const KosOptions& opt) {
  KosSide side;
  const double M = c.half_width;
  if (!(M > 1.0))
    throw Error("decay-rate conditions need a half-width above 1");
  auto absw = [&](double mu_abs) { return std::fabs(c.w(s * mu_abs)); };

  std::optional<double> da, dc;
  if (c.analytic) {
    da = s > 0 ? c.analytic->alpha_plus : c.analytic->alpha_minus;
    dc = s > 0 ? c.analytic->c_plus : c.analytic->c_minus;
  }
  if (da && dc) {
    side.alpha = *da;
    side.c_limit = *dc;
    side.declared = true;
  } else {
    // One-sided power-law fit of |w| on [M/2, M].
    std::vector<double> xs(static_cast<std::size_t>(opt.fit_samples)),
        ys(static_cast<std::size_t>(opt.fit_samples));
    const double lo = 0.5 * M;
    const double ratio = std::pow(2.0, 1.0 / (opt.fit_samples - 1));
    double mu = lo;
    for (int j = 0; j < opt.fit_samples; ++j, mu *= ratio) {
      const double wv = absw(mu);
      if (!(wv > 0) || !std::isfinite(wv))
        throw FitFailure("weight vanishes toward infinity; no growth exponent");
      xs[static_cast<std::size_t>(j)] = std::log(mu);
      ys[static_cast<std::size_t>(j)] = std::log(wv);
    }
    const LineFit fit = fit_line(xs, ys);
    if (!fit.finite) throw FitFailure("growth-exponent fit is degenerate");
    side.alpha = da ? *da : fit.slope;
    side.declared = da.has_value();
    if (da) {
      // Declared exponent, fitted limit: average r over the window.
      double acc = 0;
      mu = lo;
      for (int j = 0; j < opt.fit_samples; ++j, mu *= ratio)
        acc += std::log(absw(mu)) - side.alpha * std::log(mu);
      side.c_limit = std::exp(acc / opt.fit_samples);
    } else {
      side.c_limit = std::exp(fit.intercept);
    }
  }

  const double a = side.alpha, cl = side.c_limit;
  auto g = [&](double mu_abs) {
    return std::pow(mu_abs, 0.5 * a) *
           std::fabs(absw(mu_abs) / std::pow(mu_abs, a) - cl);
  };
  side.integral = adaptive_simpson(g, 1.0, M, opt.quad_tol);

  // Tail beyond M: compare the last two dyadic blocks. Power-law decay of
  // the integrand makes block masses geometric; a non-decreasing block means
  // the extrapolated tail grows.
  if (M >= 4.0) {
    const double b1 = adaptive_simpson(g, 0.25 * M, 0.5 * M, opt.quad_tol);
    const double b2 = adaptive_simpson(g, 0.5 * M, M, opt.quad_tol);
    if (b2 <= opt.zero_floor) {
      side.tail = 0.0;
      side.block_ratio = 0.0;
    } else if (b2 >= b1) {
      throw TailDivergence("extrapolated tail of the decay-rate integral grows");
    } else {
      side.block_ratio = b2 / b1;
      side.tail = b2 * side.block_ratio / (1.0 - side.block_ratio);
    }
  }
  return side;
}

}  // namespace detail

// Evaluates the two weighted prefactor integrals that certify the weight's
// approach to pure power-law growth. Requires a zero potential.
inline KosReport check_kos_conditions(const CoefficientSet& c,
                                      const KosOptions& opt = {}) {
  const double M = c.half_width;
  for (int j = 0; j <= 64; ++j) {
    const double mu = -M + 2.0 * M * j / 64.0;
    if (std::fabs(c.q(mu)) > 1e-14)
      throw NonzeroPotential("decay-rate conditions require a zero potential");
  }
  KosReport rep;
  rep.plus = detail::kos_one_side(c, +1, opt);
  rep.minus = detail::kos_one_side(c, -1, opt);
  auto side_ok = [&](const KosSide& s) {
    return s.alpha > -1.0 && s.c_limit > 0.0 &&
           std::isfinite(s.integral + s.tail) &&
           s.integral + s.tail <= opt.cap;
  };
  rep.pass = side_ok(rep.plus) && side_ok(rep.minus);
  return rep;
}

// ---- uniform positivity ----------------------------------------------

// Essential infimum (grid minimum) of q/|w|. Interpretation is the
// caller's: positive lower bounds certify coercivity without decay rates.
inline double check_uniform_positivity(const CoefficientSet& c,
                                       const Grid& g) {
  double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < g.nodes.size(); ++i) {
    const double mu = g.nodes[i];
    const double aw = std::fabs(c.w(mu));
    if (aw <= 0) continue;
    inf = std::min(inf, c.q(mu) / aw);
  }
  return inf;
}

// ---- combined report --------------------------------------------------

struct AdmissibilityOptions {
  int probe_points = 4096;  // uniform scan resolution for sign changes
  TurningPointOptions turning;
  SimplicityOptions simplicity;
  KosOptions kos;
  double positivity_threshold = 1e-8;
};

struct AdmissibilityReport {
  std::vector<double> turning_points;
  bool sign_constant = false;
  std::vector<SimplicityCertificate> simplicity;
  bool simplicity_pass = false;
  std::optional<KosReport> kos;
  std::string kos_note;
  bool kos_pass = false;
  double positivity_infimum = std::numeric_limits<double>::quiet_NaN();
  bool positivity_pass = false;
  bool overall_pass = false;
};

// Runs every advisory check: turning points and local power laws, the
// decay-rate integrals, and the q/|w| lower bound on the caller's grid.
// Either sufficient condition (decay rates or uniform positivity) combined
// with simplicity at every turning point yields an overall pass.
inline AdmissibilityReport run_admissibility(const CoefficientSet& c,
                                             const Grid& grid,
                                             const AdmissibilityOptions& opt = {}) {
  AdmissibilityReport rep;
  const Grid probe = build_grid(c.half_width, opt.probe_points, 1.0, {}, false);
  try {
    rep.turning_points = detect_turning_points(c, probe, opt.turning);
  } catch (const NoSignChange&) {
    rep.sign_constant = true;
  }

  rep.simplicity_pass = true;
  for (std::size_t j = 0; j < rep.turning_points.size(); ++j) {
    const double mu0 = rep.turning_points[j];
    SimplicityOptions so = opt.simplicity;
    so.neighbor_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.turning_points.size(); ++i)
      if (i != j)
        so.neighbor_distance = std::min(
            so.neighbor_distance, std::fabs(rep.turning_points[i] - mu0));
    try {
      rep.simplicity.push_back(check_simplicity(c, mu0, so));
    } catch (const FitFailure&) {
      SimplicityCertificate cert;
      cert.mu0 = mu0;
      cert.pass = false;
      rep.simplicity.push_back(cert);
    }
    if (!rep.simplicity.back().pass) rep.simplicity_pass = false;
  }

  try {
    rep.kos = check_kos_conditions(c, opt.kos);
    rep.kos_pass = rep.kos->pass;
    if (!rep.kos_pass) rep.kos_note = "integral conditions not met";
  } catch (const NonzeroPotential& e) {
    rep.kos_note = e.what();
  } catch (const TailDivergence& e) {
    rep.kos_note = e.what();
  } catch (const FitFailure& e) {
    rep.kos_note = e.what();
  } catch (const Error& e) {
    // e.g. half-width too small for the integral window; the check is one of
    // two alternatives, so record why it could not run and move on.
    rep.kos_note = e.what();
  }

  rep.positivity_infimum = check_uniform_positivity(c, grid);
  rep.positivity_pass = rep.positivity_infimum > opt.positivity_threshold;

  rep.overall_pass = rep.simplicity_pass && (rep.kos_pass || rep.positivity_pass);
  return rep;
}

}  // namespace halfrange
