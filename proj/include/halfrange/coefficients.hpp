#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "halfrange/errors.hpp"

namespace halfrange {

// Closed-form structure of a weight, when known. Lets the admissibility
// checks skip estimation and lets the grid builder place clustering anchors.
struct AnalyticDescriptor {
  // One-sided growth exponents of |w| at +/- infinity (w ~ c*|mu|^alpha).
  std::optional<double> alpha_plus, alpha_minus;
  // Limits c± of r(mu) = |w(mu)| / |mu|^{alpha±}.
  std::optional<double> c_plus, c_minus;
  // Known sign-change locations of w inside (-M, M).
  std::vector<double> turning_points;
  // Local power-law data at each turning point: |w| ~ rho * d^beta.
  std::optional<double> beta, rho;
};

// The data (w, p, q) on [-M, M]. Functions are sampled on demand.
struct CoefficientSet {
  std::function<double(double)> w;  // sign-indefinite weight, != 0 a.e.
  std::function<double(double)> p;  // diffusion coefficient, > 0
  std::function<double(double)> q;  // potential
  double half_width = 1.0;          // M
  bool symmetric = false;  // declared mu -> -mu symmetry of |w|, p, q
  std::optional<AnalyticDescriptor> analytic;
};

// ---- presets ----------------------------------------------------------

// w = sgn(mu)|mu|^alpha, p = 1, q = k.
inline CoefficientSet signum_power(double alpha, double k, double M) {
  CoefficientSet c;
  c.w = [alpha](double mu) {
    if (mu == 0.0) return 0.0;
    return (mu > 0 ? 1.0 : -1.0) * std::pow(std::fabs(mu), alpha);
  };
  c.p = [](double) { return 1.0; };
  c.q = [k](double) { return k; };
  c.half_width = M;
  c.symmetric = true;
  AnalyticDescriptor d;
  d.alpha_plus = d.alpha_minus = alpha;
  d.c_plus = d.c_minus = 1.0;
  d.turning_points = {0.0};
  d.beta = alpha;
  d.rho = 1.0;
  c.analytic = d;
  return c;
}

// mu * psi_x = b(mu) * psi_mumu rewritten with weight w = mu / b(mu), p = 1, q = 0.
inline CoefficientSet fokker_planck(std::function<double(double)> b, double M,
                                    bool symmetric = true) {
  CoefficientSet c;
  c.w = [b](double mu) { return mu / b(mu); };
  c.p = [](double) { return 1.0; };
  c.q = [](double) { return 0.0; };
  c.half_width = M;
  c.symmetric = symmetric;
  AnalyticDescriptor d;
  d.turning_points = {0.0};
  c.analytic = d;
  return c;
}

// w = sgn(mu) * r(mu) * |mu|^{alpha±}, p = 1, q = 0.  r > 0 with finite
// limits c± at infinity.
inline CoefficientSet power_with_r(double alpha_plus, double alpha_minus,
                                   std::function<double(double)> r,
                                   double c_plus, double c_minus, double M) {
  CoefficientSet c;
  c.w = [alpha_plus, alpha_minus, r](double mu) {
    if (mu == 0.0) return 0.0;
    const double a = mu > 0 ? alpha_plus : alpha_minus;
    return (mu > 0 ? 1.0 : -1.0) * r(mu) * std::pow(std::fabs(mu), a);
  };
  c.p = [](double) { return 1.0; };
  c.q = [](double) { return 0.0; };
  c.half_width = M;
  c.symmetric = (alpha_plus == alpha_minus);
  AnalyticDescriptor d;
  d.alpha_plus = alpha_plus;
  d.alpha_minus = alpha_minus;
  d.c_plus = c_plus;
  d.c_minus = c_minus;
  d.turning_points = {0.0};
  c.analytic = d;
  return c;
}

// Piecewise-linear interpolant through (mu_j, v_j); mu_j strictly increasing.
inline std::function<double(double)> linear_interpolant(std::vector<double> mu,
                                                        std::vector<double> v) {
  if (mu.size() != v.size() || mu.size() < 2)
    throw ConfigError("sampled coefficient table needs >= 2 rows");
  for (std::size_t j = 1; j < mu.size(); ++j)
    if (!(mu[j] > mu[j - 1]))
      throw ConfigError("sampled coefficient abscissae must be strictly increasing");
  return [mu = std::move(mu), v = std::move(v)](double x) {
    if (x <= mu.front()) return v.front();
    if (x >= mu.back()) return v.back();
    const auto it = std::upper_bound(mu.begin(), mu.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - mu.begin());
    const double t = (x - mu[j - 1]) / (mu[j] - mu[j - 1]);
    return v[j - 1] + t * (v[j] - v[j - 1]);
  };
}

// Builds a CoefficientSet from sampled columns (mu, w, p, q).
inline CoefficientSet custom_sampled(const std::vector<double>& mu,
                                     const std::vector<double>& w,
                                     const std::vector<double>& p,
                                     const std::vector<double>& q, double M) {
  if (mu.empty() || mu.front() > -M || mu.back() < M)
    throw ConfigError("sampled coefficients must cover [-M, M]");
  CoefficientSet c;
  c.w = linear_interpolant(mu, w);
  c.p = linear_interpolant(mu, p);
  c.q = linear_interpolant(mu, q);
  c.half_width = M;
  c.symmetric = false;
  return c;
}

}  // namespace halfrange
