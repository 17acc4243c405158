#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "halfrange/errors.hpp"
#include "halfrange/slab.hpp"

namespace halfrange {

// Declared continuation of the forcing beyond its last sample.
enum class TailKind { Zero, ExponentialDecay, Constant };
struct TailModel {
  TailKind kind = TailKind::Zero;
  double rate = 0.0;  // decay rate for ExponentialDecay
};

struct HolderData {
  double K = 0.0;       // Hölder constant
  double exponent = 1;  // Hölder exponent in (0, 1]
};

// Forcing sampled on an x-grid starting at 0, interpolated piecewise
// linearly, continued by the tail model past the last sample.
struct ForcingFunction {
  std::vector<double> xs;   // strictly increasing, xs.front() == 0
  Eigen::MatrixXd values;   // one column per sample, n rows
  TailModel tail;
  std::optional<HolderData> holder;  // defaults to the max segment slope

  Eigen::VectorXd value_at(double x) const {
    const std::size_t ns = xs.size();
    if (x <= xs.front()) return values.col(0);
    if (x >= xs.back()) {
      const Eigen::VectorXd last = values.col(static_cast<Eigen::Index>(ns - 1));
      switch (tail.kind) {
        case TailKind::Zero:
          if (x > xs.back()) return Eigen::VectorXd::Zero(values.rows());
          return last;
        case TailKind::Constant:
          return last;
        case TailKind::ExponentialDecay:
          return std::exp(-tail.rate * (x - xs.back())) * last;
      }
      return last;
    }
    std::size_t j = 1;
    while (xs[j] < x) ++j;
    const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ((1.0 - t) * values.col(static_cast<Eigen::Index>(j - 1)) +
            t * values.col(static_cast<Eigen::Index>(j))).eval();
  }

  // Largest segment slope in the max norm; the default Hölder certificate
  // (exponent 1) for piecewise-linear data.
  HolderData default_holder() const {
    HolderData h;
    for (std::size_t j = 1; j < xs.size(); ++j) {
      const double s = (values.col(static_cast<Eigen::Index>(j)) -
                        values.col(static_cast<Eigen::Index>(j - 1)))
                           .cwiseAbs()
                           .maxCoeff() /
                       (xs[j] - xs[j - 1]);
      h.K = std::max(h.K, s);
    }
    return h;
  }
};

namespace detail {

// phi1m(s) = (1 - e^{-s}) / s, phi2m(s) = (1 - (1+s) e^{-s}) / s^2 for s >= 0,
// with series branches so small decay rates lose no precision.
inline double phi1m(double s) {
  if (s < 1e-4) return 1.0 - s * (0.5 - s * (1.0 / 6.0 - s * (1.0 / 24.0 - s / 120.0)));
  return -std::expm1(-s) / s;
}
inline double phi2m(double s) {
  if (s < 1e-4)
    return 0.5 - s * (1.0 / 3.0 - s * (0.125 - s * (1.0 / 30.0 - s / 144.0)));
  return (1.0 - (1.0 + s) * std::exp(-s)) / (s * s);
}

// integral_0^h e^{-m u} (a + b u) du, m >= 0.
inline double linear_exp_integral(double m, double h, double a, double b) {
  return a * h * phi1m(m * h) + b * h * h * phi2m(m * h);
}

// (e^{-a d} - e^{-b d}) / (b - a) for a, b, d >= 0, stable as b -> a.
inline double exp_difference_quotient(double a, double b, double d) {
  const double s = (b - a) * d;
  if (std::fabs(s) < 1e-4) {
    // e^{-a d} * d * phi1m-style series in s (valid for either sign of s).
    return std::exp(-a * d) * d *
           (1.0 - s * (0.5 - s * (1.0 / 6.0 - s * (1.0 / 24.0 - s / 120.0))));
  }
  return (std::exp(-a * d) - std::exp(-b * d)) / (b - a);
}

}  // namespace detail

// Mode-resolved particular solutions: the decaying forward convolution on the
// plus family and the decaying backward convolution (with its minus sign) on
// the minus family, both exact on each linear segment of the forcing.
struct ParticularSolution {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd V;
  std::vector<int> plus, minus;
  std::vector<double> xs;
  Eigen::MatrixXd fhat;  // eigen-coordinates of the samples, n x ns
  double tau = 1.0;      // integration horizon; inf for half-space
  TailModel tail;

  bool half_space() const { return std::isinf(tau); }

  // Coefficients of the particular solution in the eigenbasis at x.
  Eigen::VectorXd coefficients_at(double x) const {
    const Eigen::Index n = lambda.size();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    const double X = xs.back();

    for (std::size_t jj = 0; jj < plus.size(); ++jj) {
      const int mi = plus[jj];
      const double lam = lambda[mi];
      double acc = 0.0;
      for (std::size_t seg = 1; seg < xs.size(); ++seg) {
        const double xa = xs[seg - 1];
        if (xa >= x) break;
        const double xb = std::min(xs[seg], x);
        const double h = xb - xa;
        if (h <= 0.0) continue;
        const double fa = fhat(mi, static_cast<Eigen::Index>(seg - 1));
        const double fb_full = fhat(mi, static_cast<Eigen::Index>(seg));
        const double slope = (fb_full - fa) / (xs[seg] - xa);
        const double fb = fa + slope * h;
        const double t2 = x - xb;
        acc += std::exp(-lam * t2) * detail::linear_exp_integral(lam, h, fb, -slope);
      }
      if (x > X) {
        const double fX = fhat(mi, static_cast<Eigen::Index>(xs.size() - 1));
        const double d = x - X;
        switch (tail.kind) {
          case TailKind::Zero: break;
          case TailKind::Constant:
            acc += fX * d * detail::phi1m(lam * d);
            break;
          case TailKind::ExponentialDecay:
            acc += fX * detail::exp_difference_quotient(tail.rate, lam, d);
            break;
        }
      }
      c[mi] = acc;
    }

    const double horizon = half_space() ? X : tau;
    for (std::size_t jj = 0; jj < minus.size(); ++jj) {
      const int mi = minus[jj];
      const double mrate = -lambda[mi];
      double acc = 0.0;
      for (std::size_t seg = 1; seg < xs.size(); ++seg) {
        const double xb_raw = std::min(xs[seg], horizon);
        const double xa = std::max(xs[seg - 1], x);
        if (xa >= xb_raw) continue;
        const double fa_full = fhat(mi, static_cast<Eigen::Index>(seg - 1));
        const double slope = (fhat(mi, static_cast<Eigen::Index>(seg)) - fa_full) /
                             (xs[seg] - xs[seg - 1]);
        const double fa = fa_full + slope * (xa - xs[seg - 1]);
        const double h = xb_raw - xa;
        const double t1 = xa - x;
        acc += std::exp(-mrate * t1) * detail::linear_exp_integral(mrate, h, fa, slope);
      }
      if (half_space()) {
        const double fX = fhat(mi, static_cast<Eigen::Index>(xs.size() - 1));
        if (tail.kind == TailKind::ExponentialDecay && fX != 0.0) {
          const double from = std::max(X - x, 0.0), over = std::max(x - X, 0.0);
          acc += fX * std::exp(-mrate * from - tail.rate * over) / (mrate + tail.rate);
        }
        // Zero tail adds nothing; a Constant tail passed the integrability
        // gate only with a vanishing last sample.
      }
      c[mi] = -acc;
    }
    return c;
  }

  Eigen::VectorXd at(double x) const { return V * coefficients_at(x); }

  // Same split as the solution formula: plus part vanishes at 0, minus part
  // vanishes at the far end.
  Eigen::VectorXd plus_part_at(double x) const {
    Eigen::VectorXd c = coefficients_at(x);
    for (int mi : minus) c[mi] = 0.0;
    return V * c;
  }
  Eigen::VectorXd minus_part_at(double x) const {
    Eigen::VectorXd c = coefficients_at(x);
    for (int mi : plus) c[mi] = 0.0;
    return V * c;
  }
};

inline ParticularSolution particular_solutions(const KreinDecomposition& k,
                                               const ForcingFunction& f,
                                               double tau) {
  if (f.xs.size() < 2) throw Error("forcing needs at least two samples");
  if (f.xs.front() != 0.0) throw Error("forcing samples must start at x = 0");
  for (std::size_t j = 1; j < f.xs.size(); ++j)
    if (!(f.xs[j] > f.xs[j - 1])) throw Error("forcing samples must be strictly increasing");
  if (f.values.rows() != k.size() ||
      f.values.cols() != static_cast<Eigen::Index>(f.xs.size()))
    throw Error("forcing values have wrong shape");
  if (!std::isinf(tau) && f.xs.back() < tau - 1e-12 * std::max(1.0, tau))
    throw Error("forcing samples must cover the slab");

  ParticularSolution ps;
  ps.lambda = k.lambda;
  ps.V = k.V;
  ps.plus = k.plus;
  ps.minus = k.minus;
  ps.xs = f.xs;
  ps.tau = tau;
  ps.tail = f.tail;

  const Eigen::VectorXd wj = (k.model.W_diag.array() * k.model.J_diag.array()).matrix();
  ps.fhat = k.V.transpose() * wj.asDiagonal() * f.values;
  for (Eigen::Index i = 0; i < ps.fhat.rows(); ++i)
    ps.fhat.row(i) *= static_cast<double>(k.kappa[i]);
  return ps;
}

// Homogeneous solution plus particular solution, with the boundary data
// adjusted so the total still reproduces it.
struct NonhomogeneousSolution {
  HalfRangeSolution homogeneous;
  ParticularSolution particular;
  double residual_plus = 0, residual_minus = 0;

  double tau() const { return homogeneous.tau; }
  Eigen::VectorXd at(double x) const { return homogeneous.at(x) + particular.at(x); }
};

namespace detail {

inline Eigen::VectorXd masked(const Eigen::VectorXd& v, const Eigen::VectorXd& J, double sign) {
  Eigen::VectorXd out = v;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (J[i] * sign < 0) out[i] = 0.0;
  return out;
}

inline double masked_residual(const DiscreteModel& m, const Eigen::VectorXd& got,
                              const Eigen::VectorXd& want, double sign) {
  double num = 0, den = 0;
  for (Eigen::Index i = 0; i < got.size(); ++i) {
    if (m.J_diag[i] * sign < 0) continue;
    num += m.W_diag[i] * (got[i] - want[i]) * (got[i] - want[i]);
    den += m.W_diag[i] * want[i] * want[i];
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace detail

inline NonhomogeneousSolution solve_nonhomogeneous(const KreinDecomposition& k,
                                                   const Restrictions& r,
                                                   const BoundaryData& bd,
                                                   const ForcingFunction& f,
                                                   const SolveOptions& opts = {}) {
  validate_boundary_data(k, bd);
  if (bd.half_space()) throw Error("half-space data needs solve_nonhomogeneous_half_space");

  NonhomogeneousSolution out;
  out.particular = particular_solutions(k, f, bd.tau);

  BoundaryData adjusted;
  adjusted.tau = bd.tau;
  adjusted.phi_plus = bd.phi_plus - detail::masked(out.particular.at(0.0), k.model.J_diag, +1.0);
  adjusted.phi_minus = bd.phi_minus - detail::masked(out.particular.at(bd.tau), k.model.J_diag, -1.0);

  const Couplings g = build_couplings(k, r, bd.tau);
  out.homogeneous = solve_boundary_system(k, r, g, adjusted, opts);

  out.residual_plus = detail::masked_residual(k.model, out.at(0.0), bd.phi_plus, +1.0);
  out.residual_minus = detail::masked_residual(k.model, out.at(bd.tau), bd.phi_minus, -1.0);
  return out;
}

inline NonhomogeneousSolution solve_nonhomogeneous_half_space(
    const KreinDecomposition& k, const Restrictions& r,
    const Eigen::VectorXd& phi_plus, const ForcingFunction& f) {
  // Integrability gate for the infinite horizon.
  const Eigen::VectorXd last = f.values.col(f.values.cols() - 1);
  switch (f.tail.kind) {
    case TailKind::Zero: break;
    case TailKind::Constant:
      if (last.cwiseAbs().maxCoeff() > 0.0)
        throw TailNotIntegrable("constant nonzero forcing tail is not integrable");
      break;
    case TailKind::ExponentialDecay:
      if (!(f.tail.rate > 0.0))
        throw TailNotIntegrable("exponential forcing tail needs a positive rate");
      break;
  }

  NonhomogeneousSolution out;
  out.particular = particular_solutions(k, f, kHalfSpace);
  const Eigen::VectorXd adjusted =
      phi_plus - detail::masked(out.particular.at(0.0), k.model.J_diag, +1.0);
  out.homogeneous = solve_half_space(k, r, adjusted);
  out.residual_plus = detail::masked_residual(k.model, out.at(0.0), phi_plus, +1.0);
  return out;
}

}  // namespace halfrange
