#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "halfrange/errors.hpp"
#include "halfrange/krein.hpp"

namespace halfrange {

constexpr double kHalfSpace = std::numeric_limits<double>::infinity();

// Incoming boundary data: phi_plus lives on the J = +1 nodes (x = 0 side),
// phi_minus on the J = -1 nodes (x = tau side). Entries on the opposite mask
// must be exactly zero. For the half-space problem (tau = inf) phi_minus is
// empty.
struct BoundaryData {
  Eigen::VectorXd phi_plus;
  Eigen::VectorXd phi_minus;
  double tau = 1.0;

  bool half_space() const { return std::isinf(tau); }
};

inline void validate_boundary_data(const KreinDecomposition& k, const BoundaryData& bd) {
  const Eigen::Index n = k.size();
  if (!(bd.tau > 0.0)) throw Error("slab length must be positive");
  if (bd.phi_plus.size() != n) throw Error("phi_plus has wrong dimension");
  for (Eigen::Index i = 0; i < n; ++i)
    if (k.model.J_diag[i] < 0 && bd.phi_plus[i] != 0.0)
      throw Error("phi_plus must vanish on the minus nodes");
  if (bd.half_space()) {
    if (bd.phi_minus.size() != 0 && !(bd.phi_minus.size() == n && bd.phi_minus.isZero(0.0)))
      throw Error("half-space data must not carry phi_minus");
    return;
  }
  if (bd.phi_minus.size() != n) throw Error("phi_minus has wrong dimension");
  for (Eigen::Index i = 0; i < n; ++i)
    if (k.model.J_diag[i] > 0 && bd.phi_minus[i] != 0.0)
      throw Error("phi_minus must vanish on the plus nodes");
}

// Inverses of the canonical projections restricted to the invariant
// subspaces: maps incoming half-range data to eigen-family coefficients.
struct Restrictions {
  std::vector<int> rows_plus, rows_minus;  // node indices with J = +1 / -1
  Eigen::MatrixXd map_plus, map_minus;     // restricted projection matrices
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_plus, lu_minus;
  double cond_plus = 0, cond_minus = 0;

  // Coefficients c with P_+ (V_+ c) = phi_plus, i.e. the lift of phi_plus
  // into the plus family. Input is the full-length vector.
  Eigen::VectorXd lift_plus(const Eigen::VectorXd& phi) const {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows_plus.size()));
    for (std::size_t i = 0; i < rows_plus.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = phi[rows_plus[i]];
    return lu_plus.solve(rhs);
  }
  Eigen::VectorXd lift_minus(const Eigen::VectorXd& phi) const {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows_minus.size()));
    for (std::size_t i = 0; i < rows_minus.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = phi[rows_minus[i]];
    return lu_minus.solve(rhs);
  }
};

inline Restrictions build_restrictions(const KreinDecomposition& k,
                                       double max_cond = 1e12) {
  Restrictions r;
  const Eigen::Index n = k.size();
  for (Eigen::Index i = 0; i < n; ++i)
    (k.model.J_diag[i] > 0 ? r.rows_plus : r.rows_minus).push_back(static_cast<int>(i));
  if (r.rows_plus.size() != k.plus.size() || r.rows_minus.size() != k.minus.size())
    throw Error("signature of J L disagrees with the signature of J");

  auto restricted = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < cols.size(); ++b)
        M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = k.V(rows[a], cols[b]);
    return M;
  };
  auto cond2 = [](const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 1.0;
    const Eigen::VectorXd sv = M.jacobiSvd().singularValues();
    const double lo = sv[sv.size() - 1];
    return lo > 0 ? sv[0] / lo : std::numeric_limits<double>::infinity();
  };

  r.map_plus = restricted(r.rows_plus, k.plus);
  r.map_minus = restricted(r.rows_minus, k.minus);
  r.cond_plus = cond2(r.map_plus);
  r.cond_minus = cond2(r.map_minus);
  if (!(r.cond_plus < max_cond) || !(r.cond_minus < max_cond))
    throw IllConditionedRestriction("projection restricted to an invariant subspace is numerically singular");
  r.lu_plus.compute(r.map_plus);
  r.lu_minus.compute(r.map_minus);
  return r;
}

// Boundary-coupling operators in eigen-family coordinates. Gp maps plus
// coefficients at x = 0 to the minus-family content of the propagated state
// at x = tau, lifted back; Gm is the mirror image. Both are strict
// contractions in the intrinsic norms.
struct Couplings {
  Eigen::MatrixXd Gp;  // n_minus x n_plus
  Eigen::MatrixXd Gm;  // n_plus x n_minus
  double norm_plus = 0, norm_minus = 0;
  double tau = 0;
};

inline Couplings build_couplings(const KreinDecomposition& k, const Restrictions& r,
                                 double tau) {
  if (!(tau > 0.0) || std::isinf(tau)) throw Error("couplings need a finite positive slab length");
  Couplings g;
  g.tau = tau;
  const Eigen::Index np = k.n_plus(), nm = k.n_minus();

  Eigen::MatrixXd decayed_p(static_cast<Eigen::Index>(r.rows_minus.size()), np);
  for (Eigen::Index j = 0; j < np; ++j) {
    const double e = std::exp(-tau * k.lambda[k.plus[static_cast<std::size_t>(j)]]);
    for (std::size_t a = 0; a < r.rows_minus.size(); ++a)
      decayed_p(static_cast<Eigen::Index>(a), j) = e * k.V(r.rows_minus[a], k.plus[static_cast<std::size_t>(j)]);
  }
  g.Gp = r.lu_minus.solve(decayed_p);

  Eigen::MatrixXd decayed_m(static_cast<Eigen::Index>(r.rows_plus.size()), nm);
  for (Eigen::Index j = 0; j < nm; ++j) {
    const double e = std::exp(tau * k.lambda[k.minus[static_cast<std::size_t>(j)]]);
    for (std::size_t a = 0; a < r.rows_plus.size(); ++a)
      decayed_m(static_cast<Eigen::Index>(a), j) = e * k.V(r.rows_plus[a], k.minus[static_cast<std::size_t>(j)]);
  }
  g.Gm = r.lu_plus.solve(decayed_m);

  g.norm_plus = g.Gp.size() ? g.Gp.jacobiSvd().singularValues()[0] : 0.0;
  g.norm_minus = g.Gm.size() ? g.Gm.jacobiSvd().singularValues()[0] : 0.0;
  if (!(g.norm_plus < 1.0) || !(g.norm_minus < 1.0))
    throw ContractionViolated("boundary coupling is not a strict contraction");
  return g;
}

struct SolveOptions {
  bool neumann_check = false;    // also run the fixed-point route and compare
  double agreement_tol = 1e-8;   // direct vs fixed-point relative agreement
  long max_iterations = 200000;  // hard cap on fixed-point sweeps
};

struct SolveDiagnostics {
  double residual_plus = 0, residual_minus = 0;  // boundary reproduction
  long neumann_iterations_plus = -1, neumann_iterations_minus = -1;
  double neumann_agreement_plus = -1, neumann_agreement_minus = -1;
  std::optional<Eigen::VectorXd> neumann_coeff_plus, neumann_coeff_minus;
};

// Propagating state of the homogeneous problem. All exponents in at() are
// nonpositive by construction.
struct HalfRangeSolution {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd V;
  std::vector<int> plus, minus;
  Eigen::VectorXd coeff_plus;   // coefficients of psi_+(0)
  Eigen::VectorXd coeff_minus;  // coefficients of psi_-(tau); empty on half-space
  double tau = 1.0;
  SolveDiagnostics diag;

  bool half_space() const { return std::isinf(tau); }

  Eigen::VectorXd at(double x) const {
    if (x < 0.0 || (!half_space() && x > tau))
      throw OutOfSlab("evaluation point outside [0, tau]");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(V.rows());
    for (std::size_t j = 0; j < plus.size(); ++j) {
      const int c = plus[j];
      out.noalias() += coeff_plus[static_cast<Eigen::Index>(j)] * std::exp(-x * lambda[c]) * V.col(c);
    }
    if (coeff_minus.size())
      for (std::size_t j = 0; j < minus.size(); ++j) {
        const int c = minus[j];
        out.noalias() += coeff_minus[static_cast<Eigen::Index>(j)] * std::exp((tau - x) * lambda[c]) * V.col(c);
      }
    return out;
  }
};

namespace detail {

// Fixed-point route for z = rhs + K z with ||K|| <= q < 1. Returns the
// iterate and the sweep count; throws if the contraction bound cannot
// certify convergence within the cap.
inline Eigen::VectorXd neumann_solve(const Eigen::MatrixXd& K, const Eigen::VectorXd& rhs,
                                     double q, long cap, long& iterations) {
  if (!(q < 1.0 - 1e-14))
    throw NeumannStall("contraction bound too close to 1 to certify convergence");
  Eigen::VectorXd z = rhs;
  const double floor = 1e-300;
  const double target = 1e-12 * (1.0 - q);
  for (long it = 1; it <= cap; ++it) {
    Eigen::VectorXd next = rhs + K * z;
    const double step = (next - z).norm();
    z = next;
    if (step <= target * std::max(z.norm(), floor) || step == 0.0) {
      iterations = it;
      return z;
    }
  }
  throw NeumannStall("fixed-point iteration exceeded its certified sweep budget");
}

}  // namespace detail

// Solves the coupled half-range boundary system on a finite slab:
//   c = (I - Gm Gp)^{-1} (lift phi_plus - Gm lift phi_minus)
//   d = (I - Gp Gm)^{-1} (lift phi_minus - Gp lift phi_plus)
// by direct factorization, optionally cross-checked by the geometric-series
// fixed point that the contraction property certifies.
inline HalfRangeSolution solve_boundary_system(const KreinDecomposition& k,
                                               const Restrictions& r,
                                               const Couplings& g,
                                               const BoundaryData& bd,
                                               const SolveOptions& opts = {}) {
  validate_boundary_data(k, bd);
  if (bd.half_space()) throw Error("half-space data needs solve_half_space");

  const Eigen::VectorXd lp = r.lift_plus(bd.phi_plus);
  const Eigen::VectorXd lm = r.lift_minus(bd.phi_minus);
  const Eigen::Index np = k.n_plus(), nm = k.n_minus();

  const Eigen::MatrixXd Ap = Eigen::MatrixXd::Identity(np, np) - g.Gm * g.Gp;
  const Eigen::MatrixXd Am = Eigen::MatrixXd::Identity(nm, nm) - g.Gp * g.Gm;
  const Eigen::VectorXd rhs_c = lp - g.Gm * lm;
  const Eigen::VectorXd rhs_d = lm - g.Gp * lp;

  HalfRangeSolution sol;
  sol.lambda = k.lambda;
  sol.V = k.V;
  sol.plus = k.plus;
  sol.minus = k.minus;
  sol.tau = bd.tau;
  sol.coeff_plus = Ap.partialPivLu().solve(rhs_c);
  sol.coeff_minus = Am.partialPivLu().solve(rhs_d);

  if (opts.neumann_check) {
    const double q = g.norm_plus * g.norm_minus;
    long itc = 0, itd = 0;
    const Eigen::VectorXd zc = detail::neumann_solve(g.Gm * g.Gp, rhs_c, q, opts.max_iterations, itc);
    const Eigen::VectorXd zd = detail::neumann_solve(g.Gp * g.Gm, rhs_d, q, opts.max_iterations, itd);
    const double floor = 1e-300;
    const double ac = (zc - sol.coeff_plus).norm() / std::max(sol.coeff_plus.norm(), floor);
    const double ad = (zd - sol.coeff_minus).norm() / std::max(sol.coeff_minus.norm(), floor);
    sol.diag.neumann_iterations_plus = itc;
    sol.diag.neumann_iterations_minus = itd;
    sol.diag.neumann_agreement_plus = ac;
    sol.diag.neumann_agreement_minus = ad;
    sol.diag.neumann_coeff_plus = zc;
    sol.diag.neumann_coeff_minus = zd;
    if ((sol.coeff_plus.norm() > 1e-290 && ac > opts.agreement_tol) ||
        (sol.coeff_minus.norm() > 1e-290 && ad > opts.agreement_tol))
      throw NeumannStall("direct and fixed-point routes disagree");
  }

  // Boundary reproduction residuals in the W-norm of the incoming data.
  const Eigen::VectorXd at0 = sol.at(0.0);
  const Eigen::VectorXd attau = sol.at(bd.tau);
  double num_p = 0, den_p = 0, num_m = 0, den_m = 0;
  for (int i : r.rows_plus) {
    const double w = k.model.W_diag[i];
    num_p += w * (at0[i] - bd.phi_plus[i]) * (at0[i] - bd.phi_plus[i]);
    den_p += w * bd.phi_plus[i] * bd.phi_plus[i];
  }
  for (int i : r.rows_minus) {
    const double w = k.model.W_diag[i];
    num_m += w * (attau[i] - bd.phi_minus[i]) * (attau[i] - bd.phi_minus[i]);
    den_m += w * bd.phi_minus[i] * bd.phi_minus[i];
  }
  sol.diag.residual_plus = std::sqrt(num_p) / std::max(std::sqrt(den_p), 1e-300);
  sol.diag.residual_minus = std::sqrt(num_m) / std::max(std::sqrt(den_m), 1e-300);
  if (den_p == 0.0) sol.diag.residual_plus = std::sqrt(num_p);
  if (den_m == 0.0) sol.diag.residual_minus = std::sqrt(num_m);
  return sol;
}

// Convenience wrapper: factor everything from the decomposition.
inline HalfRangeSolution solve_slab(const KreinDecomposition& k, const BoundaryData& bd,
                                    const SolveOptions& opts = {}) {
  const Restrictions r = build_restrictions(k);
  const Couplings g = build_couplings(k, r, bd.tau);
  return solve_boundary_system(k, r, g, bd, opts);
}

// Half-space problem: psi(x) = exp(-x B_+) lift(phi_plus), no minus family.
inline HalfRangeSolution solve_half_space(const KreinDecomposition& k,
                                          const Restrictions& r,
                                          const Eigen::VectorXd& phi_plus) {
  BoundaryData bd;
  bd.phi_plus = phi_plus;
  bd.tau = kHalfSpace;
  validate_boundary_data(k, bd);

  HalfRangeSolution sol;
  sol.lambda = k.lambda;
  sol.V = k.V;
  sol.plus = k.plus;
  sol.minus = k.minus;
  sol.tau = kHalfSpace;
  sol.coeff_plus = r.lift_plus(phi_plus);
  sol.coeff_minus.resize(0);

  const Eigen::VectorXd at0 = sol.at(0.0);
  double num = 0, den = 0;
  for (int i : r.rows_plus) {
    const double w = k.model.W_diag[i];
    num += w * (at0[i] - phi_plus[i]) * (at0[i] - phi_plus[i]);
    den += w * phi_plus[i] * phi_plus[i];
  }
  sol.diag.residual_plus = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  return sol;
}

}  // namespace halfrange
