#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "halfrange/duhamel.hpp"
#include "halfrange/errors.hpp"
#include "halfrange/krein.hpp"
#include "halfrange/slab.hpp"

namespace halfrange {

// Signed weight T (diagonal, injective) with a symmetric positive collision
// operator A: the equation T dpsi/dx = -A psi + f.
struct TModel {
  Eigen::VectorXd T_diag;
  Eigen::MatrixXd A;

  Eigen::Index size() const { return T_diag.size(); }
};

// The |T|-weighted space, its dual, and the signed pairing.
struct WeightedSpaces {
  Eigen::VectorXd absT;

  double norm(const Eigen::VectorXd& h) const {
    return std::sqrt((absT.array() * h.array().square()).sum());
  }
  double dual_norm(const Eigen::VectorXd& g) const {
    return std::sqrt((g.array().square() / absT.array()).sum());
  }
  // |T|-weighted inner product; the duality pairing between the two spaces is
  // the plain coordinate pairing, bounded by norm * dual_norm.
  double inner(const Eigen::VectorXd& h, const Eigen::VectorXd& g) const {
    return (absT.array() * h.array() * g.array()).sum();
  }
  double pairing(const Eigen::VectorXd& h, const Eigen::VectorXd& g) const {
    return h.dot(g);
  }
};

inline WeightedSpaces build_spaces(const TModel& tm) {
  for (Eigen::Index i = 0; i < tm.size(); ++i)
    if (std::fabs(tm.T_diag[i]) < 1e-300)
      throw ZeroTEntry("weight operator must be injective");
  WeightedSpaces s;
  s.absT = tm.T_diag.cwiseAbs();
  return s;
}

// Reduction to the half-range form: W = |T|, J = sgn(T), L = |T|^{-1} A, so
// that J L = T^{-1} A and W L = A (the pairing identity).
inline DiscreteModel reduce(const TModel& tm, double sym_tol = 1e-12) {
  const Eigen::Index n = tm.size();
  if (tm.A.rows() != n || tm.A.cols() != n) throw Error("A has wrong dimensions");
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::fabs(tm.T_diag[i]) < 1e-300)
      throw ZeroTEntry("weight operator must be injective");

  const double scale = std::max(tm.A.cwiseAbs().maxCoeff(), 1e-300);
  if ((tm.A - tm.A.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
    throw NotSymmetric("collision operator must be symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (tm.A + tm.A.transpose()), Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw NotPositive("collision operator must be positive definite");

  DiscreteModel m;
  m.W_diag = tm.T_diag.cwiseAbs();
  m.J_diag.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) m.J_diag[i] = tm.T_diag[i] > 0 ? 1.0 : -1.0;
  m.L_mat = m.W_diag.cwiseInverse().asDiagonal() * tm.A;
  return m;
}

// Full pipeline: reduce, decompose, split the boundary vector by the sign of
// T, divide the forcing by T, and delegate to the half-range machinery.
struct KineticSolution {
  DiscreteModel model;
  std::optional<NonhomogeneousSolution> forced;
  std::optional<HalfRangeSolution> free;

  Eigen::VectorXd at(double x) const {
    return forced ? forced->at(x) : free->at(x);
  }
  double tau() const { return forced ? forced->tau() : free->tau; }
};

inline KineticSolution solve_kinetic(const TModel& tm, const Eigen::VectorXd& boundary,
                                     double tau,
                                     const std::optional<ForcingFunction>& forcing = {},
                                     const SolveOptions& opts = {}) {
  KineticSolution out;
  out.model = reduce(tm);
  const KreinDecomposition k = decompose(out.model);
  const Restrictions r = build_restrictions(k);

  BoundaryData bd;
  bd.tau = tau;
  bd.phi_plus = Eigen::VectorXd::Zero(tm.size());
  bd.phi_minus = Eigen::VectorXd::Zero(tm.size());
  for (Eigen::Index i = 0; i < tm.size(); ++i)
    (tm.T_diag[i] > 0 ? bd.phi_plus[i] : bd.phi_minus[i]) = boundary[i];

  if (bd.half_space() && bd.phi_minus.cwiseAbs().maxCoeff() > 0.0)
    throw Error("half-space problem takes incoming data on the positive side only");

  if (!forcing) {
    if (bd.half_space()) {
      const Eigen::VectorXd phi = bd.phi_plus;
      bd.phi_minus.resize(0);
      out.free = solve_half_space(k, r, phi);
    } else {
      out.free = solve_slab(k, bd, opts);
    }
    return out;
  }

  // The reduced equation reads dpsi/dx = -J L psi + T^{-1} f.
  ForcingFunction reduced = *forcing;
  reduced.values = tm.T_diag.cwiseInverse().asDiagonal() * forcing->values;
  if (bd.half_space()) {
    const Eigen::VectorXd phi = bd.phi_plus;
    out.forced = solve_nonhomogeneous_half_space(k, r, phi, reduced);
  } else {
    out.forced = solve_nonhomogeneous(k, r, bd, reduced, opts);
  }
  return out;
}

}  // namespace halfrange
