#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "halfrange/errors.hpp"
#include "halfrange/krein.hpp"
#include "halfrange/slab.hpp"

namespace halfrange {

// Dense x-grid solution of the boundary value problem, from the space-time
// discretization. Deliberately independent of the spectral machinery: the
// only shared input is the DiscreteModel.
struct SpaceTimeSolution {
  std::vector<double> xs;
  Eigen::MatrixXd psi;  // one column per x sample
  double residual = 0;  // relative algebraic residual of the linear solve
  bool residual_ok = true;
};

// Second-order finite differences in x for d psi/dx + B psi = f on [0, tau]:
// centered stencils inside, one-sided second-order stencils on the rows whose
// boundary condition lives at the other end, boundary rows replaced by the
// half-range conditions on the signed node masks.
inline SpaceTimeSolution brute_force_bvp(
    const DiscreteModel& m, const Eigen::VectorXd& phi_plus,
    const Eigen::VectorXd& phi_minus, double tau, int nx,
    const std::function<Eigen::VectorXd(double)>& forcing = nullptr) {
  const Eigen::Index n = m.size();
  if (nx < 4) throw Error("space-time grid needs nx >= 4");
  if (!(tau > 0.0) || std::isinf(tau)) throw Error("space-time oracle needs a finite slab");

  const Eigen::MatrixXd B = m.J_diag.asDiagonal() * m.L_mat;
  const double dx = tau / (nx - 1);
  const Eigen::Index N = n * nx;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(N) * (static_cast<std::size_t>(n) + 3));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);

  auto idx = [n](int k, Eigen::Index i) { return static_cast<Eigen::Index>(k) * n + i; };
  auto put_B_row = [&](Eigen::Index row, int k, Eigen::Index i) {
    for (Eigen::Index j = 0; j < n; ++j)
      if (B(i, j) != 0.0) trip.emplace_back(row, idx(k, j), B(i, j));
  };

  for (int k = 0; k < nx; ++k) {
    const double x = k * dx;
    const Eigen::VectorXd f =
        forcing ? forcing(x) : Eigen::VectorXd::Zero(n).eval();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index row = idx(k, i);
      const bool plus_node = m.J_diag[i] > 0;
      if (k == 0 && plus_node) {
        trip.emplace_back(row, idx(0, i), 1.0);
        rhs[row] = phi_plus[i];
        continue;
      }
      if (k == nx - 1 && !plus_node) {
        trip.emplace_back(row, idx(nx - 1, i), 1.0);
        rhs[row] = phi_minus[i];
        continue;
      }
      if (k == 0) {
        trip.emplace_back(row, idx(0, i), -1.5 / dx);
        trip.emplace_back(row, idx(1, i), 2.0 / dx);
        trip.emplace_back(row, idx(2, i), -0.5 / dx);
      } else if (k == nx - 1) {
        trip.emplace_back(row, idx(nx - 1, i), 1.5 / dx);
        trip.emplace_back(row, idx(nx - 2, i), -2.0 / dx);
        trip.emplace_back(row, idx(nx - 3, i), 0.5 / dx);
      } else {
        trip.emplace_back(row, idx(k + 1, i), 0.5 / dx);
        trip.emplace_back(row, idx(k - 1, i), -0.5 / dx);
      }
      put_B_row(row, k, i);
      rhs[row] = f[i];
    }
  }

  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success) throw SingularSystem("space-time system factorization failed");
  Eigen::VectorXd u = lu.solve(rhs);

  // One refinement sweep, then record the relative residual honestly.
  Eigen::VectorXd res = rhs - A * u;
  u += lu.solve(res);
  res = rhs - A * u;

  SpaceTimeSolution out;
  out.residual = res.norm() / std::max(rhs.norm(), 1e-300);
  out.residual_ok = out.residual <= 1e-9;
  out.xs.resize(static_cast<std::size_t>(nx));
  out.psi.resize(n, nx);
  for (int k = 0; k < nx; ++k) {
    out.xs[static_cast<std::size_t>(k)] = k * dx;
    out.psi.col(k) = u.segment(idx(k, 0), n);
  }
  return out;
}

// Monolithic route through the eigenbasis: solve for both exponential
// families in one n x n system, never forming the lift/coupling operators.
struct BlockSolveResult {
  Eigen::VectorXd coeff_plus, coeff_minus;
  double condition = 0;
};

inline BlockSolveResult direct_block_solve(const KreinDecomposition& k,
                                           const BoundaryData& bd) {
  validate_boundary_data(k, bd);
  if (bd.half_space()) throw Error("block solve needs a finite slab");
  const Eigen::Index n = k.size();
  const Eigen::Index np = k.n_plus(), nm = k.n_minus();

  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd rhs(n);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool plus_node = k.model.J_diag[i] > 0;
    if (!plus_node) continue;
    for (Eigen::Index j = 0; j < np; ++j) A(row, j) = k.V(i, k.plus[static_cast<std::size_t>(j)]);
    for (Eigen::Index j = 0; j < nm; ++j) {
      const int c = k.minus[static_cast<std::size_t>(j)];
      A(row, np + j) = std::exp(bd.tau * k.lambda[c]) * k.V(i, c);
    }
    rhs[row] = bd.phi_plus[i];
    ++row;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool plus_node = k.model.J_diag[i] > 0;
    if (plus_node) continue;
    for (Eigen::Index j = 0; j < np; ++j) {
      const int c = k.plus[static_cast<std::size_t>(j)];
      A(row, j) = std::exp(-bd.tau * k.lambda[c]) * k.V(i, c);
    }
    for (Eigen::Index j = 0; j < nm; ++j) A(row, np + j) = k.V(i, k.minus[static_cast<std::size_t>(j)]);
    rhs[row] = bd.phi_minus[i];
    ++row;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw SingularSystem("monolithic boundary system is singular");
  const Eigen::VectorXd sol = lu.solve(rhs);

  BlockSolveResult out;
  out.coeff_plus = sol.head(np);
  out.coeff_minus = sol.tail(nm);
  const Eigen::VectorXd sv = A.jacobiSvd().singularValues();
  out.condition = sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1]
                                        : std::numeric_limits<double>::infinity();
  return out;
}

// Evaluation of the block-solve state with its own loop, so the cross-check
// does not reuse the production evaluator.
inline Eigen::VectorXd block_solve_at(const KreinDecomposition& k,
                                      const BlockSolveResult& b, double tau,
                                      double x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k.size());
  for (Eigen::Index j = 0; j < k.n_plus(); ++j) {
    const int c = k.plus[static_cast<std::size_t>(j)];
    out += b.coeff_plus[j] * std::exp(-x * k.lambda[c]) * k.V.col(c);
  }
  for (Eigen::Index j = 0; j < k.n_minus(); ++j) {
    const int c = k.minus[static_cast<std::size_t>(j)];
    out += b.coeff_minus[j] * std::exp((tau - x) * k.lambda[c]) * k.V.col(c);
  }
  return out;
}

}  // namespace halfrange
