#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "halfrange/coefficients.hpp"
#include "halfrange/detail/hash.hpp"
#include "halfrange/errors.hpp"
#include "halfrange/grid.hpp"

namespace halfrange {

// Weighted space H = (R^n, diag(W)) with signature J = diag(+/-1) and a
// W-symmetric, W-positive operator L. Immutable once built; copies share the
// lazily computed spectral floor.
struct DiscreteModel {
  Eigen::VectorXd W_diag;  // positive weights |w(mu_i)| * mass_i
  Eigen::MatrixXd L_mat;   // W-symmetric positive operator
  Eigen::VectorXd J_diag;  // +/-1 per node
  std::optional<Grid> grid;

  Eigen::Index size() const { return W_diag.size(); }

  // W-weighted inner product and norm.
  double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return (W_diag.array() * x.array() * y.array()).sum();
  }
  double norm(const Eigen::VectorXd& x) const { return std::sqrt(inner(x, x)); }

  // Smallest eigenvalue of L in the W inner product; computed on first use.
  double delta() const {
    std::call_once(cache_->flag, [&] {
      const Eigen::VectorXd s = W_diag.array().sqrt();
      Eigen::MatrixXd sym = s.asDiagonal() * L_mat * s.cwiseInverse().asDiagonal();
      sym = 0.5 * (sym + sym.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
      cache_->value = es.eigenvalues().minCoeff();
    });
    return cache_->value;
  }

  std::uint64_t hash() const {
    detail::Fnv1a h;
    h.vec(W_diag);
    h.mat(L_mat);
    h.vec(J_diag);
    return h.state;
  }

 private:
  struct DeltaCache {
    std::once_flag flag;
    double value = 0.0;
  };
  std::shared_ptr<DeltaCache> cache_ = std::make_shared<DeltaCache>();
};

// Three-point conservative discretization of y -> (-(p y')' + q y) / |w| on
// the grid, in the space L^2(|w| dmu). Fluxes use harmonic-mean p at interior
// faces; the homogeneous Dirichlet value is held at the mirror image of the
// first/last node across the boundary edge, which reproduces the textbook
// stencil on uniform grids.
inline DiscreteModel assemble_operators(const CoefficientSet& c, const Grid& grid) {
  const Eigen::Index n = grid.size();
  DiscreteModel m;
  m.grid = grid;
  m.W_diag.resize(n);
  m.J_diag.resize(n);
  m.L_mat = Eigen::MatrixXd::Zero(n, n);

  Eigen::VectorXd w(n), p(n), q(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = grid.nodes[i];
    w[i] = c.w(mu);
    p[i] = c.p(mu);
    q[i] = c.q(mu);
    if (std::fabs(w[i]) < 1e-300)
      throw SingularWeight("weight vanishes at a grid node");
    if (!(p[i] > 0.0)) throw SingularWeight("diffusion coefficient must be positive");
    m.W_diag[i] = std::fabs(w[i]) * grid.masses[i];
    m.J_diag[i] = w[i] > 0 ? 1.0 : -1.0;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const double cell = grid.masses[i];
    const double aw = std::fabs(w[i]);
    double diag = q[i] / aw;
    if (i + 1 < n) {
      const double d = grid.nodes[i + 1] - grid.nodes[i];
      const double pf = 2.0 * p[i] * p[i + 1] / (p[i] + p[i + 1]);
      const double flux = pf / d;
      m.L_mat(i, i + 1) = -flux / (aw * cell);
      m.L_mat(i + 1, i) = -flux / (std::fabs(w[i + 1]) * grid.masses[i + 1]);
      diag += flux / (aw * cell);
    }
    if (i > 0) {
      const double d = grid.nodes[i] - grid.nodes[i - 1];
      const double pf = 2.0 * p[i] * p[i - 1] / (p[i] + p[i - 1]);
      diag += (pf / d) / (aw * cell);
    }
    if (i == 0) {
      const double d = 2.0 * (grid.nodes[0] - grid.edges[0]);  // mirror ghost
      diag += (p[0] / d) / (aw * cell);
    }
    if (i == n - 1) {
      const double d = 2.0 * (grid.edges[n] - grid.nodes[n - 1]);
      diag += (p[n - 1] / d) / (aw * cell);
    }
    m.L_mat(i, i) = diag;
  }
  return m;
}

// Synthetic J-positive instance on W = I: L = Q^T D Q with D in
// [gap, gap + 4], Q Haar-ish orthogonal, J a random signature with both signs
// present. Deterministic in the seed.
inline DiscreteModel random_jpositive_instance(int n, std::uint64_t seed,
                                               double gap = 0.5) {
  if (n < 2) throw Error("instance needs n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;

  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = gap + 4.0 * unif(rng);
  Eigen::MatrixXd L = Q.transpose() * d.asDiagonal() * Q;
  L = 0.5 * (L + L.transpose()).eval();

  Eigen::VectorXd J(n);
  for (Eigen::Index i = 0; i < n; ++i) J[i] = unif(rng) < 0.5 ? -1.0 : 1.0;
  if ((J.array() > 0).all()) J[0] = -1.0;
  if ((J.array() < 0).all()) J[0] = 1.0;

  DiscreteModel m;
  m.W_diag = Eigen::VectorXd::Ones(n);
  m.L_mat = L;
  m.J_diag = J;
  return m;
}

}  // namespace halfrange
