#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "halfrange/errors.hpp"
#include "halfrange/model.hpp"

namespace halfrange {

// Spectral data of B = J*L in the Krein space ([x,y] = (Jx,y)_W). Columns of
// V are eigenvectors of B normalized to [v_i, v_i] = kappa_i = sgn(lambda_i),
// mutually Krein-orthogonal, with the largest-magnitude component positive.
struct KreinDecomposition {
  DiscreteModel model;
  Eigen::VectorXd lambda;          // real, nonzero
  Eigen::MatrixXd V;               // eigenvectors, one per column
  Eigen::VectorXi kappa;           // +/-1 Krein signs
  std::vector<int> plus, minus;    // column indices by sign of lambda
  Eigen::MatrixXd proj_plus, proj_minus;  // projections onto span of each family

  // Norm-equivalence constants between the intrinsic (Krein) norm and the
  // W-norm on each invariant subspace, and the cross-projection contraction
  // ratios measured from the canonical signature subspaces.
  double gamma_plus = 0, gamma_minus = 0, gamma = 0;
  double beta_plus = 0, beta_minus = 0, beta_proj = 0;

  Eigen::Index size() const { return lambda.size(); }
  Eigen::Index n_plus() const { return static_cast<Eigen::Index>(plus.size()); }
  Eigen::Index n_minus() const { return static_cast<Eigen::Index>(minus.size()); }

  // Krein product [x, y] = (Jx, y)_W.
  double krein(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return (model.W_diag.array() * model.J_diag.array() * x.array() * y.array()).sum();
  }

  // Coordinates of x in the eigenbasis: x = sum_i coord_i * v_i.
  Eigen::VectorXd coordinates(const Eigen::VectorXd& x) const {
    Eigen::VectorXd wjx = (model.W_diag.array() * model.J_diag.array() * x.array()).matrix();
    Eigen::VectorXd c = V.transpose() * wjx;
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= kappa[i];
    return c;
  }

  // Intrinsic norm of a vector known to lie in the plus (resp. minus)
  // family's span: Euclidean norm of its coordinates there.
  Eigen::MatrixXd family(const std::vector<int>& idx) const {
    Eigen::MatrixXd F(V.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) F.col(static_cast<Eigen::Index>(j)) = V.col(idx[j]);
    return F;
  }
};

namespace detail {

// P^B over a set of columns: sum_i kappa_i v_i [., v_i].
inline Eigen::MatrixXd family_projection(const KreinDecomposition& k,
                                         const std::vector<int>& idx) {
  const Eigen::Index n = k.V.rows();
  const Eigen::VectorXd wj = (k.model.W_diag.array() * k.model.J_diag.array()).matrix();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int j : idx) {
    const Eigen::VectorXd v = k.V.col(j);
    P.noalias() += static_cast<double>(k.kappa[j]) * v * (wj.array() * v.array()).matrix().transpose();
  }
  return P;
}

}  // namespace detail

// Eigendecomposition route: S = L^{1/2} via the W-symmetrized eigensolve,
// M = S J S shares B's spectrum and is W-symmetric, eigenvectors map back
// through S^{-1}. Krein orthonormality then comes for free: in symmetrized
// coordinates the Krein Gram matrix of the raw eigenvectors is M^{-1}.
inline KreinDecomposition decompose(const DiscreteModel& m,
                                    double zero_tol = 1e-12) {
  const Eigen::Index n = m.size();
  if (n < 1 || m.L_mat.rows() != n || m.L_mat.cols() != n || m.J_diag.size() != n)
    throw Error("inconsistent model dimensions");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(m.W_diag[i] > 0.0)) throw Error("weights must be positive");
    if (std::fabs(std::fabs(m.J_diag[i]) - 1.0) > 0.0)
      throw Error("signature entries must be +/-1");
  }

  const Eigen::VectorXd s = m.W_diag.array().sqrt();
  Eigen::MatrixXd Lsym = s.asDiagonal() * m.L_mat * s.cwiseInverse().asDiagonal();
  Lsym = 0.5 * (Lsym + Lsym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esl(Lsym);
  if (esl.info() != Eigen::Success) throw Error("eigensolver failed on L");
  const Eigen::VectorXd dl = esl.eigenvalues();
  if (!(dl.minCoeff() > zero_tol * std::max(1e-300, dl.maxCoeff())))
    throw NearZeroEigenvalue("collision operator is not positive on the grid");

  const Eigen::MatrixXd U = esl.eigenvectors();
  const Eigen::VectorXd dsq = dl.array().sqrt();
  Eigen::MatrixXd P = U * dsq.asDiagonal() * U.transpose();        // Lsym^{1/2}
  Eigen::MatrixXd Pinv = U * dsq.cwiseInverse().asDiagonal() * U.transpose();

  Eigen::MatrixXd Msym = P * m.J_diag.asDiagonal() * P;
  Msym = 0.5 * (Msym + Msym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esm(Msym);
  if (esm.info() != Eigen::Success) throw Error("eigensolver failed on S J S");

  KreinDecomposition k;
  k.model = m;
  k.lambda = esm.eigenvalues();
  const double lam_max = k.lambda.cwiseAbs().maxCoeff();
  if (!(k.lambda.cwiseAbs().minCoeff() > zero_tol * lam_max))
    throw NearZeroEigenvalue("spectrum of J L reaches the zero-tolerance floor");

  k.V = s.cwiseInverse().asDiagonal() * (Pinv * esm.eigenvectors());
  k.kappa.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // [v_i, v_i] = 1/lambda_i before scaling; normalize to +/-1.
    k.V.col(i) *= std::sqrt(std::fabs(k.lambda[i]));
    Eigen::Index at = 0;
    k.V.col(i).cwiseAbs().maxCoeff(&at);
    if (k.V(at, i) < 0) k.V.col(i) *= -1.0;
    k.kappa[i] = k.lambda[i] > 0 ? 1 : -1;
    (k.lambda[i] > 0 ? k.plus : k.minus).push_back(static_cast<int>(i));
  }

  k.proj_plus = detail::family_projection(k, k.plus);
  k.proj_minus = detail::family_projection(k, k.minus);

  // Embedding constants. On each family the intrinsic norm of sum c_i v_i is
  // |c|_2, so gamma = 1/sqrt(max eig of the W-Gram of the family).
  auto gamma_of = [&](const std::vector<int>& idx) {
    if (idx.empty()) return 1.0;
    const Eigen::MatrixXd F = k.family(idx);
    const Eigen::MatrixXd G = F.transpose() * m.W_diag.asDiagonal() * F;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    return 1.0 / std::sqrt(es.eigenvalues().maxCoeff());
  };
  k.gamma_plus = gamma_of(k.plus);
  k.gamma_minus = gamma_of(k.minus);
  k.gamma = std::min(k.gamma_plus, k.gamma_minus);

  // Contraction ratios: for g in a canonical signature subspace, the
  // coordinate map g -> (coords on same-sign family, coords on other family)
  // gives beta as the largest generalized singular value.
  const Eigen::VectorXd wj = (m.W_diag.array() * m.J_diag.array()).matrix();
  Eigen::MatrixXd C = k.V.transpose() * wj.asDiagonal();  // rows: [., v_i]
  for (Eigen::Index i = 0; i < n; ++i) C.row(i) *= static_cast<double>(k.kappa[i]);
  std::vector<int> mask_plus, mask_minus;
  for (Eigen::Index i = 0; i < n; ++i)
    (m.J_diag[i] > 0 ? mask_plus : mask_minus).push_back(static_cast<int>(i));
  auto submatrix = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXd S(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < cols.size(); ++b)
        S(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = C(rows[a], cols[b]);
    return S;
  };
  auto beta_of = [&](const std::vector<int>& same_rows, const std::vector<int>& other_rows,
                     const std::vector<int>& cols) {
    if (cols.empty() || other_rows.empty()) return 0.0;
    if (same_rows.size() != cols.size())
      throw Error("signature of J L disagrees with the signature of J");
    const Eigen::MatrixXd A = submatrix(same_rows, cols);
    const Eigen::MatrixXd Bm = submatrix(other_rows, cols);
    const Eigen::MatrixXd X = A.transpose().partialPivLu().solve(Bm.transpose()).transpose();
    return X.jacobiSvd().singularValues()[0];
  };
  k.beta_plus = beta_of(k.plus, k.minus, mask_plus);
  k.beta_minus = beta_of(k.minus, k.plus, mask_minus);
  k.beta_proj = std::max(k.beta_plus, k.beta_minus);

  return k;
}

// Spectral projection E((lo, hi)): sum of kappa_i v_i [., v_i] over
// eigenvalues inside the interval. Endpoints must stay clear of the spectrum.
inline Eigen::MatrixXd spectral_projection(const KreinDecomposition& k, double lo,
                                           double hi, double tol = 1e-12) {
  if (!(lo < hi)) throw Error("empty spectral interval");
  const double scale = k.lambda.cwiseAbs().maxCoeff();
  for (double e : {lo, hi}) {
    if (!std::isfinite(e)) continue;
    if ((k.lambda.array() - e).abs().minCoeff() <= tol * scale)
      throw EndpointOnSpectrum("interval endpoint touches an eigenvalue");
  }
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < k.lambda.size(); ++i)
    if (k.lambda[i] > lo && k.lambda[i] < hi) idx.push_back(static_cast<int>(i));
  return detail::family_projection(k, idx);
}

}  // namespace halfrange
