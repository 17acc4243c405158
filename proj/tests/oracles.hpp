#pragma once

// Independent cross-check routes used by the test suite.  Everything here
// deliberately avoids the code paths of the library under test:
//   * dense_modes()      — general (non-symmetric) eigensolve of J*L, while the
//                          library routes through the symmetrized square root.
//   * krein_product()    — indefinite product evaluated entrywise from W and J.
//   * simpson()/adaptive — plain composite quadrature for convolution and
//                          integral checks.
//   * randn()/rand_side()— seeded reproducible random data.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "halfrange/model.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Indefinite product [x, y] = (J x, y)_W computed from the raw definition.
inline double krein_product(const halfrange::DiscreteModel& m,
                            const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc += m.W_diag[i] * m.J_diag[i] * x[i] * y[i];
  }
  return acc;
}

inline double weighted_norm(const halfrange::DiscreteModel& m,
                            const Eigen::VectorXd& x) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc += m.W_diag[i] * x[i] * x[i];
  }
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// General dense eigensolve of the (non-symmetric) matrix J*L.  Returns real
// eigenvalues sorted ascending with unit-Euclidean eigenvectors whose largest
// magnitude entry is positive.  Throws if any eigenvalue or eigenvector has a
// non-negligible imaginary part — for admissible models the spectrum is real.
struct DenseModes {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd V;  // columns match lambda
};

inline DenseModes dense_modes(const halfrange::DiscreteModel& m) {
  const Eigen::MatrixXd B = m.J_diag.asDiagonal() * m.L_mat;
  Eigen::EigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("dense eigensolve failed");
  }
  const double scale = B.norm();
  const Eigen::Index n = B.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(ev[i].imag()) > 1e-9 * std::max(1.0, scale)) {
      throw std::runtime_error("complex eigenvalue in dense oracle");
    }
  }
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return ev[a].real() < ev[b].real();
  });
  DenseModes out;
  out.lambda.resize(n);
  out.V.resize(n, n);
  const auto vec = es.eigenvectors();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.lambda[k] = ev[src].real();
    Eigen::VectorXd col(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> z = vec(i, src);
      if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z))) {
        throw std::runtime_error("complex eigenvector in dense oracle");
      }
      col[i] = z.real();
    }
    col.normalize();
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col[imax] < 0.0) col = -col;
    out.V.col(k) = col;
  }
  return out;
}

// Spectral projection onto the eigenvalues of J*L inside (lo, hi), built from
// the dense oracle modes and the indefinite normalization — independent of the
// library's projection assembly.
inline Eigen::MatrixXd dense_projection(const halfrange::DiscreteModel& m,
                                        const DenseModes& d, double lo,
                                        double hi) {
  const Eigen::Index n = d.lambda.size();
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (d.lambda[k] <= lo || d.lambda[k] >= hi) continue;
    const Eigen::VectorXd v = d.V.col(k);
    const double g = krein_product(m, v, v);  // nonzero for simple real modes
    // E += v [v, .] / [v, v]
    Eigen::RowVectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      w[i] = m.W_diag[i] * m.J_diag[i] * v[i] / g;
    }
    E += v * w;
  }
  return E;
}

// ---------------------------------------------------------------------------
// Composite Simpson rule with a fixed (even) number of panels.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int panels) {
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) {
    acc += f(a + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

// ---------------------------------------------------------------------------
// Seeded random helpers (mt19937_64 — reproducible across platforms).
inline Eigen::VectorXd randn(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

// Random vector supported on the requested sign component of J (zeros on the
// opposite component).
inline Eigen::VectorXd rand_side(const halfrange::DiscreteModel& m,
                                 std::uint64_t seed, int sign) {
  Eigen::VectorXd v = randn(m.size(), seed);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if ((sign > 0 && m.J_diag[i] < 0) || (sign < 0 && m.J_diag[i] > 0)) {
      v[i] = 0.0;
    }
  }
  return v;
}

}  // namespace oracle
