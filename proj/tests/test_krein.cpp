// Indefinite spectral decomposition of J*L: eigenpairs, signs, projections,
// and the embedding/contraction constants.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "halfrange/krein.hpp"
#include "halfrange/model.hpp"
#include "oracles.hpp"

using halfrange::decompose;
using halfrange::DiscreteModel;
using halfrange::KreinDecomposition;
using halfrange::random_jpositive_instance;
using halfrange::spectral_projection;

namespace {

DiscreteModel two_by_two() {
  DiscreteModel m;
  m.W_diag = Eigen::VectorXd::Ones(2);
  m.L_mat.resize(2, 2);
  m.L_mat << 2.0, 1.0, 1.0, 2.0;
  m.J_diag.resize(2);
  m.J_diag << 1.0, -1.0;
  return m;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("two-dimensional model has closed-form eigenstructure") {
  const double r3 = std::sqrt(3.0);
  const auto k = decompose(two_by_two());

  REQUIRE(k.size() == 2);
  CHECK(std::fabs(k.lambda[0] + r3) <= 1e-12);
  CHECK(std::fabs(k.lambda[1] - r3) <= 1e-12);
  CHECK(k.kappa[0] == -1);
  CHECK(k.kappa[1] == 1);
  REQUIRE(k.plus == std::vector<int>{1});
  REQUIRE(k.minus == std::vector<int>{0});

  // v_plus ~ (1, sqrt(3)-2) normalized to [v,v] = +1 with positive leading
  // component; v_minus ~ (-1, 2+sqrt(3)) normalized to [v,v] = -1.
  const double cp = 1.0 / std::sqrt(4.0 * r3 - 6.0);
  CHECK(std::fabs(k.V(0, 1) - cp) <= 1e-12);
  CHECK(std::fabs(k.V(1, 1) - cp * (r3 - 2.0)) <= 1e-12);
  const double cm = 1.0 / std::sqrt(6.0 + 4.0 * r3);
  CHECK(std::fabs(k.V(0, 0) + cm) <= 1e-12);
  CHECK(std::fabs(k.V(1, 0) - cm * (2.0 + r3)) <= 1e-12);

  // Frozen constants: beta = 2 - sqrt(3), gamma = 3^{1/4} / sqrt(2).
  CHECK(std::fabs(k.beta_plus - (2.0 - r3)) <= 1e-10);
  CHECK(std::fabs(k.beta_minus - (2.0 - r3)) <= 1e-10);
  CHECK(std::fabs(k.beta_proj - (2.0 - r3)) <= 1e-10);
  const double gamma_exact = std::pow(3.0, 0.25) / std::sqrt(2.0);
  CHECK(std::fabs(k.gamma_plus - gamma_exact) <= 1e-10);
  CHECK(std::fabs(k.gamma_minus - gamma_exact) <= 1e-10);

  // Cross-checked against the general dense eigensolve.
  const auto d = oracle::dense_modes(k.model);
  CHECK(std::fabs(d.lambda[0] + r3) <= 1e-12);
  CHECK(std::fabs(d.lambda[1] - r3) <= 1e-12);
  for (int j = 0; j < 2; ++j) {
    const Eigen::VectorXd a = k.V.col(j).normalized();
    const Eigen::VectorXd b = d.V.col(j);
    CHECK(std::fabs(std::fabs(a.dot(b)) - 1.0) <= 1e-12);
  }
}

TEST_CASE("eigenpairs satisfy the defining equation with small residual") {
  for (int seed : {1, 2, 3, 4, 5}) {
    const auto m = random_jpositive_instance(24, 4000 + seed);
    const auto k = decompose(m);
    const Eigen::MatrixXd B = m.J_diag.asDiagonal() * m.L_mat;
    const double scale = B.norm();
    for (Eigen::Index j = 0; j < k.size(); ++j) {
      const double res = (B * k.V.col(j) - k.lambda[j] * k.V.col(j)).norm() /
                         std::max(1.0, k.V.col(j).norm());
      CHECK(res <= 1e-10 * scale);
      CHECK(k.lambda[j] != 0.0);
      CHECK(k.kappa[j] == (k.lambda[j] > 0 ? 1 : -1));
    }
    // Eigenvalues agree with the general dense route.
    const auto d = oracle::dense_modes(m);
    for (Eigen::Index j = 0; j < k.size(); ++j)
      CHECK(std::fabs(k.lambda[j] - d.lambda[j]) <= 1e-9 * scale);
  }
}

TEST_CASE("eigenvectors are orthonormal in the indefinite product") {
  const auto m = random_jpositive_instance(30, 77);
  const auto k = decompose(m);
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    for (Eigen::Index j = 0; j < k.size(); ++j) {
      const double want = (i == j) ? static_cast<double>(k.kappa[i]) : 0.0;
      CHECK(std::fabs(k.krein(k.V.col(i), k.V.col(j)) - want) <= 1e-10);
    }
  }
  // The bilinear form agrees with the raw component-wise oracle.
  const Eigen::VectorXd x = oracle::randn(m.size(), 11);
  const Eigen::VectorXd y = oracle::randn(m.size(), 12);
  CHECK(k.krein(x, y) ==
        Catch::Approx(oracle::krein_product(m, x, y)).epsilon(1e-13));
}

TEST_CASE("definite signature reduces to an ordinary spectral decomposition") {
  DiscreteModel m;
  const int n = 12;
  m = random_jpositive_instance(n, 5);
  m.J_diag = Eigen::VectorXd::Ones(n);  // J = I: B = L symmetric positive
  const auto k = decompose(m);
  CHECK(k.n_plus() == n);
  CHECK(k.n_minus() == 0);
  CHECK(k.lambda.minCoeff() > 0.0);
  CHECK((k.proj_plus - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-10);
  CHECK(k.proj_minus.norm() <= 1e-12);
  CHECK(k.beta_proj == 0.0);
  // Ordinary orthonormality.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(std::fabs(k.V.col(i).dot(k.V.col(j)) - (i == j ? 1.0 : 0.0)) <= 1e-10);
}

TEST_CASE("diagonal models decompose into canonical coordinates") {
  DiscreteModel m;
  const int n = 6;
  m.W_diag = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd d(n);
  d << 0.7, 1.3, 2.0, 2.6, 3.1, 4.0;
  m.L_mat = d.asDiagonal();
  m.J_diag.resize(n);
  m.J_diag << 1, -1, 1, -1, 1, -1;
  const auto k = decompose(m);

  // Uncoupled components: no cross-contraction, embedding constant one.
  CHECK(k.beta_plus == 0.0);
  CHECK(k.beta_minus == 0.0);
  CHECK(std::fabs(k.gamma_plus - 1.0) <= 1e-12);
  CHECK(std::fabs(k.gamma_minus - 1.0) <= 1e-12);

  // Eigenvectors are signed canonical basis vectors.
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index at = 0;
    k.V.col(j).cwiseAbs().maxCoeff(&at);
    CHECK(std::fabs(k.V(at, j) - 1.0) <= 1e-12);
    CHECK(k.V.col(j).cwiseAbs().sum() == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::fabs(k.lambda[j] - m.J_diag[at] * d[at]) <= 1e-12);
  }
}

TEST_CASE("cross-family contraction ratio stays below one") {
  for (int seed = 0; seed < 25; ++seed) {
    const auto m = random_jpositive_instance(6 + seed % 20, 6000 + seed);
    const auto k = decompose(m);
    CHECK(k.beta_plus >= 0.0);
    CHECK(k.beta_minus >= 0.0);
    CHECK(k.beta_proj < 1.0);
    CHECK(k.gamma > 0.0);
    CHECK(k.gamma <= 1.0 + 1e-12);  // intrinsic norm never exceeds the W-norm
  }
}

TEST_CASE("spectral projections are idempotent, complementary, and commute") {
  const auto m = random_jpositive_instance(20, 321);
  const auto k = decompose(m);
  const Eigen::MatrixXd B = m.J_diag.asDiagonal() * m.L_mat;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(20, 20);

  CHECK((k.proj_plus * k.proj_plus - k.proj_plus).norm() <= 1e-10);
  CHECK((k.proj_minus * k.proj_minus - k.proj_minus).norm() <= 1e-10);
  CHECK((k.proj_plus + k.proj_minus - I).norm() <= 1e-10);
  CHECK((k.proj_plus * k.proj_minus).norm() <= 1e-10);
  CHECK((k.proj_plus * B - B * k.proj_plus).norm() <= 1e-8 * B.norm());

  // Projections reproduce the members of their own family and kill the rest.
  for (int j : k.plus) {
    CHECK((k.proj_plus * k.V.col(j) - k.V.col(j)).norm() <= 1e-10);
    CHECK((k.proj_minus * k.V.col(j)).norm() <= 1e-10);
  }
}

TEST_CASE("interval projections add over disjoint intervals") {
  const auto m = random_jpositive_instance(16, 99);
  const auto k = decompose(m);
  const double lo = k.lambda.minCoeff(), hi = k.lambda.maxCoeff();

  const Eigen::MatrixXd all = spectral_projection(k, -kInf, kInf);
  CHECK((all - Eigen::MatrixXd::Identity(16, 16)).norm() <= 1e-10);

  // Full positive axis coincides with the stored plus-family projection.
  const Eigen::MatrixXd pos = spectral_projection(k, 0.0, kInf);
  CHECK((pos - k.proj_plus).norm() == 0.0);

  // A gap interval projects to zero.
  double gap_lo = 0.0, gap_hi = 0.0, best = -1.0;
  Eigen::VectorXd sorted = k.lambda;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  for (Eigen::Index i = 0; i + 1 < sorted.size(); ++i) {
    const double g = sorted[i + 1] - sorted[i];
    if (g > best) {
      best = g;
      gap_lo = sorted[i] + 0.25 * g;
      gap_hi = sorted[i] + 0.75 * g;
    }
  }
  CHECK(spectral_projection(k, gap_lo, gap_hi).norm() == 0.0);

  // Additivity and multiplicativity across a split of the positive axis.
  const double mid = 0.5 * (0.0 + hi);
  const double cut = [&] {
    // pick a cut point away from every eigenvalue
    double c = mid;
    while ((k.lambda.array() - c).abs().minCoeff() < 1e-6) c += 1e-3;
    return c;
  }();
  const Eigen::MatrixXd a = spectral_projection(k, 0.0, cut);
  const Eigen::MatrixXd b = spectral_projection(k, cut, kInf);
  CHECK((a + b - pos).norm() <= 1e-10);
  CHECK((a * b).norm() <= 1e-10);
  CHECK((a * pos - a).norm() <= 1e-10);  // intersection with a superset

  CHECK_THROWS_AS(spectral_projection(k, lo, lo), halfrange::Error);
  CHECK_THROWS_AS(spectral_projection(k, k.lambda[3], kInf),
                  halfrange::EndpointOnSpectrum);
}

TEST_CASE("degenerate clusters still produce the right projection") {
  // L = I with indefinite J: eigenvalues +/-1 with high multiplicity; the
  // projections must match the signature masks exactly.
  DiscreteModel m;
  const int n = 8;
  m.W_diag = Eigen::VectorXd::Ones(n);
  m.L_mat = Eigen::MatrixXd::Identity(n, n);
  m.J_diag.resize(n);
  m.J_diag << 1, 1, -1, 1, -1, -1, 1, -1;
  const auto k = decompose(m);
  Eigen::MatrixXd mask_plus = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    if (m.J_diag[i] > 0) mask_plus(i, i) = 1.0;
  CHECK((k.proj_plus - mask_plus).norm() <= 1e-10);

  // Definite J with a rotated two-fold eigenvalue: the projection onto the
  // cluster equals the plane the rotation acts in, independent of the basis
  // the eigensolver picked inside the cluster.
  DiscreteModel m2;
  m2.W_diag = Eigen::VectorXd::Ones(3);
  m2.J_diag = Eigen::VectorXd::Ones(3);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(3, 3);
  const double th = 0.3;
  R(0, 0) = std::cos(th);
  R(0, 1) = -std::sin(th);
  R(1, 0) = std::sin(th);
  R(1, 1) = std::cos(th);
  Eigen::VectorXd d(3);
  d << 2.0, 2.0, 5.0;
  m2.L_mat = R * d.asDiagonal() * R.transpose();
  const auto k2 = decompose(m2);
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(3, 3);
  want(0, 0) = want(1, 1) = 1.0;
  CHECK((spectral_projection(k2, 1.5, 2.5) - want).norm() <= 1e-10);
}

TEST_CASE("projections match the independent dense-eigensolve assembly") {
  const auto m = random_jpositive_instance(14, 2024);
  const auto k = decompose(m);
  const auto dm = oracle::dense_modes(m);
  const Eigen::MatrixXd Ep = oracle::dense_projection(m, dm, 0.0, kInf);
  const Eigen::MatrixXd Em =
      oracle::dense_projection(m, dm, -kInf, 0.0);
  CHECK((k.proj_plus - Ep).norm() <= 1e-8);
  CHECK((k.proj_minus - Em).norm() <= 1e-8);
}

TEST_CASE("coordinates invert the eigenbasis expansion") {
  const auto m = random_jpositive_instance(18, 8);
  const auto k = decompose(m);
  const Eigen::VectorXd x = oracle::randn(18, 3);
  const Eigen::VectorXd c = k.coordinates(x);
  CHECK((k.V * c - x).norm() <= 1e-9 * x.norm());
}

TEST_CASE("degenerate or inconsistent models are rejected") {
  DiscreteModel m = two_by_two();
  m.W_diag[0] = 0.0;
  CHECK_THROWS_AS(decompose(m), halfrange::Error);

  m = two_by_two();
  m.J_diag[1] = 0.5;
  CHECK_THROWS_AS(decompose(m), halfrange::Error);

  m = two_by_two();
  m.L_mat.resize(3, 3);
  m.L_mat.setIdentity();
  CHECK_THROWS_AS(decompose(m), halfrange::Error);

  // Collision operator with an eigenvalue at the zero floor.
  DiscreteModel tiny;
  tiny.W_diag = Eigen::VectorXd::Ones(2);
  tiny.L_mat = Eigen::Vector2d(1e-16, 1.0).asDiagonal();
  tiny.J_diag = Eigen::Vector2d(1.0, -1.0);
  CHECK_THROWS_AS(decompose(tiny), halfrange::NearZeroEigenvalue);
}

TEST_CASE("decomposition is deterministic") {
  const auto m = random_jpositive_instance(15, 1234);
  const auto a = decompose(m);
  const auto b = decompose(m);
  CHECK(a.lambda == b.lambda);
  CHECK(a.V == b.V);
  CHECK(a.beta_proj == b.beta_proj);
  CHECK(a.gamma == b.gamma);
}
