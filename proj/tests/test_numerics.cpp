#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

#include "flowrisk/error.hpp"
#include "flowrisk/numerics.hpp"

using namespace flowrisk;

namespace {

DenseMatrix random_matrix(std::mt19937_64& gen, Eigen::Index n, Eigen::Index p) {
  std::normal_distribution<double> nd;
  DenseMatrix X(n, p);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = nd(gen);
  return X;
}

DenseMatrix naive_covariance(const DenseMatrix& X) {
  const auto n = X.rows(), p = X.cols();
  DenseMatrix C(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b) {
      double ma = 0, mb = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        ma += X(i, a);
        mb += X(i, b);
      }
      ma /= static_cast<double>(n);
      mb /= static_cast<double>(n);
      double s = 0;
      for (Eigen::Index i = 0; i < n; ++i) s += (X(i, a) - ma) * (X(i, b) - mb);
      C(a, b) = s / static_cast<double>(n - 1);
    }
  }
  return C;
}

}  // namespace

TEST_CASE("covariance matches a direct double loop") {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 20; ++t) {
    const DenseMatrix X = random_matrix(gen, 30, 6);
    const DenseMatrix C = covariance(X);
    CHECK((C - naive_covariance(X)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(C == C.transpose());
  }
  CHECK_THROWS_AS(covariance(DenseMatrix::Zero(1, 3)), Error);
}

TEST_CASE("two by two eigenproblem") {
  DenseMatrix A(2, 2);
  A << 2, 1, 1, 2;
  const auto e = sym_eigen(A);
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.values(1) == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(e.vectors(0, 0)) - std::sqrt(0.5)) < 1e-12);
  CHECK(std::abs(e.vectors(0, 0) - e.vectors(1, 0)) < 1e-12);
}

TEST_CASE("Jacobi agrees with Eigen's self-adjoint solver") {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index p = 2 + t % 9;
    const DenseMatrix B = random_matrix(gen, p, p);
    const DenseMatrix A = (B + B.transpose()) / 2;
    const auto e = sym_eigen(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(A);
    const Eigen::VectorXd expected = ref.eigenvalues().reverse();
    CHECK((e.values - expected).cwiseAbs().maxCoeff() < 1e-9);
    // Reconstruction, orthonormality and trace.
    const DenseMatrix R = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((R - A).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((e.vectors.transpose() * e.vectors - DenseMatrix::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(e.values.sum() == doctest::Approx(A.trace()).epsilon(1e-10));
    for (Eigen::Index i = 1; i < p; ++i) CHECK(e.values(i - 1) >= e.values(i));
  }
}

TEST_CASE("eigensolver validation") {
  DenseMatrix A(2, 2);
  A << 1, 2, 3, 4;
  CHECK_THROWS_AS(sym_eigen(A), Error);
  CHECK_THROWS_AS(sym_eigen(DenseMatrix::Zero(2, 3)), Error);
  const auto d = sym_eigen(DenseMatrix::Identity(3, 3));
  CHECK(d.values == DenseVector::Ones(3));
}

TEST_CASE("PCA on points along y = x") {
  DenseMatrix X(5, 2);
  X << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
  const auto m = pca_fit(X, 1);
  CHECK(std::abs(m.components(0, 0)) == doctest::Approx(std::sqrt(0.5)));
  CHECK(std::abs(m.components(1, 0)) == doctest::Approx(std::sqrt(0.5)));
  CHECK(m.components(0, 0) > 0);
  CHECK(m.explained_variance(0) == doctest::Approx(5.0));
  CHECK(m.total_variance == doctest::Approx(5.0));
  const DenseMatrix Z = pca_transform(m, X);
  CHECK(Z(0, 0) == doctest::Approx(-2.0 * std::sqrt(2.0)));
}

TEST_CASE("full-rank PCA is an isometry of centered data") {
  std::mt19937_64 gen(3);
  const DenseMatrix X = random_matrix(gen, 40, 5);
  const auto m = pca_fit(X, 5);
  const DenseMatrix Z = pca_transform(m, X);
  const DenseMatrix centered = X.rowwise() - X.colwise().mean();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      CHECK(((Z.row(i) - Z.row(j)).norm()) == doctest::Approx((centered.row(i) - centered.row(j)).norm()));
    }
  }
  CHECK(m.explained_variance.sum() == doctest::Approx(m.total_variance));
  // Component scores are uncorrelated with the stated variances.
  const DenseMatrix Cz = covariance(Z);
  for (Eigen::Index a = 0; a < 5; ++a) {
    for (Eigen::Index b = 0; b < 5; ++b) {
      CHECK(Cz(a, b) == doctest::Approx(a == b ? m.explained_variance(a) : 0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("components chosen by explained variance") {
  DenseVector v(4);
  v << 5, 3, 1.5, 0.5;
  CHECK(components_for_variance(v, 0.5) == 1);
  CHECK(components_for_variance(v, 0.8) == 2);
  CHECK(components_for_variance(v, 0.95) == 3);
  CHECK(components_for_variance(v, 1.0) == 4);

  std::mt19937_64 gen(4);
  DenseMatrix X = random_matrix(gen, 100, 3);
  X.col(0) *= 10;
  const auto m = pca_fit(X, 0, 0.9);
  CHECK(m.k() >= 1);
  CHECK(m.explained_variance.sum() >= 0.9 * m.total_variance);
  if (m.k() > 1) CHECK(m.explained_variance.head(m.k() - 1).sum() < 0.9 * m.total_variance);
}

TEST_CASE("PCA validation") {
  const DenseMatrix X = DenseMatrix::Ones(4, 3);
  CHECK_THROWS_AS(pca_fit(X, 4), Error);
  CHECK_THROWS_AS(pca_fit(X, -1), Error);
  try {
    pca_fit(X, 7);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadK);
  }
}
