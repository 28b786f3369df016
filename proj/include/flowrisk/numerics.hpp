#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "flowrisk/error.hpp"

namespace flowrisk {

/// Row-major dense matrix; rows are observations.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = Matrix<double>;
using DenseVector = Vector<double>;

/// Unbiased sample covariance of the column-centered data.
template <typename Derived>
Matrix<typename Derived::Scalar> covariance(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  if (X.rows() < 2) throw Error(ErrorKind::TooFewRows, "covariance needs at least 2 rows");
  const Vector<Scalar> mean = X.colwise().mean().transpose();
  const Matrix<Scalar> centered = X.rowwise() - mean.transpose();
  Matrix<Scalar> cov = (centered.transpose() * centered) / static_cast<Scalar>(X.rows() - 1);
  // Exact symmetry regardless of summation order.
  return (cov + cov.transpose()) / Scalar(2);
}

template <typename Scalar>
struct SymEigen {
  Vector<Scalar> values;   // descending
  Matrix<Scalar> vectors;  // column i pairs with values(i)
  int sweeps = 0;
};

struct JacobiOptions {
  int max_sweeps = 100;
  double symmetry_tolerance = 1e-8;
  double relative_tolerance = 1e-12;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Converged when the
/// off-diagonal Frobenius norm drops below relative_tolerance * ||A||_F.
template <typename Derived>
SymEigen<typename Derived::Scalar> sym_eigen(const Eigen::MatrixBase<Derived>& A_in, const JacobiOptions& opt = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index p = A_in.rows();
  if (A_in.cols() != p) throw Error(ErrorKind::NotSymmetric, "matrix is not square");
  Matrix<Scalar> A = A_in;
  const Scalar norm = A.norm();
  const Scalar asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (p > 0 && asym > Scalar(opt.symmetry_tolerance) * std::max(Scalar(1), norm)) {
    throw Error(ErrorKind::NotSymmetric, "matrix is not symmetric");
  }

  Matrix<Scalar> V = Matrix<Scalar>::Identity(p, p);
  auto off_norm = [&] {
    Scalar s = 0;
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = i + 1; j < p; ++j) s += 2 * A(i, j) * A(i, j);
    return std::sqrt(s);
  };

  const Scalar threshold = Scalar(opt.relative_tolerance) * norm;
  int sweep = 0;
  bool converged = off_norm() <= threshold;
  while (!converged && sweep < opt.max_sweeps) {
    ++sweep;
    for (Eigen::Index i = 0; i < p - 1; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        const Scalar aij = A(i, j);
        if (aij == Scalar(0)) continue;
        // Rotation angle zeroing A(i,j) (Rutishauser's stable form).
        const Scalar theta = (A(j, j) - A(i, i)) / (2 * aij);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const Scalar c = 1 / std::sqrt(t * t + 1);
        const Scalar s = t * c;

        for (Eigen::Index k = 0; k < p; ++k) {
          const Scalar aki = A(k, i), akj = A(k, j);
          A(k, i) = c * aki - s * akj;
          A(k, j) = s * aki + c * akj;
        }
        for (Eigen::Index k = 0; k < p; ++k) {
          const Scalar aik = A(i, k), ajk = A(j, k);
          A(i, k) = c * aik - s * ajk;
          A(j, k) = s * aik + c * ajk;
        }
        A(i, j) = A(j, i) = Scalar(0);
        for (Eigen::Index k = 0; k < p; ++k) {
          const Scalar vki = V(k, i), vkj = V(k, j);
          V(k, i) = c * vki - s * vkj;
          V(k, j) = s * vki + c * vkj;
        }
      }
    }
    converged = off_norm() <= threshold;
  }
  if (!converged) throw Error(ErrorKind::NonConvergence, "Jacobi did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return A(a, a) > A(b, b); });

  SymEigen<Scalar> out;
  out.values.resize(p);
  out.vectors.resize(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    out.values(k) = A(order[k], order[k]);
    out.vectors.col(k) = V.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

template <typename Scalar>
struct PCAModel {
  Vector<Scalar> means;
  Matrix<Scalar> components;           // p x k, orthonormal columns
  Vector<Scalar> explained_variance;   // k, descending
  Scalar total_variance = 0;           // trace of the covariance

  Eigen::Index k() const { return components.cols(); }
};

/// Flips each column so its largest-magnitude entry is positive (first such
/// entry on ties).
template <typename Scalar>
void canonicalize_signs(Matrix<Scalar>& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < vectors.rows(); ++r) {
      if (std::abs(vectors(r, c)) > std::abs(vectors(arg, c))) arg = r;
    }
    if (vectors.rows() > 0 && vectors(arg, c) < 0) vectors.col(c) *= Scalar(-1);
  }
}

/// Smallest k whose leading eigenvalues explain at least `fraction` of the total.
template <typename Scalar>
Eigen::Index components_for_variance(const Vector<Scalar>& eigenvalues, double fraction) {
  const Scalar total = eigenvalues.cwiseMax(Scalar(0)).sum();
  if (total <= 0) return 1;
  Scalar acc = 0;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    acc += std::max(eigenvalues(k), Scalar(0));
    if (acc >= Scalar(fraction) * total) return k + 1;
  }
  return eigenvalues.size();
}

/// PCA from the covariance eigendecomposition. k == 0 selects k by
/// `variance_fraction`.
template <typename Derived>
PCAModel<typename Derived::Scalar> pca_fit(const Eigen::MatrixBase<Derived>& X, Eigen::Index k,
                                           double variance_fraction = 0.95) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index p = X.cols();
  if (k < 0 || k > p || p == 0) throw Error(ErrorKind::BadK, "PCA needs 1 <= k <= p");
  const Matrix<Scalar> cov = covariance(X);
  auto eig = sym_eigen(cov);
  if (k == 0) k = components_for_variance(eig.values, variance_fraction);

  PCAModel<Scalar> model;
  model.means = X.colwise().mean().transpose();
  model.components = eig.vectors.leftCols(k);
  canonicalize_signs(model.components);
  model.explained_variance = eig.values.head(k).cwiseMax(Scalar(0));
  model.total_variance = cov.trace();
  return model;
}

template <typename Scalar, typename Derived>
Matrix<Scalar> pca_transform(const PCAModel<Scalar>& model, const Eigen::MatrixBase<Derived>& X) {
  if (X.cols() != model.means.size()) throw Error(ErrorKind::InvalidArgument, "PCA input width mismatch");
  return (X.rowwise() - model.means.transpose()) * model.components;
}

}  // namespace flowrisk
