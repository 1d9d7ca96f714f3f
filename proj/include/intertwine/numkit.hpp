#pragma once

// Dense complex linear algebra used by the Wronskian determinant formulas.

#include <cmath>

#include <Eigen/Dense>

#include "intertwine/errors.hpp"

namespace intertwine::numkit {

/// Determinant via partial-pivot LU. The empty matrix has determinant one.
template <typename Derived>
typename Derived::Scalar lu_det(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw DimensionMismatch("lu_det: matrix is not square");
  if (m.rows() == 0) return Scalar(1);
  return Eigen::PartialPivLU<typename Derived::PlainObject>(m).determinant();
}

/// Hadamard bound: product of the Euclidean row norms. |det M| never exceeds it,
/// which makes it the natural scale for singularity thresholds.
template <typename Derived>
typename Derived::RealScalar hadamard_bound(const Eigen::MatrixBase<Derived>& m) {
  typename Derived::RealScalar bound(1);
  for (Eigen::Index i = 0; i < m.rows(); ++i) bound *= m.row(i).norm();
  return bound;
}

/// |det M| / hadamard_bound(M D^-1) / prod(D), where D holds the column norms.
/// The ratio lies in [0, 1] and does not change when rows or columns are
/// rescaled; zero columns give zero.
template <typename Derived>
typename Derived::RealScalar conditioning_ratio(const Eigen::MatrixBase<Derived>& m,
                                                typename Derived::Scalar det) {
  using Real = typename Derived::RealScalar;
  typename Derived::PlainObject scaled = m;
  Real ratio = std::abs(det);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const Real c = m.col(j).norm();
    if (c == Real(0)) return Real(0);
    scaled.col(j) /= c;
    ratio /= c;
  }
  const Real bound = hadamard_bound(scaled);
  return bound == Real(0) ? Real(0) : ratio / bound;
}

/// conditioning_ratio(M) <= rel.
template <typename Derived>
bool is_singular(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar det,
                 double rel) {
  return conditioning_ratio(m, det) <= rel;
}

template <typename Derived>
typename Derived::PlainObject inverse(const Eigen::MatrixBase<Derived>& m, double rel = 1e-12) {
  if (m.rows() != m.cols()) throw DimensionMismatch("inverse: matrix is not square");
  if (m.rows() == 0) return m;
  Eigen::PartialPivLU<typename Derived::PlainObject> lu(m);
  if (is_singular(m, lu.determinant(), rel)) throw SingularMatrix("inverse: matrix is singular");
  return lu.inverse();
}

/// Sum over columns of det(M with column j replaced by column j of M'). This is
/// the multilinear expansion of d/dx det and needs no inverse.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar det_derivative_by_columns(const Eigen::MatrixBase<DerivedA>& m,
                                                    const Eigen::MatrixBase<DerivedB>& mprime) {
  using Scalar = typename DerivedA::Scalar;
  Scalar sum(0);
  typename DerivedA::PlainObject work = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    work.col(j) = mprime.col(j);
    sum += lu_det(work);
    work.col(j) = m.col(j);
  }
  return sum;
}

/// Jacobi's formula d/dx det M = tr(adj(M) M'). Uses adj(M) = det(M) M^{-1}
/// when M is well conditioned and falls back to the column expansion otherwise.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar det_derivative(const Eigen::MatrixBase<DerivedA>& m,
                                         const Eigen::MatrixBase<DerivedB>& mprime,
                                         double rel = 1e-12) {
  if (m.rows() != m.cols() || mprime.rows() != m.rows() || mprime.cols() != m.cols()) {
    throw DimensionMismatch("det_derivative: shapes differ");
  }
  using Scalar = typename DerivedA::Scalar;
  if (m.rows() == 0) return Scalar(0);
  Eigen::PartialPivLU<typename DerivedA::PlainObject> lu(m);
  const Scalar det = lu.determinant();
  if (is_singular(m, det, rel)) return det_derivative_by_columns(m, mprime);
  typename DerivedA::PlainObject solved = lu.solve(mprime.derived().eval());
  return det * solved.trace();
}

/// Largest absolute entry (the infinity norm of the flattened matrix).
template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return typename Derived::RealScalar(0);
  return m.cwiseAbs().maxCoeff();
}

}  // namespace intertwine::numkit
