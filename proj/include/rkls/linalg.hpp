#pragma once

// Dense real linear algebra on row-major Eigen storage. Rows of A are the
// equations a_i of Ax = b, so row access is the hot path.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>

#include "rkls/errors.hpp"

namespace rkls {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

namespace detail {

inline void require(bool ok, const char* op, Eigen::Index got, Eigen::Index want) {
  if (!ok) {
    throw DimensionError(std::string(op) + ": length " + std::to_string(got) +
                         " does not match " + std::to_string(want));
  }
}

}  // namespace detail

/// Throws NumericError if any entry is NaN or infinite.
template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + " has non-finite entries");
}

/// result[i] = <a_i, v>.
template <typename MatDerived, typename VecDerived>
Vector<typename MatDerived::Scalar> matvec(const Eigen::MatrixBase<MatDerived>& A,
                                           const Eigen::MatrixBase<VecDerived>& v) {
  detail::require(v.size() == A.cols(), "matvec", v.size(), A.cols());
  Vector<typename MatDerived::Scalar> out(A.rows());
  out.noalias() = A * v;
  return out;
}

/// A^T v.
template <typename MatDerived, typename VecDerived>
Vector<typename MatDerived::Scalar> transpose_matvec(const Eigen::MatrixBase<MatDerived>& A,
                                                     const Eigen::MatrixBase<VecDerived>& v) {
  detail::require(v.size() == A.rows(), "transpose_matvec", v.size(), A.rows());
  Vector<typename MatDerived::Scalar> out(A.cols());
  out.noalias() = A.transpose() * v;
  return out;
}

template <typename Derived>
typename Derived::Scalar row_norm_sq(const Eigen::MatrixBase<Derived>& A, Eigen::Index i) {
  return A.row(i).squaredNorm();
}

template <typename Derived>
typename Derived::Scalar frobenius_norm_sq(const Eigen::MatrixBase<Derived>& A) {
  return A.squaredNorm();
}

/// A applied `ell` times to v. ell = 0 returns v; ell >= 2 needs A square.
template <typename MatDerived, typename VecDerived>
Vector<typename MatDerived::Scalar> power_apply(const Eigen::MatrixBase<MatDerived>& A,
                                                const Eigen::MatrixBase<VecDerived>& v,
                                                int ell) {
  if (ell < 0) throw DimensionError("power_apply: negative power");
  if (ell >= 2 && A.rows() != A.cols()) {
    throw DimensionError("power_apply: matrix powers need a square matrix");
  }
  Vector<typename MatDerived::Scalar> out = v;
  for (int p = 0; p < ell; ++p) out = matvec(A, out);
  return out;
}

/// max |A - A^T| <= rel_tol * max |A|.
template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& A, typename Derived::Scalar rel_tol) {
  if (A.rows() != A.cols()) return false;
  const auto scale = A.cwiseAbs().maxCoeff();
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace rkls
