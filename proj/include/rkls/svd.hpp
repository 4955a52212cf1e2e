#pragma once

// Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//
// The rotations act on the columns of A, stored here as the rows of a
// working copy of A^T so that every rotation touches contiguous memory.
// A pair of columns (p, q) is rotated while its Gram entry exceeds
// sqrt(m) * eps * sqrt(g_pp * g_qq); this relative test is what gives the
// method its accuracy on small singular values. Iteration stops after a sweep
// with no rotations, or after kMaxSweeps, at which point the largest
// off-diagonal Gram entry must be below 1e-14 * ||A||_F^2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <type_traits>
#include <vector>

#include "rkls/errors.hpp"
#include "rkls/linalg.hpp"

namespace rkls {

template <typename Scalar>
struct SvdResult {
  Vector<Scalar> singular_values;  // non-increasing
  Matrix<Scalar> left;             // m x k, columns u_l
  Matrix<Scalar> right;            // n x k, columns v_l
  int sweeps = 0;
  Scalar off_diagonal = 0;  // largest |<w_p, w_q>| seen in the last sweep

  Eigen::Index rank_count() const { return singular_values.size(); }
  Scalar sigma_max() const { return singular_values(0); }
  Scalar sigma_min() const { return singular_values(singular_values.size() - 1); }
};

inline constexpr int kMaxSweeps = 60;

namespace detail {

template <typename Scalar>
constexpr Scalar jacobi_abs_tolerance() {
  constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
  if constexpr (std::is_same_v<Scalar, float>) {
    return Scalar(32) * eps;
  } else {
    return Scalar(1e-14);
  }
}

// Largest-magnitude entry of each v_l is made positive; u_l follows.
template <typename Scalar>
void fix_signs(SvdResult<Scalar>& r) {
  for (Eigen::Index j = 0; j < r.right.cols(); ++j) {
    Eigen::Index arg = 0;
    r.right.col(j).cwiseAbs().maxCoeff(&arg);
    if (r.right(arg, j) < Scalar(0)) {
      r.right.col(j) *= Scalar(-1);
      r.left.col(j) *= Scalar(-1);
    }
  }
}

template <typename Scalar>
SvdResult<Scalar> jacobi_tall(const Matrix<Scalar>& A) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar rel_tol = std::sqrt(Scalar(m)) * eps;
  const Scalar frob = A.squaredNorm();
  const Scalar abs_tol = jacobi_abs_tolerance<Scalar>() * frob;

  Matrix<Scalar> W = A.transpose();                      // row j = column j of A
  Matrix<Scalar> Vt = Matrix<Scalar>::Identity(n, n);    // row j = column j of V

  SvdResult<Scalar> out;
  bool converged = false;
  Scalar max_off = 0;
  int sweep = 0;
  while (sweep < kMaxSweeps && !converged) {
    ++sweep;
    max_off = 0;
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar gpp = W.row(p).squaredNorm();
        const Scalar gqq = W.row(q).squaredNorm();
        const Scalar gpq = W.row(p).dot(W.row(q));
        max_off = std::max(max_off, std::abs(gpq));
        if (gpq == Scalar(0) || std::abs(gpq) <= rel_tol * std::sqrt(gpp * gqq)) continue;

        const Scalar zeta = (gqq - gpp) / (Scalar(2) * gpq);
        const Scalar t = std::copysign(Scalar(1), zeta) / (std::abs(zeta) + std::hypot(Scalar(1), zeta));
        const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
        const Scalar s = c * t;

        // [w_p; w_q] <- [c -s; s c] [w_p; w_q]
        Vector<Scalar> wp = W.row(p).transpose();
        W.row(p) = c * wp.transpose() - s * W.row(q);
        W.row(q) = s * wp.transpose() + c * W.row(q);
        Vector<Scalar> vp = Vt.row(p).transpose();
        Vt.row(p) = c * vp.transpose() - s * Vt.row(q);
        Vt.row(q) = s * vp.transpose() + c * Vt.row(q);
        rotated = true;
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    // Out of sweeps: accept if the absolute criterion still holds.
    max_off = 0;
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q)
        max_off = std::max(max_off, std::abs(W.row(p).dot(W.row(q))));
    if (max_off > abs_tol) throw ConvergenceError(sweep, static_cast<double>(max_off));
  }

  Vector<Scalar> sigma(n);
  for (Eigen::Index j = 0; j < n; ++j) sigma(j) = W.row(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return sigma(a) > sigma(b); });

  out.singular_values.resize(n);
  out.left.setZero(m, n);
  out.right.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.singular_values(j) = sigma(src);
    out.right.col(j) = Vt.row(src).transpose();
    if (sigma(src) > Scalar(0)) out.left.col(j) = W.row(src).transpose() / sigma(src);
  }
  out.sweeps = sweep;
  out.off_diagonal = max_off;
  return out;
}

}  // namespace detail

/// Thin SVD, A = U diag(sigma) V^T with k = min(m, n) singular triplets.
template <typename Derived>
SvdResult<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  if (A.rows() == 0 || A.cols() == 0) throw DimensionError("svd: empty matrix");
  require_finite(A, "svd input");
  SvdResult<Scalar> out;
  if (A.rows() >= A.cols()) {
    out = detail::jacobi_tall<Scalar>(A);
  } else {
    out = detail::jacobi_tall<Scalar>(A.transpose());
    std::swap(out.left, out.right);
  }
  detail::fix_signs(out);
  return out;
}

/// x = V diag(1/sigma) U^T b. Needs sigma_min > 0.
template <typename Scalar, typename VecDerived>
Vector<Scalar> svd_solve(const SvdResult<Scalar>& s, const Eigen::MatrixBase<VecDerived>& b) {
  detail::require(b.size() == s.left.rows(), "svd_solve", b.size(), s.left.rows());
  if (!(s.sigma_min() > Scalar(0))) throw IllPosedError("svd_solve: singular matrix");
  Vector<Scalar> coeffs = s.left.transpose() * b;
  coeffs.array() /= s.singular_values.array();
  return s.right * coeffs;
}

}  // namespace rkls
