#pragma once

// Theorem-level quantities for the Kaczmarz iteration.
//
// The central tool is the expectation oracle: E f(x_{k+1}) given x_k is a
// finite sum over rows, sum_i p_i f(step(x_k, i)) with p_i = ||a_i||^2/||A||_F^2,
// so every "in expectation" statement about one step can be checked exactly.
//
// For r = x - x_true and Ar = Ax - b the oracle is compared against the
// squared-out form
//   E||A^l r'||^2 = ||A^l r||^2 - 2/F <A^l r, A^l sum_i <a_i,r> a_i>
//                   + 1/F sum_i <a_i,r>^2 ||A^l a_i||^2 / ||a_i||^2
// in which the middle sum is ||A^T A r||^2 for l = 1 (any A) and
// ||A^{l+1} r||^2 for symmetric A. Bounding the last sum by its largest row
// gain gives the one-step inequality
//   E||A^l r'||^2 <= (1 + alpha_l/F) ||A^l r||^2 - 2/F ||A^{l+1} r||^2.
//
// Rectangular A (m > n): the row gains ||A a_i||^2/||a_i||^2 use the m-vector
// A a_i, which is defined because a_i lives in R^n. Rows with zero norm are
// never sampled and are skipped everywhere below.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rkls/errors.hpp"
#include "rkls/kaczmarz.hpp"
#include "rkls/linalg.hpp"
#include "rkls/svd.hpp"

namespace rkls {

inline constexpr double kIdentityRelTol = 1e-10;
inline constexpr double kBoundSlack = 1e-10;
inline constexpr double kSymmetryRelTol = 1e-12;

/// gain_i = ||A^ell a_i||^2 / ||a_i||^2 (zero for zero rows), alpha = max gain.
template <typename Scalar>
struct RowGains {
  int ell = 1;
  Vector<Scalar> gain;
  Scalar alpha = 0;
};

template <typename Derived>
RowGains<typename Derived::Scalar> row_gains(const Eigen::MatrixBase<Derived>& A, int ell) {
  using Scalar = typename Derived::Scalar;
  if (ell < 1) throw DimensionError("row_gains: ell must be >= 1");
  RowGains<Scalar> g;
  g.ell = ell;
  g.gain.setZero(A.rows());
  bool any = false;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const Scalar norm_sq = A.row(i).squaredNorm();
    if (!(norm_sq > Scalar(0))) continue;
    const Vector<Scalar> ai = A.row(i).transpose();
    const Scalar gi = power_apply(A, ai, ell).squaredNorm() / norm_sq;
    g.gain(i) = gi;
    g.alpha = any ? std::max(g.alpha, gi) : gi;
    any = true;
  }
  if (!any) throw InvalidProblemError("row_gains: all rows are zero");
  return g;
}

/// max_i ||A^ell a_i||^2 / ||a_i||^2. ell >= 2 needs A square.
template <typename Derived>
typename Derived::Scalar alpha_ell(const Eigen::MatrixBase<Derived>& A, int ell) {
  return row_gains(A, ell).alpha;
}

/// max_i ||A a_i||^2 / ||a_i||^2.
template <typename Derived>
typename Derived::Scalar alpha(const Eigen::MatrixBase<Derived>& A) {
  return alpha_ell(A, 1);
}

// ---------------------------------------------------------------------------
// Expectation oracle

enum class FunctionalKind {
  AResidualNormSq,     // ||A x - b||^2
  ErrorNormSq,         // ||x - x_true||^2
  AEllResidualNormSq,  // ||A^ell (x - x_true)||^2 = ||A^{ell-1}(Ax - b)||^2
  SpectralCoeff,       // <x - x_true, v_ell>, ell 1-based
};

struct Functional {
  FunctionalKind kind = FunctionalKind::AResidualNormSq;
  int ell = 1;

  /// "A_residual_normsq", "error_normsq", "A_ell_residual_normsq:<l>",
  /// "spectral_coeff:<l>". Throws UnknownFunctionalError otherwise.
  static Functional parse(std::string_view name);
  std::string name() const;
};

template <typename Scalar>
struct ExpectationContext {
  const Vector<Scalar>* x_true = nullptr;
  const SvdResult<Scalar>* svd = nullptr;
};

template <typename MatDerived, typename BDerived, typename XDerived>
typename MatDerived::Scalar evaluate_functional(
    const Eigen::MatrixBase<MatDerived>& A, const Eigen::MatrixBase<BDerived>& b,
    const Eigen::MatrixBase<XDerived>& x, const Functional& f,
    const ExpectationContext<typename MatDerived::Scalar>& ctx) {
  using Scalar = typename MatDerived::Scalar;
  switch (f.kind) {
    case FunctionalKind::AResidualNormSq:
      return residual(A, b, x).squaredNorm();
    case FunctionalKind::AEllResidualNormSq:
      if (f.ell < 1) throw UnknownFunctionalError("A_ell_residual_normsq needs ell >= 1");
      return power_apply(A, residual(A, b, x), f.ell - 1).squaredNorm();
    case FunctionalKind::ErrorNormSq:
      if (!ctx.x_true) throw InvalidProblemError("error_normsq needs the exact solution");
      return (x - *ctx.x_true).squaredNorm();
    case FunctionalKind::SpectralCoeff: {
      if (!ctx.x_true || !ctx.svd) {
        throw InvalidProblemError("spectral_coeff needs the exact solution and the SVD");
      }
      if (f.ell < 1 || f.ell > ctx.svd->right.cols()) {
        throw UnknownFunctionalError("spectral_coeff index out of range");
      }
      return (x - *ctx.x_true).dot(ctx.svd->right.col(f.ell - 1));
    }
  }
  throw UnknownFunctionalError("unhandled functional");
  return Scalar(0);
}

/// E f(x_{k+1}) given x_k = x, by enumerating every row with weight
/// ||a_i||^2 / ||A||_F^2.
template <typename MatDerived, typename BDerived, typename XDerived>
typename MatDerived::Scalar expected_next(
    const Eigen::MatrixBase<MatDerived>& A, const Eigen::MatrixBase<BDerived>& b,
    const Eigen::MatrixBase<XDerived>& x, const Functional& f,
    const ExpectationContext<typename MatDerived::Scalar>& ctx = {}) {
  using Scalar = typename MatDerived::Scalar;
  detail::require(b.size() == A.rows(), "expected_next (b)", b.size(), A.rows());
  detail::require(x.size() == A.cols(), "expected_next (x)", x.size(), A.cols());
  const Scalar frob = frobenius_norm_sq(A);
  if (!(frob > Scalar(0))) throw InvalidProblemError("expected_next: zero matrix");
  Scalar total = 0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const Scalar w = A.row(i).squaredNorm();
    if (!(w > Scalar(0))) continue;
    total += (w / frob) * evaluate_functional(A, b, kaczmarz_step(A, b, x, i), f, ctx);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Bound reports

template <typename Scalar>
struct BoundReport {
  long k = 0;
  int ell = 1;
  Scalar current = 0;            // ||A^ell r_k||^2
  Scalar lhs_exact = 0;          // E||A^ell r_{k+1}||^2 from the oracle
  Scalar rhs_bound = 0;          // (1 + alpha_ell/F) current - 2/F ||A^{ell+1} r_k||^2
  Scalar identity_rhs = 0;       // squared-out three-term expansion
  Scalar identity_residual = 0;  // |lhs_exact - identity_rhs|
  Scalar identity_scale = 0;     // magnitude the residual is measured against
  Scalar decrement = 0;          // rhs_bound - current

  bool inequality_holds() const {
    return lhs_exact <= rhs_bound + Scalar(kBoundSlack) * (Scalar(1) + std::abs(rhs_bound));
  }
  bool identity_holds() const {
    return identity_residual <= Scalar(kIdentityRelTol) * identity_scale;
  }
};

namespace detail {

// Shared by both theorems so that ell = 1 takes the same arithmetic path.
template <typename MatDerived, typename BDerived, typename XDerived>
BoundReport<typename MatDerived::Scalar> bound_report(
    const Eigen::MatrixBase<MatDerived>& A, const Eigen::MatrixBase<BDerived>& b,
    const Eigen::MatrixBase<XDerived>& x, const RowGains<typename MatDerived::Scalar>& gains) {
  using Scalar = typename MatDerived::Scalar;
  const int ell = gains.ell;
  BoundReport<Scalar> rep;
  rep.ell = ell;
  const Vector<Scalar> ar = residual(A, b, x);  // A r_k
  if (ar.isZero(Scalar(0))) return rep;

  const Scalar frob = frobenius_norm_sq(A);
  const Vector<Scalar> base = power_apply(A, ar, ell - 1);  // A^ell r_k
  const Vector<Scalar> lifted = transpose_matvec(A, base);  // A^T A^ell r_k
  rep.current = base.squaredNorm();
  const Scalar lifted_sq = lifted.squaredNorm();
  Scalar gain_sum = 0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) gain_sum += ar(i) * ar(i) * gains.gain(i);

  rep.rhs_bound = (Scalar(1) + gains.alpha / frob) * rep.current - (Scalar(2) / frob) * lifted_sq;
  rep.identity_rhs = rep.current - (Scalar(2) / frob) * lifted_sq + gain_sum / frob;
  rep.decrement = rep.rhs_bound - rep.current;

  Functional f{ell == 1 ? FunctionalKind::AResidualNormSq : FunctionalKind::AEllResidualNormSq, ell};
  rep.lhs_exact = expected_next(A, b, x, f);
  rep.identity_residual = std::abs(rep.lhs_exact - rep.identity_rhs);
  rep.identity_scale = rep.current + gain_sum / frob;
  return rep;
}

}  // namespace detail

/// One-step report for E||Ax_{k+1} - b||^2. Works for m >= n.
template <typename MatDerived, typename BDerived, typename XDerived>
BoundReport<typename MatDerived::Scalar> theorem1_report(
    const Eigen::MatrixBase<MatDerived>& A, const Eigen::MatrixBase<BDerived>& b,
    const Eigen::MatrixBase<XDerived>& x, const RowGains<typename MatDerived::Scalar>& gains) {
  if (gains.ell != 1) throw DimensionError("theorem1_report: gains must be for ell = 1");
  return detail::bound_report(A, b, x, gains);
}

template <typename MatDerived, typename BDerived, typename XDerived>
BoundReport<typename MatDerived::Scalar> theorem1_report(const Eigen::MatrixBase<MatDerived>& A,
                                                         const Eigen::MatrixBase<BDerived>& b,
                                                         const Eigen::MatrixBase<XDerived>& x) {
  return theorem1_report(A, b, x, row_gains(A, 1));
}

/// One-step report for E||A^ell (x_{k+1} - x)||^2. A must be symmetric.
template <typename MatDerived, typename BDerived, typename XDerived>
BoundReport<typename MatDerived::Scalar> theorem2_report(
    const Eigen::MatrixBase<MatDerived>& A, const Eigen::MatrixBase<BDerived>& b,
    const Eigen::MatrixBase<XDerived>& x, const RowGains<typename MatDerived::Scalar>& gains) {
  using Scalar = typename MatDerived::Scalar;
  if (!is_symmetric(A, Scalar(kSymmetryRelTol))) {
    throw SymmetryError("theorem2_report: matrix is not symmetric");
  }
  return detail::bound_report(A, b, x, gains);
}

template <typename MatDerived, typename BDerived, typename XDerived>
BoundReport<typename MatDerived::Scalar> theorem2_report(const Eigen::MatrixBase<MatDerived>& A,
                                                         const Eigen::MatrixBase<BDerived>& b,
                                                         const Eigen::MatrixBase<XDerived>& x,
                                                         int ell) {
  using Scalar = typename MatDerived::Scalar;
  if (!is_symmetric(A, Scalar(kSymmetryRelTol))) {
    throw SymmetryError("theorem2_report: matrix is not symmetric");
  }
  return detail::bound_report(A, b, x, row_gains(A, ell));
}

// ---------------------------------------------------------------------------
// Spectral quantities

template <typename Scalar>
struct SpectralCoeffs {
  Vector<Scalar> coeffs;  // <x_k - x_true, v_l>
  Vector<Scalar> sigmas;
};

template <typename Scalar, typename XDerived, typename TDerived>
SpectralCoeffs<Scalar> spectral_coeffs(const Eigen::MatrixBase<XDerived>& x_k,
                                       const Eigen::MatrixBase<TDerived>& x_true,
                                       const SvdResult<Scalar>& s) {
  detail::require(x_k.size() == s.right.rows(), "spectral_coeffs", x_k.size(), s.right.rows());
  detail::require(x_true.size() == x_k.size(), "spectral_coeffs", x_true.size(), x_k.size());
  SpectralCoeffs<Scalar> out;
  out.coeffs = s.right.transpose() * (x_k - x_true);
  out.sigmas = s.singular_values;
  return out;
}

/// 1 - sigma_min^2 / ||A||_F^2, the classical expected contraction of ||x_k - x||^2.
template <typename Scalar>
Scalar sv_rate(const SvdResult<Scalar>& s, Scalar frob_sq) {
  const Scalar smin = s.sigma_min();
  if (!(smin > Scalar(1e-12) * s.sigma_max())) {
    throw IllPosedError("sv_rate: matrix is numerically singular");
  }
  return Scalar(1) - smin * smin / frob_sq;
}

/// order 1: <Lu, u>; order 2: <Lu, Lu>.
template <typename MatDerived, typename VecDerived>
typename MatDerived::Scalar sobolev_seminorm_sq(const Eigen::MatrixBase<MatDerived>& L,
                                                const Eigen::MatrixBase<VecDerived>& u,
                                                int order) {
  using Scalar = typename MatDerived::Scalar;
  const Vector<Scalar> lu = matvec(L, u);
  if (order == 2) return lu.squaredNorm();
  if (order != 1) throw DimensionError("sobolev_seminorm_sq: order must be 1 or 2");
  const Scalar value = lu.dot(u);
  if (value < -Scalar(1e-12) * u.squaredNorm()) {
    throw SpdError("sobolev_seminorm_sq: <Lu, u> is negative, L is not positive definite");
  }
  return std::max(value, Scalar(0));
}

// ---------------------------------------------------------------------------
// Trace probes

/// Names accepted by make_probe:
///   theorem1, theorem2:<l>, decrement, v1_cosine, spectral_coeff:<l>,
///   error_normsq, residual_normsq, hdot1, hdot2
bool is_known_diagnostic(std::string_view name);

/// Builds the probe for `name` against problem `p` (copied into the probe).
/// Computes the SVD of p.A when the probe needs it and p has none.
Probe make_probe(std::string_view name, const ProblemInstance& p);

std::vector<Probe> make_probes(const std::vector<std::string>& names, const ProblemInstance& p);

}  // namespace rkls
