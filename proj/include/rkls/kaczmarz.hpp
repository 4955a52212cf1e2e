#pragma once

// The randomized Kaczmarz iteration (SGD on ||Ax - b||^2 with rows drawn
// proportionally to ||a_i||^2) and its trace recorder.
//
// One step projects the iterate onto the hyperplane of row i:
//   x' = x + (b_i - <a_i, x>) / ||a_i||^2 * a_i
// so that r' = r - <a_i, r> / ||a_i||^2 * a_i for r = x - x_true.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rkls/linalg.hpp"
#include "rkls/sampling.hpp"
#include "rkls/svd.hpp"

namespace rkls {

/// In-place projection of x onto {y : <a_i, y> = b_i}.
template <typename MatDerived, typename BDerived, typename Scalar>
void project_onto_row(const Eigen::MatrixBase<MatDerived>& A, const Eigen::MatrixBase<BDerived>& b,
                      Vector<Scalar>& x, Eigen::Index i) {
  const Scalar norm_sq = A.row(i).squaredNorm();
  if (!(norm_sq > Scalar(0))) throw InvalidRowError(static_cast<std::size_t>(i));
  const Scalar coef = (b(i) - A.row(i).dot(x)) / norm_sq;
  x.noalias() += coef * A.row(i).transpose();
}

template <typename MatDerived, typename BDerived, typename XDerived>
Vector<typename MatDerived::Scalar> kaczmarz_step(const Eigen::MatrixBase<MatDerived>& A,
                                                  const Eigen::MatrixBase<BDerived>& b,
                                                  const Eigen::MatrixBase<XDerived>& x,
                                                  Eigen::Index i) {
  detail::require(b.size() == A.rows(), "kaczmarz_step (b)", b.size(), A.rows());
  detail::require(x.size() == A.cols(), "kaczmarz_step (x)", x.size(), A.cols());
  if (i < 0 || i >= A.rows()) throw DimensionError("kaczmarz_step: row index out of range");
  Vector<typename MatDerived::Scalar> out = x;
  project_onto_row(A, b, out, i);
  return out;
}

/// Ax - b.
template <typename MatDerived, typename BDerived, typename XDerived>
Vector<typename MatDerived::Scalar> residual(const Eigen::MatrixBase<MatDerived>& A,
                                             const Eigen::MatrixBase<BDerived>& b,
                                             const Eigen::MatrixBase<XDerived>& x) {
  detail::require(b.size() == A.rows(), "residual", b.size(), A.rows());
  Vector<typename MatDerived::Scalar> r = matvec(A, x);
  r -= b;
  return r;
}

/// (A, b, optional exact solution, x0). Also carries the SVD of A when the
/// generator computed one, plus the seed that actually produced A.
struct ProblemInstance {
  MatrixXd A;
  VectorXd b;
  std::optional<VectorXd> x_true;
  VectorXd x0;
  std::optional<SvdResult<double>> svd;
  std::uint64_t matrix_seed = 0;

  /// Checks shapes, finiteness, m >= n and, if x_true is set, consistency
  /// ||A x_true - b|| <= 1e-10 (1 + ||b||).
  void validate() const;
  /// Lazily computed SVD of A.
  const SvdResult<double>& ensure_svd();
};

/// State handed to probes at each recorded step.
struct StepState {
  long k = 0;
  const VectorXd& x;
  const VectorXd& residual;  // Ax - b
};

/// A named diagnostic evaluated only on recorded steps. Writes one value per
/// column into `out`.
struct Probe {
  std::vector<std::string> columns;
  std::function<void(const StepState&, std::span<double> out)> eval;
};

struct TraceRow {
  long k = 0;
  double residual_norm = 0;
  std::optional<double> error_norm;
  double iterate_norm = 0;
  std::optional<Eigen::Index> chosen_row;
  std::vector<double> extras;
};

struct Trace {
  std::uint64_t seed = 0;
  long record_stride = 1;
  std::vector<std::string> extra_columns;
  std::vector<TraceRow> rows;
};

struct RunOptions {
  long steps = 0;
  std::uint64_t seed = 0;
  long record_stride = 1;
};

/// Runs `steps` Kaczmarz iterations from p.x0. Records step 0, every
/// multiple of record_stride, and the final step. Throws NumericError if a
/// recorded iterate is not finite.
Trace run(const ProblemInstance& p, const RunOptions& opts, std::span<const Probe> probes = {});

/// Same, with the final iterate returned through `final_x`.
Trace run(const ProblemInstance& p, const RunOptions& opts, std::span<const Probe> probes,
          VectorXd& final_x);

}  // namespace rkls
