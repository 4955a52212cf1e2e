#include "rkls/kaczmarz.hpp"

#include <cmath>

namespace rkls {

void ProblemInstance::validate() const {
  if (A.rows() < 1 || A.cols() < 1) throw InvalidProblemError("problem: empty matrix");
  if (A.rows() < A.cols()) {
    throw InvalidProblemError("problem: need at least as many rows as columns");
  }
  detail::require(b.size() == A.rows(), "problem (b)", b.size(), A.rows());
  detail::require(x0.size() == A.cols(), "problem (x0)", x0.size(), A.cols());
  require_finite(A, "problem matrix");
  require_finite(b, "problem rhs");
  require_finite(x0, "problem x0");
  if (x_true) {
    detail::require(x_true->size() == A.cols(), "problem (x_true)", x_true->size(), A.cols());
    const double miss = residual(A, b, *x_true).norm();
    if (!(miss <= 1e-10 * (1.0 + b.norm()))) {
      throw InvalidProblemError("problem: system is inconsistent (||A x_true - b|| = " +
                                std::to_string(miss) + ")");
    }
  }
}

const SvdResult<double>& ProblemInstance::ensure_svd() {
  if (!svd) svd = rkls::svd(A);
  return *svd;
}

Trace run(const ProblemInstance& p, const RunOptions& opts, std::span<const Probe> probes) {
  VectorXd final_x;
  return run(p, opts, probes, final_x);
}

Trace run(const ProblemInstance& p, const RunOptions& opts, std::span<const Probe> probes,
          VectorXd& final_x) {
  if (opts.steps < 0) throw DimensionError("run: negative step count");
  if (opts.record_stride < 1) throw DimensionError("run: record stride must be >= 1");
  detail::require(p.x0.size() == p.A.cols(), "run (x0)", p.x0.size(), p.A.cols());

  const RowSampler sampler(p.A);
  Rng rng(opts.seed);

  Trace trace;
  trace.seed = opts.seed;
  trace.record_stride = opts.record_stride;
  for (const auto& probe : probes)
    trace.extra_columns.insert(trace.extra_columns.end(), probe.columns.begin(), probe.columns.end());

  VectorXd x = p.x0;
  auto record = [&](long k, std::optional<Eigen::Index> chosen) {
    if (!x.allFinite()) throw NumericError("iterate became non-finite at step " + std::to_string(k));
    const VectorXd r = residual(p.A, p.b, x);
    TraceRow row;
    row.k = k;
    row.residual_norm = r.norm();
    if (p.x_true) row.error_norm = (x - *p.x_true).norm();
    row.iterate_norm = x.norm();
    row.chosen_row = chosen;
    row.extras.resize(trace.extra_columns.size());
    const StepState state{k, x, r};
    std::size_t offset = 0;
    for (const auto& probe : probes) {
      probe.eval(state, std::span<double>(row.extras).subspan(offset, probe.columns.size()));
      offset += probe.columns.size();
    }
    trace.rows.push_back(std::move(row));
  };

  record(0, std::nullopt);
  for (long k = 1; k <= opts.steps; ++k) {
    const Eigen::Index i = sampler.sample(rng);
    project_onto_row(p.A, p.b, x, i);
    if (k % opts.record_stride == 0 || k == opts.steps) record(k, i);
  }
  final_x = std::move(x);
  return trace;
}

}  // namespace rkls
