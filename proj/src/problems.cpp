#include "rkls/problems.hpp"

#include <cmath>

#include "rkls/io.hpp"
#include "rkls/sampling.hpp"
#include "rkls/svd.hpp"

namespace rkls {

ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "gaussian_row_normalized") return ProblemKind::GaussianRowNormalized;
  if (s == "symmetric_gaussian") return ProblemKind::SymmetricGaussian;
  if (s == "laplacian_1d") return ProblemKind::Laplacian1d;
  if (s == "from_file") return ProblemKind::FromFile;
  throw ConfigError("problem.kind", "unknown kind '" + s + "'");
}

RhsKind parse_rhs_kind(const std::string& s) {
  if (s == "ones") return RhsKind::Ones;
  if (s == "from_solution") return RhsKind::FromSolution;
  if (s == "from_file") return RhsKind::FromFile;
  throw ConfigError("problem.rhs", "unknown rhs '" + s + "'");
}

InitKind parse_init_kind(const std::string& s) {
  if (s == "zero") return InitKind::Zero;
  if (s == "gaussian") return InitKind::Gaussian;
  if (s == "from_file") return InitKind::FromFile;
  throw ConfigError("problem.x0", "unknown x0 '" + s + "'");
}

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::GaussianRowNormalized: return "gaussian_row_normalized";
    case ProblemKind::SymmetricGaussian: return "symmetric_gaussian";
    case ProblemKind::Laplacian1d: return "laplacian_1d";
    case ProblemKind::FromFile: return "from_file";
  }
  return {};
}

std::string to_string(RhsKind k) {
  switch (k) {
    case RhsKind::Ones: return "ones";
    case RhsKind::FromSolution: return "from_solution";
    case RhsKind::FromFile: return "from_file";
  }
  return {};
}

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::Zero: return "zero";
    case InitKind::Gaussian: return "gaussian";
    case InitKind::FromFile: return "from_file";
  }
  return {};
}

MatrixXd gen_gaussian_row_normalized(long n, long m, std::uint64_t seed) {
  if (n < 2 || m < n) throw ConfigError("problem.n", "need m >= n >= 2");
  Rng rng(seed);
  MatrixXd A(m, n);
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < n; ++j) A(i, j) = rng.next_normal();
    A.row(i) /= A.row(i).norm();
  }
  return A;
}

MatrixXd gen_symmetric_gaussian(long n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("problem.n", "need n >= 2");
  Rng rng(seed);
  MatrixXd G(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) G(i, j) = rng.next_normal();
  MatrixXd A(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) A(i, j) = (G(i, j) + G(j, i)) / 2.0;
  return A;
}

MatrixXd gen_laplacian_1d(long n) {
  if (n < 2) throw ConfigError("problem.n", "need n >= 2");
  MatrixXd L = MatrixXd::Zero(n, n);
  for (long i = 0; i < n; ++i) {
    L(i, i) = 2.0;
    if (i > 0) L(i, i - 1) = -1.0;
    if (i + 1 < n) L(i, i + 1) = -1.0;
  }
  return L;
}

namespace {

VectorXd gaussian_vector(long n, std::uint64_t seed) {
  Rng rng(seed);
  VectorXd v(n);
  for (long j = 0; j < n; ++j) v(j) = rng.next_normal();
  return v;
}

MatrixXd generate(const ProblemSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ProblemKind::GaussianRowNormalized:
      return gen_gaussian_row_normalized(spec.n, spec.m.value_or(spec.n), seed);
    case ProblemKind::SymmetricGaussian:
      return gen_symmetric_gaussian(spec.n, seed);
    case ProblemKind::Laplacian1d:
      return gen_laplacian_1d(spec.n);
    case ProblemKind::FromFile:
      return load_matrix(spec.matrix_file);
  }
  throw ConfigError("problem.kind", "unhandled kind");
}

bool is_random(ProblemKind k) {
  return k == ProblemKind::GaussianRowNormalized || k == ProblemKind::SymmetricGaussian;
}

}  // namespace

ProblemInstance build_problem(const ProblemSpec& spec) {
  if (spec.kind != ProblemKind::FromFile && spec.n < 2) {
    throw ConfigError("problem.n", "need n >= 2");
  }
  if (spec.m && spec.kind != ProblemKind::GaussianRowNormalized && *spec.m != spec.n) {
    throw ConfigError("problem.m", "only gaussian_row_normalized supports m != n");
  }

  ProblemInstance p;
  std::uint64_t seed = spec.seed;
  for (int attempt = 0;; ++attempt) {
    p.A = generate(spec, seed);
    p.matrix_seed = seed;
    if (p.A.rows() < p.A.cols()) throw InvalidProblemError("problem: matrix has fewer rows than columns");
    p.svd = svd(p.A);
    if (!is_random(spec.kind) || p.svd->sigma_min() > kMinSigma) break;
    if (attempt == kGeneratorRetries) {
      throw IllPosedError("problem: sigma_min <= 1e-6 after " + std::to_string(kGeneratorRetries) +
                          " regenerations");
    }
    ++seed;
  }
  if (p.svd->sigma_min() < kIllPosedRatio * p.svd->sigma_max()) {
    throw IllPosedError("problem: sigma_min / sigma_max = " +
                        std::to_string(p.svd->sigma_min() / p.svd->sigma_max()) + " is below 1e-10");
  }

  const long n = p.A.cols();
  switch (spec.rhs) {
    case RhsKind::Ones:
      p.b = VectorXd::Ones(p.A.rows());
      p.x_true = svd_solve(*p.svd, p.b);
      break;
    case RhsKind::FromSolution:
      p.x_true = gaussian_vector(n, derive_seed(spec.seed, 1));
      p.b = matvec(p.A, *p.x_true);
      break;
    case RhsKind::FromFile:
      p.b = load_vector(spec.rhs_file);
      if (p.b.size() != p.A.rows()) throw ConfigError("problem.rhs_file", "length does not match matrix rows");
      p.x_true = svd_solve(*p.svd, p.b);
      break;
  }

  switch (spec.x0) {
    case InitKind::Zero:
      p.x0 = VectorXd::Zero(n);
      break;
    case InitKind::Gaussian:
      p.x0 = gaussian_vector(n, derive_seed(spec.seed, 2));
      break;
    case InitKind::FromFile:
      p.x0 = load_vector(spec.x0_file);
      if (p.x0.size() != n) throw ConfigError("problem.x0_file", "length does not match matrix columns");
      break;
  }
  p.validate();
  return p;
}

}  // namespace rkls
