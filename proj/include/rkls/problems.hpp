#pragma once

// Instance generators and problem assembly.
//
// Random matrices draw standard normals from Rng(seed) in row-major order.
// The exact solution (rhs = from_solution) uses Rng(derive_seed(seed, 1)) and
// a Gaussian x0 uses Rng(derive_seed(seed, 2)), so changing one choice does
// not perturb the others.

#include <cstdint>
#include <optional>
#include <string>

#include "rkls/kaczmarz.hpp"
#include "rkls/linalg.hpp"

namespace rkls {

enum class ProblemKind { GaussianRowNormalized, SymmetricGaussian, Laplacian1d, FromFile };
enum class RhsKind { Ones, FromSolution, FromFile };
enum class InitKind { Zero, Gaussian, FromFile };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::GaussianRowNormalized;
  long n = 0;
  std::optional<long> m;  // rows, gaussian_row_normalized only; defaults to n
  std::uint64_t seed = 0;
  RhsKind rhs = RhsKind::Ones;
  InitKind x0 = InitKind::Zero;
  std::string matrix_file;
  std::string rhs_file;
  std::string x0_file;
};

ProblemKind parse_problem_kind(const std::string& s);
RhsKind parse_rhs_kind(const std::string& s);
InitKind parse_init_kind(const std::string& s);
std::string to_string(ProblemKind k);
std::string to_string(RhsKind k);
std::string to_string(InitKind k);

/// m x n, i.i.d. N(0,1) entries, each row scaled to unit norm.
MatrixXd gen_gaussian_row_normalized(long n, long m, std::uint64_t seed);

/// (G + G^T)/2 for an n x n standard normal G. Rows are not normalized.
MatrixXd gen_symmetric_gaussian(long n, std::uint64_t seed);

/// Dirichlet 1D Laplacian: 2 on the diagonal, -1 on the off-diagonals.
MatrixXd gen_laplacian_1d(long n);

/// Random generators retry with seed+1 up to this many times when
/// sigma_min <= kMinSigma.
inline constexpr int kGeneratorRetries = 3;
inline constexpr double kMinSigma = 1e-6;
/// Instances with sigma_min < kIllPosedRatio * sigma_max are rejected.
inline constexpr double kIllPosedRatio = 1e-10;

/// Assembles (A, b, x_true, x0). For rhs = ones the exact solution comes from
/// the SVD solve x = V diag(1/sigma) U^T b; for rhs = from_solution a Gaussian
/// x_true is drawn and b = A x_true. The returned instance carries the SVD.
ProblemInstance build_problem(const ProblemSpec& spec);

}  // namespace rkls
