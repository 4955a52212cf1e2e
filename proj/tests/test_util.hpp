#pragma once

#include <cmath>
#include <cstdint>

#include "rkls/linalg.hpp"
#include "rkls/sampling.hpp"

namespace rkls::test {

inline MatrixXd random_matrix(long m, long n, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd A(m, n);
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < n; ++j) A(i, j) = rng.next_normal();
  return A;
}

inline MatrixXd random_symmetric(long n, std::uint64_t seed) {
  const MatrixXd G = random_matrix(n, n, seed);
  return (G + G.transpose()) / 2.0;
}

inline VectorXd random_vector(long n, std::uint64_t seed) {
  Rng rng(seed);
  VectorXd v(n);
  for (long j = 0; j < n; ++j) v(j) = rng.next_normal();
  return v;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace rkls::test
