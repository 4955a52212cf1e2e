#pragma once

// Seeded randomness and the row-selection law p_i = ||a_i||^2 / ||A||_F^2.
//
// Rng wraps std::mt19937_64, whose output sequence is fixed by the C++
// standard, so streams are identical across platforms. Uniforms use the top
// 53 bits of one 64-bit draw: u = (x >> 11) * 2^-53, giving u in [0, 1).
// Normals use the Box-Muller transform on two uniforms; both variates of a
// pair are used, the second one cached for the next call.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rkls/linalg.hpp"

namespace rkls {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1); consumes exactly one 64-bit draw.
  double next_uniform();
  /// Standard normal via Box-Muller.
  double next_normal();

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

inline Rng new_rng(std::uint64_t seed) { return Rng(seed); }

/// One splitmix64 round.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for Monte-Carlo run `run_index`: splitmix64(base ^ run_index).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t run_index) {
  return splitmix64(base ^ run_index);
}

/// Inverse-CDF sampler over rows. Immutable once built.
class RowSampler {
 public:
  /// Throws InvalidProblemError when every row of A is zero.
  explicit RowSampler(const MatrixXd& A);

  /// Index i with cumulative[i-1] <= u * W < cumulative[i]. One uniform per call.
  Eigen::Index sample(Rng& rng) const;
  /// Same rule for a given u in [0, 1).
  Eigen::Index index_for(double u) const;

  double probability(Eigen::Index i) const;
  double total_weight() const { return cumulative_.back(); }
  const std::vector<double>& cumulative_weights() const { return cumulative_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(cumulative_.size()); }

 private:
  std::vector<double> cumulative_;
  Eigen::Index last_nonzero_ = 0;
};

inline RowSampler build_row_sampler(const MatrixXd& A) { return RowSampler(A); }
inline Eigen::Index sample(const RowSampler& s, Rng& rng) { return s.sample(rng); }

}  // namespace rkls
