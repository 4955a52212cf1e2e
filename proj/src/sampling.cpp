#include "rkls/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rkls {

double Rng::next_uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::next_normal() {
  if (cached_normal_) {
    const double z = *cached_normal_;
    cached_normal_.reset();
    return z;
  }
  // 1 - u lies in (0, 1], so the logarithm is finite.
  const double u1 = 1.0 - next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RowSampler::RowSampler(const MatrixXd& A) {
  if (A.rows() == 0) throw InvalidProblemError("row sampler: matrix has no rows");
  cumulative_.resize(static_cast<std::size_t>(A.rows()));
  double running = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double w = row_norm_sq(A, i);
    if (!std::isfinite(w)) throw NumericError("row sampler: non-finite row norm");
    if (w > 0.0) {
      any = true;
      last_nonzero_ = i;
    }
    running += w;
    cumulative_[static_cast<std::size_t>(i)] = running;
  }
  if (!any) throw InvalidProblemError("row sampler: all rows are zero");
}

Eigen::Index RowSampler::index_for(double u) const {
  const double target = u * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  // u * W can round up to W itself.
  if (it == cumulative_.end()) return last_nonzero_;
  return static_cast<Eigen::Index>(it - cumulative_.begin());
}

Eigen::Index RowSampler::sample(Rng& rng) const { return index_for(rng.next_uniform()); }

double RowSampler::probability(Eigen::Index i) const {
  const auto k = static_cast<std::size_t>(i);
  const double lo = k == 0 ? 0.0 : cumulative_[k - 1];
  return (cumulative_[k] - lo) / cumulative_.back();
}

}  // namespace rkls
