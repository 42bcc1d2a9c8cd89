#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace capvton::metrics {

// Mean and unbiased covariance of a feature set.
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t n = 0;

  GaussianStats() = default;
  // Checks shape agreement and symmetry of `cov` (1e-9, relative to its scale).
  GaussianStats(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::size_t n);

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

// Single-pass Welford accumulation. Shards accumulated in parallel combine
// exactly with merge(); the result does not depend on the shard split beyond
// rounding.
class StatsAccumulator {
 public:
  StatsAccumulator() = default;
  explicit StatsAccumulator(std::size_t dim);

  void add(std::span<const double> x);
  void merge(const StatsAccumulator& other);

  std::size_t count() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

  // InsufficientSamples with fewer than two vectors.
  GaussianStats finish() const;

 private:
  std::size_t n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

GaussianStats accumulate_stats(std::span<const std::vector<double>> features);

// Squared Frechet distance between two Gaussians:
//   |mu1 - mu2|^2 + Tr(C1 + C2 - 2 (C1 C2)^{1/2})
// with Tr (C1 C2)^{1/2} taken as Tr (C1^{1/2} C2 C1^{1/2})^{1/2}, both roots by
// symmetric eigendecomposition with negative eigenvalues clamped to 0.
// Result clamped at 0.
double fid(const GaussianStats& real, const GaussianStats& gen);

}  // namespace capvton::metrics
