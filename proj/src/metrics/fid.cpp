#include "capvton/metrics/fid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "capvton/error.hpp"

namespace capvton::metrics {
namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "eigendecomposition did not converge");
  }
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

GaussianStats::GaussianStats(Eigen::VectorXd mean_, Eigen::MatrixXd cov_, std::size_t n_)
    : mean(std::move(mean_)), cov(std::move(cov_)), n(n_) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "covariance shape does not match mean");
  }
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::kInvalidArgument, "covariance is not symmetric");
  }
}

StatsAccumulator::StatsAccumulator(std::size_t dim)
    : mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      m2_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {}

void StatsAccumulator::add(std::span<const double> x) {
  if (n_ == 0 && mean_.size() == 0) *this = StatsAccumulator(x.size());
  if (x.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature of length " + std::to_string(x.size()) +
                                                   ", expected " + std::to_string(dim()));
  }
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  ++n_;
  const Eigen::VectorXd delta = v - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_.noalias() += delta * (v - mean_).transpose();
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  if (other.dim() != dim()) throw Error(ErrorCode::kDimensionMismatch, "merging shards of different dim");
  const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const Eigen::VectorXd delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  m2_ += other.m2_ + delta * delta.transpose() * (na * nb / n);
  n_ += other.n_;
}

GaussianStats StatsAccumulator::finish() const {
  if (n_ < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                "need at least 2 feature vectors, have " + std::to_string(n_));
  }
  Eigen::MatrixXd cov = m2_ / static_cast<double>(n_ - 1);
  cov = 0.5 * (cov + cov.transpose());
  return GaussianStats(mean_, std::move(cov), n_);
}

GaussianStats accumulate_stats(std::span<const std::vector<double>> features) {
  StatsAccumulator acc;
  for (const auto& f : features) acc.add(f);
  return acc.finish();
}

double fid(const GaussianStats& real, const GaussianStats& gen) {
  if (real.dim() != gen.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "FID stats of dim " + std::to_string(real.dim()) +
                                                   " vs " + std::to_string(gen.dim()));
  }
  if (real.n < 2 || gen.n < 2) {
    throw Error(ErrorCode::kInsufficientSamples, "FID stats need at least 2 samples each");
  }
  const Eigen::MatrixXd root_real = psd_sqrt(real.cov);
  Eigen::MatrixXd inner = root_real * gen.cov * root_real;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "eigendecomposition did not converge");
  }
  const double tr_sqrt = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d2 = (real.mean - gen.mean).squaredNorm() + real.cov.trace() + gen.cov.trace() -
                    2.0 * tr_sqrt;
  if (!std::isfinite(d2)) throw Error(ErrorCode::kNumericalFailure, "FID is not finite");
  return std::max(0.0, d2);
}

}  // namespace capvton::metrics
