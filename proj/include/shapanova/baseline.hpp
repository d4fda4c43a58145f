#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "shapanova/coalition.hpp"

namespace shapanova {

enum class BaselineKind {
  Single,               // degenerate point mass
  Empirical,            // rows drawn with replacement from a data matrix
  GaussianIndependent,  // N(mean, diag)
  GaussianCorrelated,   // N(mean, full covariance)
  GaussianLocal,        // N(center, sd^2 I)
  Uniform01,            // product of U[0,1]
};

std::string to_string(BaselineKind kind);

/// The reference law p(X) defining all conditional expectations. Immutable
/// after construction; sampling is deterministic given the caller's seed.
class BaselineDistribution {
 public:
  static BaselineDistribution single(const Eigen::VectorXd& point);
  static BaselineDistribution empirical(const Eigen::MatrixXd& data);
  static BaselineDistribution gaussian_independent(const Eigen::VectorXd& mean,
                                                   const Eigen::VectorXd& variances);
  static BaselineDistribution gaussian_correlated(const Eigen::VectorXd& mean,
                                                  const Eigen::MatrixXd& covariance);
  static BaselineDistribution gaussian_local(const Eigen::VectorXd& center, double sd);
  static BaselineDistribution uniform01(int dimension);

  BaselineKind kind() const { return kind_; }
  int dimension() const { return dimension_; }

  /// Product-form laws admit the overwrite route for conditional
  /// expectations (marginal = conditional); the correlated Gaussian does not.
  bool product_form() const { return kind_ != BaselineKind::GaussianCorrelated; }

  Eigen::MatrixXd sample(Eigen::Index n, std::uint64_t seed) const;

  /// n draws of X with X_u pinned to x_u. Product laws overwrite the pinned
  /// coordinates of a plain sample; the correlated Gaussian draws from the
  /// exact conditional law (overwrite would implement the marginal instead).
  /// The underlying standard normals depend only on (n, seed), so corners
  /// computed with one seed share their random numbers.
  Eigen::MatrixXd conditional_sample(Eigen::Index n, std::uint64_t seed,
                                     Coalition fixed, const Eigen::VectorXd& x) const;

  const Eigen::VectorXd& point() const { return mean_; }  // Single kind
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& data() const { return data_; }

 private:
  BaselineDistribution() = default;

  BaselineKind kind_ = BaselineKind::Single;
  int dimension_ = 0;
  Eigen::VectorXd mean_;        // point for Single, center for GaussianLocal
  Eigen::MatrixXd covariance_;  // Gaussian kinds
  Eigen::MatrixXd factor_;      // covariance factor L with L L' = covariance
  Eigen::MatrixXd data_;        // Empirical kind
};

/// PSD square root factor via symmetric eigendecomposition; eigenvalues
/// below -1e-10 * scale are rejected, small negatives are clipped to zero.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& covariance);

}  // namespace shapanova
