#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <unordered_map>

#include "shapanova/attribution.hpp"
#include "shapanova/baseline.hpp"
#include "shapanova/coalition.hpp"
#include "shapanova/model.hpp"

namespace shapanova {

struct AnovaTerm {
  Coalition subset;
  double value = 0.0;   // f_u evaluated at the target
  double sigma2 = 0.0;  // E[f_u^2] under the estimation distribution
};

struct AnovaDecomposition {
  std::map<std::uint32_t, AnovaTerm> terms;
  Eigen::VectorXd target;
  BaselineKind distribution_kind = BaselineKind::Single;
  double f_at_target = 0.0;
  Eigen::Index sample_size = 0;
  std::uint64_t seed = 0;
};

/// Shared-sample estimator of functional ANOVA quantities. One base sample
/// is drawn at construction; every conditional expectation reuses it
/// (common random numbers), which makes the reconstruction identity
/// sum_u f_u(x) = f(x) algebraically exact over the full lattice.
///
/// For the degenerate single-baseline law the sample collapses to one row
/// and every quantity is exact. For the correlated Gaussian, corner values
/// use the exact conditional law; variance profiles always use the
/// empirical-matrix protocol.
class AnovaEstimator {
 public:
  AnovaEstimator(const ModelFunction& model, const BaselineDistribution& distribution,
                 Eigen::VectorXd target, Eigen::Index n, std::uint64_t seed);

  /// E[f(X) | X_u = x_u], cached per subset.
  double corner(Coalition u);

  /// f_u(x) by inclusion-exclusion over cached corners.
  double term_value(Coalition u);

  /// sigma^2_u = (1/n) sum_i fhat_u(x_i)^2 with the expectations inside
  /// fhat_u taken empirically over the same sample matrix.
  double sigma2(Coalition u);

  AnovaTerm term(Coalition u);

  /// Sample variance of f over the base sample.
  double sample_variance();

  double f_at_target() const { return f_target_; }
  Eigen::Index sample_size() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  const ModelFunction& model() const { return *model_; }
  const BaselineDistribution& distribution() const { return distribution_; }
  std::size_t corners_evaluated() const { return corner_cache_.size(); }

 private:
  const Eigen::VectorXd& profile(Coalition v);

  const ModelFunction* model_;
  BaselineDistribution distribution_;
  Eigen::VectorXd target_;
  Eigen::Index n_;
  std::uint64_t seed_;
  Eigen::MatrixXd sample_;
  Eigen::VectorXd f_sample_;
  double f_target_ = 0.0;
  std::unordered_map<std::uint32_t, double> corner_cache_;
  std::unordered_map<std::uint32_t, Eigen::VectorXd> profile_cache_;
};

double conditional_expectation(const ModelFunction& model,
                               const BaselineDistribution& distribution,
                               const Eigen::VectorXd& target, Coalition u,
                               Eigen::Index n, std::uint64_t seed);

AnovaTerm anova_term(const ModelFunction& model, const BaselineDistribution& distribution,
                     const Eigen::VectorXd& target, Coalition u, Eigen::Index n,
                     std::uint64_t seed);

/// All 2^p terms. Computing every sigma2 costs O(2^p n^2) model rows; pass
/// with_variances = false to skip them.
AnovaDecomposition full_decomposition(const ModelFunction& model,
                                      const BaselineDistribution& distribution,
                                      const Eigen::VectorXd& target, Eigen::Index n,
                                      std::uint64_t seed, bool with_variances = true);

/// Equal-division partition of ANOVA terms:
///   phi_i = sum_{S containing i} f_S / |S|
/// over the terms present in the decomposition (missing terms contribute
/// zero). y_target = f(x), y_null = f_empty.
Attribution shapley_from_anova(const AnovaDecomposition& decomposition);

}  // namespace shapanova
