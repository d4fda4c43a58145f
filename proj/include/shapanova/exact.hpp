#pragma once

#include <Eigen/Dense>

#include "shapanova/attribution.hpp"
#include "shapanova/model.hpp"

namespace shapanova {

/// Shapley values from a mask-indexed vector of all 2^p characteristic
/// values: phi_i = sum over S not containing i of
/// |S|!(p-|S|-1)!/p! [corners(S+i) - corners(S)].
Eigen::VectorXd shapley_from_corners(int p, const Eigen::VectorXd& corners);

/// The 2^p synthetic hypercube corners for one (baseline, target) pair,
/// mask-indexed rows.
Eigen::MatrixXd hypercube_corners(const Eigen::VectorXd& baseline,
                                  const Eigen::VectorXd& target);

/// Exact Shapley values by direct application of the formula over the full
/// powerset; exactly 2^p model evaluations (one per hypercube corner).
Attribution exact_shapley_single(const ModelFunction& model,
                                 const Eigen::VectorXd& baseline,
                                 const Eigen::VectorXd& target);

/// Mean of per-baseline exact attributions over the rows of `baselines`;
/// y_null is the mean of the per-baseline null predictions. Standard errors
/// over baselines are reported when n > 1.
Attribution exact_shapley_multi(const ModelFunction& model,
                                const Eigen::MatrixXd& baselines,
                                const Eigen::VectorXd& target);

}  // namespace shapanova
