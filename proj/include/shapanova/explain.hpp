#pragma once

#include <cstdint>

#include "shapanova/anova.hpp"
#include "shapanova/attribution.hpp"
#include "shapanova/baseline.hpp"
#include "shapanova/model.hpp"

namespace shapanova {

enum class ExplainMethod { Exact, Regression, RegressionSampled, AnovaPartition };

ExplainMethod explain_method_from_string(const std::string& name);

struct ExplainOptions {
  ExplainMethod method = ExplainMethod::Exact;
  std::int64_t budget = 0;    // design rows for RegressionSampled (0 = 2p)
  Eigen::Index samples = 10000;  // Monte Carlo draws per conditional expectation
  std::uint64_t seed = 0;
};

/// End-to-end attribution of f(target) - E[f(X)] under the given baseline
/// law. Every method shares one corner estimator, so the exact, regression,
/// and partition routes see identical conditional expectations.
///
/// Per-draw Shapley contrasts provide standard errors for Monte Carlo
/// baselines; the degenerate single-baseline law is exact.
Attribution explain(const ModelFunction& model, const BaselineDistribution& distribution,
                    const Eigen::VectorXd& target, const ExplainOptions& options);

/// Exact Shapley values over distribution-defined hypercube corners,
/// with per-draw standard errors. Equals exact_shapley_single for the
/// degenerate law and exact_shapley_multi (same sample) for product laws.
Attribution exact_shapley_distribution(const ModelFunction& model,
                                       const BaselineDistribution& distribution,
                                       const Eigen::VectorXd& target, Eigen::Index n,
                                       std::uint64_t seed);

// forward declaration; defined in regression.hpp
struct RegressionProblem;

/// The exact problem the regression methods solve under these options, for
/// external verification of the solution.
RegressionProblem explain_regression_problem(const ModelFunction& model,
                                             const BaselineDistribution& distribution,
                                             const Eigen::VectorXd& target,
                                             const ExplainOptions& options);

}  // namespace shapanova
