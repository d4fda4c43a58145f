#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "shapanova/anova.hpp"
#include "shapanova/attribution.hpp"
#include "shapanova/baseline.hpp"
#include "shapanova/model.hpp"

namespace shapanova {

struct SearchConfig {
  double epsilon = 0.01;           // target unexplained variance share
  int max_order = 0;               // 0 = p
  Eigen::Index n_score = 500;      // pick-freeze sample size for psi
  Eigen::Index n_variance = 500;   // shared-sample size for V_t and sigma-hat
  std::uint64_t seed = 0;

  /// How the total variance V_t is estimated. SampleVariance is cheap and
  /// works for any p but its noise is independent of the accumulated
  /// sigma-hat values, so tight epsilon gates become unreliable at small n.
  /// AnovaSum sums every sigma-hat over the shared sample, keeping the
  /// stopping gate internally consistent (requires all 2^p terms, p <= 10).
  enum class TotalVariance { SampleVariance, AnovaSum };
  TotalVariance vt_mode = TotalVariance::SampleVariance;
};

struct SearchResult {
  std::vector<Coalition> selected;                    // in selection order
  std::vector<std::pair<Coalition, double>> scores;   // every scored subset
  double v_t = 0.0;
  double v_s = 0.0;
  double explained_fraction = 0.0;
  int stopped_at_order = 0;
  bool converged = false;
};

/// Signed pick-freeze estimate of the L2 cost of exclusion of subset s:
///   (1/(n 2^|s|)) sum_i ( sum_{r subseteq s} (-1)^{|s|-|r|} f(x_i^r, z_i^{-r}) )^2
/// using two independent samples Z (n x p) and X (n x |s|). Estimates the
/// total variance of s and all its supersets; exactly zero in expectation
/// for inert subsets.
double l2coe(const ModelFunction& model, const BaselineDistribution& distribution,
             Coalition s, Eigen::Index n, std::uint64_t seed);

using ScoreFunction =
    std::function<double(const ModelFunction&, const BaselineDistribution&,
                         Coalition, Eigen::Index, std::uint64_t)>;

/// Breadth-first search for a low-order term set explaining (1 - epsilon)
/// of the variance: scores all subsets of each order with psi, accumulates
/// variance components in descending score order, stops once
/// V_s > V_t (1 - epsilon).
SearchResult breadth_first_search(const ModelFunction& model,
                                  const BaselineDistribution& distribution,
                                  const SearchConfig& config);

SearchResult breadth_first_search(const ModelFunction& model,
                                  const BaselineDistribution& distribution,
                                  const SearchConfig& config, const ScoreFunction& psi);

/// Computes f_S at the target for the selected subsets only and applies the
/// equal-division partition over that pruned lattice. Coverage records the
/// search's explained fraction.
Attribution prune_and_attribute(const ModelFunction& model,
                                const BaselineDistribution& distribution,
                                const Eigen::VectorXd& target,
                                const SearchResult& result, Eigen::Index n,
                                std::uint64_t seed);

}  // namespace shapanova
