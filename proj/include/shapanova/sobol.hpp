#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shapanova/baseline.hpp"
#include "shapanova/model.hpp"

namespace shapanova {

/// First-order and total variance-based sensitivities with Monte Carlo
/// standard errors. Estimated by symmetrized pick-freeze: with d_A = f(A) -
/// f(A_B^i) and d_B = f(B) - f(B_A^i),
///   V_i     = -(1/2n) sum d_A d_B          (Sobol-style cross moment)
///   tau^2_i = (1/4n) sum (d_A^2 + d_B^2)   (Jansen)
/// so the interaction gap tau^2_i - V_i = (1/4n) sum (d_A + d_B)^2 is
/// nonnegative by construction and exactly zero for coordinates that enter
/// additively.
struct SobolIndices {
  Eigen::VectorXd first_order;  // S_i, raw (may be slightly negative)
  Eigen::VectorXd total;        // S_Ti
  Eigen::VectorXd gap;          // S_Ti - S_i >= 0
  Eigen::VectorXd se_first;
  Eigen::VectorXd se_total;
  Eigen::VectorXd se_gap;
  double variance = 0.0;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
};

/// Requires a product-form distribution (independent coordinate resampling);
/// (2p + 2) evaluation batches of n rows.
SobolIndices sobol_indices(const ModelFunction& model,
                           const BaselineDistribution& distribution, Eigen::Index n,
                           std::uint64_t seed);

struct EffectiveDimension {
  int d_t = 0;          // truncation dimension under the given order
  int d_s = 0;          // superposition dimension
  double epsilon = 0.0;
  bool from_bounds = false;  // set when derived from indices alone
  int d_t_upper = 0;         // equals d_t unless from_bounds
  std::vector<int> ranking;  // features by descending total index (1-based)
  int d_t_ranked = 0;        // truncation dimension under that reordering
};

/// Exact route: smallest prefix / interaction order capturing (1-epsilon)
/// of the variance given per-subset components (masks -> sigma^2_u).
EffectiveDimension effective_dimensions(const std::map<std::uint32_t, double>& sigma2,
                                        int p, double epsilon);

/// Bounds route from indices alone: d_t is bracketed by the smallest prefix
/// with sum of totals >= 1-epsilon (lower) and the smallest prefix whose
/// complement totals sum below epsilon (upper); d_s is 1 when first-order
/// indices explain 1-epsilon, otherwise reported as >= 2.
EffectiveDimension effective_dimensions(const SobolIndices& indices, double epsilon);

struct ScreeningReport {
  std::vector<int> selected;            // smallest qualifying set, 1-based; empty if none
  double selected_share = 0.0;          // sum of S_i over the set
  std::int64_t expectation_budget = 0;  // 2^k - 1 nonempty subsets + shared null
  Eigen::VectorXd ratios;               // S_i / S_Ti, interaction gauges
  bool no_interactions = false;         // every ratio within 3 SE of 1
  double epsilon = 0.0;
};

/// Smallest feature set whose first-order indices sum to 1 - epsilon
/// (top-k by S_i with negatives clamped to zero), plus per-feature
/// S_i / S_Ti ratios.
ScreeningReport screening_report(const SobolIndices& indices, double epsilon);

std::string screening_report_to_text(const ScreeningReport& report);

}  // namespace shapanova
