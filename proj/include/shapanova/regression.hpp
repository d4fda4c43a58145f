#pragma once

#include <Eigen/Dense>

#include "shapanova/attribution.hpp"
#include "shapanova/coalition.hpp"

namespace shapanova {

/// The constrained weighted least squares problem
///   min (y - Z b)' W (y - Z b)   s.t.   j'b = y_target - y_null
/// whose solution on the full powerset design is the vector of exact
/// Shapley values.
struct RegressionProblem {
  Eigen::MatrixXd design;    // m x p, entries in {0,1}
  Eigen::VectorXd weights;   // m, positive
  Eigen::VectorXd responses; // m, model outputs on the synthetic rows
  double y_target = 0.0;     // f at the target
  double y_null = 0.0;       // null prediction E[f(X)] or f(baseline)
};

RegressionProblem problem_from_design(const DesignMatrix& design,
                                      const Eigen::VectorXd& responses,
                                      double y_target, double y_null);

/// Z' W Z for the problem.
Eigen::MatrixXd normal_matrix(const RegressionProblem& problem);

/// I - j A^{-1} j' (Z'WZ)^{-1} with A = j'(Z'WZ)^{-1} j.
Eigen::MatrixXd constraint_projector(const Eigen::MatrixXd& ztwz);

/// Closed-form solution on the full powerset design with kernel weights:
///   b = (p/(p-1) I - 1/(p-1) J) Z'Wy + j (y_t - y_b)/p.
Attribution solve_closed_form(const RegressionProblem& problem);

/// General equality-constrained solution for arbitrary sampled designs via
/// the Lagrangian. Duplicate rows are aggregated with multiplicity-scaled
/// weights; a 1e-8 ridge engages (with a note) when a design column is
/// constant or the normal matrix is ill-conditioned.
Attribution solve_constrained(const RegressionProblem& problem);

/// The p x 2^p contrast matrix whose rows are exact Shapley contrasts over
/// all corner predictions, ordered: null corner, size-lex proper coalitions,
/// full corner. phi = B* y*.
Eigen::MatrixXd build_bstar(int p);

/// Coalition masks in the column order build_bstar uses for y*.
std::vector<std::uint32_t> bstar_corner_masks(int p);

}  // namespace shapanova
