#include "shapanova/explain.hpp"

#include "shapanova/errors.hpp"
#include "shapanova/exact.hpp"
#include "shapanova/regression.hpp"
#include "shapanova/rng.hpp"

namespace shapanova {
namespace {

/// Per-draw characteristic values for every hypercube corner, columns in
/// the B* order (null, size-lex coalitions, full), rows indexing draws.
/// Shares the distribution's base randomness across corners.
Eigen::MatrixXd corner_draws(const ModelFunction& model,
                             const BaselineDistribution& distribution,
                             const Eigen::VectorXd& target, Eigen::Index n,
                             std::uint64_t seed) {
  const int p = model.dimension();
  const auto masks = bstar_corner_masks(p);
  const Eigen::Index rows = distribution.kind() == BaselineKind::Single ? 1 : n;
  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(masks.size()));
  for (std::size_t c = 0; c < masks.size(); ++c)
    out.col(static_cast<Eigen::Index>(c)) =
        model(distribution.conditional_sample(rows, seed, Coalition{masks[c]}, target));
  return out;
}

}  // namespace

Attribution exact_shapley_distribution(const ModelFunction& model,
                                       const BaselineDistribution& distribution,
                                       const Eigen::VectorXd& target, Eigen::Index n,
                                       std::uint64_t seed) {
  const int p = model.dimension();
  require(p <= kEnumerationCap, ErrorKind::Resource, "p exceeds the enumeration cap");
  const Eigen::MatrixXd draws = corner_draws(model, distribution, target, n, seed);
  const Eigen::MatrixXd bstar = build_bstar(p);

  // phi per draw, then mean and spread over draws
  const Eigen::MatrixXd phi_draws = draws * bstar.transpose();
  Attribution out;
  out.phi = phi_draws.colwise().mean();
  out.y_null = draws.col(0).mean();
  out.y_target = draws.col(draws.cols() - 1).mean();
  out.method = AttributionMethod::ExactFormula;
  out.budget = draws.cols();
  out.seed = seed;
  out.samples = draws.rows();
  if (draws.rows() > 1) {
    const auto rows = static_cast<double>(draws.rows());
    Eigen::VectorXd se(p);
    for (int i = 0; i < p; ++i) {
      const double mean = out.phi(i);
      se(i) = std::sqrt((phi_draws.col(i).array() - mean).square().sum() /
                        (rows - 1.0) / rows);
    }
    out.standard_errors = se;
  }
  return out;
}

RegressionProblem explain_regression_problem(const ModelFunction& model,
                                             const BaselineDistribution& distribution,
                                             const Eigen::VectorXd& target,
                                             const ExplainOptions& options) {
  const int p = model.dimension();
  const bool sampled = options.method == ExplainMethod::RegressionSampled;
  require(options.method == ExplainMethod::Regression || sampled, ErrorKind::Input,
          "regression problem construction needs a regression method");
  const DesignMatrix design =
      sampled ? paired_block_sample(p, options.budget > 0 ? options.budget : 2 * p,
                                    options.seed)
              : full_powerset_design(p);
  AnovaEstimator estimator(model, distribution, target, options.samples,
                           sampled ? derive_seed(options.seed, 0xd) : options.seed);
  Eigen::VectorXd responses(design.rows.rows());
  for (Eigen::Index r = 0; r < responses.size(); ++r)
    responses(r) = estimator.corner(design.coalitions[static_cast<std::size_t>(r)]);
  return problem_from_design(design, responses,
                             estimator.corner(Coalition::full(p)),
                             estimator.corner(Coalition{0}));
}

ExplainMethod explain_method_from_string(const std::string& name) {
  if (name == "exact") return ExplainMethod::Exact;
  if (name == "regression") return ExplainMethod::Regression;
  if (name == "regression-sampled") return ExplainMethod::RegressionSampled;
  if (name == "anova-partition" || name == "anova") return ExplainMethod::AnovaPartition;
  fail(ErrorKind::Input, "unknown method '" + name +
                             "'; expected exact, regression, regression-sampled, "
                             "or anova-partition");
}

Attribution explain(const ModelFunction& model, const BaselineDistribution& distribution,
                    const Eigen::VectorXd& target, const ExplainOptions& options) {
  require(model.dimension() == distribution.dimension(), ErrorKind::Input,
          "model and distribution dimensions differ");
  require(target.size() == model.dimension(), ErrorKind::Input,
          "target length does not match the model dimension");
  const int p = model.dimension();

  switch (options.method) {
    case ExplainMethod::Exact:
      return exact_shapley_distribution(model, distribution, target, options.samples,
                                        options.seed);

    case ExplainMethod::Regression: {
      const RegressionProblem problem =
          explain_regression_problem(model, distribution, target, options);
      Attribution out = solve_closed_form(problem);
      out.seed = options.seed;
      out.samples = distribution.kind() == BaselineKind::Single ? 1 : options.samples;
      return out;
    }

    case ExplainMethod::RegressionSampled: {
      const std::int64_t budget = options.budget > 0 ? options.budget : 2 * p;
      const RegressionProblem problem =
          explain_regression_problem(model, distribution, target, options);
      Attribution out = solve_constrained(problem);
      out.seed = options.seed;
      out.samples = distribution.kind() == BaselineKind::Single ? 1 : options.samples;
      if (budget < 2 * p)
        out.notes.push_back("budget below 2p covers no full coalition-size block; "
                            "estimates satisfy the efficiency constraint but may "
                            "alias interactions");
      return out;
    }

    case ExplainMethod::AnovaPartition: {
      const AnovaDecomposition decomposition = full_decomposition(
          model, distribution, target, options.samples, options.seed,
          /*with_variances=*/false);
      Attribution out = shapley_from_anova(decomposition);
      out.seed = options.seed;
      return out;
    }
  }
  fail(ErrorKind::Input, "unreachable explain method");
}

}  // namespace shapanova
