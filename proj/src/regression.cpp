#include "shapanova/regression.hpp"

#include <map>
#include <string>

#include "shapanova/errors.hpp"

namespace shapanova {
namespace {

void validate_problem(const RegressionProblem& problem) {
  const auto m = problem.design.rows();
  require(m >= 1, ErrorKind::Input, "regression problem has no rows");
  require(problem.weights.size() == m && problem.responses.size() == m,
          ErrorKind::Input, "design, weights, and responses must agree in length");
  require((problem.weights.array() > 0).all(), ErrorKind::Input,
          "all regression weights must be positive");
}

std::uint32_t row_mask(const RegressionProblem& problem, Eigen::Index r) {
  std::uint32_t mask = 0;
  for (Eigen::Index j = 0; j < problem.design.cols(); ++j)
    if (problem.design(r, j) > 0.5) mask |= 1u << j;
  return mask;
}

double condition_estimate(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  return sv(0) / std::max(sv(sv.size() - 1), 1e-300);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

RegressionProblem problem_from_design(const DesignMatrix& design,
                                      const Eigen::VectorXd& responses,
                                      double y_target, double y_null) {
  require(responses.size() == design.rows.rows(), ErrorKind::Input,
          "responses length does not match the design");
  return RegressionProblem{design.rows, design.weights, responses, y_target, y_null};
}

Eigen::MatrixXd normal_matrix(const RegressionProblem& problem) {
  validate_problem(problem);
  return problem.design.transpose() * problem.weights.asDiagonal() * problem.design;
}

Eigen::MatrixXd constraint_projector(const Eigen::MatrixXd& ztwz) {
  const auto p = ztwz.rows();
  const Eigen::MatrixXd inv = ztwz.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::VectorXd j = Eigen::VectorXd::Ones(p);
  const double a = j.dot(inv * j);
  return Eigen::MatrixXd::Identity(p, p) - j * (inv * j).transpose() / a;
}

Attribution solve_closed_form(const RegressionProblem& problem) {
  validate_problem(problem);
  const auto p = static_cast<int>(problem.design.cols());
  const auto m = problem.design.rows();
  const auto expected = (std::int64_t{1} << p) - 2;

  std::map<std::uint32_t, int> seen;
  bool full = (m == expected);
  if (full) {
    for (Eigen::Index r = 0; r < m && full; ++r) {
      const std::uint32_t mask = row_mask(problem, r);
      if (mask == 0 || mask == (1u << p) - 1u || seen.count(mask)) full = false;
      seen[mask] = 1;
      const int s = Coalition{mask}.size();
      if (s > 0 && s < p &&
          std::abs(problem.weights(r) - kernel_weight(p, s)) >
              1e-9 * kernel_weight(p, s))
        full = false;
    }
  }
  require(full, ErrorKind::Contract,
          "closed form requires the full powerset design with kernel weights; "
          "use solve_constrained for sampled designs");

  const Eigen::VectorXd ztwy =
      problem.design.transpose() * problem.weights.cwiseProduct(problem.responses);
  const double pd = p;
  const double sum = ztwy.sum();
  Attribution out;
  out.phi = (pd / (pd - 1.0)) * ztwy -
            Eigen::VectorXd::Constant(p, sum / (pd - 1.0)) +
            Eigen::VectorXd::Constant(p, (problem.y_target - problem.y_null) / pd);
  out.y_target = problem.y_target;
  out.y_null = problem.y_null;
  out.method = AttributionMethod::RegressionClosedForm;
  out.budget = m;
  return out;
}

Attribution solve_constrained(const RegressionProblem& problem) {
  validate_problem(problem);
  const auto p = problem.design.cols();
  require(problem.design.rows() >= p, ErrorKind::Input,
          "constrained solve needs at least p rows");

  // aggregate duplicate coalitions: identical normal equations, smaller solve
  std::map<std::uint32_t, std::pair<double, double>> groups;  // mask -> (w, w*y)
  for (Eigen::Index r = 0; r < problem.design.rows(); ++r) {
    auto& g = groups[row_mask(problem, r)];
    g.first += problem.weights(r);
    g.second += problem.weights(r) * problem.responses(r);
  }
  const auto mu = static_cast<Eigen::Index>(groups.size());
  Eigen::MatrixXd design(mu, p);
  Eigen::VectorXd weights(mu), responses(mu);
  Eigen::Index r = 0;
  for (const auto& [mask, g] : groups) {
    for (Eigen::Index j = 0; j < p; ++j) design(r, j) = (mask >> j) & 1u ? 1.0 : 0.0;
    weights(r) = g.first;
    responses(r) = g.second / g.first;
    ++r;
  }

  Attribution out;
  Eigen::MatrixXd normal = design.transpose() * weights.asDiagonal() * design;
  bool constant_column = false;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double colsum = design.col(j).sum();
    if (colsum == 0.0 || colsum == static_cast<double>(mu)) constant_column = true;
  }
  double cond = condition_estimate(normal);
  if (constant_column || cond > 1e12) {
    normal += 1e-8 * Eigen::MatrixXd::Identity(p, p);
    out.notes.push_back(
        constant_column
            ? "ridge fallback engaged: a design column is constant"
            : "ridge fallback engaged: normal matrix condition estimate " +
                  std::to_string(cond));
    cond = condition_estimate(normal);
  }
  require(cond < 1e12, ErrorKind::Numerical,
          "normal matrix remains ill-conditioned after ridge (condition estimate " +
              std::to_string(cond) + ")");

  const auto ldlt = normal.ldlt();
  const Eigen::VectorXd u = ldlt.solve(design.transpose() * weights.cwiseProduct(responses));
  const Eigen::VectorXd j_ones = Eigen::VectorXd::Ones(p);
  const Eigen::VectorXd v = ldlt.solve(j_ones);
  const double a = j_ones.dot(v);
  const double c = problem.y_target - problem.y_null;
  out.phi = u - v * ((j_ones.dot(u) - c) / a);
  out.y_target = problem.y_target;
  out.y_null = problem.y_null;
  out.method = AttributionMethod::RegressionSampled;
  out.budget = problem.design.rows();
  return out;
}

Eigen::MatrixXd build_bstar(int p) {
  require(p >= 2, ErrorKind::Input, "build_bstar needs p >= 2");
  require(p <= kEnumerationCap, ErrorKind::Resource, "p exceeds the enumeration cap");
  const auto cols = std::int64_t{1} << p;
  Eigen::MatrixXd bstar(p, cols);
  bstar.col(0) = Eigen::VectorXd::Constant(p, -1.0 / p);
  bstar.col(cols - 1) = Eigen::VectorXd::Constant(p, 1.0 / p);
  const double pf = factorial(p);
  Eigen::Index col = 1;
  for (const Coalition c : proper_coalitions(p)) {
    const int s = c.size();
    const double in_weight = factorial(p - s) * factorial(s - 1) / pf;
    const double out_weight = -factorial(p - s - 1) * factorial(s) / pf;
    for (int i = 0; i < p; ++i)
      bstar(i, col) = c.contains(i) ? in_weight : out_weight;
    ++col;
  }
  return bstar;
}

std::vector<std::uint32_t> bstar_corner_masks(int p) {
  std::vector<std::uint32_t> out;
  out.reserve(std::size_t{1} << p);
  out.push_back(0);
  for (const Coalition c : proper_coalitions(p)) out.push_back(c.mask);
  out.push_back((1u << p) - 1u);
  return out;
}

std::string to_string(AttributionMethod method) {
  switch (method) {
    case AttributionMethod::ExactFormula: return "exact-formula";
    case AttributionMethod::RegressionClosedForm: return "regression-closed-form";
    case AttributionMethod::RegressionSampled: return "regression-sampled";
    case AttributionMethod::AnovaPartition: return "anova-partition";
  }
  return "unknown";
}

AttributionMethod attribution_method_from_string(const std::string& name) {
  if (name == "exact-formula") return AttributionMethod::ExactFormula;
  if (name == "regression-closed-form") return AttributionMethod::RegressionClosedForm;
  if (name == "regression-sampled") return AttributionMethod::RegressionSampled;
  if (name == "anova-partition") return AttributionMethod::AnovaPartition;
  fail(ErrorKind::Input, "unknown attribution method '" + name + "'");
}

}  // namespace shapanova
