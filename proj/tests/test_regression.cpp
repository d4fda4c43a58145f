#include <doctest.h>

#include "shapanova/errors.hpp"
#include "shapanova/exact.hpp"
#include "shapanova/regression.hpp"
#include "support.hpp"

using namespace shapanova;
using shapanova::testing::Polynomial;

namespace {

RegressionProblem full_problem(const ModelFunction& f, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& t) {
  const DesignMatrix design = full_powerset_design(f.dimension());
  const SyntheticBatch batch = synthesize(design.coalitions, b, t);
  return problem_from_design(design, f(batch.matrix), f.at(t), f.at(b));
}

}  // namespace

TEST_CASE("p=3 normal matrix and projector match the known closed forms") {
  const RegressionProblem problem =
      full_problem(make_builtin("linear3"), Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
  const Eigen::MatrixXd ztwz = normal_matrix(problem);
  Eigen::MatrixXd expected(3, 3);
  expected << 1, 1.0 / 3, 1.0 / 3,
              1.0 / 3, 1, 1.0 / 3,
              1.0 / 3, 1.0 / 3, 1;
  CHECK(ztwz.isApprox(expected, 1e-14));

  const Eigen::MatrixXd inv = ztwz.inverse();
  Eigen::MatrixXd expected_inv(3, 3);
  expected_inv << 1.2, -0.3, -0.3,
                  -0.3, 1.2, -0.3,
                  -0.3, -0.3, 1.2;
  CHECK(inv.isApprox(expected_inv, 1e-12));

  const Eigen::MatrixXd projector = constraint_projector(ztwz);
  Eigen::MatrixXd expected_proj(3, 3);
  expected_proj << 2.0 / 3, -1.0 / 3, -1.0 / 3,
                   -1.0 / 3, 2.0 / 3, -1.0 / 3,
                   -1.0 / 3, -1.0 / 3, 2.0 / 3;
  CHECK(projector.isApprox(expected_proj, 1e-12));
}

TEST_CASE("normal matrix has the aJ + bI structure for all p") {
  for (int p = 2; p <= 9; ++p) {
    const Polynomial poly = Polynomial::random(p, 2, 50 + p);
    const RegressionProblem problem = full_problem(
        poly.model(), testing::random_vector(p, 60 + p), testing::random_vector(p, 70 + p));
    const Eigen::MatrixXd ztwz = normal_matrix(problem);
    double a = 0.0;
    for (int i = 1; i <= p - 1; ++i) a += static_cast<double>(i - 1) / (p * (p - i));
    const double b = static_cast<double>(p - 1) / p;
    const Eigen::MatrixXd expected =
        a * Eigen::MatrixXd::Ones(p, p) + b * Eigen::MatrixXd::Identity(p, p);
    CHECK((ztwz - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("closed form equals the exact formula") {
  const Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd t = Eigen::VectorXd::Ones(3);
  const Attribution cf = solve_closed_form(full_problem(make_builtin("linear3"), b, t));
  CHECK(cf.phi(0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(cf.phi(1) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(cf.phi(2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cf.method == AttributionMethod::RegressionClosedForm);

  for (int p = 2; p <= 7; ++p) {
    const Polynomial poly = Polynomial::random(p, std::min(3, p), 80 + p);
    const ModelFunction f = poly.model();
    const Eigen::VectorXd bb = testing::random_vector(p, 90 + p);
    const Eigen::VectorXd tt = testing::random_vector(p, 95 + p);
    const Attribution exact = exact_shapley_single(f, bb, tt);
    const Attribution closed = solve_closed_form(full_problem(f, bb, tt));
    CHECK((closed.phi - exact.phi).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("closed form rejects non-full designs") {
  const DesignMatrix sampled = paired_block_sample(5, 10, 0);
  RegressionProblem problem;
  problem.design = sampled.rows;
  problem.weights = sampled.weights;
  problem.responses = Eigen::VectorXd::Zero(sampled.rows.rows());
  try {
    solve_closed_form(problem);
    FAIL("expected a contract error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Contract);
    CHECK(std::string(e.what()).find("solve_constrained") != std::string::npos);
  }
}

TEST_CASE("b-star contrast matrix") {
  SUBCASE("p=3 matches the published 3x8 matrix") {
    Eigen::MatrixXd expected(3, 8);
    const double a = 1.0 / 3, c = 1.0 / 6;
    expected << -a,  a, -c, -c,  c,  c, -a, a,
                -a, -c,  a, -c,  c, -a,  c, a,
                -a, -c, -c,  a, -a,  c,  c, a;
    CHECK(build_bstar(3).isApprox(expected, 1e-14));
  }
  SUBCASE("p=2 rows enumerate the two-player formula") {
    Eigen::MatrixXd expected(2, 4);
    expected << -0.5, 0.5, -0.5, 0.5,
                -0.5, -0.5, 0.5, 0.5;
    CHECK(build_bstar(2).isApprox(expected, 1e-15));
  }
  SUBCASE("rows sum to zero (contrasts)") {
    for (int p = 2; p <= 8; ++p)
      CHECK(build_bstar(p).rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("b-star applied to corner predictions equals exact shapley") {
    for (int p = 2; p <= 6; ++p) {
      const Polynomial poly = Polynomial::random(p, std::min(3, p), 10 + p);
      const ModelFunction f = poly.model();
      const Eigen::VectorXd b = testing::random_vector(p, 20 + p);
      const Eigen::VectorXd t = testing::random_vector(p, 30 + p);
      const Eigen::VectorXd by_mask = f(hypercube_corners(b, t));
      const auto masks = bstar_corner_masks(p);
      Eigen::VectorXd ystar(by_mask.size());
      for (std::size_t c = 0; c < masks.size(); ++c)
        ystar(static_cast<Eigen::Index>(c)) = by_mask(masks[c]);
      const Eigen::VectorXd phi = build_bstar(p) * ystar;
      const Attribution exact = exact_shapley_single(f, b, t);
      CHECK((phi - exact.phi).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("constrained solve") {
  SUBCASE("full design route equals the closed form") {
    for (int p = 2; p <= 6; ++p) {
      const Polynomial poly = Polynomial::random(p, 2, 40 + p);
      const ModelFunction f = poly.model();
      const RegressionProblem problem = full_problem(
          f, testing::random_vector(p, 41 + p), testing::random_vector(p, 42 + p));
      const Attribution closed = solve_closed_form(problem);
      const Attribution constrained = solve_constrained(problem);
      CHECK((closed.phi - constrained.phi).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
  SUBCASE("p=6 paired design is exact for models of order <= 2") {
    const Polynomial poly = Polynomial::random(6, 2, 333);
    const ModelFunction f = poly.model();
    const Eigen::VectorXd b = testing::random_vector(6, 334);
    const Eigen::VectorXd t = testing::random_vector(6, 335);
    const DesignMatrix design = paired_block_sample(6, 12, 0);
    const SyntheticBatch batch = synthesize(design.coalitions, b, t);
    const Attribution got = solve_constrained(
        problem_from_design(design, f(batch.matrix), f.at(t), f.at(b)));
    const Attribution exact = exact_shapley_single(f, b, t);
    CHECK((got.phi - exact.phi).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("m=p singleton design recovers additive contrasts") {
    // singleton coalitions only; for an additive model the solution is the
    // per-feature contrast f(..t_i..) - f(baseline)
    const ModelFunction f = make_builtin("linear3");
    const Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
    const Eigen::VectorXd t = Eigen::VectorXd::Ones(3);
    RegressionProblem problem;
    problem.design = Eigen::MatrixXd::Identity(3, 3);
    problem.weights = Eigen::VectorXd::Constant(3, kernel_weight(3, 1));
    Eigen::MatrixXd singles = Eigen::MatrixXd::Zero(3, 3);
    singles.diagonal() = t;
    problem.responses = f(singles);
    problem.y_target = f.at(t);
    problem.y_null = f.at(b);
    const Attribution got = solve_constrained(problem);
    CHECK(got.phi(0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(got.phi(1) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(got.phi(2) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("constraint satisfied on random sampled designs") {
    for (int trial = 0; trial < 8; ++trial) {
      const int p = 5 + (trial % 3);
      const Polynomial poly = Polynomial::random(p, 3, 1000 + trial);
      const ModelFunction f = poly.model();
      const Eigen::VectorXd b = testing::random_vector(p, 1100 + trial);
      const Eigen::VectorXd t = testing::random_vector(p, 1200 + trial);
      const DesignMatrix design =
          paired_block_sample(p, 2 * p + trial, 1300 + trial);
      const SyntheticBatch batch = synthesize(design.coalitions, b, t);
      const Attribution got = solve_constrained(
          problem_from_design(design, f(batch.matrix), f.at(t), f.at(b)));
      CHECK(got.phi.sum() ==
            doctest::Approx(got.y_target - got.y_null).epsilon(1e-10));
    }
  }
  SUBCASE("duplicate rows aggregate to the stacked solution") {
    const ModelFunction f = make_builtin("linear-interaction3");
    const Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
    const Eigen::VectorXd t = Eigen::VectorXd::Ones(3);
    const DesignMatrix design = full_powerset_design(3);
    const SyntheticBatch batch = synthesize(design.coalitions, b, t);
    const Eigen::VectorXd y = f(batch.matrix);
    // stack the first row three times
    RegressionProblem stacked;
    stacked.design.resize(8, 3);
    stacked.design << design.rows, design.rows.row(0), design.rows.row(0);
    stacked.weights.resize(8);
    stacked.weights << design.weights, design.weights(0), design.weights(0);
    stacked.responses.resize(8);
    stacked.responses << y, y(0), y(0);
    stacked.y_target = f.at(t);
    stacked.y_null = f.at(b);

    RegressionProblem merged;
    merged.design = design.rows;
    merged.weights = design.weights;
    merged.weights(0) *= 3;
    merged.responses = y;
    merged.y_target = stacked.y_target;
    merged.y_null = stacked.y_null;
    CHECK(solve_constrained(stacked).phi.isApprox(solve_constrained(merged).phi, 1e-12));
  }
  SUBCASE("constant design column engages the ridge with a note") {
    RegressionProblem problem;
    problem.design.resize(3, 3);
    problem.design << 1, 0, 0,
                      1, 1, 0,
                      1, 0, 1;  // column 1 always included
    problem.weights = Eigen::VectorXd::Ones(3);
    problem.responses = Eigen::Vector3d(1, 2, 3);
    problem.y_target = 3;
    problem.y_null = 0;
    const Attribution got = solve_constrained(problem);
    REQUIRE_FALSE(got.notes.empty());
    CHECK(got.notes[0].find("ridge") != std::string::npos);
    CHECK(got.phi.sum() == doctest::Approx(3.0).epsilon(1e-10));
  }
  SUBCASE("fewer rows than features is rejected") {
    RegressionProblem problem;
    problem.design = Eigen::MatrixXd::Identity(2, 3);
    problem.weights = Eigen::VectorXd::Ones(2);
    problem.responses = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(solve_constrained(problem), Error);
  }
}
