#include <doctest.h>

#include "shapanova/anova.hpp"
#include "shapanova/errors.hpp"
#include "shapanova/exact.hpp"
#include "support.hpp"

using namespace shapanova;
using shapanova::testing::Polynomial;

TEST_CASE("conditional expectations") {
  const ModelFunction pair4 = make_builtin("additive-pair4");
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.3);
  SUBCASE("full conditioning returns f(x) exactly") {
    const BaselineDistribution dist = BaselineDistribution::uniform01(3);
    const double got = conditional_expectation(pair4, dist, x, Coalition::full(3), 50, 1);
    CHECK(got == pair4.at(x));
  }
  SUBCASE("unconditional mean of linear3 under N(0,I) is 0") {
    const BaselineDistribution dist = BaselineDistribution::gaussian_independent(
        Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
    const Eigen::Index n = 200000;
    const double got =
        conditional_expectation(make_builtin("linear3"), dist, x, Coalition{0}, n, 2);
    // sd of the mean: sqrt(4 + 2.25 + 0.25)/sqrt(n)
    const double se = std::sqrt(6.5 / static_cast<double>(n));
    CHECK(std::fabs(got) < 3 * se);
  }
  SUBCASE("unconditional mean of additive-pair4 under U[0,1]^3 is 1.75") {
    const BaselineDistribution dist = BaselineDistribution::uniform01(3);
    const Eigen::Index n = 200000;
    const double got = conditional_expectation(pair4, dist, x, Coalition{0}, n, 3);
    const double se = std::sqrt(0.4653 / static_cast<double>(n));
    CHECK(std::fabs(got - 1.75) < 3 * se);
  }
}

TEST_CASE("anova terms") {
  const ModelFunction pair4 = make_builtin("additive-pair4");
  const BaselineDistribution uniform = BaselineDistribution::uniform01(3);
  SUBCASE("the {2,3} term of additive-pair4 is (x2-1/2)(x3-1/2)") {
    Eigen::VectorXd x(3);
    x << 0.1, 0.8, 0.4;
    const Eigen::Index n = 3000;  // sigma2 inside anova_term costs O(n^2) rows
    const AnovaTerm term = anova_term(pair4, uniform, x, Coalition{0b110}, n, 4);
    const double expected = (x(1) - 0.5) * (x(2) - 0.5);
    CHECK(term.value == doctest::Approx(expected).scale(1.0).epsilon(0.01));
    // sigma2 of the pure interaction term is 1/144
    CHECK(term.sigma2 == doctest::Approx(1.0 / 144).epsilon(0.15));
  }
  SUBCASE("a dummy coordinate has a null main effect") {
    const ModelFunction f(3, "ignores-x1", [](const auto& x) {
      return Eigen::VectorXd(x.col(1) + x.col(2));
    });
    const AnovaTerm term = anova_term(f, uniform, Eigen::VectorXd::Constant(3, 0.9),
                                      Coalition{0b001}, 3000, 5);
    CHECK(std::fabs(term.value) < 1e-12);  // overwrite leaves f unchanged
  }
  SUBCASE("sigma2 of the {1} main effect is 1/12") {
    AnovaEstimator estimator(pair4, uniform, Eigen::VectorXd::Constant(3, 0.5),
                             5000, 6);
    const double s2 = estimator.sigma2(Coalition{0b001});
    CHECK(s2 == doctest::Approx(1.0 / 12).epsilon(0.10));
  }
}

TEST_CASE("reconstruction and partition identities") {
  SUBCASE("degenerate baseline: terms sum to f(x) at machine precision, p <= 6") {
    for (int p = 3; p <= 6; ++p) {
      const Polynomial poly = Polynomial::random(p, std::min(p, 4), 900 + p);
      const ModelFunction f = poly.model();
      const Eigen::VectorXd b = testing::random_vector(p, 910 + p);
      const Eigen::VectorXd x = testing::random_vector(p, 920 + p);
      const AnovaDecomposition decomposition = full_decomposition(
          f, BaselineDistribution::single(b), x, 1, 0, /*with_variances=*/false);
      double total = 0.0;
      for (const auto& [mask, term] : decomposition.terms) total += term.value;
      CHECK(total == doctest::Approx(f.at(x)).epsilon(1e-10));
    }
  }
  SUBCASE("uniform baseline with common random numbers reconstructs to 1e-9") {
    const ModelFunction f = make_builtin("nonlinear-interaction3");
    const BaselineDistribution uniform = BaselineDistribution::uniform01(3);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.7);
    const AnovaDecomposition decomposition =
        full_decomposition(f, uniform, x, 5000, 7, /*with_variances=*/false);
    double total = 0.0;
    for (const auto& [mask, term] : decomposition.terms) total += term.value;
    CHECK(total == doctest::Approx(f.at(x)).epsilon(1e-9));
  }
  SUBCASE("degenerate anova term equals the corner finite difference, p=3") {
    const Polynomial poly = Polynomial::random(3, 3, 33);
    const ModelFunction f = poly.model();
    const Eigen::VectorXd b = testing::random_vector(3, 34);
    const Eigen::VectorXd x = testing::random_vector(3, 35);
    AnovaEstimator estimator(f, BaselineDistribution::single(b), x, 1, 0);
    // f_{12} = f(x1,x2,b3) - f(x1,b2,b3) - f(b1,x2,b3) + f(b)
    auto corner = [&](std::uint32_t mask) {
      const SyntheticBatch batch = synthesize({{mask}}, b, x);
      return f(batch.matrix)(0);
    };
    const double expected = corner(0b011) - corner(0b001) - corner(0b010) + corner(0b000);
    CHECK(estimator.term_value(Coalition{0b011}) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("shapley from anova") {
  const BaselineDistribution uniform = BaselineDistribution::uniform01(3);
  SUBCASE("p=3 partition weights: phi_1 = f_1 + (f_12 + f_13)/2 + f_123/3") {
    const ModelFunction f = make_builtin("nonlinear-interaction3");
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.25);
    const AnovaDecomposition d =
        full_decomposition(f, uniform, x, 2000, 8, /*with_variances=*/false);
    const Attribution a = shapley_from_anova(d);
    auto term = [&](std::uint32_t mask) { return d.terms.at(mask).value; };
    const double phi1 =
        term(0b001) + 0.5 * (term(0b011) + term(0b101)) + term(0b111) / 3.0;
    CHECK(a.phi(0) == doctest::Approx(phi1).epsilon(1e-12));
  }
  SUBCASE("main effects of an additive model partition to phi_i = f_i") {
    const ModelFunction f(3, "additive", [](const auto& x) {
      return Eigen::VectorXd(x.col(0) + 2.0 * x.col(1) - x.col(2));
    });
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.8);
    AnovaEstimator estimator(f, uniform, x, 5000, 9);
    AnovaDecomposition d;
    d.target = x;
    d.f_at_target = estimator.f_at_target();
    d.terms.emplace(0, AnovaTerm{Coalition{0}, estimator.corner({0}), 0.0});
    for (std::uint32_t mask : {0b001u, 0b010u, 0b100u})
      d.terms.emplace(mask,
                      AnovaTerm{Coalition{mask}, estimator.term_value({mask}), 0.0});
    const Attribution a = shapley_from_anova(d);
    for (std::uint32_t mask : {0b001u, 0b010u, 0b100u})
      CHECK(a.phi(__builtin_ctz(mask)) ==
            doctest::Approx(d.terms.at(mask).value).epsilon(1e-12));
  }
  SUBCASE("all-zero terms give zero attributions") {
    AnovaDecomposition d;
    d.target = Eigen::VectorXd::Zero(3);
    d.terms.emplace(0, AnovaTerm{Coalition{0}, 0.0, 0.0});
    d.terms.emplace(0b001, AnovaTerm{Coalition{0b001}, 0.0, 0.0});
    const Attribution a = shapley_from_anova(d);
    CHECK(a.phi.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("partition equals exact multi-baseline on the same sample, p <= 6") {
    for (int p = 3; p <= 6; ++p) {
      const Polynomial poly = Polynomial::random(p, std::min(p, 3), 940 + p);
      const ModelFunction f = poly.model();
      const Eigen::VectorXd x = testing::random_vector(p, 950 + p);
      const BaselineDistribution dist = BaselineDistribution::uniform01(p);
      const Eigen::Index n = 400;
      const std::uint64_t seed = 17;
      const AnovaDecomposition d =
          full_decomposition(f, dist, x, n, seed, /*with_variances=*/false);
      const Attribution partition = shapley_from_anova(d);
      const Attribution multi =
          exact_shapley_multi(f, dist.sample(n, seed), x);
      CHECK((partition.phi - multi.phi).cwiseAbs().maxCoeff() <= 1e-9);
      // telescoping
      CHECK(partition.phi.sum() ==
            doctest::Approx(partition.y_target - partition.y_null).epsilon(1e-9));
    }
  }
}
