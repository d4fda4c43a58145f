#include "shapanova/baseline.hpp"

#include <vector>

#include "shapanova/errors.hpp"
#include "shapanova/rng.hpp"

namespace shapanova {

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Single: return "single";
    case BaselineKind::Empirical: return "empirical";
    case BaselineKind::GaussianIndependent: return "gaussian-independent";
    case BaselineKind::GaussianCorrelated: return "gaussian-correlated";
    case BaselineKind::GaussianLocal: return "gaussian-local";
    case BaselineKind::Uniform01: return "uniform01";
  }
  return "unknown";
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& covariance) {
  require(covariance.rows() == covariance.cols(), ErrorKind::Distribution,
          "covariance matrix must be square");
  require(covariance.isApprox(covariance.transpose(), 1e-10), ErrorKind::Distribution,
          "covariance matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigh(covariance);
  require(eigh.info() == Eigen::Success, ErrorKind::Distribution,
          "covariance eigendecomposition failed");
  const Eigen::VectorXd& lambda = eigh.eigenvalues();
  const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1.0);
  require(lambda.minCoeff() >= -1e-10 * scale, ErrorKind::Distribution,
          "covariance matrix is not positive semi-definite (min eigenvalue " +
              std::to_string(lambda.minCoeff()) + ")");
  return eigh.eigenvectors() *
         lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

BaselineDistribution BaselineDistribution::single(const Eigen::VectorXd& point) {
  require(point.size() >= 1, ErrorKind::Distribution, "point baseline is empty");
  BaselineDistribution d;
  d.kind_ = BaselineKind::Single;
  d.dimension_ = static_cast<int>(point.size());
  d.mean_ = point;
  return d;
}

BaselineDistribution BaselineDistribution::empirical(const Eigen::MatrixXd& data) {
  require(data.rows() >= 1 && data.cols() >= 1, ErrorKind::Distribution,
          "empirical baseline matrix is empty");
  BaselineDistribution d;
  d.kind_ = BaselineKind::Empirical;
  d.dimension_ = static_cast<int>(data.cols());
  d.data_ = data;
  d.mean_ = data.colwise().mean();
  return d;
}

BaselineDistribution BaselineDistribution::gaussian_independent(
    const Eigen::VectorXd& mean, const Eigen::VectorXd& variances) {
  require(mean.size() == variances.size(), ErrorKind::Distribution,
          "mean and variance lengths differ");
  require((variances.array() >= 0).all(), ErrorKind::Distribution,
          "variances must be nonnegative");
  BaselineDistribution d;
  d.kind_ = BaselineKind::GaussianIndependent;
  d.dimension_ = static_cast<int>(mean.size());
  d.mean_ = mean;
  d.covariance_ = variances.asDiagonal();
  d.factor_ = variances.cwiseSqrt().asDiagonal();
  return d;
}

BaselineDistribution BaselineDistribution::gaussian_correlated(
    const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance) {
  require(mean.size() == covariance.rows(), ErrorKind::Distribution,
          "mean length does not match the covariance");
  BaselineDistribution d;
  d.kind_ = BaselineKind::GaussianCorrelated;
  d.dimension_ = static_cast<int>(mean.size());
  d.mean_ = mean;
  d.covariance_ = covariance;
  d.factor_ = psd_factor(covariance);  // validates PSD at construction
  return d;
}

BaselineDistribution BaselineDistribution::gaussian_local(
    const Eigen::VectorXd& center, double sd) {
  require(sd >= 0, ErrorKind::Distribution, "standard deviation must be nonnegative");
  BaselineDistribution d;
  d.kind_ = BaselineKind::GaussianLocal;
  d.dimension_ = static_cast<int>(center.size());
  d.mean_ = center;
  d.covariance_ =
      Eigen::MatrixXd::Identity(center.size(), center.size()) * sd * sd;
  d.factor_ = Eigen::MatrixXd::Identity(center.size(), center.size()) * sd;
  return d;
}

BaselineDistribution BaselineDistribution::uniform01(int dimension) {
  require(dimension >= 1, ErrorKind::Distribution, "dimension must be positive");
  BaselineDistribution d;
  d.kind_ = BaselineKind::Uniform01;
  d.dimension_ = dimension;
  d.mean_ = Eigen::VectorXd::Constant(dimension, 0.5);
  return d;
}

Eigen::MatrixXd BaselineDistribution::sample(Eigen::Index n, std::uint64_t seed) const {
  require(n >= 1, ErrorKind::Input, "sample size must be positive");
  switch (kind_) {
    case BaselineKind::Single:
      return mean_.transpose().replicate(n, 1);
    case BaselineKind::Empirical: {
      Rng rng(seed);
      Eigen::MatrixXd out(n, dimension_);
      for (Eigen::Index i = 0; i < n; ++i)
        out.row(i) =
            data_.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(data_.rows()))));
      return out;
    }
    case BaselineKind::Uniform01:
      return uniform01_matrix(n, dimension_, seed);
    case BaselineKind::GaussianIndependent:
    case BaselineKind::GaussianCorrelated:
    case BaselineKind::GaussianLocal: {
      const Eigen::MatrixXd g = standard_normal_matrix(n, dimension_, seed);
      return (g * factor_.transpose()).rowwise() + mean_.transpose();
    }
  }
  fail(ErrorKind::Distribution, "unreachable baseline kind");
}

Eigen::MatrixXd BaselineDistribution::conditional_sample(
    Eigen::Index n, std::uint64_t seed, Coalition fixed, const Eigen::VectorXd& x) const {
  require(x.size() == dimension_, ErrorKind::Input,
          "conditioning vector length does not match the distribution");

  if (product_form()) {
    Eigen::MatrixXd out = sample(n, seed);
    for (int j = 0; j < dimension_; ++j)
      if (fixed.contains(j)) out.col(j).setConstant(x(j));
    return out;
  }

  // exact conditional law of the joint Gaussian
  std::vector<int> pinned, free;
  for (int j = 0; j < dimension_; ++j)
    (fixed.contains(j) ? pinned : free).push_back(j);

  Eigen::MatrixXd out(n, dimension_);
  for (int j : pinned) out.col(j).setConstant(x(j));
  if (free.empty()) return out;

  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::VectorXd cond_mean(nf);
  Eigen::MatrixXd cond_cov(nf, nf);
  if (pinned.empty()) {
    for (Eigen::Index a = 0; a < nf; ++a) {
      cond_mean(a) = mean_(free[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < nf; ++b)
        cond_cov(a, b) = covariance_(free[static_cast<std::size_t>(a)],
                                     free[static_cast<std::size_t>(b)]);
    }
  } else {
    const auto np = static_cast<Eigen::Index>(pinned.size());
    Eigen::MatrixXd s_uu(np, np), s_fu(nf, np);
    Eigen::VectorXd delta(np);
    for (Eigen::Index a = 0; a < np; ++a) {
      delta(a) = x(pinned[static_cast<std::size_t>(a)]) -
                 mean_(pinned[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < np; ++b)
        s_uu(a, b) = covariance_(pinned[static_cast<std::size_t>(a)],
                                 pinned[static_cast<std::size_t>(b)]);
    }
    for (Eigen::Index a = 0; a < nf; ++a)
      for (Eigen::Index b = 0; b < np; ++b)
        s_fu(a, b) = covariance_(free[static_cast<std::size_t>(a)],
                                 pinned[static_cast<std::size_t>(b)]);
    const auto ldlt = s_uu.ldlt();
    Eigen::MatrixXd s_ff(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      cond_mean(a) = mean_(free[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < nf; ++b)
        s_ff(a, b) = covariance_(free[static_cast<std::size_t>(a)],
                                 free[static_cast<std::size_t>(b)]);
    }
    cond_mean += s_fu * ldlt.solve(delta);
    cond_cov = s_ff - s_fu * ldlt.solve(s_fu.transpose());
    cond_cov = 0.5 * (cond_cov + cond_cov.transpose());  // re-symmetrize Schur complement
  }

  // shared standard normals: one n x p matrix per (n, seed), columns
  // selected by free-feature index so corners reuse draws coherently
  const Eigen::MatrixXd g_all = standard_normal_matrix(n, dimension_, seed);
  Eigen::MatrixXd g(n, nf);
  for (Eigen::Index a = 0; a < nf; ++a)
    g.col(a) = g_all.col(free[static_cast<std::size_t>(a)]);
  const Eigen::MatrixXd draws =
      (g * psd_factor(cond_cov).transpose()).rowwise() + cond_mean.transpose();
  for (Eigen::Index a = 0; a < nf; ++a)
    out.col(free[static_cast<std::size_t>(a)]) = draws.col(a);
  return out;
}

}  // namespace shapanova
