#include "shapanova/exact.hpp"

#include <vector>

#include "shapanova/coalition.hpp"
#include "shapanova/errors.hpp"

namespace shapanova {
namespace {

std::vector<double> shapley_size_weights(int p) {
  // weight for a coalition of size s in the formula: s!(p-s-1)!/p!
  std::vector<double> w(static_cast<std::size_t>(p));
  for (int s = 0; s < p; ++s) {
    double num = 1.0;
    for (int i = 2; i <= s; ++i) num *= i;
    for (int i = 2; i <= p - s - 1; ++i) num *= i;
    double den = 1.0;
    for (int i = 2; i <= p; ++i) den *= i;
    w[static_cast<std::size_t>(s)] = num / den;
  }
  return w;
}

}  // namespace

Eigen::VectorXd shapley_from_corners(int p, const Eigen::VectorXd& corners) {
  require(corners.size() == (Eigen::Index{1} << p), ErrorKind::Input,
          "corner vector must have 2^p entries");
  const auto weights = shapley_size_weights(p);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(p);
  const auto total = static_cast<std::uint32_t>(corners.size());
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    const int s = __builtin_popcount(mask);
    for (int i = 0; i < p; ++i) {
      if ((mask >> i) & 1u) continue;
      phi(i) += weights[static_cast<std::size_t>(s)] *
                (corners(mask | (1u << i)) - corners(mask));
    }
  }
  return phi;
}

Eigen::MatrixXd hypercube_corners(const Eigen::VectorXd& baseline,
                                  const Eigen::VectorXd& target) {
  require(baseline.size() == target.size(), ErrorKind::Input,
          "baseline and target lengths differ");
  const auto p = static_cast<int>(baseline.size());
  require(p <= kEnumerationCap, ErrorKind::Resource, "p exceeds the enumeration cap");
  const auto rows = Eigen::Index{1} << p;
  Eigen::MatrixXd corners(rows, p);
  for (Eigen::Index mask = 0; mask < rows; ++mask)
    for (int j = 0; j < p; ++j)
      corners(mask, j) = (mask >> j) & 1 ? target(j) : baseline(j);
  return corners;
}

Attribution exact_shapley_single(const ModelFunction& model,
                                 const Eigen::VectorXd& baseline,
                                 const Eigen::VectorXd& target) {
  require(model.dimension() == baseline.size(), ErrorKind::Input,
          "baseline length does not match the model dimension");
  const auto p = static_cast<int>(baseline.size());
  const Eigen::VectorXd values = model(hypercube_corners(baseline, target));

  Attribution out;
  out.phi = shapley_from_corners(p, values);
  out.y_null = values(0);
  out.y_target = values(values.size() - 1);
  out.method = AttributionMethod::ExactFormula;
  out.budget = values.size();
  return out;
}

Attribution exact_shapley_multi(const ModelFunction& model,
                                const Eigen::MatrixXd& baselines,
                                const Eigen::VectorXd& target) {
  const auto n = baselines.rows();
  require(n >= 1, ErrorKind::Input, "need at least one baseline");
  require(baselines.cols() == target.size(), ErrorKind::Input,
          "baseline width does not match the target length");
  const auto p = static_cast<int>(target.size());
  require(p <= kEnumerationCap, ErrorKind::Resource, "p exceeds the enumeration cap");
  const auto corners = Eigen::Index{1} << p;

  // per-baseline attributions are contrasts of per-baseline corner values;
  // evaluate one corner across all baselines per batch, accumulating the
  // per-baseline Shapley contrast chunkwise
  const auto weights = shapley_size_weights(p);
  Eigen::MatrixXd contrast(corners, p);  // corner-to-phi coefficients
  contrast.setZero();
  for (std::uint32_t mask = 0; mask < static_cast<std::uint32_t>(corners); ++mask) {
    const int s = __builtin_popcount(mask);
    for (int i = 0; i < p; ++i) {
      if ((mask >> i) & 1u) {
        contrast(mask, i) += weights[static_cast<std::size_t>(s - 1)];
      } else {
        contrast(mask, i) -= weights[static_cast<std::size_t>(s)];
      }
    }
  }

  const Eigen::Index chunk = std::max<Eigen::Index>(
      1, std::min<Eigen::Index>(n, (Eigen::Index{1} << 23) / corners));
  Eigen::VectorXd phi_sum = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd phi_sq = Eigen::VectorXd::Zero(p);
  double null_sum = 0.0;
  double y_target = 0.0;
  Eigen::MatrixXd draws, synthetic;
  for (Eigen::Index start = 0; start < n; start += chunk) {
    const Eigen::Index count = std::min(chunk, n - start);
    draws.resize(count, corners);
    synthetic.resize(count, p);
    for (std::uint32_t mask = 0; mask < static_cast<std::uint32_t>(corners); ++mask) {
      for (int j = 0; j < p; ++j) {
        if ((mask >> j) & 1u)
          synthetic.col(j).setConstant(target(j));
        else
          synthetic.col(j) = baselines.col(j).segment(start, count);
      }
      draws.col(mask) = model(synthetic);
    }
    const Eigen::MatrixXd phi_chunk = draws * contrast;
    phi_sum += phi_chunk.colwise().sum().transpose();
    phi_sq += phi_chunk.array().square().colwise().sum().matrix().transpose();
    null_sum += draws.col(0).sum();
    y_target = draws(0, corners - 1);
  }

  Attribution out;
  out.phi = phi_sum / static_cast<double>(n);
  out.y_null = null_sum / static_cast<double>(n);
  out.y_target = y_target;
  out.method = AttributionMethod::ExactFormula;
  out.budget = corners;
  out.samples = n;
  if (n > 1) {
    Eigen::VectorXd se(p);
    for (int i = 0; i < p; ++i) {
      const double var =
          (phi_sq(i) - static_cast<double>(n) * out.phi(i) * out.phi(i)) /
          static_cast<double>(n - 1);
      se(i) = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    }
    out.standard_errors = se;
  }
  return out;
}

}  // namespace shapanova
