#include "shapanova/anova.hpp"

#include <algorithm>

#include "shapanova/errors.hpp"
#include "shapanova/rng.hpp"

namespace shapanova {
namespace {

/// Visits every subset v of u's bits, passing (v_mask, popcount difference
/// sign): sign = (-1)^(|u| - |v|).
template <typename Fn>
void for_each_subset(std::uint32_t u, Fn&& fn) {
  const int bits = __builtin_popcount(u);
  std::uint32_t v = u;
  while (true) {
    const int sign = ((bits - __builtin_popcount(v)) & 1) ? -1 : 1;
    fn(v, sign);
    if (v == 0) break;
    v = (v - 1) & u;
  }
}

}  // namespace

AnovaEstimator::AnovaEstimator(const ModelFunction& model,
                               const BaselineDistribution& distribution,
                               Eigen::VectorXd target, Eigen::Index n,
                               std::uint64_t seed)
    : model_(&model),
      distribution_(distribution),
      target_(std::move(target)),
      seed_(seed) {
  require(model.dimension() == distribution.dimension(), ErrorKind::Input,
          "model and distribution dimensions differ");
  require(model.dimension() <= 31, ErrorKind::Resource,
          "subset masks support at most 31 features");
  require(target_.size() == model.dimension(), ErrorKind::Input,
          "target length does not match the model dimension");
  require(n >= 1, ErrorKind::Input, "sample size must be positive");
  // the degenerate law is exact with a single row
  n_ = distribution.kind() == BaselineKind::Single ? 1 : n;
  sample_ = distribution_.sample(n_, seed_);
  f_sample_ = (*model_)(sample_);
  f_target_ = model_->at(target_);
}

double AnovaEstimator::corner(Coalition u) {
  auto it = corner_cache_.find(u.mask);
  if (it != corner_cache_.end()) return it->second;

  double value = 0.0;
  if (u.mask == static_cast<std::uint32_t>((1u << model_->dimension()) - 1u)) {
    value = f_target_;
  } else if (u.empty()) {
    value = f_sample_.mean();
  } else if (distribution_.product_form()) {
    Eigen::MatrixXd m = sample_;
    for (int j = 0; j < model_->dimension(); ++j)
      if (u.contains(j)) m.col(j).setConstant(target_(j));
    value = (*model_)(m).mean();
  } else {
    value = (*model_)(distribution_.conditional_sample(n_, seed_, u, target_)).mean();
  }
  corner_cache_.emplace(u.mask, value);
  return value;
}

double AnovaEstimator::term_value(Coalition u) {
  double total = 0.0;
  for_each_subset(u.mask, [&](std::uint32_t v, int sign) {
    total += sign * corner(Coalition{v});
  });
  return total;
}

const Eigen::VectorXd& AnovaEstimator::profile(Coalition v) {
  auto it = profile_cache_.find(v.mask);
  if (it != profile_cache_.end()) return it->second;

  Eigen::VectorXd out(n_);
  if (v.empty()) {
    out.setConstant(f_sample_.mean());
  } else {
    // E[f | X_v = (x_i)_v] for every sample row i, expectations over the
    // same matrix; batched in chunks of targets
    std::vector<int> cols;
    for (int j = 0; j < model_->dimension(); ++j)
      if (v.contains(j)) cols.push_back(j);
    const Eigen::Index chunk = std::max<Eigen::Index>(1, 65536 / std::max<Eigen::Index>(n_, 1));
    Eigen::MatrixXd block;
    for (Eigen::Index start = 0; start < n_; start += chunk) {
      const Eigen::Index count = std::min(chunk, n_ - start);
      block.resize(count * n_, model_->dimension());
      for (Eigen::Index t = 0; t < count; ++t) {
        block.middleRows(t * n_, n_) = sample_;
        for (int j : cols)
          block.col(j).segment(t * n_, n_).setConstant(sample_(start + t, j));
      }
      const Eigen::VectorXd values = (*model_)(block);
      for (Eigen::Index t = 0; t < count; ++t)
        out(start + t) = values.segment(t * n_, n_).mean();
    }
  }
  return profile_cache_.emplace(v.mask, std::move(out)).first->second;
}

double AnovaEstimator::sigma2(Coalition u) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_);
  for_each_subset(u.mask, [&](std::uint32_t v, int sign) {
    acc += sign * profile(Coalition{v});
  });
  return acc.squaredNorm() / static_cast<double>(n_);
}

AnovaTerm AnovaEstimator::term(Coalition u) {
  AnovaTerm t;
  t.subset = u;
  t.value = term_value(u);
  t.sigma2 = u.empty() ? 0.0 : sigma2(u);
  return t;
}

double AnovaEstimator::sample_variance() {
  if (n_ < 2) return 0.0;
  const double mean = f_sample_.mean();
  return (f_sample_.array() - mean).square().sum() / static_cast<double>(n_ - 1);
}

double conditional_expectation(const ModelFunction& model,
                               const BaselineDistribution& distribution,
                               const Eigen::VectorXd& target, Coalition u,
                               Eigen::Index n, std::uint64_t seed) {
  AnovaEstimator estimator(model, distribution, target, n, seed);
  return estimator.corner(u);
}

AnovaTerm anova_term(const ModelFunction& model, const BaselineDistribution& distribution,
                     const Eigen::VectorXd& target, Coalition u, Eigen::Index n,
                     std::uint64_t seed) {
  AnovaEstimator estimator(model, distribution, target, n, seed);
  return estimator.term(u);
}

AnovaDecomposition full_decomposition(const ModelFunction& model,
                                      const BaselineDistribution& distribution,
                                      const Eigen::VectorXd& target, Eigen::Index n,
                                      std::uint64_t seed, bool with_variances) {
  const int p = model.dimension();
  require(p <= kEnumerationCap, ErrorKind::Resource, "p exceeds the enumeration cap");
  AnovaEstimator estimator(model, distribution, target, n, seed);

  AnovaDecomposition out;
  out.target = target;
  out.distribution_kind = distribution.kind();
  out.f_at_target = estimator.f_at_target();
  out.sample_size = estimator.sample_size();
  out.seed = seed;
  const std::uint32_t full = (1u << p) - 1u;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    AnovaTerm t;
    t.subset = Coalition{mask};
    t.value = estimator.term_value(t.subset);
    t.sigma2 = (with_variances && mask != 0) ? estimator.sigma2(t.subset) : 0.0;
    out.terms.emplace(mask, t);
  }
  return out;
}

Attribution shapley_from_anova(const AnovaDecomposition& decomposition) {
  const auto p = static_cast<int>(decomposition.target.size());
  Attribution out;
  out.phi = Eigen::VectorXd::Zero(p);
  double reconstruction = 0.0;
  for (const auto& [mask, term] : decomposition.terms) {
    if (mask == 0) continue;
    const double share = term.value / term.subset.size();
    for (int i = 0; i < p; ++i)
      if (term.subset.contains(i)) out.phi(i) += share;
    reconstruction += term.value;
  }
  const auto null_it = decomposition.terms.find(0);
  out.y_null = null_it != decomposition.terms.end() ? null_it->second.value : 0.0;
  out.y_target = decomposition.f_at_target;
  out.method = AttributionMethod::AnovaPartition;
  out.budget = static_cast<std::int64_t>(decomposition.terms.size());
  out.seed = decomposition.seed;
  out.samples = decomposition.sample_size;
  const double missing =
      std::abs(decomposition.f_at_target - out.y_null - reconstruction);
  if (missing > 1e-9 * std::max(1.0, std::abs(decomposition.f_at_target)))
    out.notes.push_back("pruned lattice: reconstruction misses " +
                        std::to_string(missing) + " of f(x) - f_empty");
  return out;
}

}  // namespace shapanova
