#include "shapanova/search.hpp"

#include <algorithm>

#include "shapanova/errors.hpp"
#include "shapanova/parallel.hpp"
#include "shapanova/rng.hpp"

namespace shapanova {

double l2coe(const ModelFunction& model, const BaselineDistribution& distribution,
             Coalition s, Eigen::Index n, std::uint64_t seed) {
  require(!s.empty(), ErrorKind::Input, "l2coe needs a nonempty subset");
  require(n >= 1, ErrorKind::Input, "sample size must be positive");
  const int p = model.dimension();

  const Eigen::MatrixXd z = distribution.sample(n, derive_seed(seed, 0x5a));
  const Eigen::MatrixXd x = distribution.sample(n, derive_seed(seed, 0x58));

  std::vector<int> members;
  for (int j = 0; j < p; ++j)
    if (s.contains(j)) members.push_back(j);
  const int k = static_cast<int>(members.size());

  Eigen::VectorXd bracket = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd mixed(n, p);
  for (std::uint32_t r = 0; r < (1u << k); ++r) {
    mixed = z;
    for (int pos = 0; pos < k; ++pos)
      if ((r >> pos) & 1u) mixed.col(members[static_cast<std::size_t>(pos)]) =
          x.col(members[static_cast<std::size_t>(pos)]);
    const int sign = ((k - __builtin_popcount(r)) & 1) ? -1 : 1;
    bracket += sign * model(mixed);
  }
  return bracket.squaredNorm() /
         (static_cast<double>(n) * static_cast<double>(1u << k));
}

SearchResult breadth_first_search(const ModelFunction& model,
                                  const BaselineDistribution& distribution,
                                  const SearchConfig& config) {
  return breadth_first_search(model, distribution, config,
                              [](const ModelFunction& m, const BaselineDistribution& d,
                                 Coalition s, Eigen::Index n, std::uint64_t seed) {
                                return l2coe(m, d, s, n, seed);
                              });
}

SearchResult breadth_first_search(const ModelFunction& model,
                                  const BaselineDistribution& distribution,
                                  const SearchConfig& config, const ScoreFunction& psi) {
  const int p = model.dimension();
  require(config.epsilon >= 0.0 && config.epsilon <= 1.0, ErrorKind::Input,
          "epsilon must lie in [0, 1]");
  const int max_order = config.max_order == 0 ? p : config.max_order;
  require(max_order >= 1 && max_order <= p, ErrorKind::Input,
          "max_order must lie in [1, p]");

  AnovaEstimator estimator(model, distribution, distribution.mean(),
                           config.n_variance, derive_seed(config.seed, 0x7a));

  SearchResult out;
  if (config.vt_mode == SearchConfig::TotalVariance::AnovaSum) {
    require(p <= 10, ErrorKind::Resource,
            "AnovaSum total-variance mode enumerates 2^p terms; p must be <= 10");
    for (std::uint32_t mask = 1; mask < (1u << p); ++mask)
      out.v_t += estimator.sigma2(Coalition{mask});
  } else {
    out.v_t = estimator.sample_variance();
  }

  if (out.v_t <= 1e-300) {
    // constant function: nothing to explain
    out.converged = true;
    out.explained_fraction = 1.0;
    return out;
  }

  const double gate = out.v_t * (1.0 - config.epsilon);
  for (int order = 1; order <= max_order && !out.converged; ++order) {
    out.stopped_at_order = order;
    auto block = coalitions_of_size(p, order);
    std::vector<std::pair<Coalition, double>> scored(block.size());
    parallel_for(block.size(), [&](std::size_t k) {
      const Coalition s = block[k];
      scored[k] = {s, psi(model, distribution, s, config.n_score,
                          derive_seed(config.seed, 0x100 + s.mask))};
    });
    // descending score, lexicographic subset order as tiebreak
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    out.scores.insert(out.scores.end(), scored.begin(), scored.end());
    for (const auto& [s, score] : scored) {
      out.selected.push_back(s);
      out.v_s += estimator.sigma2(s);
      if (out.v_s > gate) {
        out.converged = true;
        break;
      }
    }
  }
  out.explained_fraction = out.v_s / out.v_t;
  return out;
}

Attribution prune_and_attribute(const ModelFunction& model,
                                const BaselineDistribution& distribution,
                                const Eigen::VectorXd& target,
                                const SearchResult& result, Eigen::Index n,
                                std::uint64_t seed) {
  require(!result.selected.empty(), ErrorKind::Input,
          "search result has no selected subsets");
  AnovaEstimator estimator(model, distribution, target, n, seed);

  AnovaDecomposition decomposition;
  decomposition.target = target;
  decomposition.distribution_kind = distribution.kind();
  decomposition.f_at_target = estimator.f_at_target();
  decomposition.sample_size = estimator.sample_size();
  decomposition.seed = seed;
  decomposition.terms.emplace(0, AnovaTerm{Coalition{0}, estimator.corner({0}), 0.0});
  for (Coalition s : result.selected)
    decomposition.terms.emplace(
        s.mask, AnovaTerm{s, estimator.term_value(s), 0.0});

  Attribution out = shapley_from_anova(decomposition);
  out.coverage = result.explained_fraction;
  out.budget = static_cast<std::int64_t>(estimator.corners_evaluated());
  out.seed = seed;
  return out;
}

}  // namespace shapanova
