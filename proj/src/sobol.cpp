#include "shapanova/sobol.hpp"

#include <algorithm>
#include <numeric>

#include "shapanova/errors.hpp"
#include "shapanova/rng.hpp"

namespace shapanova {
namespace {

double sd_of(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

SobolIndices sobol_indices(const ModelFunction& model,
                           const BaselineDistribution& distribution, Eigen::Index n,
                           std::uint64_t seed) {
  require(distribution.product_form(), ErrorKind::Unsupported,
          "sobol indices require a product-form distribution; correlated "
          "Gaussians are out of scope");
  require(distribution.kind() != BaselineKind::Single, ErrorKind::Degenerate,
          "sobol indices are undefined under a degenerate point law");
  require(n >= 2, ErrorKind::Input, "sample size must be at least 2");
  const int p = model.dimension();

  const Eigen::MatrixXd a = distribution.sample(n, derive_seed(seed, 0xa));
  const Eigen::MatrixXd b = distribution.sample(n, derive_seed(seed, 0xb));
  const Eigen::VectorXd fa = model(a);
  const Eigen::VectorXd fb = model(b);

  const double mean = 0.5 * (fa.mean() + fb.mean());
  const double variance =
      ((fa.array() - mean).square().sum() + (fb.array() - mean).square().sum()) /
      static_cast<double>(2 * n - 1);
  require(variance > 1e-12 * std::max(1.0, mean * mean), ErrorKind::Degenerate,
          "function variance is numerically zero under this distribution");

  SobolIndices out;
  out.first_order.resize(p);
  out.total.resize(p);
  out.gap.resize(p);
  out.se_first.resize(p);
  out.se_total.resize(p);
  out.se_gap.resize(p);
  out.variance = variance;
  out.n = n;
  out.seed = seed;

  Eigen::MatrixXd swapped(n, p);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (int i = 0; i < p; ++i) {
    swapped = a;
    swapped.col(i) = b.col(i);
    const Eigen::VectorXd f_ab = model(swapped);
    swapped = b;
    swapped.col(i) = a.col(i);
    const Eigen::VectorXd f_ba = model(swapped);

    const Eigen::VectorXd d_a = fa - f_ab;
    const Eigen::VectorXd d_b = fb - f_ba;

    const Eigen::VectorXd first_terms = -0.5 * d_a.cwiseProduct(d_b);
    const Eigen::VectorXd total_terms = 0.25 * (d_a.array().square() + d_b.array().square());
    const Eigen::VectorXd gap_terms = 0.25 * (d_a + d_b).array().square();

    out.first_order(i) = first_terms.mean() / variance;
    out.total(i) = total_terms.mean() / variance;
    out.gap(i) = gap_terms.mean() / variance;
    out.se_first(i) = sd_of(first_terms) / root_n / variance;
    out.se_total(i) = sd_of(total_terms) / root_n / variance;
    out.se_gap(i) = sd_of(gap_terms) / root_n / variance;
  }
  return out;
}

EffectiveDimension effective_dimensions(const std::map<std::uint32_t, double>& sigma2,
                                        int p, double epsilon) {
  require(!sigma2.empty(), ErrorKind::Input, "no variance components given");
  require(epsilon >= 0.0 && epsilon <= 1.0, ErrorKind::Input, "epsilon out of range");
  double total = 0.0;
  for (const auto& [mask, s2] : sigma2)
    if (mask != 0) total += s2;
  require(total > 0.0, ErrorKind::Degenerate, "all variance components are zero");

  EffectiveDimension out;
  out.epsilon = epsilon;
  const double gate = (1.0 - epsilon) * total;

  auto prefix_mass = [&](const std::vector<int>& order, int d) {
    std::uint32_t prefix = 0;
    for (int k = 0; k < d; ++k) prefix |= 1u << order[static_cast<std::size_t>(k)];
    double mass = 0.0;
    for (const auto& [mask, s2] : sigma2)
      if (mask != 0 && (mask & ~prefix) == 0) mass += s2;
    return mass;
  };

  std::vector<int> identity(static_cast<std::size_t>(p));
  std::iota(identity.begin(), identity.end(), 0);
  for (int d = 1; d <= p; ++d) {
    if (prefix_mass(identity, d) >= gate - 1e-15 * total) {
      out.d_t = d;
      break;
    }
  }
  if (out.d_t == 0) out.d_t = p;
  out.d_t_upper = out.d_t;

  for (int d = 1; d <= p; ++d) {
    double mass = 0.0;
    for (const auto& [mask, s2] : sigma2)
      if (mask != 0 && Coalition{mask}.size() <= d) mass += s2;
    if (mass >= gate - 1e-15 * total) {
      out.d_s = d;
      break;
    }
  }
  if (out.d_s == 0) out.d_s = p;

  // greedy reordering by descending total contribution of each feature
  std::vector<double> touch(static_cast<std::size_t>(p), 0.0);
  for (const auto& [mask, s2] : sigma2)
    for (int i = 0; i < p; ++i)
      if ((mask >> i) & 1u) touch[static_cast<std::size_t>(i)] += s2;
  std::vector<int> ranked = identity;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](int x, int y) { return touch[static_cast<std::size_t>(x)] >
                                              touch[static_cast<std::size_t>(y)]; });
  for (int d = 1; d <= p; ++d) {
    if (prefix_mass(ranked, d) >= gate - 1e-15 * total) {
      out.d_t_ranked = d;
      break;
    }
  }
  if (out.d_t_ranked == 0) out.d_t_ranked = p;
  out.ranking.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i)
    out.ranking[static_cast<std::size_t>(i)] = ranked[static_cast<std::size_t>(i)] + 1;
  return out;
}

EffectiveDimension effective_dimensions(const SobolIndices& indices, double epsilon) {
  require(epsilon >= 0.0 && epsilon <= 1.0, ErrorKind::Input, "epsilon out of range");
  const auto p = static_cast<int>(indices.total.size());
  EffectiveDimension out;
  out.epsilon = epsilon;
  out.from_bounds = true;

  // lower bound: totals of the prefix must reach 1 - epsilon
  double acc = 0.0;
  out.d_t = p;
  for (int d = 1; d <= p; ++d) {
    acc += indices.total(d - 1);
    if (acc >= 1.0 - epsilon) {
      out.d_t = d;
      break;
    }
  }
  // upper bound: complement totals must fall below epsilon
  out.d_t_upper = p;
  for (int d = 0; d < p; ++d) {
    double tail = 0.0;
    for (int i = d; i < p; ++i) tail += indices.total(i);
    if (tail <= epsilon) {
      out.d_t_upper = d;
      break;
    }
  }
  out.d_t_upper = std::max(out.d_t_upper, out.d_t);

  const double first_sum = indices.first_order.cwiseMax(0.0).sum();
  out.d_s = first_sum >= 1.0 - epsilon ? 1 : 2;  // >= 2: indices alone cannot resolve

  std::vector<int> ranked(static_cast<std::size_t>(p));
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    return indices.total(a) > indices.total(b);
  });
  acc = 0.0;
  out.d_t_ranked = p;
  for (int d = 1; d <= p; ++d) {
    acc += indices.total(ranked[static_cast<std::size_t>(d - 1)]);
    if (acc >= 1.0 - epsilon) {
      out.d_t_ranked = d;
      break;
    }
  }
  out.ranking.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i)
    out.ranking[static_cast<std::size_t>(i)] = ranked[static_cast<std::size_t>(i)] + 1;
  return out;
}

ScreeningReport screening_report(const SobolIndices& indices, double epsilon) {
  require(epsilon >= 0.0 && epsilon <= 1.0, ErrorKind::Input, "epsilon out of range");
  const auto p = static_cast<int>(indices.first_order.size());
  ScreeningReport out;
  out.epsilon = epsilon;

  const Eigen::VectorXd clamped = indices.first_order.cwiseMax(0.0);
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return clamped(a) > clamped(b); });
  double acc = 0.0;
  for (int k = 0; k < p; ++k) {
    acc += clamped(order[static_cast<std::size_t>(k)]);
    if (acc >= 1.0 - epsilon) {
      out.selected.assign(order.begin(), order.begin() + k + 1);
      std::sort(out.selected.begin(), out.selected.end());
      for (int& f : out.selected) ++f;  // report 1-based
      out.selected_share = acc;
      out.expectation_budget = ((std::int64_t{1} << (k + 1)) - 1) + 1;
      break;
    }
  }

  out.ratios.resize(p);
  bool all_additive = true;
  for (int i = 0; i < p; ++i) {
    out.ratios(i) = indices.total(i) != 0.0 ? indices.first_order(i) / indices.total(i)
                                            : 1.0;
    if (indices.gap(i) > 3.0 * indices.se_gap(i)) all_additive = false;
  }
  out.no_interactions = all_additive;
  return out;
}

std::string screening_report_to_text(const ScreeningReport& report) {
  std::string out;
  char buf[128];
  if (report.selected.empty()) {
    out += "no feature subset reaches the (1 - epsilon) first-order share\n";
  } else {
    out += "smallest qualifying set: {";
    for (std::size_t i = 0; i < report.selected.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(report.selected[i]);
    }
    std::snprintf(buf, sizeof(buf), "} (share %.4f), budget %lld conditional expectations\n",
                  report.selected_share,
                  static_cast<long long>(report.expectation_budget));
    out += buf;
  }
  out += "S_i / S_Ti ratios:";
  for (Eigen::Index i = 0; i < report.ratios.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.4f", report.ratios(i));
    out += buf;
  }
  out += "\n";
  if (report.no_interactions) out += "no interactions detected\n";
  return out;
}

}  // namespace shapanova
