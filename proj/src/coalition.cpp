#include "shapanova/coalition.hpp"

#include <algorithm>
#include <cstdio>

#include "shapanova/errors.hpp"
#include "shapanova/rng.hpp"

namespace shapanova {

std::string to_string(Coalition c, int p) {
  std::string out = "{";
  bool first = true;
  for (int i = 0; i < p; ++i) {
    if (!c.contains(i)) continue;
    if (!first) out += ",";
    out += std::to_string(i + 1);
    first = false;
  }
  out += "}";
  return out;
}

std::vector<Coalition> coalitions_of_size(int p, int size) {
  require(p >= 1 && p <= 31, ErrorKind::Input, "feature count out of range");
  require(size >= 0 && size <= p, ErrorKind::Input, "coalition size out of range");
  std::vector<Coalition> out;
  if (size == 0) {
    out.push_back({0});
    return out;
  }
  std::vector<int> idx(size);
  for (int i = 0; i < size; ++i) idx[i] = i;
  while (true) {
    std::uint32_t mask = 0;
    for (int i : idx) mask |= 1u << i;
    out.push_back({mask});
    int k = size - 1;
    while (k >= 0 && idx[k] == p - size + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::vector<Coalition> proper_coalitions(int p) {
  std::vector<Coalition> out;
  out.reserve((std::size_t{1} << p) - 2);
  for (int s = 1; s < p; ++s) {
    auto block = coalitions_of_size(p, s);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

double kernel_weight(int p, int s) {
  require(p >= 2, ErrorKind::Input, "kernel weight needs p >= 2");
  require(s > 0 && s < p, ErrorKind::Input,
          "kernel weight undefined for s = " + std::to_string(s) +
              " with p = " + std::to_string(p));
  // (p-1) / (C(p,s) s (p-s)); compute the binomial in floating point,
  // exact for p <= 20
  double binom = 1.0;
  for (int i = 0; i < s; ++i) binom = binom * (p - i) / (i + 1);
  return (p - 1) / (binom * s * (p - s));
}

double block_kernel_mass(int p, int s) {
  require(s > 0 && s < p, ErrorKind::Input, "block mass undefined at s = 0 or p");
  return static_cast<double>(p - 1) / (static_cast<double>(s) * (p - s));
}

SyntheticBatch synthesize(const std::vector<Coalition>& coalitions,
                          const Eigen::VectorXd& baseline,
                          const Eigen::VectorXd& target) {
  require(baseline.size() == target.size(), ErrorKind::Input,
          "baseline and target lengths differ");
  const auto p = baseline.size();
  SyntheticBatch batch;
  batch.target = target;
  batch.baseline = baseline;
  batch.matrix.resize(static_cast<Eigen::Index>(coalitions.size()), p);
  for (std::size_t r = 0; r < coalitions.size(); ++r) {
    for (Eigen::Index j = 0; j < p; ++j)
      batch.matrix(static_cast<Eigen::Index>(r), j) =
          coalitions[r].contains(static_cast<int>(j)) ? target(j) : baseline(j);
  }
  return batch;
}

namespace {

void fill_rows(DesignMatrix& design) {
  const auto m = static_cast<Eigen::Index>(design.coalitions.size());
  design.rows.setZero(m, design.p);
  for (Eigen::Index r = 0; r < m; ++r)
    for (int j = 0; j < design.p; ++j)
      if (design.coalitions[static_cast<std::size_t>(r)].contains(j))
        design.rows(r, j) = 1.0;
}

}  // namespace

DesignMatrix full_powerset_design(int p) {
  require(p >= 2, ErrorKind::Input, "design needs p >= 2");
  require(p <= kEnumerationCap, ErrorKind::Resource,
          "p = " + std::to_string(p) + " exceeds the enumeration cap " +
              std::to_string(kEnumerationCap));
  DesignMatrix design;
  design.p = p;
  design.coalitions = proper_coalitions(p);
  fill_rows(design);
  const auto m = static_cast<Eigen::Index>(design.coalitions.size());
  design.weights.resize(m);
  for (Eigen::Index r = 0; r < m; ++r)
    design.weights(r) =
        kernel_weight(p, design.coalitions[static_cast<std::size_t>(r)].size());
  design.block_plan.entries.resize(static_cast<std::size_t>(p) - 1);
  for (int s = 1; s < p; ++s)
    design.block_plan.entries[static_cast<std::size_t>(s) - 1] = {s, true, 0};
  design.complete = true;
  return design;
}

DesignMatrix paired_block_sample(int p, std::int64_t budget, std::uint64_t seed) {
  require(p >= 2, ErrorKind::Input, "design needs p >= 2");
  require(p <= kEnumerationCap, ErrorKind::Resource,
          "p exceeds the enumeration cap");
  const std::int64_t all = (std::int64_t{1} << p) - 2;
  require(budget >= 2 && budget <= all, ErrorKind::Input,
          "budget must lie in [2, 2^p - 2]");

  auto binom = [&](int s) {
    double b = 1.0;
    for (int i = 0; i < s; ++i) b = b * (p - i) / (i + 1);
    return static_cast<std::int64_t>(b + 0.5);
  };

  DesignMatrix design;
  design.p = p;
  design.seed = seed;
  design.block_plan.entries.resize(static_cast<std::size_t>(p) - 1);
  for (int s = 1; s < p; ++s)
    design.block_plan.entries[static_cast<std::size_t>(s) - 1] = {s, false, 0};

  double remaining_mass = 0.0;
  for (int s = 1; s < p; ++s) remaining_mass += block_kernel_mass(p, s);

  std::int64_t k = budget;
  std::vector<bool> enumerated(static_cast<std::size_t>(p), false);
  for (int i = 1; 2 * i <= p; ++i) {
    const bool paired = (i != p - i);
    const double mass = paired
                            ? block_kernel_mass(p, i) + block_kernel_mass(p, p - i)
                            : block_kernel_mass(p, i);
    const std::int64_t rows = paired ? binom(i) + binom(p - i) : binom(i);
    const double share = mass / remaining_mass;
    const double gate = static_cast<double>(binom(i)) / static_cast<double>(k);
    if (k >= rows && share >= gate - 1e-12) {
      enumerated[static_cast<std::size_t>(i)] = true;
      if (paired) enumerated[static_cast<std::size_t>(p - i)] = true;
      k -= rows;
      remaining_mass -= mass;
    } else {
      break;
    }
  }

  std::vector<double> weights;
  for (int s = 1; s < p; ++s) {
    if (!enumerated[static_cast<std::size_t>(s)]) continue;
    design.block_plan.entries[static_cast<std::size_t>(s) - 1].enumerated = true;
    auto block = coalitions_of_size(p, s);
    const double w = kernel_weight(p, s);
    for (Coalition c : block) {
      design.coalitions.push_back(c);
      weights.push_back(w);
    }
  }

  std::vector<int> open_sizes;
  for (int s = 1; s < p; ++s)
    if (!enumerated[static_cast<std::size_t>(s)]) open_sizes.push_back(s);

  if (k > 0 && !open_sizes.empty()) {
    std::vector<double> cumulative;
    double total = 0.0;
    for (int s : open_sizes) {
      total += block_kernel_mass(p, s);
      cumulative.push_back(total);
    }
    const double tail_weight = remaining_mass / static_cast<double>(k);
    Rng rng(seed);
    std::vector<int> perm(static_cast<std::size_t>(p));
    for (std::int64_t d = 0; d < k; ++d) {
      const double u = rng.uniform() * total;
      std::size_t pick = 0;
      while (pick + 1 < cumulative.size() && u >= cumulative[pick]) ++pick;
      const int s = open_sizes[pick];
      // partial Fisher-Yates draw of an s-subset
      for (int j = 0; j < p; ++j) perm[static_cast<std::size_t>(j)] = j;
      std::uint32_t mask = 0;
      for (int j = 0; j < s; ++j) {
        const auto r = static_cast<std::size_t>(j) +
                       static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(p - j)));
        std::swap(perm[static_cast<std::size_t>(j)], perm[r]);
        mask |= 1u << perm[static_cast<std::size_t>(j)];
      }
      design.coalitions.push_back({mask});
      weights.push_back(tail_weight);
      ++design.block_plan.entries[static_cast<std::size_t>(s) - 1].sampled_rows;
    }
  }

  fill_rows(design);
  design.weights =
      Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  design.complete =
      static_cast<std::int64_t>(design.coalitions.size()) == all &&
      std::all_of(design.block_plan.entries.begin(), design.block_plan.entries.end(),
                  [](const BlockPlan::Entry& e) { return e.enumerated; });
  return design;
}

Eigen::MatrixXd interaction_columns(const DesignMatrix& design, int order, int lead) {
  require(order == 2, ErrorKind::Unsupported,
          "only second-order interaction columns are supported");
  require(lead >= 1 && lead < design.p, ErrorKind::Input,
          "lead feature must satisfy 1 <= lead < p");
  const Eigen::Index m = design.rows.rows();
  Eigen::MatrixXd out(m, design.p - lead);
  for (int j = lead; j < design.p; ++j)
    out.col(j - lead) = design.rows.col(lead - 1).cwiseProduct(design.rows.col(j));
  return out;
}

Eigen::MatrixXd star_reduce(const Eigen::MatrixXd& columns,
                            const Eigen::VectorXd& last_design_column) {
  Eigen::MatrixXd out = columns;
  out.colwise() -= last_design_column;
  return out;
}

Eigen::MatrixXd alias_matrix(const DesignMatrix& design,
                             const Eigen::MatrixXd& interactions) {
  require(interactions.rows() == design.rows.rows(), ErrorKind::Input,
          "interaction matrix row count does not match the design");
  const Eigen::VectorXd last = design.rows.col(design.p - 1);
  const Eigen::MatrixXd xr_star =
      star_reduce(design.rows.leftCols(design.p - 1), last);
  const Eigen::MatrixXd xi_star = star_reduce(interactions, last);
  const Eigen::MatrixXd wxr = design.weights.asDiagonal() * xr_star;
  const Eigen::MatrixXd normal = xr_star.transpose() * wxr;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal);
  const double cond =
      svd.singularValues()(0) /
      std::max(svd.singularValues()(svd.singularValues().size() - 1), 1e-300);
  require(cond < 1e12, ErrorKind::Numerical,
          "star-reduced design is numerically singular (condition estimate " +
              std::to_string(cond) + ")");

  return normal.ldlt().solve(xr_star.transpose() *
                             (design.weights.asDiagonal() * xi_star));
}

std::string design_to_csv(const DesignMatrix& design) {
  std::string out;
  for (int j = 1; j <= design.p; ++j) out += "z" + std::to_string(j) + ",";
  out += "weight\n";
  char buf[40];
  for (Eigen::Index r = 0; r < design.rows.rows(); ++r) {
    for (int j = 0; j < design.p; ++j) {
      out += design.rows(r, j) > 0.5 ? '1' : '0';
      out += ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", design.weights(r));
    out += buf;
    out += '\n';
  }
  return out;
}

}  // namespace shapanova
