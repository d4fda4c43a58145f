#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace shapanova {

/// Hard cap on full powerset enumeration (2^20 rows is the desk-scale
/// memory boundary).
inline constexpr int kEnumerationCap = 20;

/// A coalition of features encoded as a bit mask; bit i set means feature
/// i (0-based) takes its target value.
struct Coalition {
  std::uint32_t mask = 0;

  int size() const { return __builtin_popcount(mask); }
  bool contains(int feature) const { return (mask >> feature) & 1u; }
  bool empty() const { return mask == 0; }

  static Coalition full(int p) { return {(1u << p) - 1u}; }

  friend bool operator==(Coalition a, Coalition b) { return a.mask == b.mask; }
  friend bool operator<(Coalition a, Coalition b) { return a.mask < b.mask; }
};

/// Index list {1,..,p} rendering, e.g. "{2,3}".
std::string to_string(Coalition c, int p);

/// All coalitions of the given size in lexicographic order of their sorted
/// index lists ({1,2} < {1,3} < {2,3}).
std::vector<Coalition> coalitions_of_size(int p, int size);

/// All proper nonempty coalitions, size-then-lexicographic.
std::vector<Coalition> proper_coalitions(int p);

/// Shapley kernel weight w(s) = (p-1) / (C(p,s) s (p-s)); undefined at
/// s = 0 and s = p.
double kernel_weight(int p, int s);

/// Total kernel weight of the size-s block, C(p,s) w(s) = (p-1)/(s(p-s)).
double block_kernel_mass(int p, int s);

struct BlockPlan {
  struct Entry {
    int size = 0;
    bool enumerated = false;
    std::int64_t sampled_rows = 0;
  };
  std::vector<Entry> entries;  // one per size 1..p-1
};

/// Rows are coalitions; each carries its regression weight. Enumerated
/// rows carry exact kernel weights; sampled tail rows split the remaining
/// kernel mass uniformly (a specific coalition's tail draw probability is
/// already proportional to its kernel weight).
struct DesignMatrix {
  int p = 0;
  std::vector<Coalition> coalitions;  // size-lex for the enumerated prefix
  Eigen::MatrixXd rows;               // m x p, entries in {0,1}
  Eigen::VectorXd weights;            // m
  BlockPlan block_plan;
  std::uint64_t seed = 0;
  bool complete = false;  // true iff rows = all proper nonempty coalitions
};

struct SyntheticBatch {
  Eigen::MatrixXd matrix;    // m x p, row i = baseline*(1-z_i) + target*z_i
  Eigen::VectorXd target;
  Eigen::VectorXd baseline;
};

SyntheticBatch synthesize(const std::vector<Coalition>& coalitions,
                          const Eigen::VectorXd& baseline,
                          const Eigen::VectorXd& target);

/// All 2^p - 2 proper nonempty coalitions with kernel weights,
/// size-then-lexicographic.
DesignMatrix full_powerset_design(int p);

/// The paired block sampler: walks block pairs {i, p-i} outermost-in and
/// fully enumerates a pair while the budget covers it and the pair's share
/// of the remaining kernel mass is at least C(p,i)/k; afterwards fills the
/// budget by with-replacement tail sampling (size drawn proportional to
/// remaining block mass, subset uniform within the size).
DesignMatrix paired_block_sample(int p, std::int64_t budget, std::uint64_t seed);

/// Elementwise products of design column `lead` (1-based) with every later
/// column; only order 2 is supported.
Eigen::MatrixXd interaction_columns(const DesignMatrix& design, int order, int lead);

/// Alias pattern (X_r*' W X_r*)^{-1} X_r*' W X_int*, where the star operator
/// subtracts design column p from every other column (imposing the side
/// condition). `interactions` must have the design's row count.
Eigen::MatrixXd alias_matrix(const DesignMatrix& design,
                             const Eigen::MatrixXd& interactions);

/// Star reduction of an m x q matrix against the design's last column.
Eigen::MatrixXd star_reduce(const Eigen::MatrixXd& columns,
                            const Eigen::VectorXd& last_design_column);

std::string design_to_csv(const DesignMatrix& design);

}  // namespace shapanova
