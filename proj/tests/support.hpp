#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shapanova/coalition.hpp"
#include "shapanova/model.hpp"
#include "shapanova/rng.hpp"

namespace shapanova::testing {

/// Multilinear polynomial over feature subsets: f(x) = sum_m c_m prod_{i in m} x_i.
/// Closed under addition, which the additivity axiom tests rely on.
struct Polynomial {
  int p = 0;
  std::vector<std::pair<std::uint32_t, double>> terms;  // mask -> coefficient

  double eval_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double out = 0.0;
    for (const auto& [mask, coef] : terms) {
      double prod = coef;
      for (int i = 0; i < p; ++i)
        if ((mask >> i) & 1u) prod *= x(i);
      out += prod;
    }
    return out;
  }

  ModelFunction model(const std::string& label = "poly") const {
    Polynomial copy = *this;
    return ModelFunction(p, label,
                         [copy](const Eigen::Ref<const Eigen::MatrixXd>& x) {
                           Eigen::VectorXd out(x.rows());
                           for (Eigen::Index r = 0; r < x.rows(); ++r)
                             out(r) = copy.eval_row(x.row(r));
                           return out;
                         });
  }

  Polynomial operator+(const Polynomial& other) const {
    Polynomial out = *this;
    out.terms.insert(out.terms.end(), other.terms.begin(), other.terms.end());
    return out;
  }

  /// Random polynomial with one U[-1,1] coefficient per subset of size
  /// <= max_order (constant term included).
  static Polynomial random(int p, int max_order, std::uint64_t seed) {
    Polynomial out;
    out.p = p;
    Rng rng(seed);
    out.terms.emplace_back(0u, 2.0 * rng.uniform() - 1.0);
    for (int s = 1; s <= max_order; ++s)
      for (const Coalition c : coalitions_of_size(p, s))
        out.terms.emplace_back(c.mask, 2.0 * rng.uniform() - 1.0);
    return out;
  }
};

inline Eigen::VectorXd random_vector(int p, std::uint64_t seed, double lo = -1.0,
                                     double hi = 1.0) {
  Rng rng(seed);
  Eigen::VectorXd out(p);
  for (int i = 0; i < p; ++i) out(i) = lo + (hi - lo) * rng.uniform();
  return out;
}

}  // namespace shapanova::testing
