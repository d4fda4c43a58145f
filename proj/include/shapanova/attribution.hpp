#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shapanova {

enum class AttributionMethod {
  ExactFormula,
  RegressionClosedForm,
  RegressionSampled,
  AnovaPartition,
};

std::string to_string(AttributionMethod method);
AttributionMethod attribution_method_from_string(const std::string& name);

/// Per-feature Shapley values with provenance. Efficiency holds to method
/// tolerance: sum(phi) = y_target - y_null, exactly for complete routes and
/// up to 1 - coverage for pruned ANOVA partitions.
struct Attribution {
  Eigen::VectorXd phi;
  double y_target = 0.0;
  double y_null = 0.0;
  AttributionMethod method = AttributionMethod::ExactFormula;
  std::int64_t budget = 0;                 // design rows or corner evaluations
  std::optional<std::uint64_t> seed;
  std::int64_t samples = 0;                // Monte Carlo draws per expectation (0 = exact)
  double coverage = 1.0;                   // explained variance fraction when pruned
  Eigen::VectorXd standard_errors;         // empty when not estimated
  std::vector<std::string> notes;
};

}  // namespace shapanova
