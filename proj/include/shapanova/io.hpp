#pragma once

#include <string>

#include <json.hpp>

#include "shapanova/anova.hpp"
#include "shapanova/attribution.hpp"
#include "shapanova/baseline.hpp"
#include "shapanova/coalition.hpp"
#include "shapanova/regression.hpp"
#include "shapanova/search.hpp"
#include "shapanova/sobol.hpp"
#include "shapanova/table3.hpp"

namespace shapanova {

nlohmann::json to_json(const Attribution& attribution);
Attribution attribution_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DesignMatrix& design);
nlohmann::json to_json(const AnovaDecomposition& decomposition);
nlohmann::json to_json(const SearchResult& result, int p);
nlohmann::json to_json(const SobolIndices& indices);
nlohmann::json to_json(const EffectiveDimension& dims);
nlohmann::json to_json(const ScreeningReport& report);
nlohmann::json to_json(const Table3Report& report);

/// Verification bundle (Z, W, y, y_t, y_b, beta-hat) for external checking.
nlohmann::json regression_bundle(const RegressionProblem& problem,
                                 const Attribution& solution);

/// Distribution specs: {"kind": "...", "point"/"mean"/"covariance" (row-major)
/// /"sd"/"path"/"data", "dimension"}.
BaselineDistribution distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BaselineDistribution& distribution);

/// Headerless numeric CSV (one row per line).
Eigen::MatrixXd read_csv_matrix(const std::string& path);

/// Atomic write: temp file in the target directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace shapanova
