#include "shapanova/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shapanova/errors.hpp"

namespace shapanova {
namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& v : j) out(i++) = v.get<double>();
  return out;
}

nlohmann::json subset_to_json(Coalition c, int p) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < p; ++i)
    if (c.contains(i)) out.push_back(i + 1);
  return out;
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Resource: return "resource";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::Distribution: return "distribution";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

nlohmann::json to_json(const Attribution& attribution) {
  nlohmann::json j;
  j["phi"] = vector_to_json(attribution.phi);
  j["y_target"] = attribution.y_target;
  j["y_null"] = attribution.y_null;
  j["method"] = to_string(attribution.method);
  j["budget"] = attribution.budget;
  if (attribution.seed) j["seed"] = *attribution.seed;
  j["samples"] = attribution.samples;
  j["coverage"] = attribution.coverage;
  if (attribution.standard_errors.size() > 0)
    j["standard_errors"] = vector_to_json(attribution.standard_errors);
  if (!attribution.notes.empty()) j["notes"] = attribution.notes;
  return j;
}

Attribution attribution_from_json(const nlohmann::json& j) {
  Attribution a;
  a.phi = vector_from_json(j.at("phi"));
  a.y_target = j.at("y_target").get<double>();
  a.y_null = j.at("y_null").get<double>();
  a.method = attribution_method_from_string(j.at("method").get<std::string>());
  a.budget = j.value("budget", std::int64_t{0});
  if (j.contains("seed")) a.seed = j["seed"].get<std::uint64_t>();
  a.samples = j.value("samples", std::int64_t{0});
  a.coverage = j.value("coverage", 1.0);
  if (j.contains("standard_errors"))
    a.standard_errors = vector_from_json(j["standard_errors"]);
  if (j.contains("notes")) a.notes = j["notes"].get<std::vector<std::string>>();
  return a;
}

nlohmann::json to_json(const DesignMatrix& design) {
  nlohmann::json j;
  j["p"] = design.p;
  j["seed"] = design.seed;
  j["complete"] = design.complete;
  nlohmann::json rows = nlohmann::json::array();
  for (const Coalition c : design.coalitions) rows.push_back(subset_to_json(c, design.p));
  j["coalitions"] = rows;
  j["weights"] = vector_to_json(design.weights);
  nlohmann::json plan = nlohmann::json::array();
  for (const auto& entry : design.block_plan.entries)
    plan.push_back({{"size", entry.size},
                    {"enumerated", entry.enumerated},
                    {"sampled_rows", entry.sampled_rows}});
  j["block_plan"] = plan;
  return j;
}

nlohmann::json to_json(const AnovaDecomposition& decomposition) {
  const auto p = static_cast<int>(decomposition.target.size());
  nlohmann::json j;
  j["target"] = vector_to_json(decomposition.target);
  j["distribution"] = to_string(decomposition.distribution_kind);
  j["f_at_target"] = decomposition.f_at_target;
  j["n"] = decomposition.sample_size;
  j["seed"] = decomposition.seed;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [mask, term] : decomposition.terms)
    terms.push_back({{"subset", subset_to_json(term.subset, p)},
                     {"value", term.value},
                     {"sigma2", term.sigma2}});
  j["terms"] = terms;
  return j;
}

nlohmann::json to_json(const SearchResult& result, int p) {
  nlohmann::json j;
  nlohmann::json selected = nlohmann::json::array();
  for (const Coalition c : result.selected) selected.push_back(subset_to_json(c, p));
  j["selected"] = selected;
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& [c, score] : result.scores)
    scores.push_back({{"subset", subset_to_json(c, p)}, {"psi", score}});
  j["scores"] = scores;
  j["v_t"] = result.v_t;
  j["v_s"] = result.v_s;
  j["explained_fraction"] = result.explained_fraction;
  j["stopped_at_order"] = result.stopped_at_order;
  j["converged"] = result.converged;
  return j;
}

nlohmann::json to_json(const SobolIndices& indices) {
  nlohmann::json j;
  j["first_order"] = vector_to_json(indices.first_order);
  j["first_order_clamped"] = vector_to_json(indices.first_order.cwiseMax(0.0));
  j["total"] = vector_to_json(indices.total);
  j["gap"] = vector_to_json(indices.gap);
  j["se_first"] = vector_to_json(indices.se_first);
  j["se_total"] = vector_to_json(indices.se_total);
  j["se_gap"] = vector_to_json(indices.se_gap);
  j["variance"] = indices.variance;
  j["n"] = indices.n;
  j["seed"] = indices.seed;
  return j;
}

nlohmann::json to_json(const EffectiveDimension& dims) {
  nlohmann::json j;
  j["d_t"] = dims.d_t;
  j["d_s"] = dims.d_s;
  j["epsilon"] = dims.epsilon;
  j["from_bounds"] = dims.from_bounds;
  j["d_t_upper"] = dims.d_t_upper;
  j["ranking"] = dims.ranking;
  j["d_t_ranked"] = dims.d_t_ranked;
  return j;
}

nlohmann::json to_json(const ScreeningReport& report) {
  nlohmann::json j;
  j["selected"] = report.selected;
  j["selected_share"] = report.selected_share;
  j["expectation_budget"] = report.expectation_budget;
  j["ratios"] = vector_to_json(report.ratios);
  j["no_interactions"] = report.no_interactions;
  j["epsilon"] = report.epsilon;
  return j;
}

nlohmann::json to_json(const Table3Report& report) {
  nlohmann::json j;
  j["n"] = report.n;
  j["seed"] = report.seed;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    nlohmann::json c;
    c["function"] = cell.function_label;
    c["baseline"] = std::string(1, cell.baseline);
    c["phi"] = vector_to_json(cell.phi);
    c["reference"] = vector_to_json(cell.reference);
    if (cell.standard_errors.size() > 0)
      c["standard_errors"] = vector_to_json(cell.standard_errors);
    c["max_deviation"] = cell.max_deviation;
    c["tolerance"] = cell.tolerance;
    c["within_tolerance"] = cell.within_tolerance;
    cells.push_back(c);
  }
  j["cells"] = cells;
  return j;
}

nlohmann::json regression_bundle(const RegressionProblem& problem,
                                 const Attribution& solution) {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < problem.design.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < problem.design.cols(); ++c)
      row.push_back(problem.design(r, c));
    rows.push_back(row);
  }
  j["Z"] = rows;
  j["W"] = vector_to_json(problem.weights);
  j["y"] = vector_to_json(problem.responses);
  j["y_target"] = problem.y_target;
  j["y_null"] = problem.y_null;
  j["beta"] = vector_to_json(solution.phi);
  return j;
}

BaselineDistribution distribution_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "single") return BaselineDistribution::single(vector_from_json(j.at("point")));
  if (kind == "empirical") {
    if (j.contains("path")) return BaselineDistribution::empirical(read_csv_matrix(j["path"]));
    const auto& rows = j.at("data");
    require(!rows.empty(), ErrorKind::Distribution, "empirical data is empty");
    Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) data.row(r++) = vector_from_json(row).transpose();
    return BaselineDistribution::empirical(data);
  }
  if (kind == "gaussian-independent") {
    const Eigen::VectorXd mean = vector_from_json(j.at("mean"));
    Eigen::VectorXd variances = j.contains("variances")
                                    ? vector_from_json(j["variances"])
                                    : Eigen::VectorXd::Ones(mean.size());
    return BaselineDistribution::gaussian_independent(mean, variances);
  }
  if (kind == "gaussian-correlated") {
    const Eigen::VectorXd mean = vector_from_json(j.at("mean"));
    const auto p = mean.size();
    const Eigen::VectorXd flat = vector_from_json(j.at("covariance"));  // row-major
    require(flat.size() == p * p, ErrorKind::Distribution,
            "covariance must have p*p row-major entries");
    Eigen::MatrixXd cov(p, p);
    for (Eigen::Index r = 0; r < p; ++r)
      for (Eigen::Index c = 0; c < p; ++c) cov(r, c) = flat(r * p + c);
    return BaselineDistribution::gaussian_correlated(mean, cov);
  }
  if (kind == "gaussian-local")
    return BaselineDistribution::gaussian_local(vector_from_json(j.at("center")),
                                                j.at("sd").get<double>());
  if (kind == "uniform01") return BaselineDistribution::uniform01(j.at("dimension").get<int>());
  fail(ErrorKind::Distribution, "unknown distribution kind '" + kind + "'");
}

nlohmann::json to_json(const BaselineDistribution& distribution) {
  nlohmann::json j;
  j["kind"] = to_string(distribution.kind());
  j["dimension"] = distribution.dimension();
  switch (distribution.kind()) {
    case BaselineKind::Single:
      j["point"] = vector_to_json(distribution.point());
      break;
    case BaselineKind::Empirical:
      j["rows"] = distribution.data().rows();
      break;
    case BaselineKind::GaussianLocal:
      j["center"] = vector_to_json(distribution.mean());
      j["sd"] = std::sqrt(distribution.covariance()(0, 0));
      break;
    case BaselineKind::GaussianIndependent:
    case BaselineKind::GaussianCorrelated: {
      j["mean"] = vector_to_json(distribution.mean());
      nlohmann::json flat = nlohmann::json::array();
      for (Eigen::Index r = 0; r < distribution.covariance().rows(); ++r)
        for (Eigen::Index c = 0; c < distribution.covariance().cols(); ++c)
          flat.push_back(distribution.covariance()(r, c));
      j["covariance"] = flat;
      break;
    }
    case BaselineKind::Uniform01:
      break;
  }
  return j;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Input, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorKind::Input, "non-numeric CSV cell '" + cell + "' in " + path);
      }
    }
    require(rows.empty() || row.size() == rows.front().size(), ErrorKind::Input,
            "ragged CSV rows in " + path);
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorKind::Input, "empty CSV file " + path);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c)
      out(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::Input, "cannot write '" + tmp.string() + "'");
    out << content;
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  require(!ec, ErrorKind::Input, "cannot rename temp file onto '" + path + "'");
}

}  // namespace shapanova
