#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "shapanova/errors.hpp"
#include "shapanova/explain.hpp"
#include "shapanova/io.hpp"
#include "shapanova/search.hpp"
#include "shapanova/sobol.hpp"
#include "shapanova/table3.hpp"

namespace {

using namespace shapanova;
using nlohmann::json;

struct CommonOptions {
  std::string model_spec;
  int dimension = 0;  // required for external models
  std::string dist_spec;
  std::vector<double> target;
  std::int64_t budget = 0;
  std::int64_t samples = 10000;
  double epsilon = 0.01;
  std::uint64_t seed = 0;
  std::string output;
  std::string format = "json";
  std::string config_path;
};

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> parse_csv_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      fail(ErrorKind::Input, "cannot parse '" + cell + "' as a number");
    }
  }
  return out;
}

ModelFunction build_model(const CommonOptions& options) {
  require(!options.model_spec.empty(), ErrorKind::Input, "--model is required");
  if (options.model_spec.rfind("ext:", 0) == 0) {
    require(options.dimension >= 1, ErrorKind::Input,
            "--p is required for external models");
    return load_external_model(options.model_spec.substr(4), options.dimension);
  }
  return make_builtin(options.model_spec);
}

BaselineDistribution build_distribution(const CommonOptions& options,
                                        const ModelFunction& model) {
  const std::string& spec = options.dist_spec;
  require(!spec.empty(), ErrorKind::Input, "--dist is required");
  const int p = model.dimension();
  if (spec == "uniform01") return BaselineDistribution::uniform01(p);
  if (spec == "normal01")
    return BaselineDistribution::gaussian_independent(Eigen::VectorXd::Zero(p),
                                                      Eigen::VectorXd::Ones(p));
  if (spec.rfind("single:", 0) == 0)
    return BaselineDistribution::single(to_eigen(parse_csv_numbers(spec.substr(7))));
  if (spec.rfind("local:", 0) == 0) {
    require(!options.target.empty(), ErrorKind::Input,
            "local baseline needs --target");
    return BaselineDistribution::gaussian_local(to_eigen(options.target),
                                                std::stod(spec.substr(6)));
  }
  if (spec.rfind("empirical:", 0) == 0)
    return BaselineDistribution::empirical(read_csv_matrix(spec.substr(10)));
  if (spec.rfind("json:", 0) == 0 ||
      (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json")) {
    const std::string path = spec.rfind("json:", 0) == 0 ? spec.substr(5) : spec;
    std::ifstream in(path);
    require(in.good(), ErrorKind::Input, "cannot open distribution config " + path);
    json j;
    in >> j;
    return distribution_from_json(j);
  }
  fail(ErrorKind::Input,
       "unknown distribution spec '" + spec +
           "'; expected uniform01, normal01, single:v1,..,vp, local:sd, "
           "empirical:path.csv, or json:path");
}

void emit(const CommonOptions& options, const json& as_json, const std::string& as_text,
          const std::string& as_csv) {
  std::string payload;
  if (options.format == "json") {
    payload = as_json.dump(2) + "\n";
  } else if (options.format == "text") {
    payload = !as_text.empty() ? as_text : as_json.dump(2) + "\n";
  } else if (options.format == "csv") {
    require(!as_csv.empty(), ErrorKind::Input,
            "csv output is not available for this subcommand");
    payload = as_csv;
  } else {
    fail(ErrorKind::Input, "unknown format '" + options.format + "'");
  }
  if (options.output.empty()) {
    std::cout << payload;
  } else {
    write_file_atomic(options.output, payload);
  }
}

std::string attribution_text(const Attribution& a) {
  std::string out = "method: " + to_string(a.method) + "\n";
  char buf[128];
  for (Eigen::Index i = 0; i < a.phi.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "phi_%lld = %10.4f", static_cast<long long>(i + 1),
                  a.phi(i));
    out += buf;
    if (a.standard_errors.size() == a.phi.size()) {
      std::snprintf(buf, sizeof(buf), "  (se %.4g)", a.standard_errors(i));
      out += buf;
    }
    out += "\n";
  }
  std::snprintf(buf, sizeof(buf), "sum = %.4f, f(target) - null = %.4f\n", a.phi.sum(),
                a.y_target - a.y_null);
  out += buf;
  for (const auto& note : a.notes) out += "note: " + note + "\n";
  return out;
}

std::string attribution_csv(const Attribution& a) {
  std::string out = "feature,phi,se\n";
  char buf[128];
  for (Eigen::Index i = 0; i < a.phi.size(); ++i) {
    const double se =
        a.standard_errors.size() == a.phi.size() ? a.standard_errors(i) : 0.0;
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g\n",
                  static_cast<long long>(i + 1), a.phi(i), se);
    out += buf;
  }
  return out;
}

void add_common(CLI::App* cmd, CommonOptions& options, bool with_model = true) {
  if (with_model) {
    cmd->add_option("--model", options.model_spec,
                    "builtin name or ext:<command> for a child-process model");
    cmd->add_option("--p", options.dimension, "feature count for external models");
    cmd->add_option("--dist", options.dist_spec,
                    "uniform01 | normal01 | single:v,.. | local:sd | "
                    "empirical:path.csv | json:path");
  }
  cmd->add_option("--n", options.samples, "Monte Carlo draws per expectation");
  cmd->add_option("--seed", options.seed, "RNG seed (default 0)");
  cmd->add_option("--output", options.output, "write the result to this path");
  cmd->add_option("--format", options.format, "json | csv | text");
  cmd->add_option("--config", options.config_path,
                  "JSON file with defaults for any of the flags");
}

/// Flags given on the command line win over config-file values.
void apply_config(const CLI::App& cmd, CommonOptions& options) {
  if (options.config_path.empty()) return;
  std::ifstream in(options.config_path);
  require(in.good(), ErrorKind::Input, "cannot open config " + options.config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Input, "config parse error: " + std::string(e.what()));
  }
  auto unset = [&](const char* flag) {
    const CLI::Option* opt = cmd.get_option_no_throw(flag);
    return opt == nullptr || opt->count() == 0;
  };
  if (j.contains("model") && unset("--model")) options.model_spec = j["model"];
  if (j.contains("p") && unset("--p")) options.dimension = j["p"];
  if (j.contains("dist") && unset("--dist")) options.dist_spec = j["dist"];
  if (j.contains("target") && unset("--target"))
    options.target = j["target"].get<std::vector<double>>();
  if (j.contains("budget") && unset("--budget")) options.budget = j["budget"];
  if (j.contains("n") && unset("--n")) options.samples = j["n"];
  if (j.contains("epsilon") && unset("--epsilon")) options.epsilon = j["epsilon"];
  if (j.contains("seed") && unset("--seed")) options.seed = j["seed"];
  if (j.contains("output") && unset("--output")) options.output = j["output"];
  if (j.contains("format") && unset("--format")) options.format = j["format"];
}

int run(int argc, char** argv) {
  CLI::App app{"Shapley-value explanations via the functional ANOVA decomposition"};
  app.require_subcommand(1);

  CommonOptions options;
  std::string method = "exact";
  std::string target_text;
  int max_order = 0;
  std::int64_t n_variance = 0;
  std::string vt_mode = "auto";
  std::string trace_path;
  int lead = 1;
  bool skip_variances = false;

  std::string dump_regression;
  CLI::App* explain_cmd = app.add_subcommand("explain", "per-feature Shapley values");
  add_common(explain_cmd, options);
  explain_cmd->add_option("--target", target_text, "target vector, comma separated");
  explain_cmd->add_option("--method", method,
                          "exact | regression | regression-sampled | anova-partition");
  explain_cmd->add_option("--budget", options.budget,
                          "design rows for regression-sampled");
  explain_cmd->add_option("--dump-regression", dump_regression,
                          "write the (Z, W, y, y_t, y_b, beta) bundle to this path "
                          "(regression methods only)");

  CLI::App* anova_cmd =
      app.add_subcommand("anova", "full functional ANOVA decomposition");
  add_common(anova_cmd, options);
  anova_cmd->add_option("--target", target_text, "target vector, comma separated");
  anova_cmd->add_flag("--skip-variances", skip_variances,
                      "skip the O(n^2) variance components");

  CLI::App* search_cmd =
      app.add_subcommand("search", "breadth-first low-order term search");
  add_common(search_cmd, options);
  search_cmd->add_option("--epsilon", options.epsilon, "unexplained share target");
  search_cmd->add_option("--max-order", max_order, "stop at this interaction order");
  search_cmd->add_option("--n-variance", n_variance,
                         "sample size for V_t and sigma-hat (default: --n)");
  search_cmd->add_option("--vt", vt_mode,
                         "total-variance estimate: auto | var | sum");
  search_cmd->add_option("--trace", trace_path, "write per-order score table CSV here");

  CLI::App* sensitivity_cmd =
      app.add_subcommand("sensitivity", "Sobol indices and effective dimensions");
  add_common(sensitivity_cmd, options);
  sensitivity_cmd->add_option("--epsilon", options.epsilon,
                              "threshold for dimensions and screening");

  CLI::App* table3_cmd = app.add_subcommand(
      "table3", "reproduce the published baseline-comparison table");
  add_common(table3_cmd, options, /*with_model=*/false);

  CLI::App* alias_cmd =
      app.add_subcommand("alias", "alias matrix of a paired sampling design");
  int alias_p = 0;
  add_common(alias_cmd, options, /*with_model=*/false);
  alias_cmd->add_option("--p", alias_p, "feature count")->required();
  alias_cmd->add_option("--budget", options.budget, "design budget (rows)");
  alias_cmd->add_option("--lead", lead, "leading interaction feature (1-based)");

  CLI11_PARSE(app, argc, argv);

  CLI::App* active = app.get_subcommands().front();
  apply_config(*active, options);
  if (!target_text.empty()) options.target = parse_csv_numbers(target_text);

  if (active == explain_cmd) {
    const ModelFunction model = build_model(options);
    const BaselineDistribution dist = build_distribution(options, model);
    require(!options.target.empty(), ErrorKind::Input, "--target is required");
    ExplainOptions opts;
    opts.method = explain_method_from_string(method);
    opts.budget = options.budget;
    opts.samples = options.samples;
    opts.seed = options.seed;
    const Attribution a = explain(model, dist, to_eigen(options.target), opts);
    if (!dump_regression.empty()) {
      require(opts.method == ExplainMethod::Regression ||
                  opts.method == ExplainMethod::RegressionSampled,
              ErrorKind::Input, "--dump-regression needs a regression method");
      const RegressionProblem problem =
          explain_regression_problem(model, dist, to_eigen(options.target), opts);
      write_file_atomic(dump_regression, regression_bundle(problem, a).dump(2) + "\n");
    }
    emit(options, to_json(a), attribution_text(a), attribution_csv(a));
    return 0;
  }

  if (active == anova_cmd) {
    const ModelFunction model = build_model(options);
    const BaselineDistribution dist = build_distribution(options, model);
    require(!options.target.empty(), ErrorKind::Input, "--target is required");
    const AnovaDecomposition d =
        full_decomposition(model, dist, to_eigen(options.target), options.samples,
                           options.seed, !skip_variances);
    emit(options, to_json(d), "", "");
    return 0;
  }

  if (active == search_cmd) {
    const ModelFunction model = build_model(options);
    const BaselineDistribution dist = build_distribution(options, model);
    SearchConfig config;
    config.epsilon = options.epsilon;
    config.max_order = max_order;
    config.n_score = options.samples;
    config.n_variance = n_variance > 0 ? n_variance : options.samples;
    config.seed = options.seed;
    if (vt_mode == "sum") {
      config.vt_mode = SearchConfig::TotalVariance::AnovaSum;
    } else if (vt_mode == "var") {
      config.vt_mode = SearchConfig::TotalVariance::SampleVariance;
    } else if (vt_mode == "auto") {
      config.vt_mode = model.dimension() <= 6
                           ? SearchConfig::TotalVariance::AnovaSum
                           : SearchConfig::TotalVariance::SampleVariance;
    } else {
      fail(ErrorKind::Input, "unknown --vt mode '" + vt_mode + "'");
    }
    const SearchResult result = breadth_first_search(model, dist, config);
    if (!trace_path.empty()) {
      std::string csv = "subset,psi\n";
      char buf[96];
      for (const auto& [c, score] : result.scores) {
        std::snprintf(buf, sizeof(buf), "\"%s\",%.17g\n",
                      to_string(c, model.dimension()).c_str(), score);
        csv += buf;
      }
      write_file_atomic(trace_path, csv);
    }
    emit(options, to_json(result, model.dimension()), "", "");
    return 0;
  }

  if (active == sensitivity_cmd) {
    const ModelFunction model = build_model(options);
    const BaselineDistribution dist = build_distribution(options, model);
    const SobolIndices indices =
        sobol_indices(model, dist, options.samples, options.seed);
    const EffectiveDimension dims = effective_dimensions(indices, options.epsilon);
    const ScreeningReport report = screening_report(indices, options.epsilon);
    json j;
    j["indices"] = to_json(indices);
    j["effective_dimensions"] = to_json(dims);
    j["screening"] = to_json(report);
    std::string csv = "feature,first_order,total,gap,se_first,se_total,se_gap\n";
    char buf[256];
    for (Eigen::Index i = 0; i < indices.first_order.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.6g,%.6g,%.6g\n",
                    static_cast<long long>(i + 1), indices.first_order(i),
                    indices.total(i), indices.gap(i), indices.se_first(i),
                    indices.se_total(i), indices.se_gap(i));
      csv += buf;
    }
    emit(options, j, screening_report_to_text(report), csv);
    return 0;
  }

  if (active == table3_cmd) {
    const Table3Report report = table3_experiment(options.samples, options.seed);
    emit(options, to_json(report), table3_to_text(report), table3_to_csv(report));
    return 0;
  }

  if (active == alias_cmd) {
    const std::int64_t budget =
        options.budget > 0 ? options.budget : 2 * alias_p;
    const DesignMatrix design = paired_block_sample(alias_p, budget, options.seed);
    const Eigen::MatrixXd interactions = interaction_columns(design, 2, lead);
    const Eigen::MatrixXd alias = alias_matrix(design, interactions);
    json j;
    j["p"] = alias_p;
    j["budget"] = budget;
    j["lead"] = lead;
    j["design"] = to_json(design);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < alias.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < alias.cols(); ++c) row.push_back(alias(r, c));
      rows.push_back(row);
    }
    j["alias"] = rows;
    std::string text = "alias matrix, p=" + std::to_string(alias_p) +
                       ", budget=" + std::to_string(budget) +
                       ", lead=" + std::to_string(lead) + "\n";
    char buf[64];
    for (Eigen::Index r = 0; r < alias.rows(); ++r) {
      for (Eigen::Index c = 0; c < alias.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%8.4f", alias(r, c));
        text += buf;
      }
      text += "\n";
    }
    std::string csv;
    for (Eigen::Index r = 0; r < alias.rows(); ++r) {
      for (Eigen::Index c = 0; c < alias.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", alias(r, c));
        csv += buf;
        csv += (c + 1 < alias.cols()) ? ',' : '\n';
      }
    }
    emit(options, j, text, csv);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    json err;
    err["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    switch (e.kind()) {
      case ErrorKind::Numerical:
      case ErrorKind::Degenerate:
        return 3;
      case ErrorKind::Evaluation:
        return 4;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"kind", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
}
