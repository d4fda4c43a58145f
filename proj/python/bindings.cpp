#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shapanova/anova.hpp"
#include "shapanova/errors.hpp"
#include "shapanova/exact.hpp"
#include "shapanova/explain.hpp"
#include "shapanova/regression.hpp"
#include "shapanova/search.hpp"
#include "shapanova/sobol.hpp"
#include "shapanova/table3.hpp"

namespace py = pybind11;
using namespace shapanova;

namespace {

Coalition subset_to_coalition(const std::vector<int>& subset, int p) {
  Coalition c;
  for (int feature : subset) {
    require(feature >= 1 && feature <= p, ErrorKind::Input,
            "feature index " + std::to_string(feature) + " outside 1.." +
                std::to_string(p));
    c.mask |= 1u << (feature - 1);
  }
  return c;
}

std::vector<int> coalition_to_subset(Coalition c, int p) {
  std::vector<int> out;
  for (int i = 0; i < p; ++i)
    if (c.contains(i)) out.push_back(i + 1);
  return out;
}

py::dict attribution_to_dict(const Attribution& a) {
  py::dict d;
  d["phi"] = a.phi;
  d["y_target"] = a.y_target;
  d["y_null"] = a.y_null;
  d["method"] = to_string(a.method);
  d["budget"] = a.budget;
  if (a.seed) d["seed"] = *a.seed;
  d["samples"] = a.samples;
  d["coverage"] = a.coverage;
  if (a.standard_errors.size() > 0) d["standard_errors"] = a.standard_errors;
  if (!a.notes.empty()) d["notes"] = a.notes;
  return d;
}

py::dict design_to_dict(const DesignMatrix& design) {
  py::dict d;
  d["p"] = design.p;
  d["rows"] = design.rows;
  d["weights"] = design.weights;
  d["seed"] = design.seed;
  d["complete"] = design.complete;
  py::list plan;
  for (const auto& entry : design.block_plan.entries) {
    py::dict e;
    e["size"] = entry.size;
    e["enumerated"] = entry.enumerated;
    e["sampled_rows"] = entry.sampled_rows;
    plan.append(e);
  }
  d["block_plan"] = plan;
  return d;
}

ModelFunction model_from_callable(const py::function& fn, int dimension,
                                  const std::string& label) {
  return ModelFunction(
      dimension, label,
      [fn](const Eigen::Ref<const Eigen::MatrixXd>& inputs) -> Eigen::VectorXd {
        py::gil_scoped_acquire gil;
        py::object result = fn(Eigen::MatrixXd(inputs));
        return result.cast<Eigen::VectorXd>();
      });
}

SearchConfig make_search_config(double epsilon, int max_order, Eigen::Index n_score,
                                Eigen::Index n_variance, std::uint64_t seed,
                                const std::string& vt, int p) {
  SearchConfig config;
  config.epsilon = epsilon;
  config.max_order = max_order;
  config.n_score = n_score;
  config.n_variance = n_variance > 0 ? n_variance : n_score;
  config.seed = seed;
  if (vt == "sum") {
    config.vt_mode = SearchConfig::TotalVariance::AnovaSum;
  } else if (vt == "var") {
    config.vt_mode = SearchConfig::TotalVariance::SampleVariance;
  } else if (vt == "auto") {
    config.vt_mode = p <= 6 ? SearchConfig::TotalVariance::AnovaSum
                            : SearchConfig::TotalVariance::SampleVariance;
  } else {
    fail(ErrorKind::Input, "vt must be one of auto, var, sum");
  }
  return config;
}

py::dict search_result_to_dict(const SearchResult& result, int p) {
  py::dict d;
  py::list selected;
  for (const Coalition c : result.selected) selected.append(coalition_to_subset(c, p));
  d["selected"] = selected;
  py::list scores;
  for (const auto& [c, score] : result.scores)
    scores.append(py::make_tuple(coalition_to_subset(c, p), score));
  d["scores"] = scores;
  d["v_t"] = result.v_t;
  d["v_s"] = result.v_s;
  d["explained_fraction"] = result.explained_fraction;
  d["stopped_at_order"] = result.stopped_at_order;
  d["converged"] = result.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(shapanova, m) {
  m.doc() = "Shapley-value explanations via the functional ANOVA decomposition";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Input:
        case ErrorKind::Contract:
          PyErr_SetString(PyExc_ValueError, e.what());
          break;
        case ErrorKind::Numerical:
        case ErrorKind::Degenerate:
          PyErr_SetString(PyExc_ArithmeticError, e.what());
          break;
        default:
          PyErr_SetString(PyExc_RuntimeError, e.what());
      }
    }
  });

  py::class_<ModelFunction>(m, "Model")
      .def_static("builtin", &make_builtin, py::arg("name"))
      .def_static("external", &load_external_model, py::arg("command"), py::arg("p"))
      .def_static("from_callable", &model_from_callable, py::arg("fn"), py::arg("p"),
                  py::arg("label") = "callable")
      .def_property_readonly("p", &ModelFunction::dimension)
      .def_property_readonly("label", &ModelFunction::label)
      .def("__call__",
           [](const ModelFunction& model, const Eigen::MatrixXd& inputs) {
             return model(inputs);
           },
           py::arg("inputs"));

  m.def("builtin_names", [] { return builtin_names(); });

  py::class_<BaselineDistribution>(m, "Distribution")
      .def_static("single", &BaselineDistribution::single, py::arg("point"))
      .def_static("empirical", &BaselineDistribution::empirical, py::arg("data"))
      .def_static("gaussian_independent", &BaselineDistribution::gaussian_independent,
                  py::arg("mean"), py::arg("variances"))
      .def_static("gaussian_correlated", &BaselineDistribution::gaussian_correlated,
                  py::arg("mean"), py::arg("covariance"))
      .def_static("gaussian_local", &BaselineDistribution::gaussian_local,
                  py::arg("center"), py::arg("sd"))
      .def_static("uniform01", &BaselineDistribution::uniform01, py::arg("p"))
      .def_property_readonly("p", &BaselineDistribution::dimension)
      .def_property_readonly(
          "kind", [](const BaselineDistribution& d) { return to_string(d.kind()); })
      .def("sample", &BaselineDistribution::sample, py::arg("n"), py::arg("seed"))
      .def("conditional_sample",
           [](const BaselineDistribution& d, Eigen::Index n, std::uint64_t seed,
              const std::vector<int>& subset, const Eigen::VectorXd& x) {
             return d.conditional_sample(n, seed,
                                         subset_to_coalition(subset, d.dimension()), x);
           },
           py::arg("n"), py::arg("seed"), py::arg("subset"), py::arg("x"));

  m.def(
      "explain",
      [](const ModelFunction& model, const BaselineDistribution& dist,
         const Eigen::VectorXd& target, const std::string& method,
         std::int64_t budget, Eigen::Index samples, std::uint64_t seed) {
        ExplainOptions options;
        options.method = explain_method_from_string(method);
        options.budget = budget;
        options.samples = samples;
        options.seed = seed;
        return attribution_to_dict(explain(model, dist, target, options));
      },
      py::arg("model"), py::arg("distribution"), py::arg("target"),
      py::arg("method") = "exact", py::arg("budget") = 0,
      py::arg("samples") = 10000, py::arg("seed") = 0);

  m.def(
      "exact_shapley",
      [](const ModelFunction& model, const Eigen::VectorXd& baseline,
         const Eigen::VectorXd& target) {
        return attribution_to_dict(exact_shapley_single(model, baseline, target));
      },
      py::arg("model"), py::arg("baseline"), py::arg("target"));

  m.def(
      "exact_shapley_multi",
      [](const ModelFunction& model, const Eigen::MatrixXd& baselines,
         const Eigen::VectorXd& target) {
        return attribution_to_dict(exact_shapley_multi(model, baselines, target));
      },
      py::arg("model"), py::arg("baselines"), py::arg("target"));

  m.def("kernel_weight", &kernel_weight, py::arg("p"), py::arg("s"));
  m.def("build_bstar", &build_bstar, py::arg("p"));
  m.def("full_powerset_design",
        [](int p) { return design_to_dict(full_powerset_design(p)); }, py::arg("p"));
  m.def(
      "paired_block_sample",
      [](int p, std::int64_t budget, std::uint64_t seed) {
        return design_to_dict(paired_block_sample(p, budget, seed));
      },
      py::arg("p"), py::arg("budget"), py::arg("seed") = 0);

  m.def(
      "alias_matrix",
      [](int p, std::int64_t budget, int lead, std::uint64_t seed) {
        const DesignMatrix design = paired_block_sample(p, budget, seed);
        return alias_matrix(design, interaction_columns(design, 2, lead));
      },
      py::arg("p"), py::arg("budget"), py::arg("lead") = 1, py::arg("seed") = 0);

  m.def(
      "solve_constrained",
      [](const Eigen::MatrixXd& design, const Eigen::VectorXd& weights,
         const Eigen::VectorXd& responses, double y_target, double y_null) {
        return attribution_to_dict(
            solve_constrained({design, weights, responses, y_target, y_null}));
      },
      py::arg("design"), py::arg("weights"), py::arg("responses"),
      py::arg("y_target"), py::arg("y_null"));

  m.def(
      "conditional_expectation",
      [](const ModelFunction& model, const BaselineDistribution& dist,
         const Eigen::VectorXd& target, const std::vector<int>& subset,
         Eigen::Index n, std::uint64_t seed) {
        return conditional_expectation(
            model, dist, target, subset_to_coalition(subset, model.dimension()), n,
            seed);
      },
      py::arg("model"), py::arg("distribution"), py::arg("target"), py::arg("subset"),
      py::arg("n") = 10000, py::arg("seed") = 0);

  m.def(
      "anova_decomposition",
      [](const ModelFunction& model, const BaselineDistribution& dist,
         const Eigen::VectorXd& target, Eigen::Index n, std::uint64_t seed,
         bool with_variances) {
        const AnovaDecomposition d =
            full_decomposition(model, dist, target, n, seed, with_variances);
        py::list terms;
        for (const auto& [mask, term] : d.terms) {
          py::dict t;
          t["subset"] = coalition_to_subset(term.subset, model.dimension());
          t["value"] = term.value;
          t["sigma2"] = term.sigma2;
          terms.append(t);
        }
        py::dict out;
        out["terms"] = terms;
        out["f_at_target"] = d.f_at_target;
        out["n"] = d.sample_size;
        out["seed"] = d.seed;
        return out;
      },
      py::arg("model"), py::arg("distribution"), py::arg("target"),
      py::arg("n") = 10000, py::arg("seed") = 0, py::arg("with_variances") = true);

  m.def(
      "l2coe",
      [](const ModelFunction& model, const BaselineDistribution& dist,
         const std::vector<int>& subset, Eigen::Index n, std::uint64_t seed) {
        return l2coe(model, dist, subset_to_coalition(subset, model.dimension()), n,
                     seed);
      },
      py::arg("model"), py::arg("distribution"), py::arg("subset"), py::arg("n") = 500,
      py::arg("seed") = 0);

  m.def(
      "breadth_first_search",
      [](const ModelFunction& model, const BaselineDistribution& dist, double epsilon,
         int max_order, Eigen::Index n_score, Eigen::Index n_variance,
         std::uint64_t seed, const std::string& vt) {
        const SearchConfig config = make_search_config(
            epsilon, max_order, n_score, n_variance, seed, vt, model.dimension());
        return search_result_to_dict(breadth_first_search(model, dist, config),
                                     model.dimension());
      },
      py::arg("model"), py::arg("distribution"), py::arg("epsilon") = 0.01,
      py::arg("max_order") = 0, py::arg("n_score") = 500, py::arg("n_variance") = 0,
      py::arg("seed") = 0, py::arg("vt") = "auto");

  m.def(
      "prune_and_attribute",
      [](const ModelFunction& model, const BaselineDistribution& dist,
         const Eigen::VectorXd& target, const std::vector<std::vector<int>>& selected,
         double explained_fraction, Eigen::Index n, std::uint64_t seed) {
        SearchResult result;
        for (const auto& subset : selected)
          result.selected.push_back(subset_to_coalition(subset, model.dimension()));
        result.explained_fraction = explained_fraction;
        return attribution_to_dict(
            prune_and_attribute(model, dist, target, result, n, seed));
      },
      py::arg("model"), py::arg("distribution"), py::arg("target"),
      py::arg("selected"), py::arg("explained_fraction") = 1.0,
      py::arg("n") = 10000, py::arg("seed") = 0);

  m.def(
      "sobol_indices",
      [](const ModelFunction& model, const BaselineDistribution& dist, Eigen::Index n,
         std::uint64_t seed) {
        const SobolIndices idx = sobol_indices(model, dist, n, seed);
        py::dict d;
        d["first_order"] = idx.first_order;
        d["total"] = idx.total;
        d["gap"] = idx.gap;
        d["se_first"] = idx.se_first;
        d["se_total"] = idx.se_total;
        d["se_gap"] = idx.se_gap;
        d["variance"] = idx.variance;
        d["n"] = idx.n;
        d["seed"] = idx.seed;
        return d;
      },
      py::arg("model"), py::arg("distribution"), py::arg("n") = 16384,
      py::arg("seed") = 0);

  m.def(
      "effective_dimensions",
      [](const std::vector<std::pair<std::vector<int>, double>>& components, int p,
         double epsilon) {
        std::map<std::uint32_t, double> sigma2;
        for (const auto& [subset, value] : components)
          sigma2[subset_to_coalition(subset, p).mask] = value;
        const EffectiveDimension dims = effective_dimensions(sigma2, p, epsilon);
        py::dict d;
        d["d_t"] = dims.d_t;
        d["d_s"] = dims.d_s;
        d["epsilon"] = dims.epsilon;
        d["ranking"] = dims.ranking;
        d["d_t_ranked"] = dims.d_t_ranked;
        return d;
      },
      py::arg("components"), py::arg("p"), py::arg("epsilon") = 0.01);

  m.def(
      "table3",
      [](Eigen::Index n, std::uint64_t seed) {
        const Table3Report report = table3_experiment(n, seed);
        py::list cells;
        for (const auto& cell : report.cells) {
          py::dict d;
          d["function"] = cell.function_label;
          d["baseline"] = std::string(1, cell.baseline);
          d["phi"] = cell.phi;
          d["reference"] = cell.reference;
          d["max_deviation"] = cell.max_deviation;
          d["tolerance"] = cell.tolerance;
          d["within_tolerance"] = cell.within_tolerance;
          cells.append(d);
        }
        return cells;
      },
      py::arg("n") = 100000, py::arg("seed") = 0);
}
