#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace shapanova {

/// A black-box prediction function f: R^p -> R with batched evaluation.
/// Evaluation is pure: identical inputs yield identical outputs.
class ModelFunction {
 public:
  using Evaluator =
      std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::MatrixXd>&)>;

  ModelFunction(int dimension, std::string label, Evaluator evaluator);

  int dimension() const { return dimension_; }
  const std::string& label() const { return label_; }

  /// Applies f rowwise. Rejects inputs with the wrong column count or
  /// non-finite entries; rejects evaluators returning the wrong length.
  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;

  /// f at a single point.
  double at(const Eigen::Ref<const Eigen::VectorXd>& point) const;

 private:
  int dimension_;
  std::string label_;
  Evaluator evaluator_;
};

inline Eigen::VectorXd evaluate_batch(const ModelFunction& model,
                                      const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  return model(inputs);
}

/// Built-in analytic test functions. Known names:
///   linear3               -2 x1 + 1.5 x2 + 0.5 x3
///   linear-interaction3   linear3 - 2 x2 x3
///   nonlinear3            -2 sin(x1) + 1.5 |x2| + 0.125 x3^2
///   nonlinear-interaction3  nonlinear3 + cos(x2 x3)
///   additive-pair4        x1 + x2 + x3 + x2 x3   (p = 3)
ModelFunction make_builtin(const std::string& name);

const std::vector<std::string>& builtin_names();

/// Wraps a child process as a model. Protocol: the input matrix is written
/// to the child's stdin as headerless CSV (17 significant digits); the child
/// prints one decimal prediction per line on stdout and exits 0. Invocations
/// are serialized per instance.
ModelFunction load_external_model(const std::string& command, int dimension);

}  // namespace shapanova
