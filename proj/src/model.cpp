#include "shapanova/model.hpp"

#include <cmath>
#include <utility>

#include "shapanova/errors.hpp"

namespace shapanova {

ModelFunction::ModelFunction(int dimension, std::string label, Evaluator evaluator)
    : dimension_(dimension), label_(std::move(label)), evaluator_(std::move(evaluator)) {
  require(dimension_ >= 1, ErrorKind::Input, "model dimension must be positive");
  require(static_cast<bool>(evaluator_), ErrorKind::Input, "model evaluator is empty");
}

Eigen::VectorXd ModelFunction::operator()(
    const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
  require(inputs.cols() == dimension_, ErrorKind::Input,
          "model '" + label_ + "' expects " + std::to_string(dimension_) +
              " columns, got " + std::to_string(inputs.cols()));
  require(inputs.allFinite(), ErrorKind::Input,
          "model input contains a non-finite entry");
  Eigen::VectorXd out = evaluator_(inputs);
  require(out.size() == inputs.rows(), ErrorKind::Evaluation,
          "model '" + label_ + "' returned " + std::to_string(out.size()) +
              " predictions for " + std::to_string(inputs.rows()) + " rows");
  return out;
}

double ModelFunction::at(const Eigen::Ref<const Eigen::VectorXd>& point) const {
  Eigen::MatrixXd row = point.transpose();
  return (*this)(row)(0);
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "linear3", "linear-interaction3", "nonlinear3", "nonlinear-interaction3",
      "additive-pair4"};
  return names;
}

ModelFunction make_builtin(const std::string& name) {
  using M = const Eigen::Ref<const Eigen::MatrixXd>&;
  if (name == "linear3") {
    return ModelFunction(3, name, [](M x) -> Eigen::VectorXd {
      return -2.0 * x.col(0) + 1.5 * x.col(1) + 0.5 * x.col(2);
    });
  }
  if (name == "linear-interaction3") {
    return ModelFunction(3, name, [](M x) -> Eigen::VectorXd {
      return -2.0 * x.col(0) + 1.5 * x.col(1) + 0.5 * x.col(2) -
             2.0 * x.col(1).cwiseProduct(x.col(2));
    });
  }
  if (name == "nonlinear3") {
    return ModelFunction(3, name, [](M x) -> Eigen::VectorXd {
      return -2.0 * x.col(0).array().sin() + 1.5 * x.col(1).array().abs() +
             0.125 * x.col(2).array().square();
    });
  }
  if (name == "nonlinear-interaction3") {
    return ModelFunction(3, name, [](M x) -> Eigen::VectorXd {
      return (-2.0 * x.col(0).array().sin() + 1.5 * x.col(1).array().abs() +
              0.125 * x.col(2).array().square() +
              (x.col(1).array() * x.col(2).array()).cos())
          .matrix();
    });
  }
  if (name == "additive-pair4") {
    // four active ANOVA terms {1},{2},{3},{2,3} on three features
    return ModelFunction(3, name, [](M x) -> Eigen::VectorXd {
      return x.col(0) + x.col(1) + x.col(2) + x.col(1).cwiseProduct(x.col(2));
    });
  }
  fail(ErrorKind::Input, "unknown builtin model '" + name + "'");
}

}  // namespace shapanova
