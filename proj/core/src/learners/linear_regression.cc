#include "cek/learners/linear_regression.h"

#include <cmath>

#include "cek/error.h"

namespace cek::learners {

Eigen::VectorXd LinearRegressionModel::Predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out = x * coefficients;
  out.array() += intercept;
  return out;
}

nlohmann::json LinearRegressionModel::ToJson() const {
  nlohmann::json j;
  j["type"] = "linear";
  j["intercept"] = intercept;
  j["coefficients"] = std::vector<double>(coefficients.data(),
                                          coefficients.data() + coefficients.size());
  j["l2"] = l2;
  return j;
}

LinearRegressionModel FitLinearRegression(const Eigen::MatrixXd& x, std::span<const double> y,
                                          double l2) {
  const Eigen::Index n = x.rows();
  if (n == 0 || static_cast<std::size_t>(n) != y.size()) {
    throw ParameterError("learners", "fit_linear: empty or mismatched input");
  }
  if (!x.allFinite()) throw ParameterError("learners", "fit_linear: non-finite covariate");
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), n);
  if (!target.allFinite()) throw ParameterError("learners", "fit_linear: non-finite target");

  // Centering removes the intercept from the penalized normal equations.
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = target.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += l2;
  Eigen::VectorXd rhs = xc.transpose() * (target.array() - y_mean).matrix();

  LinearRegressionModel model;
  model.l2 = l2;
  model.coefficients = gram.ldlt().solve(rhs);
  if (!model.coefficients.allFinite()) {
    model.coefficients = gram.completeOrthogonalDecomposition().solve(rhs);
  }
  model.intercept = y_mean - x_mean.dot(model.coefficients);
  return model;
}

}  // namespace cek::learners
