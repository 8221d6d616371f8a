#ifndef CEK_LEARNERS_LINEAR_REGRESSION_H_
#define CEK_LEARNERS_LINEAR_REGRESSION_H_

#include <span>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace cek::learners {

// Ridge least squares with an unpenalized intercept; used as the outcome
// learner for continuous outcomes.
struct LinearRegressionModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double l2 = 0.0;

  Eigen::VectorXd Predict(const Eigen::MatrixXd& x) const;
  nlohmann::json ToJson() const;
};

LinearRegressionModel FitLinearRegression(const Eigen::MatrixXd& x, std::span<const double> y,
                                          double l2);

}  // namespace cek::learners

#endif  // CEK_LEARNERS_LINEAR_REGRESSION_H_
