#ifndef CEK_LEARNERS_LOGISTIC_H_
#define CEK_LEARNERS_LOGISTIC_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace cek::learners {

// Probabilities produced by the linear models never leave
// [kProbabilityFloor, 1 - kProbabilityFloor].
inline constexpr double kProbabilityFloor = 1e-15;

double Sigmoid(double eta);

struct LogisticOptions {
  double l2 = 0.0;      // ridge strength on coefficients; intercept unpenalized
  double tol = 1e-8;    // max-norm of the penalized gradient
  int max_iter = 100;
};

// Logistic regression fit by IRLS. The objective maximized is
//
//   sum_i w_i [y_i * eta_i - log(1 + exp(eta_i))] - l2/2 * ||coefficients||^2
//
// with eta_i = intercept + x_i . coefficients.
struct LinearModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double l2 = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  // Empty when converged; otherwise explains why the solver stopped.
  std::string diagnostic;
  // Penalized objective after each accepted iteration, starting at the
  // initial point.
  std::vector<double> objective_trace;

  double DecisionFunction(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd DecisionFunction(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd PredictProba(const Eigen::MatrixXd& x) const;

  nlohmann::json ToJson() const;
};

// Throws ParameterError on non-finite input, length mismatch, negative or
// all-zero weights, or (with l2 == 0) constant labels. Non-convergence is
// reported through LinearModel::converged, not as an exception.
// Empty `weights` means unit weights.
LinearModel FitLogistic(const Eigen::MatrixXd& x, std::span<const double> y,
                        std::span<const double> weights = {},
                        const LogisticOptions& options = {});

// Objective and its gradient (intercept first, then coefficients) at an
// arbitrary parameter vector theta = [intercept, coefficients...].
double PenalizedLogLikelihood(const Eigen::MatrixXd& x, std::span<const double> y,
                              std::span<const double> weights, double l2,
                              const Eigen::VectorXd& theta);
Eigen::VectorXd PenalizedGradient(const Eigen::MatrixXd& x, std::span<const double> y,
                                  std::span<const double> weights, double l2,
                                  const Eigen::VectorXd& theta);

}  // namespace cek::learners

#endif  // CEK_LEARNERS_LOGISTIC_H_
