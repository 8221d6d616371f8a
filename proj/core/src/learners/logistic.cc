#include "cek/learners/logistic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cek/error.h"

namespace cek::learners {
namespace {

constexpr const char* kModule = "learners";
constexpr int kMaxHalvings = 60;
constexpr double kObjectiveSlack = 64 * std::numeric_limits<double>::epsilon();

double Softplus(double eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double WeightAt(std::span<const double> w, Eigen::Index i) {
  return w.empty() ? 1.0 : w[static_cast<std::size_t>(i)];
}

Eigen::VectorXd LinearPredictor(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta) {
  Eigen::VectorXd eta = x * theta.tail(x.cols());
  eta.array() += theta(0);
  return eta;
}

void CheckInputs(const Eigen::MatrixXd& x, std::span<const double> y,
                 std::span<const double> w) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ParameterError(kModule, "fit_logistic: X has " + std::to_string(x.rows()) +
                                      " rows but y has " + std::to_string(y.size()));
  }
  if (!w.empty() && w.size() != y.size()) {
    throw ParameterError(kModule, "fit_logistic: weight length mismatch");
  }
  if (x.rows() == 0) throw ParameterError(kModule, "fit_logistic: no samples");
  if (!x.allFinite()) throw ParameterError(kModule, "fit_logistic: NaN or infinite covariate");
  for (double v : y) {
    if (!std::isfinite(v)) throw ParameterError(kModule, "fit_logistic: NaN label");
    if (v != 0.0 && v != 1.0) {
      throw ParameterError(kModule, "fit_logistic: labels must be 0 or 1");
    }
  }
  double total = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ParameterError(kModule, "fit_logistic: weights must be finite and nonnegative");
    }
    total += v;
  }
  if (!w.empty() && total <= 0.0) {
    throw ParameterError(kModule, "fit_logistic: weights are all zero");
  }
}

}  // namespace

double Sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double LinearModel::DecisionFunction(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return intercept + x.dot(coefficients);
}

Eigen::VectorXd LinearModel::DecisionFunction(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd eta = x * coefficients;
  eta.array() += intercept;
  return eta;
}

Eigen::VectorXd LinearModel::PredictProba(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd eta = DecisionFunction(x);
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    eta(i) = std::clamp(Sigmoid(eta(i)), kProbabilityFloor, 1.0 - kProbabilityFloor);
  }
  return eta;
}

nlohmann::json LinearModel::ToJson() const {
  nlohmann::json j;
  j["type"] = "logistic";
  j["intercept"] = intercept;
  j["coefficients"] = std::vector<double>(coefficients.data(),
                                          coefficients.data() + coefficients.size());
  j["l2"] = l2;
  j["converged"] = converged;
  j["iterations"] = iterations;
  j["gradient_norm"] = gradient_norm;
  if (!diagnostic.empty()) j["diagnostic"] = diagnostic;
  return j;
}

double PenalizedLogLikelihood(const Eigen::MatrixXd& x, std::span<const double> y,
                              std::span<const double> weights, double l2,
                              const Eigen::VectorXd& theta) {
  const Eigen::VectorXd eta = LinearPredictor(x, theta);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += WeightAt(weights, i) *
          (y[static_cast<std::size_t>(i)] * eta(i) - Softplus(eta(i)));
  }
  return ll - 0.5 * l2 * theta.tail(x.cols()).squaredNorm();
}

Eigen::VectorXd PenalizedGradient(const Eigen::MatrixXd& x, std::span<const double> y,
                                  std::span<const double> weights, double l2,
                                  const Eigen::VectorXd& theta) {
  const Eigen::VectorXd eta = LinearPredictor(x, theta);
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    r(i) = WeightAt(weights, i) * (y[static_cast<std::size_t>(i)] - Sigmoid(eta(i)));
  }
  Eigen::VectorXd g(theta.size());
  g(0) = r.sum();
  g.tail(x.cols()) = x.transpose() * r - l2 * theta.tail(x.cols());
  return g;
}

LinearModel FitLogistic(const Eigen::MatrixXd& x, std::span<const double> y,
                        std::span<const double> weights, const LogisticOptions& options) {
  CheckInputs(x, y, weights);
  if (options.l2 < 0.0 || !std::isfinite(options.l2)) {
    throw ParameterError(kModule, "fit_logistic: l2 must be a finite value >= 0");
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  double w_total = 0.0, w_pos = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = WeightAt(weights, i);
    w_total += w;
    w_pos += w * y[static_cast<std::size_t>(i)];
  }
  if (options.l2 == 0.0 && (w_pos <= 0.0 || w_pos >= w_total)) {
    throw ParameterError(kModule,
                         "fit_logistic: labels are constant; the unpenalized MLE does not exist");
  }

  // Start from the intercept-only MLE when it exists.
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  if (w_pos > 0.0 && w_pos < w_total) theta(0) = std::log(w_pos / (w_total - w_pos));

  LinearModel model;
  model.l2 = options.l2;
  double objective = PenalizedLogLikelihood(x, y, weights, options.l2, theta);
  model.objective_trace.push_back(objective);

  Eigen::VectorXd grad = PenalizedGradient(x, y, weights, options.l2, theta);
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() <= options.tol) {
      model.converged = true;
      break;
    }
    // Negative Hessian: Z' diag(w p (1-p)) Z + l2 * diag(0, 1, ..., 1).
    const Eigen::VectorXd eta = LinearPredictor(x, theta);
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = Sigmoid(eta(i));
      s(i) = WeightAt(weights, i) * p * (1.0 - p);
    }
    Eigen::MatrixXd h(d + 1, d + 1);
    h(0, 0) = s.sum();
    const Eigen::VectorXd xs = x.transpose() * s;
    h.block(1, 0, d, 1) = xs;
    h.block(0, 1, 1, d) = xs.transpose();
    h.block(1, 1, d, d) = x.transpose() * s.asDiagonal() * x;
    h.block(1, 1, d, d).diagonal().array() += options.l2;

    // Jacobi scaling keeps the solve well conditioned when feature scales
    // differ by orders of magnitude.
    Eigen::VectorXd scale(d + 1);
    for (Eigen::Index j = 0; j <= d; ++j) {
      scale(j) = h(j, j) > 0.0 ? 1.0 / std::sqrt(h(j, j)) : 1.0;
    }
    const Eigen::MatrixXd hs = scale.asDiagonal() * h * scale.asDiagonal();
    Eigen::VectorXd step = scale.asDiagonal() *
                           hs.ldlt().solve((scale.array() * grad.array()).matrix());
    if (!step.allFinite()) {
      model.diagnostic = "singular Hessian; the data may be perfectly separable";
      break;
    }

    double t = 1.0;
    bool accepted = false;
    for (int h_count = 0; h_count < kMaxHalvings; ++h_count, t *= 0.5) {
      const Eigen::VectorXd candidate = theta + t * step;
      const double cand_obj =
          PenalizedLogLikelihood(x, y, weights, options.l2, candidate);
      // Near the optimum the gain of a Newton step drops below the rounding
      // error of the objective sum; such steps are accepted.
      const double slack = kObjectiveSlack * (1.0 + std::abs(objective));
      if (std::isfinite(cand_obj) && cand_obj >= objective - slack) {
        theta = candidate;
        objective = cand_obj;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      grad = PenalizedGradient(x, y, weights, options.l2, theta);
      if (grad.lpNorm<Eigen::Infinity>() <= options.tol) {
        model.converged = true;
      } else {
        model.diagnostic = "step halving could not improve the objective";
      }
      break;
    }
    model.objective_trace.push_back(objective);
    grad = PenalizedGradient(x, y, weights, options.l2, theta);
  }
  if (!model.converged && model.diagnostic.empty()) {
    if (grad.lpNorm<Eigen::Infinity>() <= options.tol) {
      model.converged = true;
    } else {
      std::ostringstream msg;
      msg << "no convergence after " << iter << " iterations (gradient max-norm "
          << grad.lpNorm<Eigen::Infinity>() << ")";
      if (options.l2 == 0.0) msg << "; the data may be perfectly separable";
      model.diagnostic = msg.str();
    }
  }
  if (model.converged && options.l2 == 0.0) {
    // The gradient also vanishes along a separating direction as the
    // coefficients diverge; that is not an optimum.
    const Eigen::VectorXd eta = LinearPredictor(x, theta);
    double min_pos = std::numeric_limits<double>::infinity();
    double max_neg = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (WeightAt(weights, i) <= 0.0) continue;
      if (y[static_cast<std::size_t>(i)] > 0.5) {
        min_pos = std::min(min_pos, eta(i));
      } else {
        max_neg = std::max(max_neg, eta(i));
      }
    }
    if (min_pos > max_neg) {
      model.converged = false;
      model.diagnostic = "perfect separation: the unpenalized MLE does not exist";
    }
  }
  model.iterations = iter;
  model.intercept = theta(0);
  model.coefficients = theta.tail(d);
  model.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  if (!model.coefficients.allFinite() || !std::isfinite(model.intercept)) {
    throw LearnerError(kModule, "fit_logistic produced non-finite coefficients");
  }
  return model;
}

}  // namespace cek::learners
