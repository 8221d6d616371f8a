#ifndef CEK_LEARNERS_CALIBRATION_H_
#define CEK_LEARNERS_CALIBRATION_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cek/core_data.h"
#include "cek/learners/logistic.h"

namespace cek::learners {

enum class CalibrationMethod { kNone, kIsotonic, kSigmoid };

const char* ToString(CalibrationMethod method);
CalibrationMethod ParseCalibrationMethod(const std::string& name);

// Monotone non-decreasing map from raw scores to probabilities.
//
// Isotonic: piecewise-linear through (breakpoints[i], levels[i]); inputs
// outside the breakpoint range are clamped to the boundary levels.
// Sigmoid: 1 / (1 + exp(slope * logit(s) + offset)) with slope <= 0, where s is
// clamped to [kProbabilityFloor, 1 - kProbabilityFloor] before the logit.
class CalibrationMap {
 public:
  CalibrationMap() = default;

  static CalibrationMap Isotonic(std::vector<double> breakpoints,
                                 std::vector<double> levels);
  static CalibrationMap Sigmoid(double slope, double offset);
  static CalibrationMap Constant(CalibrationMethod method, double value);

  CalibrationMethod method() const { return method_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& levels() const { return levels_; }
  double slope() const { return slope_; }
  double offset() const { return offset_; }
  bool is_constant() const { return constant_; }
  // Non-empty when the fit fell back to a degenerate map.
  const std::string& warning() const { return warning_; }
  void set_warning(std::string warning) { warning_ = std::move(warning); }

  double Apply(double score) const;
  std::vector<double> Apply(std::span<const double> scores) const;

  nlohmann::json ToJson() const;

 private:
  CalibrationMethod method_ = CalibrationMethod::kNone;
  std::vector<double> breakpoints_;
  std::vector<double> levels_;
  double slope_ = 0.0;
  double offset_ = 0.0;
  bool constant_ = false;
  double constant_value_ = 0.0;
  std::string warning_;
};

// Weighted least-squares monotone fit (pool adjacent violators). Equal scores
// are pooled before fitting. Throws ParameterError for fewer than two samples
// or non-finite scores.
CalibrationMap FitIsotonic(std::span<const double> scores, std::span<const double> labels,
                           std::span<const double> weights = {});

// Two-parameter sigmoid fitted by Newton's method on the cross-entropy with
// label-smoothed targets (N+ + 1) / (N+ + 2) and 1 / (N- + 2). The slope is
// constrained to be <= 0 so the map is non-decreasing.
CalibrationMap FitSigmoidCalibration(std::span<const double> scores,
                                     std::span<const double> labels);

CalibrationMap FitCalibration(CalibrationMethod method, std::span<const double> scores,
                              std::span<const double> labels);

// Base model fitted by calibrate_cv: (X, y) -> LinearModel.
using LinearFitFn =
    std::function<LinearModel(const Eigen::MatrixXd&, std::span<const double>)>;

struct CalibratedLinearModel {
  LinearModel base;      // refit on all rows
  CalibrationMap map;    // fitted on out-of-fold base scores only
  std::vector<double> out_of_fold_scores;

  Eigen::VectorXd PredictProba(const Eigen::MatrixXd& x) const;
  nlohmann::json ToJson() const;
};

// Fits `base_fit` on each training split of `folds`, scores the held-out rows,
// fits the calibration map on those out-of-fold pairs, then refits the base
// model on all rows.
CalibratedLinearModel CalibrateCv(const LinearFitFn& base_fit, CalibrationMethod method,
                                  const Eigen::MatrixXd& x, std::span<const double> y,
                                  const FoldPlan& folds);

}  // namespace cek::learners

#endif  // CEK_LEARNERS_CALIBRATION_H_
