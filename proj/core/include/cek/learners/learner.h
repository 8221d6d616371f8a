#ifndef CEK_LEARNERS_LEARNER_H_
#define CEK_LEARNERS_LEARNER_H_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cek/learners/calibration.h"
#include "cek/learners/forest.h"
#include "cek/learners/linear_regression.h"
#include "cek/learners/logistic.h"

namespace cek::learners {

// kLinear is ridge least squares for continuous outcomes; the others are
// binary classifiers.
enum class LearnerType { kLogistic, kForest, kLinear };

const char* ToString(LearnerType type);
LearnerType ParseLearnerType(const std::string& name);

// What to fit for a propensity or outcome model.
struct LearnerSpec {
  LearnerType type = LearnerType::kLogistic;
  LogisticOptions logistic{.l2 = 1.0};
  CalibrationMethod calibration = CalibrationMethod::kNone;
  int calibration_folds = 5;
  ForestParams forest;
  // Forest only: score training rows with out-of-bag trees when the row is
  // queried at its own (factual) design.
  bool oob_train_predictions = false;
};

// A fitted model returning Pr[label = 1 | x] (classifiers) or E[y | x]
// (linear regression).
class FittedLearner {
 public:
  using Model = std::variant<CalibratedLinearModel, ForestModel, LinearRegressionModel>;

  explicit FittedLearner(Model model) : model_(std::move(model)) {}

  bool is_forest() const { return std::holds_alternative<ForestModel>(model_); }
  const Model& model() const { return model_; }

  std::vector<double> Predict(const Eigen::MatrixXd& x) const;

  nlohmann::json ToJson() const;

 private:
  Model model_;
};

// `seed` drives the forest bootstrap and the calibration folds.
FittedLearner FitLearner(const LearnerSpec& spec, const Eigen::MatrixXd& x,
                         std::span<const double> y, std::uint64_t seed);

nlohmann::json LearnerSpecToJson(const LearnerSpec& spec);
// Missing keys keep their defaults; unknown values throw ConfigError.
LearnerSpec LearnerSpecFromJson(const nlohmann::json& j);

}  // namespace cek::learners

#endif  // CEK_LEARNERS_LEARNER_H_
