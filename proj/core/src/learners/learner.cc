#include "cek/learners/learner.h"

#include <algorithm>

#include "cek/core_data.h"
#include "cek/error.h"
#include "cek/log.h"

namespace cek::learners {
namespace {

constexpr const char* kModule = "learners";

}  // namespace

const char* ToString(LearnerType type) {
  switch (type) {
    case LearnerType::kLogistic:
      return "logistic";
    case LearnerType::kForest:
      return "forest";
    case LearnerType::kLinear:
      return "linear";
  }
  return "logistic";
}

LearnerType ParseLearnerType(const std::string& name) {
  if (name == "logistic") return LearnerType::kLogistic;
  if (name == "forest" || name == "random_forest") return LearnerType::kForest;
  if (name == "linear") return LearnerType::kLinear;
  throw ConfigError(kModule, "unknown learner type \"" + name + "\"");
}

std::vector<double> FittedLearner::Predict(const Eigen::MatrixXd& x) const {
  if (const auto* linear = std::get_if<CalibratedLinearModel>(&model_)) {
    const Eigen::VectorXd p = linear->PredictProba(x);
    return std::vector<double>(p.data(), p.data() + p.size());
  }
  if (const auto* reg = std::get_if<LinearRegressionModel>(&model_)) {
    const Eigen::VectorXd v = reg->Predict(x);
    return std::vector<double>(v.data(), v.data() + v.size());
  }
  return std::get<ForestModel>(model_).PredictRegular(x);
}

nlohmann::json FittedLearner::ToJson() const {
  if (const auto* linear = std::get_if<CalibratedLinearModel>(&model_)) {
    return linear->ToJson();
  }
  if (const auto* reg = std::get_if<LinearRegressionModel>(&model_)) return reg->ToJson();
  return std::get<ForestModel>(model_).ToJson();
}

FittedLearner FitLearner(const LearnerSpec& spec, const Eigen::MatrixXd& x,
                         std::span<const double> y, std::uint64_t seed) {
  if (spec.type == LearnerType::kForest) {
    ForestParams params = spec.forest;
    params.seed = seed;
    return FittedLearner(FitForest(x, y, params));
  }
  if (spec.type == LearnerType::kLinear) {
    return FittedLearner(FitLinearRegression(x, y, spec.logistic.l2));
  }
  const LogisticOptions options = spec.logistic;
  LinearFitFn base = [options](const Eigen::MatrixXd& xs, std::span<const double> ys) {
    LinearModel m = FitLogistic(xs, ys, {}, options);
    if (!m.converged) LogWarning(kModule, "logistic fit: " + m.diagnostic);
    return m;
  };
  const std::size_t n = static_cast<std::size_t>(x.rows());
  if (spec.calibration == CalibrationMethod::kNone) {
    CalibratedLinearModel model;
    model.base = base(x, y);
    return FittedLearner(std::move(model));
  }
  const int k = std::min<int>(std::max(2, spec.calibration_folds), static_cast<int>(n));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = y[i] > 0.5 ? 1 : 0;
  const FoldPlan inner = MakeFolds(n, k, seed, labels, true);
  return FittedLearner(CalibrateCv(base, spec.calibration, x, y, inner));
}

nlohmann::json LearnerSpecToJson(const LearnerSpec& spec) {
  nlohmann::json j;
  j["type"] = ToString(spec.type);
  if (spec.type == LearnerType::kLinear) {
    j["l2"] = spec.logistic.l2;
  } else if (spec.type == LearnerType::kLogistic) {
    j["l2"] = spec.logistic.l2;
    j["tol"] = spec.logistic.tol;
    j["max_iter"] = spec.logistic.max_iter;
    j["calibration"] = ToString(spec.calibration);
    j["calibration_folds"] = spec.calibration_folds;
  } else {
    j["trees"] = spec.forest.num_trees;
    j["max_depth"] = spec.forest.max_depth;
    j["min_leaf"] = spec.forest.min_leaf;
    j["mtry"] = spec.forest.mtry;
    j["oob_train_predictions"] = spec.oob_train_predictions;
  }
  return j;
}

LearnerSpec LearnerSpecFromJson(const nlohmann::json& j) {
  LearnerSpec spec;
  if (!j.is_object()) throw ConfigError(kModule, "learner spec must be a JSON object");
  try {
    if (j.contains("type")) spec.type = ParseLearnerType(j.at("type").get<std::string>());
    if (spec.type == LearnerType::kForest) spec.forest.num_trees = 500;
    spec.logistic.l2 = j.value("l2", spec.logistic.l2);
    spec.logistic.tol = j.value("tol", spec.logistic.tol);
    spec.logistic.max_iter = j.value("max_iter", spec.logistic.max_iter);
    if (j.contains("calibration")) {
      spec.calibration = ParseCalibrationMethod(j.at("calibration").get<std::string>());
    }
    spec.calibration_folds = j.value("calibration_folds", spec.calibration_folds);
    spec.forest.num_trees = j.value("trees", spec.forest.num_trees);
    spec.forest.max_depth = j.value("max_depth", spec.forest.max_depth);
    spec.forest.min_leaf = j.value("min_leaf", spec.forest.min_leaf);
    spec.forest.mtry = j.value("mtry", spec.forest.mtry);
    spec.oob_train_predictions = j.value("oob_train_predictions", spec.oob_train_predictions);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(kModule, std::string("invalid learner spec: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(kModule, e.what());
  }
  if (spec.logistic.l2 < 0.0) throw ConfigError(kModule, "l2 must be >= 0");
  if (spec.forest.num_trees < 1) throw ConfigError(kModule, "trees must be >= 1");
  return spec;
}

}  // namespace cek::learners
