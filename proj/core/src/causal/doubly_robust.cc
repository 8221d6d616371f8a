#include "cek/causal/doubly_robust.h"

#include <algorithm>
#include <cmath>

#include "cek/error.h"
#include "cek/random.h"

namespace cek::causal {
namespace {

constexpr const char* kModule = "causal_methods";

// Offset of the doubly-robust streams so they never collide with the
// propensity fold seeds.
constexpr std::uint64_t kOutcomeStream = 1000;

double InverseProbability(double p1, int arm, double epsilon) {
  const double p = std::clamp(p1, epsilon, 1.0 - epsilon);
  return arm == 1 ? 1.0 / p : 1.0 / (1.0 - p);
}

}  // namespace

const char* ToString(CounterfactualFeature feature) {
  return feature == CounterfactualFeature::kPredictedArm ? "predicted_arm" : "factual_arm";
}

CounterfactualFeature ParseCounterfactualFeature(const std::string& name) {
  if (name == "predicted_arm") return CounterfactualFeature::kPredictedArm;
  if (name == "factual_arm") return CounterfactualFeature::kFactualArm;
  throw ConfigError(kModule, "unknown counterfactual_feature \"" + name + "\"");
}

Eigen::MatrixXd AugmentedDesign(const Eigen::MatrixXd& x, std::span<const std::size_t> rows,
                                std::span<const int> arm, std::span<const int> inverse_arm,
                                std::span<const double> p1, double epsilon) {
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), d + 2);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    out.row(i).head(d) = x.row(static_cast<Eigen::Index>(rows[r]));
    out(i, d) = arm[r];
    out(i, d + 1) = InverseProbability(p1[rows[r]], inverse_arm[r], epsilon);
  }
  return out;
}

std::vector<double> PotentialOutcomePredictions::Column(int arm) const {
  std::vector<double> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = y_hat(static_cast<Eigen::Index>(r), arm);
  return out;
}

std::vector<double> PotentialOutcomePredictions::Factual() const {
  std::vector<double> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out[r] = y_hat(static_cast<Eigen::Index>(r), factual_arm[r]);
  }
  return out;
}

OutcomeFit FitDoublyRobust(const CohortFrame& frame, const PropensityFit& propensity,
                           const OutcomeModelOptions& options, std::uint64_t seed) {
  if (frame.num_arms() != 2) {
    throw ParameterError(kModule, "outcome models require a binary treatment");
  }
  if (propensity.fold_scores.size() != static_cast<std::size_t>(propensity.folds.k)) {
    throw ParameterError(kModule, "propensity models must be fitted before the outcome model");
  }
  if (options.learner.type != learners::LearnerType::kLinear &&
      frame.outcome_kind != OutcomeKind::kBinary) {
    throw ConfigError(kModule, "classifier outcome learners need a binary outcome");
  }
  OutcomeFit fit;
  fit.options = options;
  fit.folds = propensity.folds;
  fit.num_features = frame.dims() + 2;
  for (int f = 0; f < fit.folds.k; ++f) {
    const std::vector<std::size_t> train = fit.folds.TrainRows(f);
    std::vector<int> arm(train.size());
    std::vector<double> y(train.size());
    std::size_t treated = 0;
    for (std::size_t r = 0; r < train.size(); ++r) {
      arm[r] = frame.treatment[train[r]];
      y[r] = frame.outcome[train[r]];
      treated += static_cast<std::size_t>(arm[r]);
    }
    if (treated == 0 || treated == train.size()) {
      throw PositivityError(kModule, "fold " + std::to_string(f) +
                                         ": training split contains a single arm");
    }
    const Eigen::MatrixXd design = AugmentedDesign(frame.covariates, train, arm, arm,
                                                   propensity.fold_scores[f], options.epsilon);
    try {
      fit.fold_models.push_back(learners::FitLearner(
          options.learner, design, y,
          DeriveSeed(seed, kOutcomeStream + static_cast<std::uint64_t>(f))));
    } catch (const LearnerError&) {
      throw;
    } catch (const Error& e) {
      throw LearnerError(kModule, e.what(), f);
    }
  }
  return fit;
}

PotentialOutcomePredictions PredictPotentialOutcomes(const OutcomeFit& fit,
                                                     const CohortFrame& frame,
                                                     const PropensityFit& propensity, int fold,
                                                     Phase phase) {
  if (fold < 0 || fold >= fit.folds.k) throw ParameterError(kModule, "fold index out of range");
  const learners::FittedLearner& model = fit.fold_models[static_cast<std::size_t>(fold)];
  const std::vector<double>& p1 = propensity.fold_scores[static_cast<std::size_t>(fold)];

  PotentialOutcomePredictions po;
  po.rows = phase == Phase::kTrain ? fit.folds.TrainRows(fold) : fit.folds.ValidationRows(fold);
  const std::size_t m = po.rows.size();
  po.fold.assign(m, fold);
  po.factual_arm.resize(m);
  for (std::size_t r = 0; r < m; ++r) po.factual_arm[r] = frame.treatment[po.rows[r]];
  po.y_hat.resize(static_cast<Eigen::Index>(m), 2);

  const bool factual_feature =
      fit.options.counterfactual_feature == CounterfactualFeature::kFactualArm;
  for (int a = 0; a < 2; ++a) {
    const std::vector<int> arm(m, a);
    const Eigen::MatrixXd design =
        AugmentedDesign(frame.covariates, po.rows, arm,
                        factual_feature ? std::span<const int>(po.factual_arm)
                                        : std::span<const int>(arm),
                        p1, fit.options.epsilon);
    const std::vector<double> pred = model.Predict(design);
    for (std::size_t r = 0; r < m; ++r) po.y_hat(static_cast<Eigen::Index>(r), a) = pred[r];
  }

  if (phase == Phase::kTrain && model.is_forest() &&
      fit.options.learner.oob_train_predictions) {
    // Training rows are in the same order the forest saw them, so the
    // position in po.rows is the training index.
    std::vector<std::size_t> positions(m);
    for (std::size_t r = 0; r < m; ++r) positions[r] = r;
    const Eigen::MatrixXd design = AugmentedDesign(frame.covariates, po.rows, po.factual_arm,
                                                   po.factual_arm, p1, fit.options.epsilon);
    const auto& forest = std::get<learners::ForestModel>(model.model());
    const learners::ForestPrediction oob =
        forest.Predict(design, learners::ForestPredictMode::kOutOfBag, positions);
    for (std::size_t r = 0; r < m; ++r) {
      if (oob.missing[r]) {
        ++po.oob_fallbacks;
      } else {
        po.y_hat(static_cast<Eigen::Index>(r), po.factual_arm[r]) = oob.values[r];
      }
    }
  }
  return po;
}

PotentialOutcomePredictions PredictPhase(const OutcomeFit& fit, const CohortFrame& frame,
                                         const PropensityFit& propensity, Phase phase) {
  std::vector<PotentialOutcomePredictions> parts;
  std::size_t total = 0;
  for (int f = 0; f < fit.folds.k; ++f) {
    parts.push_back(PredictPotentialOutcomes(fit, frame, propensity, f, phase));
    total += parts.back().size();
  }
  PotentialOutcomePredictions out;
  out.y_hat.resize(static_cast<Eigen::Index>(total), 2);
  Eigen::Index offset = 0;
  for (const PotentialOutcomePredictions& part : parts) {
    out.rows.insert(out.rows.end(), part.rows.begin(), part.rows.end());
    out.fold.insert(out.fold.end(), part.fold.begin(), part.fold.end());
    out.factual_arm.insert(out.factual_arm.end(), part.factual_arm.begin(),
                           part.factual_arm.end());
    out.y_hat.middleRows(offset, part.y_hat.rows()) = part.y_hat;
    offset += part.y_hat.rows();
    out.oob_fallbacks += part.oob_fallbacks;
  }
  return out;
}

AteEstimate EstimateAte(const PotentialOutcomePredictions& po, const std::optional<Mask>& mask) {
  if (po.y_hat.cols() != 2) throw ParameterError(kModule, "ATE requires two arms");
  int max_fold = -1;
  for (int f : po.fold) max_fold = std::max(max_fold, f);
  std::vector<double> fold_sum(static_cast<std::size_t>(max_fold + 1), 0.0);
  std::vector<std::size_t> fold_count(fold_sum.size(), 0);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < po.size(); ++r) {
    if (mask) {
      if (po.rows[r] >= mask->size()) throw ParameterError(kModule, "mask shorter than cohort");
      if (!(*mask)[po.rows[r]]) continue;
    }
    const auto i = static_cast<Eigen::Index>(r);
    const double diff = po.y_hat(i, 1) - po.y_hat(i, 0);
    sum += diff;
    ++count;
    if (!po.fold.empty() && po.fold[r] >= 0) {
      fold_sum[static_cast<std::size_t>(po.fold[r])] += diff;
      ++fold_count[static_cast<std::size_t>(po.fold[r])];
    }
  }
  if (count == 0) throw EmptySubsetError(kModule, "no rows selected for the ATE");
  AteEstimate est;
  est.ate = sum / static_cast<double>(count);
  for (std::size_t f = 0; f < fold_sum.size(); ++f) {
    if (fold_count[f] > 0) est.per_fold.push_back(fold_sum[f] / static_cast<double>(fold_count[f]));
  }
  if (!est.per_fold.empty()) {
    double mean = 0.0;
    for (double v : est.per_fold) mean += v;
    mean /= static_cast<double>(est.per_fold.size());
    double ss = 0.0;
    for (double v : est.per_fold) ss += (v - mean) * (v - mean);
    est.fold_std = std::sqrt(ss / static_cast<double>(est.per_fold.size()));
  }
  return est;
}

}  // namespace cek::causal
