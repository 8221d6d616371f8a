#include "cek/causal/propensity.h"

#include <algorithm>

#include "cek/error.h"
#include "cek/random.h"

namespace cek::causal {
namespace {

constexpr const char* kModule = "causal_methods";

}  // namespace

Eigen::MatrixXd SelectRows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

std::vector<double> PropensityFit::ScoresFor(int fold, std::span<const std::size_t> rows) const {
  const std::vector<double>& all = fold_scores.at(static_cast<std::size_t>(fold));
  std::vector<double> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = all[rows[r]];
  return out;
}

PropensityFit FitPropensity(const CohortFrame& frame, const learners::LearnerSpec& spec,
                            const FoldPlan& folds, std::uint64_t seed) {
  if (frame.num_arms() != 2) {
    throw ParameterError(kModule, "propensity models require a binary treatment");
  }
  if (folds.size() != frame.size()) {
    throw ParameterError(kModule, "fold plan does not match cohort size");
  }
  if (spec.type == learners::LearnerType::kLinear) {
    throw ConfigError(kModule, "propensity learner must be a classifier");
  }
  const std::size_t n = frame.size();
  PropensityFit fit;
  fit.spec = spec;
  fit.folds = folds;
  fit.out_of_fold.scores.assign(n, 0.0);
  fit.out_of_fold.source = std::string(learners::ToString(spec.type)) + " propensity";

  for (int f = 0; f < folds.k; ++f) {
    const std::vector<std::size_t> train = folds.TrainRows(f);
    std::vector<double> a(train.size());
    double treated = 0.0;
    for (std::size_t r = 0; r < train.size(); ++r) {
      a[r] = frame.treatment[train[r]];
      treated += a[r];
    }
    if (treated == 0.0 || treated == static_cast<double>(train.size())) {
      throw LearnerError(kModule, "treatment is constant in the training split", f);
    }
    try {
      fit.fold_models.push_back(learners::FitLearner(
          spec, SelectRows(frame.covariates, train), a, DeriveSeed(seed, static_cast<std::uint64_t>(f))));
    } catch (const LearnerError&) {
      throw;
    } catch (const Error& e) {
      throw LearnerError(kModule, e.what(), f);
    }
    const learners::FittedLearner& model = fit.fold_models.back();
    std::vector<double> scores = model.Predict(frame.covariates);
    if (spec.oob_train_predictions && model.is_forest()) {
      const auto& forest = std::get<learners::ForestModel>(model.model());
      std::vector<std::size_t> positions(train.size());
      for (std::size_t r = 0; r < train.size(); ++r) positions[r] = r;
      const learners::ForestPrediction oob = forest.Predict(
          SelectRows(frame.covariates, train), learners::ForestPredictMode::kOutOfBag, positions);
      for (std::size_t r = 0; r < train.size(); ++r) {
        if (!oob.missing[r]) scores[train[r]] = oob.values[r];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (folds.fold_of[i] == f) fit.out_of_fold.scores[i] = scores[i];
    }
    fit.fold_scores.push_back(std::move(scores));
  }
  return fit;
}

}  // namespace cek::causal
