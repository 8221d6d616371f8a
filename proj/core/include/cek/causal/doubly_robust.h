#ifndef CEK_CAUSAL_DOUBLY_ROBUST_H_
#define CEK_CAUSAL_DOUBLY_ROBUST_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cek/causal/propensity.h"
#include "cek/core_data.h"
#include "cek/learners/learner.h"

namespace cek::causal {

// Value of the inverse-propensity feature when predicting under arm a.
// kPredictedArm uses 1/Pr[A=a|X]; kFactualArm keeps 1/Pr[A=a_obs|X] for
// every arm, so only the treatment indicator changes.
enum class CounterfactualFeature { kPredictedArm, kFactualArm };

const char* ToString(CounterfactualFeature feature);
CounterfactualFeature ParseCounterfactualFeature(const std::string& name);

struct OutcomeModelOptions {
  learners::LearnerSpec learner;
  CounterfactualFeature counterfactual_feature = CounterfactualFeature::kPredictedArm;
  // Propensities are clipped to [epsilon, 1 - epsilon] before inversion.
  double epsilon = 1e-6;
};

// Design [X, a, 1/Pr[A=a|X]] for the given rows. `arm[r]` is the treatment
// value written into row r; `inverse_arm[r]` selects whose probability is
// inverted. `p1` holds Pr[A=1|X] for all n samples.
Eigen::MatrixXd AugmentedDesign(const Eigen::MatrixXd& x, std::span<const std::size_t> rows,
                                std::span<const int> arm, std::span<const int> inverse_arm,
                                std::span<const double> p1, double epsilon);

// One outcome model per training fold, fitted on the augmented design with
// each row's own arm.
struct OutcomeFit {
  OutcomeModelOptions options;
  FoldPlan folds;
  std::vector<learners::FittedLearner> fold_models;
  std::size_t num_features = 0;  // d + 2
};

// Throws PositivityError if a training split lacks an arm; learner failures
// surface as LearnerError with the fold index.
OutcomeFit FitDoublyRobust(const CohortFrame& frame, const PropensityFit& propensity,
                           const OutcomeModelOptions& options, std::uint64_t seed);

// Predicted outcomes under each arm. Entry r refers to sample rows[r], scored
// by fold[r]'s model; y_hat(r, a) is the prediction with A := a.
struct PotentialOutcomePredictions {
  std::vector<std::size_t> rows;
  std::vector<int> fold;
  std::vector<int> factual_arm;
  Eigen::MatrixXd y_hat;  // rows.size() x 2
  // Training rows whose out-of-bag set was empty and fell back to the
  // regular forest prediction.
  std::size_t oob_fallbacks = 0;

  std::size_t size() const { return rows.size(); }
  std::vector<double> Column(int arm) const;
  std::vector<double> Factual() const;
};

// Fold f's model on its training or validation rows. With a forest learner
// that has oob_train_predictions set, train-phase factual entries use the
// out-of-bag trees; counterfactual entries always use every tree.
PotentialOutcomePredictions PredictPotentialOutcomes(const OutcomeFit& fit,
                                                     const CohortFrame& frame,
                                                     const PropensityFit& propensity, int fold,
                                                     Phase phase);

// All folds of a phase concatenated in fold order. In the train phase every
// sample appears k - 1 times.
PotentialOutcomePredictions PredictPhase(const OutcomeFit& fit, const CohortFrame& frame,
                                         const PropensityFit& propensity, Phase phase);

struct AteEstimate {
  double ate = 0.0;
  std::vector<double> per_fold;  // folds with no selected rows are skipped
  double fold_std = 0.0;         // population std over per_fold
};

// mean(y_hat(., 1)) - mean(y_hat(., 0)) over entries whose sample is selected
// by `mask` (indexed by sample, all selected when absent). Throws
// EmptySubsetError when nothing is selected.
AteEstimate EstimateAte(const PotentialOutcomePredictions& po,
                        const std::optional<Mask>& mask = std::nullopt);

}  // namespace cek::causal

#endif  // CEK_CAUSAL_DOUBLY_ROBUST_H_
