#ifndef CEK_CAUSAL_PROPENSITY_H_
#define CEK_CAUSAL_PROPENSITY_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cek/core_data.h"
#include "cek/learners/learner.h"

namespace cek::causal {

// Pr[A = 1 | X] per sample.
struct PropensityScores {
  std::vector<double> scores;
  std::string source;
};

// Per-fold propensity models. fold_scores[f][i] is model f applied to sample i
// for every sample, so both the training rows of fold f (train phase) and its
// held-out rows (validation phase) can be read off without refitting.
struct PropensityFit {
  learners::LearnerSpec spec;
  FoldPlan folds;
  std::vector<learners::FittedLearner> fold_models;
  std::vector<std::vector<double>> fold_scores;
  // Each sample scored by the model that did not train on it.
  PropensityScores out_of_fold;

  std::vector<double> ScoresFor(int fold, std::span<const std::size_t> rows) const;
};

// Fits the treatment model on each training split. Requires a binary
// treatment; a training split with a single arm throws LearnerError carrying
// the fold index.
PropensityFit FitPropensity(const CohortFrame& frame, const learners::LearnerSpec& spec,
                            const FoldPlan& folds, std::uint64_t seed);

// Rows of `x` selected by `rows`.
Eigen::MatrixXd SelectRows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows);

}  // namespace cek::causal

#endif  // CEK_CAUSAL_PROPENSITY_H_
