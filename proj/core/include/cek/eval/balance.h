#ifndef CEK_EVAL_BALANCE_H_
#define CEK_EVAL_BALANCE_H_

#include <span>
#include <string>
#include <vector>

#include "cek/core_data.h"

namespace cek::eval {

// Absolute standardized mean difference
//
//   |mu_t - mu_c| / sqrt((var_t + var_c) / 2)
//
// with frequency-weighted means and variances (divisor sum(w) - 1, or sum(w)
// when sum(w) <= 1). Empty weights mean unit weights. Zero pooled variance
// gives 0 for equal means and +inf otherwise. Throws ParameterError for an
// empty group or weights that are negative or sum to zero.
double Smd(std::span<const double> x_t, std::span<const double> x_c,
           std::span<const double> w_t = {}, std::span<const double> w_c = {});

// Rows of one fold and their weights (aligned with rows).
struct FoldSample {
  std::vector<std::size_t> rows;
  std::vector<double> weights;
};

struct CovariateBalance {
  std::string name;
  std::vector<double> unweighted;  // per fold
  std::vector<double> weighted;    // per fold
  double mean_unweighted = 0.0;
  double mean_weighted = 0.0;
  bool flagged = false;  // mean_weighted > threshold
};

struct BalanceTable {
  Phase phase = Phase::kValidation;
  double threshold = 0.1;
  int num_folds = 0;
  // Sorted by descending mean_unweighted; infinite values first.
  std::vector<CovariateBalance> covariates;

  std::vector<std::string> Flagged() const;
  const CovariateBalance* Find(const std::string& name) const;
};

// Per-covariate SMD with and without weights on each fold's rows, averaged
// over folds. A fold with an empty arm throws PositivityError.
BalanceTable BalanceReport(const CohortFrame& frame, std::span<const FoldSample> folds,
                           Phase phase, double threshold = 0.1);

}  // namespace cek::eval

#endif  // CEK_EVAL_BALANCE_H_
