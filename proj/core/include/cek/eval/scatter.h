#ifndef CEK_EVAL_SCATTER_H_
#define CEK_EVAL_SCATTER_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cek/causal/doubly_robust.h"

namespace cek::eval {

struct IgnorabilityOptions {
  int grid = 10;
  std::size_t min_cell = 5;
};

struct IgnorabilityCell {
  int ix = 0;
  int iy = 0;
  std::size_t count0 = 0;
  std::size_t count1 = 0;
  bool flagged = false;  // populated by a single arm
};

// Counterfactual scatter (y0_hat, y1_hat) per sample with a g x g grid over
// the occupied range. A cell is populated when it holds at least min_cell
// points; violation_score = flagged populated cells / populated cells.
struct IgnorabilityReport {
  std::vector<double> x;  // prediction under arm 0
  std::vector<double> y;  // prediction under arm 1
  std::vector<int> arm;
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  int grid = 10;
  std::size_t min_cell = 5;
  std::vector<IgnorabilityCell> cells;  // populated cells, row-major order
  std::size_t populated = 0;
  std::size_t flagged = 0;
  double violation_score = 0.0;
  std::string warning;
};

// Throws ParameterError unless both arms are present.
IgnorabilityReport CounterfactualScatter(std::span<const double> y0, std::span<const double> y1,
                                         std::span<const int> arm,
                                         const IgnorabilityOptions& options = {});

IgnorabilityReport CounterfactualScatter(const causal::PotentialOutcomePredictions& po,
                                         const IgnorabilityOptions& options = {});

// Factual predictions against observed outcomes.
struct AccuracyScatterResult {
  std::vector<double> predicted;
  std::vector<double> observed;
  std::vector<double> value;  // observed, or predicted - observed in residual mode
  std::vector<int> arm;
  bool residual_mode = false;
  std::vector<std::optional<double>> r2;  // per arm, pooled over entries
  std::vector<double> r2_fold_std;        // per arm, population std over folds
};

// Coefficient of determination 1 - SS_res / SS_tot; absent for fewer than two
// samples or zero total variance.
std::optional<double> RSquared(std::span<const double> observed, std::span<const double> predicted);

// `outcome` is indexed by sample.
AccuracyScatterResult AccuracyScatter(const causal::PotentialOutcomePredictions& po,
                                      std::span<const double> outcome, bool residual_mode);

}  // namespace cek::eval

#endif  // CEK_EVAL_SCATTER_H_
