#ifndef CEK_EVAL_BUNDLE_H_
#define CEK_EVAL_BUNDLE_H_

#include <optional>
#include <string>
#include <vector>

#include "cek/causal/doubly_robust.h"
#include "cek/causal/propensity.h"
#include "cek/causal/weighting.h"
#include "cek/core_data.h"
#include "cek/eval/balance.h"
#include "cek/eval/calibration_curve.h"
#include "cek/eval/curves.h"
#include "cek/eval/distribution.h"
#include "cek/eval/metrics.h"
#include "cek/eval/scatter.h"

namespace cek::eval {

enum class CausalMethod { kIpw, kMatching, kDoublyRobust };

const char* ToString(CausalMethod method);
CausalMethod ParseCausalMethod(const std::string& name);

struct WeightingOptions {
  causal::IpwOptions ipw;
  double caliper = 0.05;  // matching only
};

// Weights for one set of rows. Matching pairs samples within `rows` only;
// doubly-robust runs use IPW weights for balance and weighted ROC.
causal::WeightVector ComputeWeights(CausalMethod method, const WeightingOptions& options,
                                    std::span<const double> propensity,
                                    std::span<const int> treatment);

// Fitted models reused by every evaluation, including subsets.
struct TrainedArtifacts {
  CausalMethod method = CausalMethod::kIpw;
  WeightingOptions weighting;
  causal::PropensityFit propensity;
  std::optional<causal::OutcomeFit> outcome;
};

struct EvaluationOptions {
  CalibrationOptions calibration;
  DistributionOptions distribution{.mode = DistributionMode::kPdfReflected};
  IgnorabilityOptions ignorability;
  double smd_threshold = 0.1;
  int grid_points = 101;
  bool residual_mode = false;
};

// Rows of one fold in one phase together with the fold model's propensities.
struct FoldView {
  int fold = 0;
  std::vector<std::size_t> rows;
  std::vector<double> scores;
  std::vector<int> treatment;
  causal::WeightVector weights;
};

struct OutcomeDiagnostics {
  causal::PotentialOutcomePredictions po;
  IgnorabilityReport ignorability;
  std::optional<PooledCurve> roc;             // binary outcomes
  std::optional<CalibrationCurve> calibration;  // binary outcomes
  std::optional<AccuracyScatterResult> accuracy;  // continuous outcomes
  std::vector<MetricsRecord> metrics;
  causal::AteEstimate ate;
};

struct PhaseDiagnostics {
  Phase phase = Phase::kTrain;
  std::vector<FoldView> folds;
  BalanceTable balance;
  PooledCurve propensity_roc;
  PooledCurve weighted_roc;
  PooledCurve expected_roc;
  PooledCurve propensity_pr;
  std::vector<CalibrationCurve> calibration;  // per fold
  // Distribution over all fold views concatenated; distribution_rows maps
  // each entry back to its sample.
  DistributionSeries distribution;
  std::vector<std::size_t> distribution_rows;
  PositivityReport positivity;
  std::vector<MetricsRecord> propensity_metrics;
  std::optional<OutcomeDiagnostics> outcome;
};

struct DiagnosticBundle {
  std::string subset;  // empty for the whole cohort
  std::size_t selected = 0;
  std::size_t total = 0;
  PhaseDiagnostics train;
  PhaseDiagnostics validation;
  std::vector<std::string> annotations;

  const PhaseDiagnostics& Get(Phase phase) const {
    return phase == Phase::kTrain ? train : validation;
  }
};

DiagnosticBundle EvaluateAll(const TrainedArtifacts& artifacts, const CohortFrame& frame,
                             const EvaluationOptions& options);

// Same diagnostics restricted to the rows selected by `mask`, reusing the
// whole-cohort models. Throws EmptySubsetError for an empty selection and
// PositivityError when an arm disappears.
DiagnosticBundle EvaluateSubset(const TrainedArtifacts& artifacts, const CohortFrame& frame,
                                const Mask& mask, const std::string& name,
                                const EvaluationOptions& options);

}  // namespace cek::eval

#endif  // CEK_EVAL_BUNDLE_H_
