#include "cek/eval/bundle.h"

#include <algorithm>
#include <cstdio>

#include "cek/error.h"
#include "cek/text.h"

namespace cek::eval {
namespace {

constexpr const char* kModule = "evaluation";

// Advisory range for a propensity model's AUC on observational data.
constexpr double kAdvisoryAucLow = 0.7;
constexpr double kAdvisoryAucHigh = 0.8;

std::vector<std::string> StratumNames(const CohortFrame& frame) {
  std::vector<std::string> names;
  for (std::int64_t level : frame.treatment_levels) names.push_back(std::to_string(level));
  return names;
}

causal::PotentialOutcomePredictions FilterPo(const causal::PotentialOutcomePredictions& po,
                                             const Mask& mask) {
  std::vector<Eigen::Index> keep;
  for (std::size_t r = 0; r < po.size(); ++r) {
    if (mask[po.rows[r]]) keep.push_back(static_cast<Eigen::Index>(r));
  }
  causal::PotentialOutcomePredictions out;
  out.oob_fallbacks = po.oob_fallbacks;
  out.y_hat.resize(static_cast<Eigen::Index>(keep.size()), 2);
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto r = static_cast<std::size_t>(keep[j]);
    out.rows.push_back(po.rows[r]);
    out.fold.push_back(po.fold[r]);
    out.factual_arm.push_back(po.factual_arm[r]);
    out.y_hat.row(static_cast<Eigen::Index>(j)) = po.y_hat.row(keep[j]);
  }
  return out;
}

OutcomeDiagnostics EvaluateOutcome(const TrainedArtifacts& artifacts, const CohortFrame& frame,
                                   const Mask& mask, Phase phase,
                                   const EvaluationOptions& options) {
  const causal::OutcomeFit& fit = *artifacts.outcome;
  const bool binary = frame.outcome_kind == OutcomeKind::kBinary;
  const std::vector<std::string> strata = StratumNames(frame);
  OutcomeDiagnostics out;
  std::vector<Curve> rocs;
  for (int f = 0; f < fit.folds.k; ++f) {
    const causal::PotentialOutcomePredictions po = FilterPo(
        causal::PredictPotentialOutcomes(fit, frame, artifacts.propensity, f, phase), mask);
    const std::vector<double> factual = po.Factual();
    std::vector<double> truth(po.size());
    std::vector<int> labels(po.size());
    for (std::size_t r = 0; r < po.size(); ++r) {
      truth[r] = frame.outcome[po.rows[r]];
      labels[r] = truth[r] > 0.5 ? 1 : 0;
    }
    if (binary) rocs.push_back(RocCurve(factual, labels));
    std::vector<MetricsRecord> recs = MetricsTable(factual, truth, po.factual_arm, binary,
                                                   frame.treatment_name, frame.outcome_name,
                                                   phase, f, strata);
    out.metrics.insert(out.metrics.end(), recs.begin(), recs.end());

    // Append to the phase-level predictions.
    const Eigen::Index offset = out.po.y_hat.rows();
    out.po.y_hat.conservativeResize(offset + static_cast<Eigen::Index>(po.size()), 2);
    out.po.y_hat.middleRows(offset, static_cast<Eigen::Index>(po.size())) = po.y_hat;
    out.po.rows.insert(out.po.rows.end(), po.rows.begin(), po.rows.end());
    out.po.fold.insert(out.po.fold.end(), po.fold.begin(), po.fold.end());
    out.po.factual_arm.insert(out.po.factual_arm.end(), po.factual_arm.begin(),
                              po.factual_arm.end());
    out.po.oob_fallbacks += po.oob_fallbacks;
  }
  out.ignorability = CounterfactualScatter(out.po, options.ignorability);
  out.ate = causal::EstimateAte(out.po);
  if (binary) {
    out.roc = PoolFolds(CurveKind::kRoc, std::move(rocs), options.grid_points);
    std::vector<int> labels(out.po.size());
    for (std::size_t r = 0; r < out.po.size(); ++r) {
      labels[r] = frame.outcome[out.po.rows[r]] > 0.5 ? 1 : 0;
    }
    std::vector<double> factual = out.po.Factual();
    for (double& v : factual) v = std::clamp(v, 0.0, 1.0);
    out.calibration = ComputeCalibrationCurve(factual, labels, options.calibration);
  } else {
    out.accuracy = AccuracyScatter(out.po, frame.outcome, options.residual_mode);
  }
  return out;
}

PhaseDiagnostics EvaluatePhase(const TrainedArtifacts& artifacts, const CohortFrame& frame,
                               const Mask& mask, Phase phase, const EvaluationOptions& options) {
  const causal::PropensityFit& prop = artifacts.propensity;
  const FoldPlan& folds = prop.folds;
  const std::vector<std::string> strata = StratumNames(frame);
  PhaseDiagnostics diag;
  diag.phase = phase;

  std::vector<Curve> roc, weighted, expected, pr;
  std::vector<FoldSample> samples;
  std::vector<double> all_scores;
  std::vector<int> all_treatment;
  for (int f = 0; f < folds.k; ++f) {
    FoldView view;
    view.fold = f;
    const std::vector<std::size_t> rows =
        phase == Phase::kTrain ? folds.TrainRows(f) : folds.ValidationRows(f);
    for (std::size_t i : rows) {
      if (mask[i]) view.rows.push_back(i);
    }
    if (view.rows.empty()) {
      throw EmptySubsetError(kModule, std::string(ToString(phase)) + " fold " +
                                          std::to_string(f) + " has no selected rows");
    }
    view.scores = prop.ScoresFor(f, view.rows);
    view.treatment.resize(view.rows.size());
    std::vector<double> truth(view.rows.size());
    for (std::size_t r = 0; r < view.rows.size(); ++r) {
      view.treatment[r] = frame.treatment[view.rows[r]];
      truth[r] = view.treatment[r];
    }
    view.weights = ComputeWeights(artifacts.method, artifacts.weighting, view.scores,
                                  view.treatment);

    roc.push_back(RocCurve(view.scores, view.treatment));
    weighted.push_back(RocCurve(view.scores, view.treatment, view.weights.weights));
    expected.push_back(ExpectedRoc(view.scores));
    pr.push_back(PrCurve(view.scores, view.treatment));
    diag.calibration.push_back(
        ComputeCalibrationCurve(view.scores, view.treatment, options.calibration));
    std::vector<MetricsRecord> recs = MetricsTable(view.scores, truth, view.treatment, true,
                                                   frame.treatment_name, "", phase, f, strata);
    diag.propensity_metrics.insert(diag.propensity_metrics.end(), recs.begin(), recs.end());

    samples.push_back({view.rows, view.weights.weights});
    all_scores.insert(all_scores.end(), view.scores.begin(), view.scores.end());
    all_treatment.insert(all_treatment.end(), view.treatment.begin(), view.treatment.end());
    diag.distribution_rows.insert(diag.distribution_rows.end(), view.rows.begin(),
                                  view.rows.end());
    diag.folds.push_back(std::move(view));
  }
  diag.balance = BalanceReport(frame, samples, phase, options.smd_threshold);
  diag.propensity_roc = PoolFolds(CurveKind::kRoc, std::move(roc), options.grid_points);
  diag.weighted_roc = PoolFolds(CurveKind::kWeightedRoc, std::move(weighted), options.grid_points);
  diag.expected_roc = PoolFolds(CurveKind::kExpectedRoc, std::move(expected), options.grid_points);
  diag.propensity_pr = PoolFolds(CurveKind::kPr, std::move(pr), options.grid_points);
  diag.distribution = PropensityDistribution(all_scores, all_treatment, options.distribution);
  diag.positivity = PositivityFlag(diag.distribution);
  if (artifacts.outcome) {
    diag.outcome = EvaluateOutcome(artifacts, frame, mask, phase, options);
  }
  return diag;
}

std::string Percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * v);
  return buf;
}

void Annotate(DiagnosticBundle& bundle) {
  const PhaseDiagnostics& val = bundle.validation;
  if (val.propensity_roc.summary_mean) {
    const double auc = *val.propensity_roc.summary_mean;
    if (auc < kAdvisoryAucLow || auc > kAdvisoryAucHigh) {
      bundle.annotations.push_back("advisory: validation propensity AUC " + FormatDouble(auc) +
                                   " is outside the typical 0.7-0.8 range");
    }
  }
  for (const std::string& name : val.balance.Flagged()) {
    bundle.annotations.push_back("balance: covariate \"" + name +
                                 "\" has mean weighted SMD above " +
                                 FormatDouble(val.balance.threshold));
  }
  if (val.positivity.flagged > 0) {
    bundle.annotations.push_back("positivity: " + Percent(val.positivity.fraction_flagged) +
                                 " of validation samples fall in single-arm propensity bins");
  }
  for (const PhaseDiagnostics* phase : {&bundle.train, &bundle.validation}) {
    if (phase->outcome && phase->outcome->po.oob_fallbacks > 0) {
      bundle.annotations.push_back(std::to_string(phase->outcome->po.oob_fallbacks) +
                                   " training rows had no out-of-bag trees");
    }
  }
}

DiagnosticBundle Evaluate(const TrainedArtifacts& artifacts, const CohortFrame& frame,
                          const Mask& mask, const std::string& name,
                          const EvaluationOptions& options) {
  if (mask.size() != frame.size()) throw ParameterError(kModule, "mask length differs from cohort");
  DiagnosticBundle bundle;
  bundle.subset = name;
  bundle.total = frame.size();
  std::size_t arm_count[2] = {0, 0};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    ++bundle.selected;
    ++arm_count[frame.treatment[i] == 1 ? 1 : 0];
  }
  if (bundle.selected == 0) throw EmptySubsetError(kModule, "subset selects no samples");
  if (arm_count[0] == 0 || arm_count[1] == 0) {
    throw PositivityError(kModule, "subset" + (name.empty() ? std::string() : " \"" + name + "\"") +
                                       " leaves no samples in arm " +
                                       (arm_count[0] == 0 ? "0" : "1"));
  }
  bundle.train = EvaluatePhase(artifacts, frame, mask, Phase::kTrain, options);
  bundle.validation = EvaluatePhase(artifacts, frame, mask, Phase::kValidation, options);
  Annotate(bundle);
  return bundle;
}

}  // namespace

const char* ToString(CausalMethod method) {
  switch (method) {
    case CausalMethod::kIpw:
      return "ipw";
    case CausalMethod::kMatching:
      return "matching";
    case CausalMethod::kDoublyRobust:
      return "doubly_robust";
  }
  return "ipw";
}

CausalMethod ParseCausalMethod(const std::string& name) {
  if (name == "ipw") return CausalMethod::kIpw;
  if (name == "matching") return CausalMethod::kMatching;
  if (name == "doubly_robust") return CausalMethod::kDoublyRobust;
  throw ConfigError(kModule, "unknown method \"" + name + "\"");
}

causal::WeightVector ComputeWeights(CausalMethod method, const WeightingOptions& options,
                                    std::span<const double> propensity,
                                    std::span<const int> treatment) {
  if (method == CausalMethod::kMatching) {
    return causal::MatchByPropensity(propensity, treatment, options.caliper);
  }
  return causal::IpwWeights(propensity, treatment, options.ipw);
}

DiagnosticBundle EvaluateAll(const TrainedArtifacts& artifacts, const CohortFrame& frame,
                             const EvaluationOptions& options) {
  return Evaluate(artifacts, frame, Mask(frame.size(), true), "", options);
}

DiagnosticBundle EvaluateSubset(const TrainedArtifacts& artifacts, const CohortFrame& frame,
                                const Mask& mask, const std::string& name,
                                const EvaluationOptions& options) {
  return Evaluate(artifacts, frame, mask, name, options);
}

}  // namespace cek::eval
