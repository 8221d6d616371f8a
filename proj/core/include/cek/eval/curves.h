#ifndef CEK_EVAL_CURVES_H_
#define CEK_EVAL_CURVES_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cek::eval {

enum class CurveKind { kRoc, kWeightedRoc, kExpectedRoc, kPr, kCalibration };

const char* ToString(CurveKind kind);

// One fold's curve. For ROC kinds x = FPR, y = TPR and summary = AUC; for PR
// x = recall, y = precision and summary = average precision. thresholds[j] is
// the score at which point j is reached (+inf for the ROC origin).
struct Curve {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> thresholds;
  std::optional<double> summary;
  std::string missing_reason;  // set when summary is absent
};

// Threshold sweep over distinct scores in descending order; tied scores enter
// together. Weighted TPR/FPR when weights are given. AUC by the trapezoid
// rule; absent when only one class is present.
Curve RocCurve(std::span<const double> scores, std::span<const int> labels,
               std::span<const double> weights = {});

// Each sample contributes p to the positive mass and 1 - p to the negative
// mass above the threshold, normalized by their totals.
Curve ExpectedRoc(std::span<const double> propensities);

// Precision/recall per distinct threshold; AP = sum (R_k - R_{k-1}) P_k.
// Absent summary when there are no positives.
Curve PrCurve(std::span<const double> scores, std::span<const int> labels);

// Per-fold curves resampled on a shared grid of `grid_points` x values in
// [0, 1]. At a grid value the last point with x_j <= x is used, linearly
// interpolated towards the next point; ROC kinds are pinned to (0, 0) and
// (1, 1). Standard deviations use the population convention.
struct PooledCurve {
  CurveKind kind = CurveKind::kRoc;
  std::vector<Curve> folds;
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> std;
  std::optional<double> summary_mean;
  double summary_std = 0.0;
  std::size_t summary_count = 0;
  std::string warning;
};

PooledCurve PoolFolds(CurveKind kind, std::vector<Curve> folds, int grid_points = 101);

// Value of a piecewise-linear curve at x using the rule described above.
double InterpolateCurve(const Curve& curve, double x);

}  // namespace cek::eval

#endif  // CEK_EVAL_CURVES_H_
