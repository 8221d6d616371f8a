#include "cek/eval/curves.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cek/error.h"
#include "cek/log.h"

namespace cek::eval {
namespace {

constexpr const char* kModule = "evaluation";

std::vector<std::size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

void CheckScores(std::span<const double> scores) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw ParameterError(kModule, "curve scores must be finite");
  }
}

double Trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double area = 0.0;
  for (std::size_t j = 1; j < x.size(); ++j) area += (x[j] - x[j - 1]) * (y[j] + y[j - 1]) / 2.0;
  return area;
}

// Cumulative (positive, negative) mass swept in descending score order.
Curve SweepMasses(std::span<const double> scores, std::span<const double> pos,
                  std::span<const double> neg) {
  CheckScores(scores);
  double total_pos = 0.0;
  double total_neg = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    total_pos += pos[i];
    total_neg += neg[i];
  }
  Curve c;
  c.x.push_back(0.0);
  c.y.push_back(0.0);
  c.thresholds.push_back(std::numeric_limits<double>::infinity());
  const std::vector<std::size_t> order = DescendingOrder(scores);
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      tp += pos[order[k]];
      fp += neg[order[k]];
      ++k;
    }
    c.x.push_back(total_neg > 0.0 ? fp / total_neg : 0.0);
    c.y.push_back(total_pos > 0.0 ? tp / total_pos : 0.0);
    c.thresholds.push_back(s);
  }
  if (total_pos > 0.0 && total_neg > 0.0) {
    c.summary = Trapezoid(c.x, c.y);
  } else {
    c.missing_reason = "single_class";
  }
  return c;
}

}  // namespace

const char* ToString(CurveKind kind) {
  switch (kind) {
    case CurveKind::kRoc:
      return "roc";
    case CurveKind::kWeightedRoc:
      return "weighted_roc";
    case CurveKind::kExpectedRoc:
      return "expected_roc";
    case CurveKind::kPr:
      return "pr";
    case CurveKind::kCalibration:
      return "calibration";
  }
  return "roc";
}

Curve RocCurve(std::span<const double> scores, std::span<const int> labels,
               std::span<const double> weights) {
  if (scores.size() != labels.size() || (!weights.empty() && weights.size() != scores.size())) {
    throw ParameterError(kModule, "ROC inputs differ in length");
  }
  std::vector<double> pos(scores.size());
  std::vector<double> neg(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0)) throw ParameterError(kModule, "ROC weights must be non-negative");
    pos[i] = labels[i] == 1 ? w : 0.0;
    neg[i] = labels[i] == 1 ? 0.0 : w;
  }
  return SweepMasses(scores, pos, neg);
}

Curve ExpectedRoc(std::span<const double> propensities) {
  std::vector<double> pos(propensities.begin(), propensities.end());
  std::vector<double> neg(propensities.size());
  for (std::size_t i = 0; i < pos.size(); ++i) neg[i] = 1.0 - pos[i];
  return SweepMasses(propensities, pos, neg);
}

Curve PrCurve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ParameterError(kModule, "PR inputs differ in length");
  CheckScores(scores);
  double total_pos = 0.0;
  for (int l : labels) total_pos += l == 1 ? 1.0 : 0.0;
  Curve c;
  const std::vector<std::size_t> order = DescendingOrder(scores);
  double tp = 0.0;
  double fp = 0.0;
  double prev_recall = 0.0;
  double ap = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1 ? tp : fp) += 1.0;
      ++k;
    }
    const double precision = tp / (tp + fp);
    const double recall = total_pos > 0.0 ? tp / total_pos : 0.0;
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    c.x.push_back(recall);
    c.y.push_back(precision);
    c.thresholds.push_back(s);
  }
  if (total_pos > 0.0) {
    c.summary = ap;
  } else {
    c.missing_reason = "no_positives";
  }
  return c;
}

double InterpolateCurve(const Curve& curve, double x) {
  if (curve.x.empty()) return 0.0;
  // Last index with x_j <= x.
  const auto it = std::upper_bound(curve.x.begin(), curve.x.end(), x);
  if (it == curve.x.begin()) return curve.y.front();
  const std::size_t j = static_cast<std::size_t>(it - curve.x.begin()) - 1;
  if (curve.x[j] == x || j + 1 == curve.x.size()) return curve.y[j];
  const double t = (x - curve.x[j]) / (curve.x[j + 1] - curve.x[j]);
  return curve.y[j] + t * (curve.y[j + 1] - curve.y[j]);
}

PooledCurve PoolFolds(CurveKind kind, std::vector<Curve> folds, int grid_points) {
  if (grid_points < 2) throw ParameterError(kModule, "pooling grid needs at least two points");
  PooledCurve pooled;
  pooled.kind = kind;
  pooled.folds = std::move(folds);
  const bool roc = kind == CurveKind::kRoc || kind == CurveKind::kWeightedRoc ||
                   kind == CurveKind::kExpectedRoc;
  const std::size_t g = static_cast<std::size_t>(grid_points);
  pooled.grid.resize(g);
  for (std::size_t j = 0; j < g; ++j) {
    pooled.grid[j] = static_cast<double>(j) / static_cast<double>(g - 1);
  }
  pooled.mean.assign(g, 0.0);
  pooled.std.assign(g, 0.0);
  const std::size_t k = pooled.folds.size();
  if (k < 2) {
    pooled.warning = "fewer than two folds; std reported as 0";
    LogWarning(kModule, pooled.warning);
  }
  if (k == 0) return pooled;

  std::vector<std::vector<double>> values(k, std::vector<double>(g));
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t j = 0; j < g; ++j) {
      values[f][j] = InterpolateCurve(pooled.folds[f], pooled.grid[j]);
    }
    if (roc) {
      values[f].front() = 0.0;
      values[f].back() = 1.0;
    }
  }
  for (std::size_t j = 0; j < g; ++j) {
    double s = 0.0;
    for (std::size_t f = 0; f < k; ++f) s += values[f][j];
    const double m = s / static_cast<double>(k);
    double ss = 0.0;
    for (std::size_t f = 0; f < k; ++f) ss += (values[f][j] - m) * (values[f][j] - m);
    pooled.mean[j] = m;
    pooled.std[j] = k >= 2 ? std::sqrt(ss / static_cast<double>(k)) : 0.0;
  }

  std::vector<double> summaries;
  for (const Curve& c : pooled.folds) {
    if (c.summary) summaries.push_back(*c.summary);
  }
  pooled.summary_count = summaries.size();
  if (!summaries.empty()) {
    const double m = std::accumulate(summaries.begin(), summaries.end(), 0.0) /
                     static_cast<double>(summaries.size());
    double ss = 0.0;
    for (double v : summaries) ss += (v - m) * (v - m);
    pooled.summary_mean = m;
    pooled.summary_std =
        summaries.size() >= 2 ? std::sqrt(ss / static_cast<double>(summaries.size())) : 0.0;
  }
  return pooled;
}

}  // namespace cek::eval
