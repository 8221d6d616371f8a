#ifndef CEK_EVAL_METRICS_H_
#define CEK_EVAL_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cek/core_data.h"

namespace cek::eval {

// Metric columns in output order. The confusion matrix is spread over tn, fp,
// fn and tp.
const std::vector<std::string>& MetricNames();

// Scores at or above this value are predicted positive.
inline constexpr double kDecisionThreshold = 0.5;

struct MetricsRecord {
  std::string tx;
  std::string o;  // empty for propensity records
  Phase phase = Phase::kTrain;
  int fold = 0;
  std::string stratum;  // arm label or "overall"
  std::vector<std::optional<double>> values;  // aligned with MetricNames()
  // "metric=reason" entries for missing values, separated by ';'.
  std::string notes;

  std::optional<double> Get(const std::string& metric) const;
  bool operator==(const MetricsRecord& other) const = default;
};

// All metrics for one set of predictions. `binary_truth` enables the
// classification block; regression metrics are always attempted.
std::vector<std::optional<double>> ComputeMetrics(std::span<const double> predictions,
                                                  std::span<const double> truth,
                                                  bool binary_truth, std::string* notes);

// One record per arm stratum plus "overall" for a single (phase, fold).
// `stratum_names[a]` labels arm a.
std::vector<MetricsRecord> MetricsTable(std::span<const double> predictions,
                                        std::span<const double> truth,
                                        std::span<const int> treatment, bool binary_truth,
                                        const std::string& tx, const std::string& o, Phase phase,
                                        int fold, std::span<const std::string> stratum_names);

}  // namespace cek::eval

#endif  // CEK_EVAL_METRICS_H_
