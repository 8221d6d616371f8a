#ifndef CEK_EVAL_CALIBRATION_CURVE_H_
#define CEK_EVAL_CALIBRATION_CURVE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cek::eval {

// kQuantile: equal-count bins over the sorted scores. kUniform: equal-width
// bins on [0, 1]. kWindow: sliding window of window_width consecutive samples
// in score order, advanced by window_stride.
enum class BinStrategy { kQuantile, kUniform, kWindow };

const char* ToString(BinStrategy strategy);
BinStrategy ParseBinStrategy(const std::string& name);

struct CalibrationOptions {
  BinStrategy strategy = BinStrategy::kQuantile;
  int bins = 10;
  std::size_t window_width = 0;   // required for kWindow
  std::size_t window_stride = 0;  // 0 = window_width / 4, at least 1
};

struct CalibrationPoint {
  double r_mean = 0.0;      // mean predicted score
  double p_observed = 0.0;  // observed label frequency
  std::size_t n = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  bool CoversDiagonal() const { return ci_low <= r_mean && r_mean <= ci_high; }
};

struct CalibrationCurve {
  BinStrategy strategy = BinStrategy::kQuantile;
  std::vector<CalibrationPoint> points;
  std::vector<int> skipped_bins;  // empty bins; quantile bins absorbed by ties count too
};

// Interval of predicted probabilities r whose one-standard-deviation band
// r +/- sqrt(r (1 - r) / n) reaches p: the lower end solves
// r + sqrt(r (1 - r) / n) = p and the upper end r - sqrt(r (1 - r) / n) = p.
// Both are roots of (n + 1) r^2 - (2 n p + 1) r + n p^2 = 0, polished by
// Newton's method and clamped to [0, 1].
std::pair<double, double> CalibrationInterval(double p, std::size_t n);

// Throws ParameterError for scores outside [0, 1], mismatched lengths, or a
// window strategy without a width.
CalibrationCurve ComputeCalibrationCurve(std::span<const double> scores,
                                         std::span<const int> labels,
                                         const CalibrationOptions& options = {});

}  // namespace cek::eval

#endif  // CEK_EVAL_CALIBRATION_CURVE_H_
