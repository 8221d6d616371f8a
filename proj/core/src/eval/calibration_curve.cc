#include "cek/eval/calibration_curve.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cek/error.h"

namespace cek::eval {
namespace {

constexpr const char* kModule = "evaluation";

// f(r) = r + sign * sqrt(r (1 - r) / n) - p, polished from a close start.
double Polish(double r, double p, double n, double sign) {
  for (int it = 0; it < 50; ++it) {
    if (r <= 0.0 || r >= 1.0) break;
    const double s = std::sqrt(r * (1.0 - r) / n);
    const double f = r + sign * s - p;
    if (f == 0.0) break;
    const double df = 1.0 + sign * (1.0 - 2.0 * r) / (2.0 * n * s);
    if (df == 0.0 || !std::isfinite(df)) break;
    const double next = r - f / df;
    if (!(next > 0.0 && next < 1.0) || next == r) break;
    r = next;
  }
  return r;
}

CalibrationPoint MakePoint(std::span<const double> scores, std::span<const int> labels,
                           std::span<const std::size_t> members) {
  CalibrationPoint pt;
  pt.n = members.size();
  double r = 0.0;
  double p = 0.0;
  for (std::size_t i : members) {
    r += scores[i];
    p += labels[i] == 1 ? 1.0 : 0.0;
  }
  pt.r_mean = r / static_cast<double>(pt.n);
  pt.p_observed = p / static_cast<double>(pt.n);
  std::tie(pt.ci_low, pt.ci_high) = CalibrationInterval(pt.p_observed, pt.n);
  return pt;
}

}  // namespace

const char* ToString(BinStrategy strategy) {
  switch (strategy) {
    case BinStrategy::kQuantile:
      return "quantile";
    case BinStrategy::kUniform:
      return "uniform";
    case BinStrategy::kWindow:
      return "window";
  }
  return "quantile";
}

BinStrategy ParseBinStrategy(const std::string& name) {
  if (name == "quantile" || name == "bins") return BinStrategy::kQuantile;
  if (name == "uniform") return BinStrategy::kUniform;
  if (name == "window") return BinStrategy::kWindow;
  throw ConfigError(kModule, "unknown calibration strategy \"" + name + "\"");
}

std::pair<double, double> CalibrationInterval(double p, std::size_t n) {
  if (n == 0) throw ParameterError(kModule, "calibration interval needs n > 0");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(kModule, "observed frequency outside [0, 1]");
  const double nn = static_cast<double>(n);
  const double a = nn + 1.0;
  const double b = -(2.0 * nn * p + 1.0);
  const double c = nn * p * p;
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  // Numerically stable pair of roots.
  const double q = -0.5 * (b - std::sqrt(disc));
  double hi = q / a;
  double lo = q != 0.0 ? c / q : 0.0;
  if (lo > hi) std::swap(lo, hi);
  lo = std::clamp(Polish(lo, p, nn, +1.0), 0.0, 1.0);
  hi = std::clamp(Polish(hi, p, nn, -1.0), 0.0, 1.0);
  return {lo, hi};
}

CalibrationCurve ComputeCalibrationCurve(std::span<const double> scores,
                                         std::span<const int> labels,
                                         const CalibrationOptions& options) {
  if (scores.size() != labels.size()) {
    throw ParameterError(kModule, "calibration inputs differ in length");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw ParameterError(kModule, "calibration scores must lie in [0, 1]");
  }
  CalibrationCurve curve;
  curve.strategy = options.strategy;
  const std::size_t n = scores.size();
  if (n == 0) return curve;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  switch (options.strategy) {
    case BinStrategy::kQuantile: {
      if (options.bins < 1) throw ParameterError(kModule, "calibration needs at least one bin");
      const std::size_t b = static_cast<std::size_t>(options.bins);
      // Equal-count boundaries, moved past runs of tied scores so a score
      // never spans two bins.
      std::vector<std::size_t> bounds(b + 1, n);
      bounds[0] = 0;
      for (std::size_t k = 1; k < b; ++k) {
        std::size_t pos = std::max(k * n / b, bounds[k - 1]);
        while (pos > 0 && pos < n && scores[order[pos]] == scores[order[pos - 1]]) ++pos;
        bounds[k] = pos;
      }
      for (std::size_t k = 0; k < b; ++k) {
        const std::size_t lo = bounds[k];
        const std::size_t hi = bounds[k + 1];
        if (lo == hi) {
          curve.skipped_bins.push_back(static_cast<int>(k));
          continue;
        }
        curve.points.push_back(MakePoint(scores, labels, std::span(order).subspan(lo, hi - lo)));
      }
      break;
    }
    case BinStrategy::kUniform: {
      if (options.bins < 1) throw ParameterError(kModule, "calibration needs at least one bin");
      const int b = options.bins;
      std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(b));
      for (std::size_t i : order) {
        const int k = std::min(b - 1, static_cast<int>(scores[i] * b));
        members[static_cast<std::size_t>(k)].push_back(i);
      }
      for (int k = 0; k < b; ++k) {
        if (members[static_cast<std::size_t>(k)].empty()) {
          curve.skipped_bins.push_back(k);
          continue;
        }
        curve.points.push_back(MakePoint(scores, labels, members[static_cast<std::size_t>(k)]));
      }
      break;
    }
    case BinStrategy::kWindow: {
      if (options.window_width == 0) {
        throw ParameterError(kModule, "window calibration requires window_width");
      }
      const std::size_t width = std::min(options.window_width, n);
      const std::size_t stride =
          options.window_stride > 0 ? options.window_stride : std::max<std::size_t>(1, width / 4);
      for (std::size_t lo = 0;; lo += stride) {
        const std::size_t start = std::min(lo, n - width);
        curve.points.push_back(MakePoint(scores, labels, std::span(order).subspan(start, width)));
        if (start + width >= n) break;
      }
      break;
    }
  }
  return curve;
}

}  // namespace cek::eval
