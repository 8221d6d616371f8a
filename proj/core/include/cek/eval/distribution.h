#ifndef CEK_EVAL_DISTRIBUTION_H_
#define CEK_EVAL_DISTRIBUTION_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cek/core_data.h"

namespace cek::eval {

// kHistogram: per-arm densities. kPdfReflected: the same with the treated
// (arm 1) densities negated for display. kCdf: per-arm cumulative fractions.
enum class DistributionMode { kHistogram, kPdfReflected, kCdf };

const char* ToString(DistributionMode mode);
DistributionMode ParseDistributionMode(const std::string& name);

struct DistributionOptions {
  DistributionMode mode = DistributionMode::kHistogram;
  int bins = 20;
  std::size_t min_count = 10;
  double lo = 0.0;
  double hi = 1.0;
};

// Shared-edge histograms of a score per arm.
struct DistributionSeries {
  DistributionMode mode = DistributionMode::kHistogram;
  std::vector<double> edges;                     // bins + 1
  std::vector<std::vector<std::size_t>> counts;  // [arm][bin]
  std::vector<std::vector<double>> values;       // [arm][bin], per mode
  std::vector<int> bin_of;                       // per sample
  std::vector<int> arm_of;                       // per sample
  std::size_t min_count = 10;
  // Bins populated by a single arm with at least min_count samples.
  std::vector<int> suspect_bins;
  std::vector<int> suspect_arm;
};

// Values outside [lo, hi] fall into the boundary bins; the last bin is closed.
DistributionSeries PropensityDistribution(std::span<const double> scores,
                                          std::span<const int> treatment,
                                          const DistributionOptions& options = {});

struct PositivityReport {
  Mask suspect;  // per sample of the series
  std::size_t flagged = 0;
  std::vector<double> fraction_flagged_per_arm;
  double fraction_flagged = 0.0;
};

// Marks the samples that fall into suspect bins.
PositivityReport PositivityFlag(const DistributionSeries& series);

}  // namespace cek::eval

#endif  // CEK_EVAL_DISTRIBUTION_H_
