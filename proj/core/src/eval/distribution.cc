#include "cek/eval/distribution.h"

#include <algorithm>
#include <cmath>

#include "cek/error.h"

namespace cek::eval {
namespace {

constexpr const char* kModule = "evaluation";

}  // namespace

const char* ToString(DistributionMode mode) {
  switch (mode) {
    case DistributionMode::kHistogram:
      return "histogram";
    case DistributionMode::kPdfReflected:
      return "pdf_reflected";
    case DistributionMode::kCdf:
      return "cdf";
  }
  return "histogram";
}

DistributionMode ParseDistributionMode(const std::string& name) {
  if (name == "histogram") return DistributionMode::kHistogram;
  if (name == "pdf_reflected" || name == "pdf") return DistributionMode::kPdfReflected;
  if (name == "cdf") return DistributionMode::kCdf;
  throw ConfigError(kModule, "unknown distribution mode \"" + name + "\"");
}

DistributionSeries PropensityDistribution(std::span<const double> scores,
                                          std::span<const int> treatment,
                                          const DistributionOptions& options) {
  if (scores.size() != treatment.size()) {
    throw ParameterError(kModule, "distribution inputs differ in length");
  }
  if (options.bins < 1 || !(options.hi > options.lo)) {
    throw ParameterError(kModule, "distribution needs bins >= 1 and hi > lo");
  }
  int arms = 2;
  for (int a : treatment) {
    if (a < 0) throw ParameterError(kModule, "negative treatment label");
    arms = std::max(arms, a + 1);
  }
  const int b = options.bins;
  const double width = (options.hi - options.lo) / b;
  DistributionSeries s;
  s.mode = options.mode;
  s.min_count = options.min_count;
  s.edges.resize(static_cast<std::size_t>(b) + 1);
  for (int k = 0; k <= b; ++k) s.edges[static_cast<std::size_t>(k)] = options.lo + k * width;
  s.edges.back() = options.hi;
  s.counts.assign(static_cast<std::size_t>(arms), std::vector<std::size_t>(static_cast<std::size_t>(b), 0));
  s.bin_of.resize(scores.size());
  s.arm_of.assign(treatment.begin(), treatment.end());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw ParameterError(kModule, "non-finite score");
    int k = static_cast<int>(std::floor((scores[i] - options.lo) / width));
    k = std::clamp(k, 0, b - 1);
    s.bin_of[i] = k;
    ++s.counts[static_cast<std::size_t>(treatment[i])][static_cast<std::size_t>(k)];
  }

  s.values.assign(static_cast<std::size_t>(arms), std::vector<double>(static_cast<std::size_t>(b), 0.0));
  for (int a = 0; a < arms; ++a) {
    const auto& cnt = s.counts[static_cast<std::size_t>(a)];
    auto& val = s.values[static_cast<std::size_t>(a)];
    std::size_t total = 0;
    for (std::size_t c : cnt) total += c;
    if (total == 0) continue;
    double running = 0.0;
    for (int k = 0; k < b; ++k) {
      const double frac = static_cast<double>(cnt[static_cast<std::size_t>(k)]) / static_cast<double>(total);
      switch (options.mode) {
        case DistributionMode::kHistogram:
          val[static_cast<std::size_t>(k)] = frac / width;
          break;
        case DistributionMode::kPdfReflected:
          val[static_cast<std::size_t>(k)] = (a == 1 ? -1.0 : 1.0) * frac / width;
          break;
        case DistributionMode::kCdf:
          running += frac;
          val[static_cast<std::size_t>(k)] = running;
          break;
      }
    }
  }

  for (int k = 0; k < b; ++k) {
    int present = 0;
    int only = -1;
    std::size_t total = 0;
    for (int a = 0; a < arms; ++a) {
      const std::size_t c = s.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
      if (c > 0) {
        ++present;
        only = a;
        total += c;
      }
    }
    if (present == 1 && total >= options.min_count) {
      s.suspect_bins.push_back(k);
      s.suspect_arm.push_back(only);
    }
  }
  return s;
}

PositivityReport PositivityFlag(const DistributionSeries& series) {
  const std::size_t n = series.bin_of.size();
  const std::size_t arms = series.counts.size();
  PositivityReport report;
  report.suspect.assign(n, false);
  std::vector<bool> bin_suspect(series.edges.empty() ? 0 : series.edges.size() - 1, false);
  for (int k : series.suspect_bins) bin_suspect[static_cast<std::size_t>(k)] = true;
  std::vector<std::size_t> arm_total(arms, 0);
  std::vector<std::size_t> arm_flagged(arms, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<std::size_t>(series.arm_of[i]);
    ++arm_total[a];
    if (bin_suspect[static_cast<std::size_t>(series.bin_of[i])]) {
      report.suspect[i] = true;
      ++report.flagged;
      ++arm_flagged[a];
    }
  }
  report.fraction_flagged_per_arm.resize(arms, 0.0);
  for (std::size_t a = 0; a < arms; ++a) {
    if (arm_total[a] > 0) {
      report.fraction_flagged_per_arm[a] =
          static_cast<double>(arm_flagged[a]) / static_cast<double>(arm_total[a]);
    }
  }
  report.fraction_flagged = n > 0 ? static_cast<double>(report.flagged) / static_cast<double>(n) : 0.0;
  return report;
}

}  // namespace cek::eval
