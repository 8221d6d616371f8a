#ifndef CEK_CAUSAL_WEIGHTING_H_
#define CEK_CAUSAL_WEIGHTING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cek::causal {

enum class WeightKind { kIpw, kStabilizedIpw, kMatching };

const char* ToString(WeightKind kind);

struct WeightVector {
  std::vector<double> weights;
  WeightKind kind = WeightKind::kIpw;
  std::optional<std::pair<double, double>> truncation;
  std::size_t clipped = 0;    // scores moved into [eps, 1 - eps]
  std::size_t truncated = 0;  // weights moved into the truncation bounds
  std::size_t matched_pairs = 0;
};

struct IpwOptions {
  bool stabilized = false;
  std::optional<std::pair<double, double>> truncation;  // (w_min, w_max)
  double epsilon = 1e-6;
};

// Treated rows get 1/p, controls 1/(1-p); stabilized weights multiply by the
// arm's prevalence within `treatment`. Truncation is applied last.
WeightVector IpwWeights(std::span<const double> propensity, std::span<const int> treatment,
                        const IpwOptions& options = {});

// Greedy 1:1 nearest-neighbour matching without replacement on |p_i - p_j|.
// Treated samples are processed by descending propensity (ties by position);
// each takes the closest unused control (ties by position) if it is within
// the caliper. Matched samples weigh 1, everything else 0.
// Throws PositivityError when either arm is empty.
WeightVector MatchByPropensity(std::span<const double> propensity,
                               std::span<const int> treatment, double caliper);

void WriteWeightsCsv(const std::string& path, std::span<const std::string> sample_ids,
                     std::span<const int> folds, const WeightVector& weights);

}  // namespace cek::causal

#endif  // CEK_CAUSAL_WEIGHTING_H_
