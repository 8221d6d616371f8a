#include "cek/causal/weighting.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "cek/error.h"
#include "cek/text.h"

namespace cek::causal {
namespace {

constexpr const char* kModule = "causal_methods";

void CheckLengths(std::span<const double> p, std::span<const int> a) {
  if (p.size() != a.size()) {
    throw ParameterError(kModule, "propensity and treatment lengths differ");
  }
  for (int v : a) {
    if (v != 0 && v != 1) throw ParameterError(kModule, "treatment must be binary (0/1)");
  }
}

}  // namespace

const char* ToString(WeightKind kind) {
  switch (kind) {
    case WeightKind::kIpw:
      return "ipw";
    case WeightKind::kStabilizedIpw:
      return "stabilized_ipw";
    case WeightKind::kMatching:
      return "matching";
  }
  return "ipw";
}

WeightVector IpwWeights(std::span<const double> propensity, std::span<const int> treatment,
                        const IpwOptions& options) {
  CheckLengths(propensity, treatment);
  if (!(options.epsilon > 0.0 && options.epsilon < 0.5)) {
    throw ParameterError(kModule, "epsilon must lie in (0, 0.5)");
  }
  const std::size_t n = propensity.size();
  WeightVector out;
  out.kind = options.stabilized ? WeightKind::kStabilizedIpw : WeightKind::kIpw;
  out.truncation = options.truncation;
  out.weights.resize(n);

  double prevalence = 0.0;
  for (int a : treatment) prevalence += a;
  prevalence = n > 0 ? prevalence / static_cast<double>(n) : 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    double p = propensity[i];
    if (!std::isfinite(p)) throw ParameterError(kModule, "non-finite propensity score");
    const double clipped = std::clamp(p, options.epsilon, 1.0 - options.epsilon);
    if (clipped != p) ++out.clipped;
    p = clipped;
    double w = treatment[i] == 1 ? 1.0 / p : 1.0 / (1.0 - p);
    if (options.stabilized) w *= treatment[i] == 1 ? prevalence : 1.0 - prevalence;
    if (options.truncation) {
      const double t = std::clamp(w, options.truncation->first, options.truncation->second);
      if (t != w) ++out.truncated;
      w = t;
    }
    out.weights[i] = w;
  }
  return out;
}

WeightVector MatchByPropensity(std::span<const double> propensity,
                               std::span<const int> treatment, double caliper) {
  CheckLengths(propensity, treatment);
  const std::size_t n = propensity.size();
  std::vector<std::size_t> treated;
  std::set<std::pair<double, std::size_t>> controls;
  for (std::size_t i = 0; i < n; ++i) {
    if (treatment[i] == 1) {
      treated.push_back(i);
    } else {
      controls.emplace(propensity[i], i);
    }
  }
  if (treated.empty() || controls.empty()) {
    throw PositivityError(kModule, "matching needs at least one sample in each arm");
  }
  std::stable_sort(treated.begin(), treated.end(), [&](std::size_t a, std::size_t b) {
    return propensity[a] > propensity[b];
  });

  WeightVector out;
  out.kind = WeightKind::kMatching;
  out.weights.assign(n, 0.0);
  for (std::size_t t : treated) {
    if (controls.empty()) break;
    const double pt = propensity[t];
    auto right = controls.lower_bound({pt, 0});
    std::optional<std::pair<double, std::size_t>> best;
    double best_dist = 0.0;
    if (right != controls.end()) {
      best = *right;
      best_dist = std::abs(right->first - pt);
    }
    if (right != controls.begin()) {
      // Smallest position among the controls sharing the nearest lower score.
      const double left_p = std::prev(right)->first;
      auto left = controls.lower_bound({left_p, 0});
      const double dist = std::abs(left->first - pt);
      if (!best || dist < best_dist || (dist == best_dist && left->second < best->second)) {
        best = *left;
        best_dist = dist;
      }
    }
    if (best && best_dist <= caliper) {
      out.weights[t] = 1.0;
      out.weights[best->second] = 1.0;
      controls.erase(*best);
      ++out.matched_pairs;
    }
  }
  return out;
}

void WriteWeightsCsv(const std::string& path, std::span<const std::string> sample_ids,
                     std::span<const int> folds, const WeightVector& weights) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(kModule, "cannot write \"" + path + "\"");
  out << "sample_id,fold,weight,kind\n";
  for (std::size_t i = 0; i < weights.weights.size(); ++i) {
    out << EscapeCsvField(sample_ids[i]) << ',' << (folds.empty() ? 0 : folds[i]) << ','
        << FormatDouble(weights.weights[i]) << ',' << ToString(weights.kind) << '\n';
  }
  if (!out) throw IoError(kModule, "write failed for \"" + path + "\"");
}

}  // namespace cek::causal
