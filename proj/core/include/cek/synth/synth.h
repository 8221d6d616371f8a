#ifndef CEK_SYNTH_SYNTH_H_
#define CEK_SYNTH_SYNTH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cek/core_data.h"

namespace cek::synth {

// Column drawn as Bernoulli(prevalence) instead of a standard normal.
struct BinaryColumn {
  std::size_t column = 0;
  double prevalence = 0.5;
};

// Samples with x[column] > threshold receive forced_arm deterministically.
struct PositivityRule {
  std::size_t column = 0;
  double threshold = 0.0;
  int forced_arm = 1;
};

// Covariates are independent standard normals except the binary columns.
//
//   logit Pr[A=1|x] = propensity_intercept + overlap_strength * propensity_coef . x
//   binary:      logit Pr[Y^a=1|x] = outcome_intercept + outcome_coef . x
//                                    + outcome_quadratic . x^2 + tau * a
//   continuous:  Y^a = same linear predictor + N(0, noise_sd^2)
//
// Empty coefficient vectors mean zeros.
struct SynthConfig {
  std::size_t n = 1000;
  std::size_t d = 10;
  std::vector<BinaryColumn> binary_columns;
  std::vector<double> propensity_coef;
  double propensity_intercept = 0.0;
  std::vector<double> outcome_coef;
  std::vector<double> outcome_quadratic;
  double outcome_intercept = 0.0;
  double tau = 0.0;
  OutcomeKind outcome_kind = OutcomeKind::kBinary;
  double noise_sd = 1.0;
  std::optional<PositivityRule> positivity_rule;
  double overlap_strength = 1.0;
  std::uint64_t seed = 0;

  // Throws ConfigError on inconsistent dimensions or values.
  void Validate() const;
};

struct SynthOracle {
  std::vector<double> true_propensity;
  std::vector<double> y0;  // Pr[Y^0 = 1 | x] or E[Y^0 | x]
  std::vector<double> y1;
  std::vector<bool> rule_applied;
  double ate = 0.0;  // mean of y1 - y0 over the generated samples
};

// Deterministic per config (including seed).
std::pair<CohortFrame, SynthOracle> Generate(const SynthConfig& config);

// Mean of y1 - y0 over the samples selected by `mask` (all when absent).
// Throws EmptySubsetError for an empty selection.
double OracleAte(const SynthOracle& oracle, const std::optional<Mask>& mask = std::nullopt);

// Monte Carlo estimate of the population ATE from `draws` fresh covariate
// vectors (exact for continuous outcomes).
double PopulationAte(const SynthConfig& config, std::size_t draws, std::uint64_t seed);

// Smallest-magnitude tau giving the requested population ATE (binary outcome),
// found by bisection on PopulationAte with fixed draws.
double SolveTauForAte(SynthConfig config, double target_ate, std::size_t draws,
                      std::uint64_t seed);

void WriteOracleCsv(const CohortFrame& frame, const SynthOracle& oracle, const std::string& path);

SynthConfig SynthConfigFromJson(const nlohmann::json& j);
nlohmann::json SynthConfigToJson(const SynthConfig& config);

}  // namespace cek::synth

#endif  // CEK_SYNTH_SYNTH_H_
