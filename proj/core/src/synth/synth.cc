#include "cek/synth/synth.h"

#include <cmath>
#include <fstream>
#include <random>

#include "cek/error.h"
#include "cek/learners/logistic.h"
#include "cek/text.h"

namespace cek::synth {
namespace {

constexpr const char* kModule = "synth";

double Coef(const std::vector<double>& v, std::size_t j) { return v.empty() ? 0.0 : v[j]; }

struct Draw {
  std::vector<double> x;
  double propensity = 0.5;
  bool rule = false;
  double eta = 0.0;  // outcome predictor without the treatment term
};

class Sampler {
 public:
  Sampler(const SynthConfig& config, std::uint64_t seed) : config_(config), rng_(seed) {
    binary_.assign(config.d, -1.0);
    for (const BinaryColumn& b : config.binary_columns) binary_[b.column] = b.prevalence;
  }

  Draw Next() {
    Draw dr;
    dr.x.resize(config_.d);
    for (std::size_t j = 0; j < config_.d; ++j) {
      dr.x[j] = binary_[j] >= 0.0 ? (uniform_(rng_) < binary_[j] ? 1.0 : 0.0) : normal_(rng_);
    }
    double lp = config_.propensity_intercept;
    double eta = config_.outcome_intercept;
    for (std::size_t j = 0; j < config_.d; ++j) {
      lp += config_.overlap_strength * Coef(config_.propensity_coef, j) * dr.x[j];
      eta += Coef(config_.outcome_coef, j) * dr.x[j] +
             Coef(config_.outcome_quadratic, j) * dr.x[j] * dr.x[j];
    }
    dr.propensity = learners::Sigmoid(lp);
    if (config_.positivity_rule &&
        dr.x[config_.positivity_rule->column] > config_.positivity_rule->threshold) {
      dr.rule = true;
      dr.propensity = config_.positivity_rule->forced_arm == 1 ? 1.0 : 0.0;
    }
    dr.eta = eta;
    return dr;
  }

  double Uniform() { return uniform_(rng_); }
  double Normal() { return normal_(rng_); }

 private:
  const SynthConfig& config_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<double> binary_;
};

double PotentialOutcome(const SynthConfig& config, double eta, int arm) {
  const double v = eta + config.tau * arm;
  return config.outcome_kind == OutcomeKind::kBinary ? learners::Sigmoid(v) : v;
}

}  // namespace

void SynthConfig::Validate() const {
  if (n < 2) throw ConfigError(kModule, "n must be >= 2");
  if (d < 1) throw ConfigError(kModule, "d must be >= 1");
  auto check_len = [&](const std::vector<double>& v, const char* name) {
    if (!v.empty() && v.size() != d) {
      throw ConfigError(kModule, std::string(name) + " must have d entries");
    }
  };
  check_len(propensity_coef, "propensity_coef");
  check_len(outcome_coef, "outcome_coef");
  check_len(outcome_quadratic, "outcome_quadratic");
  for (const BinaryColumn& b : binary_columns) {
    if (b.column >= d) throw ConfigError(kModule, "binary column index out of range");
    if (!(b.prevalence >= 0.0 && b.prevalence <= 1.0)) {
      throw ConfigError(kModule, "binary prevalence must lie in [0, 1]");
    }
  }
  if (positivity_rule) {
    if (positivity_rule->column >= d) throw ConfigError(kModule, "rule column out of range");
    if (positivity_rule->forced_arm != 0 && positivity_rule->forced_arm != 1) {
      throw ConfigError(kModule, "forced_arm must be 0 or 1");
    }
  }
  if (!(noise_sd >= 0.0)) throw ConfigError(kModule, "noise_sd must be >= 0");
  if (!std::isfinite(overlap_strength)) throw ConfigError(kModule, "overlap_strength must be finite");
}

std::pair<CohortFrame, SynthOracle> Generate(const SynthConfig& config) {
  config.Validate();
  const std::size_t n = config.n;
  const std::size_t d = config.d;
  CohortFrame frame;
  frame.covariates.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) frame.covariate_names.push_back("x" + std::to_string(j + 1));
  frame.treatment.resize(n);
  frame.outcome.resize(n);
  frame.outcome_kind = config.outcome_kind;
  frame.treatment_levels = {0, 1};
  SynthOracle oracle;
  oracle.true_propensity.resize(n);
  oracle.y0.resize(n);
  oracle.y1.resize(n);
  oracle.rule_applied.resize(n);

  Sampler sampler(config, config.seed);
  double diff = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Draw dr = sampler.Next();
    for (std::size_t j = 0; j < d; ++j) {
      frame.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dr.x[j];
    }
    frame.sample_ids.push_back("s" + std::to_string(i));
    const double u = sampler.Uniform();
    const int a = u < dr.propensity ? 1 : 0;
    frame.treatment[i] = a;
    oracle.true_propensity[i] = dr.propensity;
    oracle.rule_applied[i] = dr.rule;
    oracle.y0[i] = PotentialOutcome(config, dr.eta, 0);
    oracle.y1[i] = PotentialOutcome(config, dr.eta, 1);
    diff += oracle.y1[i] - oracle.y0[i];
    const double mean_a = a == 1 ? oracle.y1[i] : oracle.y0[i];
    if (config.outcome_kind == OutcomeKind::kBinary) {
      frame.outcome[i] = sampler.Uniform() < mean_a ? 1.0 : 0.0;
    } else {
      frame.outcome[i] = mean_a + config.noise_sd * sampler.Normal();
    }
  }
  oracle.ate = diff / static_cast<double>(n);
  frame.Validate();
  return {std::move(frame), std::move(oracle)};
}

double OracleAte(const SynthOracle& oracle, const std::optional<Mask>& mask) {
  if (mask && mask->size() != oracle.y0.size()) {
    throw ParameterError(kModule, "mask length differs from oracle");
  }
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < oracle.y0.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    s += oracle.y1[i] - oracle.y0[i];
    ++count;
  }
  if (count == 0) throw EmptySubsetError(kModule, "oracle ATE over an empty selection");
  return s / static_cast<double>(count);
}

double PopulationAte(const SynthConfig& config, std::size_t draws, std::uint64_t seed) {
  config.Validate();
  if (config.outcome_kind == OutcomeKind::kContinuous) return config.tau;
  if (draws == 0) throw ParameterError(kModule, "draws must be > 0");
  Sampler sampler(config, seed);
  double s = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const Draw dr = sampler.Next();
    s += PotentialOutcome(config, dr.eta, 1) - PotentialOutcome(config, dr.eta, 0);
  }
  return s / static_cast<double>(draws);
}

double SolveTauForAte(SynthConfig config, double target_ate, std::size_t draws,
                      std::uint64_t seed) {
  if (config.outcome_kind == OutcomeKind::kContinuous) return target_ate;
  if (!(target_ate > -1.0 && target_ate < 1.0)) {
    throw ParameterError(kModule, "binary ATE target must lie in (-1, 1)");
  }
  double lo = target_ate >= 0.0 ? 0.0 : -40.0;
  double hi = target_ate >= 0.0 ? 40.0 : 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    config.tau = (lo + hi) / 2.0;
    if (PopulationAte(config, draws, seed) < target_ate) {
      lo = config.tau;
    } else {
      hi = config.tau;
    }
  }
  return (lo + hi) / 2.0;
}

void WriteOracleCsv(const CohortFrame& frame, const SynthOracle& oracle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(kModule, "cannot write \"" + path + "\"");
  out << "sample_id,true_propensity,y0,y1\n";
  for (std::size_t i = 0; i < frame.size(); ++i) {
    out << EscapeCsvField(frame.sample_ids[i]) << ',' << FormatDouble(oracle.true_propensity[i])
        << ',' << FormatDouble(oracle.y0[i]) << ',' << FormatDouble(oracle.y1[i]) << '\n';
  }
  if (!out) throw IoError(kModule, "write failed for \"" + path + "\"");
}

SynthConfig SynthConfigFromJson(const nlohmann::json& j) {
  SynthConfig c;
  if (!j.is_object()) throw ConfigError(kModule, "synth config must be a JSON object");
  try {
    c.n = j.value("n", c.n);
    c.d = j.value("d", c.d);
    c.propensity_coef = j.value("propensity_coef", c.propensity_coef);
    c.propensity_intercept = j.value("propensity_intercept", c.propensity_intercept);
    c.outcome_coef = j.value("outcome_coef", c.outcome_coef);
    c.outcome_quadratic = j.value("outcome_quadratic", c.outcome_quadratic);
    c.outcome_intercept = j.value("outcome_intercept", c.outcome_intercept);
    c.tau = j.value("tau", c.tau);
    c.noise_sd = j.value("noise_sd", c.noise_sd);
    c.overlap_strength = j.value("overlap_strength", c.overlap_strength);
    c.seed = j.value("seed", c.seed);
    const std::string kind = j.value("outcome_kind", std::string("binary"));
    if (kind == "binary") {
      c.outcome_kind = OutcomeKind::kBinary;
    } else if (kind == "continuous") {
      c.outcome_kind = OutcomeKind::kContinuous;
    } else {
      throw ConfigError(kModule, "outcome_kind must be \"binary\" or \"continuous\"");
    }
    if (j.contains("binary_columns")) {
      for (const auto& b : j.at("binary_columns")) {
        c.binary_columns.push_back({b.at("column").get<std::size_t>(), b.value("prevalence", 0.5)});
      }
    }
    if (j.contains("positivity_rule")) {
      const auto& r = j.at("positivity_rule");
      c.positivity_rule = PositivityRule{r.at("column").get<std::size_t>(),
                                         r.value("threshold", 0.0), r.value("forced_arm", 1)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(kModule, std::string("invalid synth config: ") + e.what());
  }
  c.Validate();
  return c;
}

nlohmann::json SynthConfigToJson(const SynthConfig& c) {
  nlohmann::json j;
  j["n"] = c.n;
  j["d"] = c.d;
  j["propensity_coef"] = c.propensity_coef;
  j["propensity_intercept"] = c.propensity_intercept;
  j["outcome_coef"] = c.outcome_coef;
  j["outcome_quadratic"] = c.outcome_quadratic;
  j["outcome_intercept"] = c.outcome_intercept;
  j["tau"] = c.tau;
  j["outcome_kind"] = ToString(c.outcome_kind);
  j["noise_sd"] = c.noise_sd;
  j["overlap_strength"] = c.overlap_strength;
  j["seed"] = c.seed;
  j["binary_columns"] = nlohmann::json::array();
  for (const BinaryColumn& b : c.binary_columns) {
    j["binary_columns"].push_back({{"column", b.column}, {"prevalence", b.prevalence}});
  }
  if (c.positivity_rule) {
    j["positivity_rule"] = {{"column", c.positivity_rule->column},
                            {"threshold", c.positivity_rule->threshold},
                            {"forced_arm", c.positivity_rule->forced_arm}};
  }
  return j;
}

}  // namespace cek::synth
