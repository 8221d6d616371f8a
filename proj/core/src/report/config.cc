#include "cek/report/config.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cek/error.h"

namespace cek::report {
namespace {

constexpr const char* kModule = "reporting_cli";

learners::LearnerSpec ParseLearner(const nlohmann::json& j, const char* key) {
  try {
    return learners::LearnerSpecFromJson(j);
  } catch (const ConfigError& e) {
    throw ConfigError(kModule, std::string(key) + ": " + e.what());
  }
}

std::pair<double, double> ParseBounds(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(kModule, "weighting.truncation must be [w_min, w_max]");
  }
  const double lo = j[0].get<double>();
  const double hi = j[1].get<double>();
  if (!(lo >= 0.0 && hi >= lo)) throw ConfigError(kModule, "weighting.truncation needs 0 <= w_min <= w_max");
  return {lo, hi};
}

}  // namespace

PipelineConfig ParsePipelineConfig(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError(kModule, "config must be a JSON object");
  PipelineConfig c;
  c.source = j;
  c.propensity_learner.calibration = learners::CalibrationMethod::kIsotonic;
  try {
    const nlohmann::json& in = j.at("input");
    std::filesystem::path path = in.at("path").get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
    c.input_path = path.string();
    c.schema.treatment_col = in.at("treatment_col").get<std::string>();
    c.schema.outcome_col = in.at("outcome_col").get<std::string>();
    c.schema.id_col = in.value("id_col", std::string());
    const nlohmann::json& cov = in.contains("covariate_cols") ? in.at("covariate_cols")
                                                              : nlohmann::json("rest");
    if (cov.is_string()) {
      if (cov.get<std::string>() != "rest") {
        throw ConfigError(kModule, "input.covariate_cols must be a list or \"rest\"");
      }
      c.schema.covariates_rest = true;
    } else {
      c.schema.covariate_cols = cov.get<std::vector<std::string>>();
      if (c.schema.covariate_cols.empty()) {
        throw ConfigError(kModule, "input.covariate_cols is empty");
      }
    }
    if (in.contains("outcome_kind")) {
      const std::string kind = in.at("outcome_kind").get<std::string>();
      if (kind == "binary") {
        c.schema.outcome_kind = OutcomeKind::kBinary;
      } else if (kind == "continuous") {
        c.schema.outcome_kind = OutcomeKind::kContinuous;
      } else {
        throw ConfigError(kModule, "input.outcome_kind must be \"binary\" or \"continuous\"");
      }
    }

    c.method = eval::ParseCausalMethod(j.value("method", std::string("ipw")));
    if (j.contains("propensity_learner")) {
      nlohmann::json pl = j.at("propensity_learner");
      if (pl.is_object() && !pl.contains("calibration")) pl["calibration"] = "isotonic";
      c.propensity_learner = ParseLearner(pl, "propensity_learner");
    }
    if (j.contains("outcome_learner")) {
      c.outcome_learner = ParseLearner(j.at("outcome_learner"), "outcome_learner");
    }
    if (c.method == eval::CausalMethod::kDoublyRobust && !c.outcome_learner) {
      throw ConfigError(kModule, "method doubly_robust requires an outcome_learner");
    }

    if (j.contains("weighting")) {
      const nlohmann::json& w = j.at("weighting");
      c.weighting.ipw.stabilized = w.value("stabilized", false);
      c.weighting.ipw.epsilon = w.value("epsilon", c.weighting.ipw.epsilon);
      if (w.contains("truncation") && !w.at("truncation").is_null()) {
        c.weighting.ipw.truncation = ParseBounds(w.at("truncation"));
      }
      c.weighting.caliper = w.value("caliper", c.weighting.caliper);
      if (!(c.weighting.ipw.epsilon > 0.0 && c.weighting.ipw.epsilon < 0.5)) {
        throw ConfigError(kModule, "weighting.epsilon must lie in (0, 0.5)");
      }
      if (!(c.weighting.caliper >= 0.0)) throw ConfigError(kModule, "weighting.caliper must be >= 0");
    }
    c.counterfactual_feature = causal::ParseCounterfactualFeature(
        j.value("counterfactual_feature", std::string("predicted_arm")));
    const std::string effect_phase = j.value("effect_phase", std::string("train"));
    if (effect_phase == "train") {
      c.effect_phase = Phase::kTrain;
    } else if (effect_phase == "validation") {
      c.effect_phase = Phase::kValidation;
    } else {
      throw ConfigError(kModule, "effect_phase must be \"train\" or \"validation\"");
    }

    if (j.contains("folds")) {
      const nlohmann::json& f = j.at("folds");
      c.folds.k = f.value("k", c.folds.k);
      c.folds.seed = f.value("seed", c.folds.seed);
      c.folds.stratified = f.value("stratified", c.folds.stratified);
      if (c.folds.k < 2) throw ConfigError(kModule, "folds.k must be >= 2");
    }

    if (j.contains("evaluation")) {
      const nlohmann::json& e = j.at("evaluation");
      eval::EvaluationOptions& o = c.evaluation;
      o.calibration.strategy =
          eval::ParseBinStrategy(e.value("calibration_strategy", std::string("quantile")));
      o.calibration.bins = e.value("calibration_bins", o.calibration.bins);
      o.calibration.window_width = e.value("calibration_window", o.calibration.window_width);
      o.calibration.window_stride = e.value("calibration_stride", o.calibration.window_stride);
      if (o.calibration.strategy == eval::BinStrategy::kWindow && o.calibration.window_width == 0) {
        throw ConfigError(kModule, "evaluation.calibration_window is required for the window strategy");
      }
      o.distribution.mode = eval::ParseDistributionMode(
          e.value("distribution_mode", std::string(eval::ToString(o.distribution.mode))));
      o.distribution.bins = e.value("distribution_bins", o.distribution.bins);
      o.distribution.min_count = e.value("min_count", o.distribution.min_count);
      o.ignorability.grid = e.value("grid", o.ignorability.grid);
      o.ignorability.min_cell = e.value("min_cell", o.ignorability.min_cell);
      o.smd_threshold = e.value("smd_threshold", o.smd_threshold);
      o.grid_points = e.value("grid_points", o.grid_points);
      o.residual_mode = e.value("residual_mode", o.residual_mode);
      if (o.calibration.bins < 1 || o.distribution.bins < 1 || o.ignorability.grid < 1 ||
          o.grid_points < 2) {
        throw ConfigError(kModule, "evaluation bin and grid sizes must be positive");
      }
    }

    if (j.contains("subsets")) {
      for (const auto& [name, preds] : j.at("subsets").items()) {
        NamedSubset s;
        s.name = name;
        for (const auto& p : preds) {
          SubsetPredicate pred{p.at("column").get<std::string>(), p.at("op").get<std::string>(),
                               p.at("value").get<double>()};
          static const char* kOps[] = {">", ">=", "<", "<=", "==", "!="};
          if (std::find(std::begin(kOps), std::end(kOps), pred.op) == std::end(kOps)) {
            throw ConfigError(kModule, "subset \"" + name + "\": unknown operator \"" + pred.op + "\"");
          }
          s.predicates.push_back(std::move(pred));
        }
        c.subsets.push_back(std::move(s));
      }
    }
    c.output_dir = j.value("output_dir", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(kModule, std::string("invalid config: ") + e.what());
  }
  return c;
}

PipelineConfig LoadPipelineConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, "cannot read config \"" + path + "\"");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(kModule, "config \"" + path + "\" is not valid JSON: " + e.what());
  }
  return ParsePipelineConfig(j, std::filesystem::path(path).parent_path().string());
}

Mask SubsetMask(const CohortFrame& frame, const std::vector<SubsetPredicate>& predicates) {
  Mask mask(frame.size(), true);
  for (const SubsetPredicate& p : predicates) {
    const std::optional<std::size_t> col = frame.CovariateIndex(p.column);
    if (!col) throw SchemaError(kModule, "subset column \"" + p.column + "\" is not a covariate");
    for (std::size_t i = 0; i < frame.size(); ++i) {
      const double v = frame.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*col));
      bool keep = false;
      if (p.op == ">") keep = v > p.value;
      else if (p.op == ">=") keep = v >= p.value;
      else if (p.op == "<") keep = v < p.value;
      else if (p.op == "<=") keep = v <= p.value;
      else if (p.op == "==") keep = v == p.value;
      else if (p.op == "!=") keep = v != p.value;
      else throw ConfigError(kModule, "unknown operator \"" + p.op + "\"");
      mask[i] = mask[i] && keep;
    }
  }
  return mask;
}

std::string CanonicalJson(const nlohmann::json& j) { return j.dump(); }

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cek::report
