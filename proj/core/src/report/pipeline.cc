#include "cek/report/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "cek/error.h"
#include "cek/log.h"
#include "cek/report/csv.h"
#include "cek/report/figures.h"
#include "cek/text.h"

#ifndef CEK_VERSION
#define CEK_VERSION "0.0.0"
#endif

namespace cek::report {
namespace {

constexpr const char* kModule = "reporting_cli";

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<eval::MetricsRecord> Concat(const std::vector<eval::MetricsRecord>& a,
                                        const std::vector<eval::MetricsRecord>& b) {
  std::vector<eval::MetricsRecord> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

nlohmann::json AteJson(const causal::AteEstimate& ate, Phase phase) {
  nlohmann::json j;
  j["phase"] = ToString(phase);
  j["estimate"] = JsonNumber(ate.ate);
  j["per_fold"] = nlohmann::json::array();
  for (double v : ate.per_fold) j["per_fold"].push_back(JsonNumber(v));
  j["fold_std"] = JsonNumber(ate.fold_std);
  return j;
}

std::optional<causal::AteEstimate> PhaseAte(const eval::DiagnosticBundle& b, Phase phase) {
  const eval::PhaseDiagnostics& d = b.Get(phase);
  if (!d.outcome) return std::nullopt;
  return d.outcome->ate;
}

nlohmann::json BundleSummary(const eval::DiagnosticBundle& b) {
  nlohmann::json j;
  j["selected"] = b.selected;
  j["total"] = b.total;
  j["annotations"] = b.annotations;
  for (const eval::PhaseDiagnostics* d : {&b.train, &b.validation}) {
    nlohmann::json p;
    p["flagged_covariates"] = d->balance.Flagged();
    double max_weighted = 0.0;
    for (const eval::CovariateBalance& c : d->balance.covariates) {
      max_weighted = std::max(max_weighted, c.mean_weighted);
    }
    p["max_weighted_smd"] = JsonNumber(max_weighted);
    p["propensity_auc"] = d->propensity_roc.summary_mean
                              ? JsonNumber(*d->propensity_roc.summary_mean)
                              : nlohmann::json();
    p["propensity_auc_std"] = JsonNumber(d->propensity_roc.summary_std);
    p["weighted_auc"] = d->weighted_roc.summary_mean ? JsonNumber(*d->weighted_roc.summary_mean)
                                                     : nlohmann::json();
    p["weighted_auc_std"] = JsonNumber(d->weighted_roc.summary_std);
    p["positivity_flagged_fraction"] = JsonNumber(d->positivity.fraction_flagged);
    if (d->outcome) {
      p["ignorability_violation_score"] = JsonNumber(d->outcome->ignorability.violation_score);
      p["ate"] = AteJson(d->outcome->ate, d->phase);
    }
    j[ToString(d->phase)] = p;
  }
  return j;
}

// Out-of-fold weights: each sample weighted by its validation fold's view.
causal::WeightVector OutOfFoldWeights(const eval::DiagnosticBundle& b, std::size_t n,
                                      std::vector<int>* fold_of) {
  causal::WeightVector w;
  w.weights.assign(n, 0.0);
  fold_of->assign(n, -1);
  for (const eval::FoldView& v : b.validation.folds) {
    w.kind = v.weights.kind;
    w.truncation = v.weights.truncation;
    w.clipped += v.weights.clipped;
    w.truncated += v.weights.truncated;
    w.matched_pairs += v.weights.matched_pairs;
    for (std::size_t r = 0; r < v.rows.size(); ++r) {
      w.weights[v.rows[r]] = v.weights.weights[r];
      (*fold_of)[v.rows[r]] = v.fold;
    }
  }
  return w;
}

// Writes the per-bundle report files under `dir` and returns their paths.
std::vector<std::string> WriteBundle(const eval::DiagnosticBundle& b, const CohortFrame& frame,
                                     const std::string& dir) {
  std::vector<std::string> files;
  WriteMetricsCsv(Concat(b.train.propensity_metrics, b.validation.propensity_metrics),
                  MetricsKind::kPropensity, dir + "/metrics_propensity.csv");
  files.push_back(dir + "/metrics_propensity.csv");
  if (b.train.outcome && b.validation.outcome) {
    WriteMetricsCsv(Concat(b.train.outcome->metrics, b.validation.outcome->metrics),
                    MetricsKind::kOutcome, dir + "/metrics_outcome.csv");
    files.push_back(dir + "/metrics_outcome.csv");
  }
  WriteSmdCsv(b.train.balance, b.validation.balance, frame.treatment_name, frame.outcome_name,
              dir + "/smd.csv");
  files.push_back(dir + "/smd.csv");

  std::vector<int> fold_of;
  const causal::WeightVector w = OutOfFoldWeights(b, frame.size(), &fold_of);
  std::vector<std::string> ids;
  std::vector<int> folds;
  causal::WeightVector selected = w;
  selected.weights.clear();
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (fold_of[i] < 0) continue;
    ids.push_back(frame.sample_ids[i]);
    folds.push_back(fold_of[i]);
    selected.weights.push_back(w.weights[i]);
  }
  std::filesystem::create_directories(dir);
  causal::WriteWeightsCsv(dir + "/weights.csv", ids, folds, selected);
  files.push_back(dir + "/weights.csv");

  const std::vector<std::string> figs = WriteFigures(BuildFigures(b), dir + "/figures");
  files.insert(files.end(), figs.begin(), figs.end());
  return files;
}

}  // namespace

std::string ResolveOutputDir(const PipelineConfig& config, const RunOptions& options) {
  if (options.output_dir && !options.output_dir->empty()) return *options.output_dir;
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* env = std::getenv(kOutputEnvVar); env != nullptr && *env != '\0') return env;
  return kDefaultOutputDir;
}

RunResult Execute(const PipelineConfig& config, const RunOptions& options) {
  RunResult result;
  result.output_dir = ResolveOutputDir(config, options);
  result.frame = LoadCohort(config.input_path, config.schema);
  const CohortFrame& frame = result.frame;
  if (frame.num_arms() != 2) {
    throw ParameterError(kModule, "causal methods require a binary treatment");
  }
  const std::uint64_t seed = options.seed.value_or(config.folds.seed);
  const FoldPlan folds = MakeFolds(frame.size(), config.folds.k, seed, frame.treatment,
                                   config.folds.stratified);

  eval::TrainedArtifacts& art = result.artifacts;
  art.method = config.method;
  art.weighting = config.weighting;
  art.propensity = causal::FitPropensity(frame, config.propensity_learner, folds, seed);
  if (config.outcome_learner) {
    causal::OutcomeModelOptions opts;
    opts.learner = *config.outcome_learner;
    opts.counterfactual_feature = config.counterfactual_feature;
    opts.epsilon = config.weighting.ipw.epsilon;
    art.outcome = causal::FitDoublyRobust(frame, art.propensity, opts, seed);
  }
  result.bundle = eval::EvaluateAll(art, frame, config.evaluation);
  result.ate = PhaseAte(result.bundle, config.effect_phase);

  if (options.subset) {
    const auto it = std::find_if(config.subsets.begin(), config.subsets.end(),
                                 [&](const NamedSubset& s) { return s.name == *options.subset; });
    if (it == config.subsets.end()) {
      throw ConfigError(kModule, "unknown subset \"" + *options.subset + "\"");
    }
  }
  for (const NamedSubset& s : config.subsets) {
    if (options.subset && s.name != *options.subset) continue;
    const Mask mask = SubsetMask(frame, s.predicates);
    SubsetResult sub;
    sub.name = s.name;
    sub.bundle = eval::EvaluateSubset(art, frame, mask, s.name, config.evaluation);
    sub.ate = PhaseAte(sub.bundle, config.effect_phase);
    result.subsets.push_back(std::move(sub));
  }
  return result;
}

RunResult RunPipeline(const PipelineConfig& config, const RunOptions& options) {
  RunResult result = Execute(config, options);
  const std::string& out = result.output_dir;
  std::filesystem::create_directories(out);
  std::vector<std::string> files = WriteBundle(result.bundle, result.frame, out);

  nlohmann::json subsets = nlohmann::json::object();
  for (const SubsetResult& s : result.subsets) {
    const std::string dir = out + "/subsets/" + s.name;
    const std::vector<std::string> sub_files = WriteBundle(s.bundle, result.frame, dir);
    files.insert(files.end(), sub_files.begin(), sub_files.end());
    nlohmann::json summary = BundleSummary(s.bundle);
    if (s.ate) summary["effect"] = AteJson(*s.ate, config.effect_phase);
    WriteTextFile(dir + "/summary.json", summary.dump(1) + "\n");
    files.push_back(dir + "/summary.json");
    subsets[s.name] = summary;
  }

  for (std::string& f : files) f = std::filesystem::relative(f, out).generic_string();
  std::sort(files.begin(), files.end());

  nlohmann::json manifest;
  manifest["tool"] = "cek";
  manifest["version"] = CEK_VERSION;
  manifest["config_hash"] = "fnv1a64:" + Hex(Fnv1a64(CanonicalJson(config.source)));
  manifest["seed"] = options.seed.value_or(config.folds.seed);
  manifest["folds"] = {{"k", config.folds.k}, {"stratified", config.folds.stratified}};
  manifest["method"] = eval::ToString(config.method);
  manifest["float_format"] = "shortest round-trip decimal; inf/-inf/nan spelled out";
  manifest["cohort"] = {{"n", result.frame.size()},
                        {"covariates", result.frame.dims()},
                        {"treatment", result.frame.treatment_name},
                        {"outcome", result.frame.outcome_name},
                        {"outcome_kind", ToString(result.frame.outcome_kind)},
                        {"treatment_levels", result.frame.treatment_levels}};
  manifest["metrics_columns"] = {{"propensity", MetricsCsvColumns(MetricsKind::kPropensity)},
                                 {"outcome", MetricsCsvColumns(MetricsKind::kOutcome)}};
  manifest["smd_columns"] = SmdCsvColumns(config.folds.k);
  manifest["summary"] = BundleSummary(result.bundle);
  if (result.ate) manifest["effect"] = AteJson(*result.ate, config.effect_phase);
  manifest["subsets"] = subsets;
  files.push_back("manifest.json");
  std::sort(files.begin(), files.end());
  manifest["files"] = files;
  WriteTextFile(out + "/manifest.json", manifest.dump(1) + "\n");
  result.files = files;
  return result;
}

}  // namespace cek::report
