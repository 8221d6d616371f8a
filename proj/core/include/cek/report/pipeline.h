#ifndef CEK_REPORT_PIPELINE_H_
#define CEK_REPORT_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cek/causal/doubly_robust.h"
#include "cek/eval/bundle.h"
#include "cek/report/config.h"

namespace cek::report {

inline constexpr const char* kOutputEnvVar = "CEK_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "cek_output";

struct RunOptions {
  std::optional<std::string> output_dir;     // --output
  std::optional<std::uint64_t> seed;         // --seed-override
  std::optional<std::string> subset;         // --subset: evaluate only this named subset
};

struct SubsetResult {
  std::string name;
  eval::DiagnosticBundle bundle;
  std::optional<causal::AteEstimate> ate;
};

struct RunResult {
  std::string output_dir;
  CohortFrame frame;
  eval::TrainedArtifacts artifacts;
  eval::DiagnosticBundle bundle;
  std::optional<causal::AteEstimate> ate;
  std::vector<SubsetResult> subsets;
  std::vector<std::string> files;  // relative to output_dir, sorted
};

// --output, then the config's output_dir, then $CEK_OUTPUT_DIR, then
// ./cek_output.
std::string ResolveOutputDir(const PipelineConfig& config, const RunOptions& options);

// Fits and evaluates without writing anything.
RunResult Execute(const PipelineConfig& config, const RunOptions& options = {});

// Execute followed by the report files:
//   metrics_propensity.csv, metrics_outcome.csv (outcome models only),
//   smd.csv, weights.csv, figures/*.{json,svg}, manifest.json and
//   subsets/<name>/... for every evaluated subset.
RunResult RunPipeline(const PipelineConfig& config, const RunOptions& options = {});

}  // namespace cek::report

#endif  // CEK_REPORT_PIPELINE_H_
