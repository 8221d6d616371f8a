#ifndef CEK_REPORT_CONFIG_H_
#define CEK_REPORT_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cek/causal/doubly_robust.h"
#include "cek/core_data.h"
#include "cek/eval/bundle.h"
#include "cek/learners/learner.h"

namespace cek::report {

struct FoldConfig {
  int k = 5;
  std::uint64_t seed = 0;
  bool stratified = true;
};

// column <op> value with op one of > >= < <= == !=.
struct SubsetPredicate {
  std::string column;
  std::string op;
  double value = 0.0;
};

struct NamedSubset {
  std::string name;
  std::vector<SubsetPredicate> predicates;  // combined with AND
};

struct PipelineConfig {
  std::string input_path;
  CohortSchema schema;
  eval::CausalMethod method = eval::CausalMethod::kIpw;
  learners::LearnerSpec propensity_learner;
  std::optional<learners::LearnerSpec> outcome_learner;
  eval::WeightingOptions weighting;
  causal::CounterfactualFeature counterfactual_feature =
      causal::CounterfactualFeature::kPredictedArm;
  Phase effect_phase = Phase::kTrain;
  FoldConfig folds;
  eval::EvaluationOptions evaluation;
  std::vector<NamedSubset> subsets;
  std::string output_dir;  // empty when not given in the file
  // The parsed document; the manifest hash is taken over its canonical dump.
  nlohmann::json source;
};

// Relative input paths are resolved against base_dir. Throws ConfigError for
// malformed documents and incompatible method/learner combinations.
PipelineConfig ParsePipelineConfig(const nlohmann::json& j, const std::string& base_dir = "");
PipelineConfig LoadPipelineConfig(const std::string& path);

// Samples satisfying every predicate. Unknown columns throw SchemaError.
Mask SubsetMask(const CohortFrame& frame, const std::vector<SubsetPredicate>& predicates);

// Key-sorted compact dump, identical for equal documents.
std::string CanonicalJson(const nlohmann::json& j);

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view data);

}  // namespace cek::report

#endif  // CEK_REPORT_CONFIG_H_
