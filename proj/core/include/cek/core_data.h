#ifndef CEK_CORE_DATA_H_
#define CEK_CORE_DATA_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cek {

enum class OutcomeKind { kBinary, kContinuous };

const char* ToString(OutcomeKind kind);

// Which rows of a fold a quantity is computed on: the rows the fold's models
// were trained on, or the held-out rows.
enum class Phase { kTrain, kValidation };

const char* ToString(Phase phase);

// Per-sample boolean selector.
using Mask = std::vector<bool>;

// Covariates X, treatment A and outcome Y for n samples.
//
// Treatment labels are dense in {0..K-1}. Raw treatment values are remapped in
// ascending order, so for a binary treatment the larger raw value becomes 1.
struct CohortFrame {
  std::vector<std::string> sample_ids;
  Eigen::MatrixXd covariates;  // n x d
  std::vector<std::string> covariate_names;
  std::vector<int> treatment;
  std::vector<double> outcome;
  OutcomeKind outcome_kind = OutcomeKind::kBinary;

  std::string treatment_name = "treatment";
  std::string outcome_name = "outcome";
  // treatment_levels[k] is the raw value that was mapped to label k.
  std::vector<std::int64_t> treatment_levels;

  std::size_t size() const { return treatment.size(); }
  std::size_t dims() const { return covariate_names.size(); }
  int num_arms() const { return static_cast<int>(treatment_levels.size()); }

  // Sample counts per treatment label.
  std::vector<std::size_t> ArmCounts() const;

  // Index of a covariate by name, or nullopt.
  std::optional<std::size_t> CovariateIndex(const std::string& name) const;

  // Throws DegenerateCohortError / ParameterError if the invariants are
  // violated: consistent lengths, finite values, >= 2 observed arms, binary
  // outcomes exactly 0 or 1.
  void Validate() const;
};

// Column-role mapping for LoadCohort.
struct CohortSchema {
  std::string treatment_col;
  std::string outcome_col;
  // Covariate columns in the order they should appear. Ignored when
  // covariates_rest is set.
  std::vector<std::string> covariate_cols;
  // Use every column that is not the id, treatment or outcome column, in file
  // order.
  bool covariates_rest = false;
  // Optional identifier column; row numbers are used when empty.
  std::string id_col;
  // Detected from the data (all values 0/1 -> binary) when unset.
  std::optional<OutcomeKind> outcome_kind;
};

// Reads a header-first, comma separated UTF-8 file. Missing or non-numeric
// cells are rejected.
CohortFrame LoadCohort(const std::string& path, const CohortSchema& schema);

// Same as LoadCohort for CSV text already in memory.
CohortFrame ParseCohortCsv(const std::string& text, const CohortSchema& schema);

void WriteCohortCsv(const CohortFrame& frame, const std::string& path);

// Assignment of each sample to one of k cross-validation folds.
struct FoldPlan {
  std::vector<int> fold_of;
  int k = 0;
  std::uint64_t seed = 0;
  bool stratified = false;

  std::size_t size() const { return fold_of.size(); }
  std::vector<std::size_t> TrainRows(int fold) const;
  std::vector<std::size_t> ValidationRows(int fold) const;
  std::vector<std::size_t> FoldSizes() const;
};

// Deterministic for fixed (n, k, seed, treatment). Stratified plans keep each
// arm's per-fold count within one sample of arm_total / k.
FoldPlan MakeFolds(std::size_t n, int k, std::uint64_t seed,
                   std::span<const int> treatment, bool stratified);

// Rows where mask is true, preserving order and column layout. Throws
// EmptySubsetError when nothing is selected; warns when an arm disappears.
CohortFrame Subset(const CohortFrame& frame, const Mask& mask);

// Row indices selected by a mask.
std::vector<std::size_t> MaskToRows(const Mask& mask);

}  // namespace cek

#endif  // CEK_CORE_DATA_H_
