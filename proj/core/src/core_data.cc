#include "cek/core_data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "cek/error.h"
#include "cek/log.h"
#include "cek/text.h"

namespace cek {
namespace {

constexpr const char* kModule = "core_data";

std::vector<std::string> ReadLines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  // Trailing blank lines are not data rows.
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::size_t FindColumn(const std::vector<std::string>& header,
                       const std::string& name, const char* role) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw SchemaError(kModule, std::string("schema error: ") + role +
                                   " column \"" + name + "\" not found");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

const char* ToString(OutcomeKind kind) {
  return kind == OutcomeKind::kBinary ? "binary" : "continuous";
}

const char* ToString(Phase phase) {
  return phase == Phase::kTrain ? "train" : "validation";
}

std::vector<std::size_t> CohortFrame::ArmCounts() const {
  std::vector<std::size_t> counts(treatment_levels.size(), 0);
  for (int a : treatment) {
    if (a >= 0 && static_cast<std::size_t>(a) < counts.size()) ++counts[a];
  }
  return counts;
}

std::optional<std::size_t> CohortFrame::CovariateIndex(
    const std::string& name) const {
  auto it = std::find(covariate_names.begin(), covariate_names.end(), name);
  if (it == covariate_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - covariate_names.begin());
}

void CohortFrame::Validate() const {
  const std::size_t n = treatment.size();
  if (outcome.size() != n || sample_ids.size() != n ||
      static_cast<std::size_t>(covariates.rows()) != n ||
      static_cast<std::size_t>(covariates.cols()) != covariate_names.size()) {
    throw ParameterError(kModule, "inconsistent cohort dimensions");
  }
  if (!covariates.allFinite()) {
    throw ParameterError(kModule, "covariates contain non-finite values");
  }
  const int k = num_arms();
  if (k < 2) {
    throw DegenerateCohortError(
        kModule, "degenerate cohort: treatment has fewer than 2 levels");
  }
  std::vector<std::size_t> counts = ArmCounts();
  for (int a : treatment) {
    if (a < 0 || a >= k) {
      throw ParameterError(kModule, "treatment label out of range");
    }
  }
  for (int a = 0; a < k; ++a) {
    if (counts[a] == 0) {
      throw DegenerateCohortError(
          kModule, "degenerate cohort: treatment level " + std::to_string(a) +
                       " has no samples");
    }
  }
  for (double y : outcome) {
    if (!std::isfinite(y)) {
      throw ParameterError(kModule, "outcome contains non-finite values");
    }
    if (outcome_kind == OutcomeKind::kBinary && y != 0.0 && y != 1.0) {
      throw ParameterError(kModule, "binary outcome must be exactly 0 or 1");
    }
  }
}

CohortFrame ParseCohortCsv(const std::string& text, const CohortSchema& schema) {
  const std::vector<std::string> lines = ReadLines(text);
  if (lines.empty()) throw SchemaError(kModule, "schema error: missing header row");
  std::vector<std::string> header = SplitCsvLine(lines[0]);
  for (auto& h : header) h = std::string(Trim(h));
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    header[0].erase(0, 3);
  }

  if (schema.treatment_col.empty() || schema.outcome_col.empty()) {
    throw SchemaError(kModule,
                      "schema error: treatment_col and outcome_col are required");
  }
  const std::size_t a_col = FindColumn(header, schema.treatment_col, "treatment");
  const std::size_t y_col = FindColumn(header, schema.outcome_col, "outcome");
  std::optional<std::size_t> id_col;
  if (!schema.id_col.empty()) id_col = FindColumn(header, schema.id_col, "id");

  std::vector<std::size_t> x_cols;
  std::vector<std::string> x_names;
  if (schema.covariates_rest) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == a_col || c == y_col || (id_col && c == *id_col)) continue;
      x_cols.push_back(c);
      x_names.push_back(header[c]);
    }
  } else {
    for (const auto& name : schema.covariate_cols) {
      x_cols.push_back(FindColumn(header, name, "covariate"));
      x_names.push_back(name);
    }
  }
  if (x_cols.empty()) {
    throw SchemaError(kModule, "schema error: at least one covariate column is required");
  }

  const std::size_t n = lines.size() - 1;
  CohortFrame frame;
  frame.covariate_names = x_names;
  frame.covariates.resize(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(x_cols.size()));
  frame.outcome.resize(n);
  frame.sample_ids.resize(n);
  frame.treatment_name = schema.treatment_col;
  frame.outcome_name = schema.outcome_col;
  std::vector<double> raw_treatment(n);

  auto parse_cell = [&](const std::vector<std::string>& fields, std::size_t row,
                        std::size_t col) {
    if (col >= fields.size() || Trim(fields[col]).empty()) {
      throw IngestionError(row, header[col], "missing value");
    }
    std::optional<double> v = ParseDouble(fields[col]);
    if (!v || !std::isfinite(*v)) {
      throw IngestionError(row, header[col],
                           "non-numeric value \"" + fields[col] + "\"");
    }
    return *v;
  };

  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t row = r + 1;
    const std::vector<std::string> fields = SplitCsvLine(lines[r + 1]);
    if (fields.size() > header.size()) {
      throw IngestionError(row, header.back(), "too many fields");
    }
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      frame.covariates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          parse_cell(fields, row, x_cols[j]);
    }
    const double a = parse_cell(fields, row, a_col);
    if (a != std::floor(a)) {
      throw IngestionError(row, header[a_col], "treatment must be an integer");
    }
    raw_treatment[r] = a;
    frame.outcome[r] = parse_cell(fields, row, y_col);
    if (id_col) {
      if (*id_col >= fields.size() || Trim(fields[*id_col]).empty()) {
        throw IngestionError(row, header[*id_col], "missing value");
      }
      frame.sample_ids[r] = std::string(Trim(fields[*id_col]));
    } else {
      frame.sample_ids[r] = std::to_string(r);
    }
  }

  std::map<std::int64_t, int> levels;
  for (double a : raw_treatment) levels.emplace(static_cast<std::int64_t>(a), 0);
  if (levels.size() < 2) {
    throw DegenerateCohortError(
        kModule, "degenerate cohort: treatment column \"" + schema.treatment_col +
                     "\" has fewer than 2 distinct values");
  }
  int label = 0;
  for (auto& [raw, mapped] : levels) {
    mapped = label++;
    frame.treatment_levels.push_back(raw);
  }
  frame.treatment.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    frame.treatment[r] = levels.at(static_cast<std::int64_t>(raw_treatment[r]));
  }

  if (schema.outcome_kind) {
    frame.outcome_kind = *schema.outcome_kind;
    if (frame.outcome_kind == OutcomeKind::kBinary) {
      for (std::size_t r = 0; r < n; ++r) {
        if (frame.outcome[r] != 0.0 && frame.outcome[r] != 1.0) {
          throw IngestionError(r + 1, schema.outcome_col,
                               "binary outcome must be 0 or 1");
        }
      }
    }
  } else {
    const bool binary = std::all_of(frame.outcome.begin(), frame.outcome.end(),
                                    [](double y) { return y == 0.0 || y == 1.0; });
    frame.outcome_kind = binary ? OutcomeKind::kBinary : OutcomeKind::kContinuous;
  }
  frame.Validate();
  return frame;
}

CohortFrame LoadCohort(const std::string& path, const CohortSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, "cannot open \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseCohortCsv(buffer.str(), schema);
}

void WriteCohortCsv(const CohortFrame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(kModule, "cannot write \"" + path + "\"");
  out << "sample_id";
  for (const auto& name : frame.covariate_names) out << ',' << EscapeCsvField(name);
  out << ',' << EscapeCsvField(frame.treatment_name) << ','
      << EscapeCsvField(frame.outcome_name) << '\n';
  for (std::size_t i = 0; i < frame.size(); ++i) {
    out << EscapeCsvField(frame.sample_ids[i]);
    for (Eigen::Index j = 0; j < frame.covariates.cols(); ++j) {
      out << ',' << FormatDouble(frame.covariates(static_cast<Eigen::Index>(i), j));
    }
    out << ',' << frame.treatment_levels[frame.treatment[i]] << ','
        << FormatDouble(frame.outcome[i]) << '\n';
  }
  if (!out) throw IoError(kModule, "write failed for \"" + path + "\"");
}

std::vector<std::size_t> FoldPlan::TrainRows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::ValidationRows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::FoldSizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int f : fold_of) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldPlan MakeFolds(std::size_t n, int k, std::uint64_t seed,
                   std::span<const int> treatment, bool stratified) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw ParameterError(kModule, "make_folds requires 2 <= k <= n (k=" +
                                      std::to_string(k) +
                                      ", n=" + std::to_string(n) + ")");
  }
  if (stratified && treatment.size() != n) {
    throw ParameterError(kModule, "stratified folds need one treatment label per sample");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = stratified;
  plan.fold_of.assign(n, -1);

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    int max_label = 0;
    for (int a : treatment) max_label = std::max(max_label, a);
    groups.resize(static_cast<std::size_t>(max_label) + 1);
    for (std::size_t i = 0; i < n; ++i) {
      groups[static_cast<std::size_t>(treatment[i])].push_back(i);
    }
  } else {
    groups.emplace_back(n);
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }
  // Round-robin continues across groups so overall fold sizes also differ by
  // at most one.
  std::size_t cursor = 0;
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng);
    for (std::size_t idx : group) {
      plan.fold_of[idx] = static_cast<int>(cursor % static_cast<std::size_t>(k));
      ++cursor;
    }
  }
  return plan;
}

std::vector<std::size_t> MaskToRows(const Mask& mask) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) rows.push_back(i);
  }
  return rows;
}

CohortFrame Subset(const CohortFrame& frame, const Mask& mask) {
  if (mask.size() != frame.size()) {
    throw ParameterError(kModule, "mask length " + std::to_string(mask.size()) +
                                      " does not match cohort size " +
                                      std::to_string(frame.size()));
  }
  const std::vector<std::size_t> rows = MaskToRows(mask);
  if (rows.empty()) throw EmptySubsetError(kModule, "empty subset: mask selects no samples");

  CohortFrame out;
  out.covariate_names = frame.covariate_names;
  out.outcome_kind = frame.outcome_kind;
  out.treatment_name = frame.treatment_name;
  out.outcome_name = frame.outcome_name;
  out.treatment_levels = frame.treatment_levels;
  out.covariates.resize(static_cast<Eigen::Index>(rows.size()), frame.covariates.cols());
  out.sample_ids.reserve(rows.size());
  out.treatment.reserve(rows.size());
  out.outcome.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    out.covariates.row(static_cast<Eigen::Index>(r)) =
        frame.covariates.row(static_cast<Eigen::Index>(i));
    out.sample_ids.push_back(frame.sample_ids[i]);
    out.treatment.push_back(frame.treatment[i]);
    out.outcome.push_back(frame.outcome[i]);
  }

  const std::vector<std::size_t> counts = out.ArmCounts();
  std::ostringstream msg;
  msg << "subset selects " << rows.size() << " of " << frame.size() << " samples; arm counts:";
  bool arm_missing = false;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    msg << ' ' << a << '=' << counts[a];
    arm_missing = arm_missing || counts[a] == 0;
  }
  if (arm_missing) {
    LogWarning(kModule, msg.str() + " (an arm is empty; causal estimates unavailable)");
  } else {
    LogInfo(kModule, msg.str());
  }
  return out;
}

}  // namespace cek
