#include "cek/report/csv.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cek/error.h"
#include "cek/text.h"

namespace cek::report {
namespace {

constexpr const char* kModule = "reporting_cli";

std::string JoinRow(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += EscapeCsvField(fields[i]);
  }
  line += '\n';
  return line;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

Phase ParsePhase(const std::string& s) {
  if (s == "train") return Phase::kTrain;
  if (s == "validation") return Phase::kValidation;
  throw IoError(kModule, "unknown phase \"" + s + "\"");
}

}  // namespace

std::vector<std::string> MetricsCsvColumns(MetricsKind kind) {
  std::vector<std::string> cols = {"TX"};
  if (kind == MetricsKind::kOutcome) cols.push_back("O");
  for (const char* c : {"phase", "fold", "stratum"}) cols.push_back(c);
  for (const std::string& m : eval::MetricNames()) cols.push_back(m);
  cols.push_back("notes");
  return cols;
}

std::string FormatMetricsCsv(const std::vector<eval::MetricsRecord>& records, MetricsKind kind) {
  std::string out = JoinRow(MetricsCsvColumns(kind));
  const std::size_t m = eval::MetricNames().size();
  for (const eval::MetricsRecord& r : records) {
    std::vector<std::string> f = {r.tx};
    if (kind == MetricsKind::kOutcome) f.push_back(r.o);
    f.push_back(ToString(r.phase));
    f.push_back(std::to_string(r.fold));
    f.push_back(r.stratum);
    for (std::size_t k = 0; k < m; ++k) {
      f.push_back(k < r.values.size() && r.values[k] ? FormatDouble(*r.values[k]) : "");
    }
    f.push_back(r.notes);
    out += JoinRow(f);
  }
  return out;
}

void WriteMetricsCsv(const std::vector<eval::MetricsRecord>& records, MetricsKind kind,
                     const std::string& path) {
  WriteTextFile(path, FormatMetricsCsv(records, kind));
}

std::vector<eval::MetricsRecord> ParseMetricsCsv(const std::string& text, MetricsKind kind) {
  const std::vector<std::string> lines = Lines(text);
  const std::vector<std::string> cols = MetricsCsvColumns(kind);
  if (lines.empty() || SplitCsvLine(lines[0]) != cols) {
    throw IoError(kModule, "metrics CSV header does not match the expected columns");
  }
  const std::size_t m = eval::MetricNames().size();
  std::vector<eval::MetricsRecord> out;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const std::vector<std::string> f = SplitCsvLine(lines[l]);
    if (f.size() != cols.size()) {
      throw IoError(kModule, "metrics CSV line " + std::to_string(l + 1) + " has " +
                                 std::to_string(f.size()) + " fields");
    }
    std::size_t c = 0;
    eval::MetricsRecord r;
    r.tx = f[c++];
    if (kind == MetricsKind::kOutcome) r.o = f[c++];
    r.phase = ParsePhase(f[c++]);
    r.fold = std::stoi(f[c++]);
    r.stratum = f[c++];
    for (std::size_t k = 0; k < m; ++k, ++c) {
      if (f[c].empty()) {
        r.values.push_back(std::nullopt);
      } else {
        const std::optional<double> v = ParseDouble(f[c]);
        if (!v) throw IoError(kModule, "bad number \"" + f[c] + "\" in metrics CSV");
        r.values.push_back(v);
      }
    }
    r.notes = f[c];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<eval::MetricsRecord> ReadMetricsCsv(const std::string& path, MetricsKind kind) {
  return ParseMetricsCsv(ReadTextFile(path), kind);
}

std::vector<std::string> SmdCsvColumns(int k) {
  std::vector<std::string> cols = {"TX", "O", "phase", "covariate"};
  for (const char* block :
       {"train_unweighted", "train_weighted", "validation_unweighted", "validation_weighted"}) {
    for (int f = 0; f < k; ++f) cols.push_back(std::string(block) + "_fold" + std::to_string(f));
  }
  return cols;
}

std::string FormatSmdCsv(const eval::BalanceTable& train, const eval::BalanceTable& validation,
                         const std::string& tx, const std::string& o) {
  if (train.num_folds != validation.num_folds) {
    throw ParameterError(kModule, "train and validation balance tables differ in fold count");
  }
  const int k = validation.num_folds;
  std::string out = JoinRow(SmdCsvColumns(k));
  for (const eval::CovariateBalance& v : validation.covariates) {
    const eval::CovariateBalance* t = train.Find(v.name);
    if (t == nullptr) throw ParameterError(kModule, "covariate \"" + v.name + "\" missing from train table");
    std::vector<std::string> f = {tx, o, "train+validation", v.name};
    for (const std::vector<double>* block : {&t->unweighted, &t->weighted, &v.unweighted, &v.weighted}) {
      for (double x : *block) f.push_back(FormatDouble(x));
    }
    out += JoinRow(f);
  }
  return out;
}

void WriteSmdCsv(const eval::BalanceTable& train, const eval::BalanceTable& validation,
                 const std::string& tx, const std::string& o, const std::string& path) {
  WriteTextFile(path, FormatSmdCsv(train, validation, tx, o));
}

void WriteTextFile(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(kModule, "cannot write \"" + path + "\"");
  out << content;
  if (!out) throw IoError(kModule, "write failed for \"" + path + "\"");
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, "cannot read \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cek::report
