#ifndef CEK_REPORT_CSV_H_
#define CEK_REPORT_CSV_H_

#include <string>
#include <vector>

#include "cek/eval/balance.h"
#include "cek/eval/metrics.h"

namespace cek::report {

// Propensity files omit the O column.
enum class MetricsKind { kPropensity, kOutcome };

// TX[,O],phase,fold,stratum,<MetricNames()...>,notes
std::vector<std::string> MetricsCsvColumns(MetricsKind kind);

// Missing metrics are empty fields; numbers use the shortest round-trip form.
std::string FormatMetricsCsv(const std::vector<eval::MetricsRecord>& records, MetricsKind kind);
void WriteMetricsCsv(const std::vector<eval::MetricsRecord>& records, MetricsKind kind,
                     const std::string& path);

// Inverse of FormatMetricsCsv. Throws IoError on a malformed header or row.
std::vector<eval::MetricsRecord> ParseMetricsCsv(const std::string& text, MetricsKind kind);
std::vector<eval::MetricsRecord> ReadMetricsCsv(const std::string& path, MetricsKind kind);

// TX,O,phase,covariate, then k columns each of train_unweighted, train_weighted,
// validation_unweighted, validation_weighted. One row per covariate in the
// validation table's order; phase is "train+validation". Infinite SMDs are
// written as "inf".
std::vector<std::string> SmdCsvColumns(int k);
std::string FormatSmdCsv(const eval::BalanceTable& train, const eval::BalanceTable& validation,
                         const std::string& tx, const std::string& o);
void WriteSmdCsv(const eval::BalanceTable& train, const eval::BalanceTable& validation,
                 const std::string& tx, const std::string& o, const std::string& path);

// Writes `content` to `path` byte for byte, creating parent directories.
void WriteTextFile(const std::string& path, const std::string& content);
std::string ReadTextFile(const std::string& path);

}  // namespace cek::report

#endif  // CEK_REPORT_CSV_H_
