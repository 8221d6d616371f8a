#ifndef CEK_TEXT_H_
#define CEK_TEXT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cek {

// Shortest decimal representation that parses back to the same double.
// Infinities are written as "inf" / "-inf" and NaN as "nan".
std::string FormatDouble(double value);

// Strict parse of a full field; surrounding ASCII whitespace is ignored.
// Accepts the spellings produced by FormatDouble.
std::optional<double> ParseDouble(std::string_view field);

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> SplitCsvLine(std::string_view line);

// Quotes a field if it contains a comma, quote or newline.
std::string EscapeCsvField(std::string_view field);

std::string_view Trim(std::string_view s);

}  // namespace cek

#endif  // CEK_TEXT_H_
