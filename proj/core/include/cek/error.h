#ifndef CEK_ERROR_H_
#define CEK_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cek {

// Base class for every error raised by the toolkit. The message is prefixed
// with the originating module ("core_data: ...") so that a CLI user can tell
// which stage failed.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

  const std::string& module() const { return module_; }

 private:
  std::string module_;
};

// A referenced column or config key does not exist.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell could not be parsed. Rows are 1-based data rows (header excluded).
class IngestionError : public Error {
 public:
  IngestionError(std::size_t row, std::string column, const std::string& what)
      : Error("core_data", "ingestion error at row " + std::to_string(row) +
                               ", column \"" + column + "\": " + what),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class DegenerateCohortError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class EmptySubsetError : public Error {
 public:
  using Error::Error;
};

// An arm required by a causal computation is absent.
class PositivityError : public Error {
 public:
  using Error::Error;
};

// A learner failed inside cross-validation. fold() is -1 when the failure is
// not attached to a fold.
class LearnerError : public Error {
 public:
  LearnerError(std::string module, const std::string& message, int fold = -1)
      : Error(std::move(module),
              fold >= 0 ? "fold " + std::to_string(fold) + ": " + message
                        : message),
        fold_(fold) {}

  int fold() const { return fold_; }

 private:
  int fold_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cek

#endif  // CEK_ERROR_H_
