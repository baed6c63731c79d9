#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ldtm {

// Error categories map 1:1 onto CLI exit codes: Usage=2, Data=3, Numeric=4.
enum class ErrorCategory { Usage, Data, Numeric };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(message), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& code() const noexcept { return code_; }

private:
  ErrorCategory category_;
  std::string code_;
};

struct MalformedEvent : Error {
  explicit MalformedEvent(const std::string& msg)
      : Error(ErrorCategory::Data, "MalformedEvent", msg) {}
};

struct EmptyCorpus : Error {
  explicit EmptyCorpus(const std::string& msg)
      : Error(ErrorCategory::Data, "EmptyCorpus", msg) {}
};

struct InvalidSplit : Error {
  explicit InvalidSplit(const std::string& msg)
      : Error(ErrorCategory::Data, "InvalidSplit", msg) {}
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& msg)
      : Error(ErrorCategory::Data, "DimensionError", msg) {}
};

struct InsufficientHistory : Error {
  explicit InsufficientHistory(const std::string& msg)
      : Error(ErrorCategory::Data, "InsufficientHistory", msg) {}
};

struct EmptyPairSet : Error {
  explicit EmptyPairSet(const std::string& msg)
      : Error(ErrorCategory::Data, "EmptyPairSet", msg) {}
};

struct SnapshotError : Error {
  explicit SnapshotError(const std::string& msg)
      : Error(ErrorCategory::Data, "SnapshotError", msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg)
      : Error(ErrorCategory::Usage, "ConfigError", msg) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& msg)
      : Error(ErrorCategory::Numeric, "NumericError", msg) {}
};

}  // namespace ldtm
