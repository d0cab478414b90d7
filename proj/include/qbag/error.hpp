#pragma once

#include <stdexcept>
#include <string>

namespace qbag {

enum class ErrorCode {
  MissingFile,
  MissingColumn,
  NonNumericCell,
  EmptyDataset,
  InvalidArgument,
  UnsupportedTask,
  ZeroNormEncoding,
  RegisterMismatch,
  DimensionMismatch,
  BadModelFile,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qbag
