#pragma once

#include <stdexcept>
#include <string>

namespace synthgrid {

// Mirrors the status codes of the C API (sg_status in synthgrid.h).
enum class ErrorCode {
  kParameter = 1,
  kSchema = 2,
  kRowParse = 3,
  kContract = 4,
  kNumeric = 5,
  kEmptySet = 6,
  kValidation = 7,
  kDegenerate = 8,
  kIo = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& w) : Error(ErrorCode::kParameter, w) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& w) : Error(ErrorCode::kSchema, w) {}
};
struct RowError : Error {
  RowError(std::size_t line, const std::string& w)
      : Error(ErrorCode::kRowParse, "line " + std::to_string(line) + ": " + w), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};
struct ContractError : Error {
  explicit ContractError(const std::string& w) : Error(ErrorCode::kContract, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorCode::kNumeric, w) {}
};
struct EmptySetError : Error {
  explicit EmptySetError(const std::string& w) : Error(ErrorCode::kEmptySet, w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorCode::kValidation, w) {}
};
struct DegenerateChannelError : Error {
  explicit DegenerateChannelError(const std::string& w) : Error(ErrorCode::kDegenerate, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::kIo, w) {}
};

}  // namespace synthgrid
