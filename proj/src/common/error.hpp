#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sw {

enum class ErrorCode {
  kInvalidArgument = 1,
  kDimension = 2,
  kConfig = 3,
  kFormat = 4,
  kIo = 5,
  kValidation = 6,
  kNumeric = 7,
  kNoPath = 8,
  kGeneration = 9,
  kNotReady = 10,
  kEmptySet = 11,
  kUndefinedDirection = 12,
  kDegenerateDisparity = 13,
  kEvaluation = 14,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code);

// Base class for every error raised by the library. The C API maps the code
// onto its status enum, so every throw site picks the code deliberately.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error(ErrorCode::kDimension, m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorCode::kConfig, m) {}
};

class FormatError : public Error {
 public:
  FormatError(const std::string& m, std::size_t byte_offset)
      : Error(ErrorCode::kFormat, m + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorCode::kIo, m) {}
};

// Schema violation; `field` is a path such as "positions" or "frames[2].seed".
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& m)
      : Error(ErrorCode::kValidation, field + ": " + m), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error(ErrorCode::kNumeric, m) {}
};

class NoPathError : public Error {
 public:
  NoPathError(const std::string& m, std::size_t reachable)
      : Error(ErrorCode::kNoPath, m + " (reachable component size " + std::to_string(reachable) + ")"),
        reachable_(reachable) {}
  std::size_t reachable_size() const noexcept { return reachable_; }

 private:
  std::size_t reachable_;
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& m) : Error(ErrorCode::kGeneration, m) {}
};

class EmptySetError : public Error {
 public:
  explicit EmptySetError(const std::string& m) : Error(ErrorCode::kEmptySet, m) {}
};

class UndefinedDirectionError : public Error {
 public:
  explicit UndefinedDirectionError(const std::string& m)
      : Error(ErrorCode::kUndefinedDirection, m) {}
};

class DegenerateDisparityError : public Error {
 public:
  DegenerateDisparityError(std::size_t row, std::size_t col, double value)
      : Error(ErrorCode::kDegenerateDisparity,
              "degenerate disparity " + std::to_string(value) + " at patch (" +
                  std::to_string(row) + ", " + std::to_string(col) + ")"),
        row_(row),
        col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace sw
