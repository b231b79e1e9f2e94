#pragma once
// Typed error hierarchy. Every failure surfaced by the engine is a subclass
// of hmgi::Error so callers can dispatch on the concrete type or the code.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmgi {

enum class ErrorCode {
  UnknownModality,
  DimensionMismatch,
  DanglingEndpoint,
  WeightOutOfRange,
  IoFailure,
  FormatVersionMismatch,
  ChecksumMismatch,
  EmptySample,
  KTooLarge,
  StaleModelVersion,
  DuplicateId,
  UnknownId,
  NonFiniteInput,
  ZeroVector,
  UnknownPartition,
  DuplicateInsert,
  Syntax,
  NegativeWeight,
  Domain,
  UnplannableQuery,
  BudgetTooSmall,
  ZeroVectorAfterAdjust,
  MalformedRecord,
  ParameterError,
  ConfigError,
  InsufficientData,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define HMGI_DEFINE_ERROR(Name)                         \
  class Name : public Error {                           \
   public:                                              \
    explicit Name(const std::string& what)              \
        : Error(ErrorCode::Name, #Name ": " + what) {}  \
  }

HMGI_DEFINE_ERROR(UnknownModality);
HMGI_DEFINE_ERROR(DimensionMismatch);
HMGI_DEFINE_ERROR(DanglingEndpoint);
HMGI_DEFINE_ERROR(WeightOutOfRange);
HMGI_DEFINE_ERROR(IoFailure);
HMGI_DEFINE_ERROR(FormatVersionMismatch);
HMGI_DEFINE_ERROR(ChecksumMismatch);
HMGI_DEFINE_ERROR(EmptySample);
HMGI_DEFINE_ERROR(KTooLarge);
HMGI_DEFINE_ERROR(StaleModelVersion);
HMGI_DEFINE_ERROR(DuplicateId);
HMGI_DEFINE_ERROR(UnknownId);
HMGI_DEFINE_ERROR(NonFiniteInput);
HMGI_DEFINE_ERROR(ZeroVector);
HMGI_DEFINE_ERROR(UnknownPartition);
HMGI_DEFINE_ERROR(DuplicateInsert);
HMGI_DEFINE_ERROR(NegativeWeight);
HMGI_DEFINE_ERROR(UnplannableQuery);
HMGI_DEFINE_ERROR(BudgetTooSmall);
HMGI_DEFINE_ERROR(ZeroVectorAfterAdjust);
HMGI_DEFINE_ERROR(ParameterError);
HMGI_DEFINE_ERROR(ConfigError);
HMGI_DEFINE_ERROR(InsufficientData);

#undef HMGI_DEFINE_ERROR

// Parse failure with a 1-based source position and the token set the
// parser would have accepted there.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, std::string expected,
              const std::string& what)
      : Error(ErrorCode::Syntax, "SyntaxError at " + std::to_string(line) +
                                     ":" + std::to_string(column) + ": " +
                                     what + " (expected " + expected + ")"),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string expected_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCode::Domain, "DomainError: " + what) {}
};

// Binary interchange record that fails to decode; offset is the byte
// position of the record that could not be read.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::uint64_t offset, const std::string& what)
      : Error(ErrorCode::MalformedRecord,
              "MalformedRecord at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace hmgi
