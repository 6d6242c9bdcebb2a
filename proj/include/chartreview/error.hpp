#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chartreview {

enum class ErrorCode {
  MissingSection,
  DuplicateAlias,
  ParseError,
  DuplicateId,
  UnknownDrug,
  DimensionMismatch,
  UnknownChunk,
  IndexMismatch,
  BackendUnavailable,
  ReplayDivergence,
  SchemaError,
  UnknownCase,
  EmptyDataset,
  TemplateSlotMissing,
  ParseFailure,
  EmptyEvaluation,
  WrongArity,
  UnknownId,
  CorruptStore,
  LockHeld,
  NoRuns,
  InvalidArgument,
  Blinded,
  AlreadySubmitted,
  NotSubmitted,
  Io,
};

// Machine-readable name, e.g. NO_RUNS.
std::string_view code_name(ErrorCode code);

// True for errors caused by bad input rather than the environment.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// SchemaError with the JSON pointer of the offending value.
class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& message)
      : Error(ErrorCode::SchemaError, message + " at " + (pointer.empty() ? "/" : pointer)),
        pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace chartreview
