#include "chartreview/error.hpp"

namespace chartreview {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingSection: return "MISSING_SECTION";
    case ErrorCode::DuplicateAlias: return "DUPLICATE_ALIAS";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::UnknownDrug: return "UNKNOWN_DRUG";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::UnknownChunk: return "UNKNOWN_CHUNK";
    case ErrorCode::IndexMismatch: return "INDEX_MISMATCH";
    case ErrorCode::BackendUnavailable: return "BACKEND_UNAVAILABLE";
    case ErrorCode::ReplayDivergence: return "REPLAY_DIVERGENCE";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
    case ErrorCode::UnknownCase: return "UNKNOWN_CASE";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::TemplateSlotMissing: return "TEMPLATE_SLOT_MISSING";
    case ErrorCode::ParseFailure: return "PARSE_FAILURE";
    case ErrorCode::EmptyEvaluation: return "EMPTY_EVALUATION";
    case ErrorCode::WrongArity: return "WRONG_ARITY";
    case ErrorCode::UnknownId: return "UNKNOWN_ID";
    case ErrorCode::CorruptStore: return "CORRUPT_STORE";
    case ErrorCode::LockHeld: return "LOCK_HELD";
    case ErrorCode::NoRuns: return "NO_RUNS";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Blinded: return "BLINDED";
    case ErrorCode::AlreadySubmitted: return "ALREADY_SUBMITTED";
    case ErrorCode::NotSubmitted: return "NOT_SUBMITTED";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::BackendUnavailable:
    case ErrorCode::ReplayDivergence:
    case ErrorCode::CorruptStore:
    case ErrorCode::LockHeld:
    case ErrorCode::Io:
      return false;
    default:
      return true;
  }
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace chartreview
