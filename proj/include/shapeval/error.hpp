#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shapeval {

enum class ErrorCode {
  // tensor / file io
  BadMagic,
  BadHeader,
  TruncatedFile,
  UnknownDtype,
  ShapeOverflow,
  IoFailure,
  // text parsing
  ParseError,
  IndexOutOfRange,
  NonTriangleFace,
  DuplicateEntry,
  MissingField,
  // geometry
  EmptyGeometry,
  ZeroTotalArea,
  DegenerateGeometry,
  KTooLarge,
  NonFinite,
  // metrics
  MissingNormals,
  NoOccupiedSamples,
  DegenerateMatrix,
  InconsistentDims,
  NeedAtLeastTwo,
  DimensionMismatch,
  TooFewSamples,
  NonPsdProduct,
  InvalidArgument,
  // harness
  UnmatchedReference,
  MissingCompletionGroup,
  TooFewShapes,
  MissingFeatures,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::UnknownDtype: return "UnknownDtype";
    case ErrorCode::ShapeOverflow: return "ShapeOverflow";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonTriangleFace: return "NonTriangleFace";
    case ErrorCode::DuplicateEntry: return "DuplicateEntry";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::EmptyGeometry: return "EmptyGeometry";
    case ErrorCode::ZeroTotalArea: return "ZeroTotalArea";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::MissingNormals: return "MissingNormals";
    case ErrorCode::NoOccupiedSamples: return "NoOccupiedSamples";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::InconsistentDims: return "InconsistentDims";
    case ErrorCode::NeedAtLeastTwo: return "NeedAtLeastTwo";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NonPsdProduct: return "NonPsdProduct";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnmatchedReference: return "UnmatchedReference";
    case ErrorCode::MissingCompletionGroup: return "MissingCompletionGroup";
    case ErrorCode::TooFewShapes: return "TooFewShapes";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
  }
  return "Unknown";
}

/// Single exception type for the whole library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the "Code: " prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace shapeval
