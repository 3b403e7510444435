#include "trajkin/error.hpp"

namespace trajkin {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MissingRoot: return "MissingRoot";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::Undefined: return "Undefined";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::InsufficientDonors: return "InsufficientDonors";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      line_(line) {}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine:
    case ErrorCode::EmptyFile:
    case ErrorCode::MissingRoot:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace trajkin
