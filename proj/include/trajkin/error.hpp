#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trajkin {

enum class ErrorCode {
  TooFewPoints,
  DuplicateTimestamp,
  MalformedLine,
  EmptyFile,
  MissingRoot,
  EmptyInput,
  ClassTooSmall,
  EmptyTrainingSet,
  Undefined,
  UnknownUser,
  InsufficientDonors,
  TooFewRows,
  NoPositives,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported as trajkin::Error; callers branch on
// code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }

  // 1-based line number for MalformedLine errors.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

// True for errors caused by bad or missing input data (CLI exit code 2).
bool is_input_error(ErrorCode code);

}  // namespace trajkin
