#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace permtest {

enum class ErrorKind {
  DimensionMismatch,
  NonFinite,
  TooSmall,
  InvalidConfig,
  DivergedTraining,
  DegenerateResponse,
  DegenerateInput,
  TooLarge,
  TooFewSamples,
  InvalidPoints,
  UnknownScenario,
  InvalidParams,
  ParseError,
  MissingColumn,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries one of the kinds above so
// callers (CLI, Python bindings) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace permtest
