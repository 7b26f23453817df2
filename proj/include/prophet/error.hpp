#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prophet {

enum class ErrorKind {
  InvalidPrompt,
  InvalidConfig,
  ModelMismatch,
  ScheduleExhausted,
  EmptyCorpus,
  InvalidTransition,
  InvalidUnmaskCount,
  DegenerateVocabulary,
  MissingTop1,
  NotApplicable,
  EmptyInput,
  InvalidInput,
  ParseError,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library surfaces as an Error. `detail` carries the
// offending field for InvalidConfig and a free-form message otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace prophet
