#include "prophet/error.hpp"

#include <utility>

namespace prophet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidPrompt: return "InvalidPrompt";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ModelMismatch: return "ModelMismatch";
    case ErrorKind::ScheduleExhausted: return "ScheduleExhausted";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::InvalidTransition: return "InvalidTransition";
    case ErrorKind::InvalidUnmaskCount: return "InvalidUnmaskCount";
    case ErrorKind::DegenerateVocabulary: return "DegenerateVocabulary";
    case ErrorKind::MissingTop1: return "MissingTop1";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      detail_(std::move(detail)) {}

}  // namespace prophet
