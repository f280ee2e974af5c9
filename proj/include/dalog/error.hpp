#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace dalog {

/// Location of a parsed node, 1-based.
struct SourceSpan {
  std::string file = "<input>";
  std::size_t line = 1;
  std::size_t col = 1;

  std::string str() const { return file + ":" + std::to_string(line) + ":" + std::to_string(col); }
};

enum class ErrorKind {
  Parse,
  DuplicateUnit,
  MixedDefinition,
  NonConstant,
  DomainArity,
  ArityMismatch,
  UnknownPredicate,
  HiddenPredicate,
  CyclicUse,
  UnknownUnit,
  DuplicateMeta,
  CertainConflict,
  SelfFoundedRef,
  CyclicCs,
  CsOfSelfReferencing,
  RefInHead,
  UnboundHeadVariable,
  ExpansionLimit,
  MissingCs,
  Inconsistency,
  ForeignAtom,
  UnknownAtom,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::DuplicateUnit: return "DuplicateUnitError";
    case ErrorKind::MixedDefinition: return "MixedDefinitionError";
    case ErrorKind::NonConstant: return "NonConstantError";
    case ErrorKind::DomainArity: return "DomainArityError";
    case ErrorKind::ArityMismatch: return "ArityMismatchError";
    case ErrorKind::UnknownPredicate: return "UnknownPredicateError";
    case ErrorKind::HiddenPredicate: return "HiddenPredicateError";
    case ErrorKind::CyclicUse: return "CyclicUseError";
    case ErrorKind::UnknownUnit: return "UnknownUnitError";
    case ErrorKind::DuplicateMeta: return "DuplicateMetaError";
    case ErrorKind::CertainConflict: return "CertainConflictError";
    case ErrorKind::SelfFoundedRef: return "SelfFoundedRefError";
    case ErrorKind::CyclicCs: return "CyclicCsError";
    case ErrorKind::CsOfSelfReferencing: return "CsOfSelfReferencingError";
    case ErrorKind::RefInHead: return "RefInHeadError";
    case ErrorKind::UnboundHeadVariable: return "UnboundHeadVariableError";
    case ErrorKind::ExpansionLimit: return "ExpansionLimitError";
    case ErrorKind::MissingCs: return "MissingCsError";
    case ErrorKind::Inconsistency: return "InconsistencyError";
    case ErrorKind::ForeignAtom: return "ForeignAtomError";
    case ErrorKind::UnknownAtom: return "UnknownAtomError";
  }
  return "Error";
}

/// All load-time and run-time failures. `kind()` identifies the check that failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::optional<SourceSpan> span = std::nullopt)
      : std::runtime_error(format(kind, message, span)),
        kind_(kind),
        message_(std::move(message)),
        span_(std::move(span)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }
  const std::optional<SourceSpan>& span() const noexcept { return span_; }

 private:
  static std::string format(ErrorKind kind, const std::string& message,
                            const std::optional<SourceSpan>& span) {
    std::string out;
    if (span) out += span->str() + ": ";
    out += error_kind_name(kind);
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::string message_;
  std::optional<SourceSpan> span_;
};

}  // namespace dalog
