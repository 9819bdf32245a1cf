#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hitt {

enum class ErrorKind {
  // kernel
  UnboundVariable,
  UnknownConstant,
  NotAFunction,
  NotAPair,
  TypeMismatch,
  CannotInfer,
  FuelExhausted,
  // rewrite engine
  NonlinearPattern,
  HigherOrderPattern,
  IllTypedRule,
  HeadNotDeclared,
  TerminationRejected,
  // elaborator
  UnsolvedMeta,
  UnificationFailure,
  OccursCheck,
  DepthExhausted,
  NoSolution,
  // declarations
  DuplicateDeclaration,
  BadDeclaration,
  // surface
  ParseError,
  Io,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
  case ErrorKind::UnboundVariable: return "UnboundVariable";
  case ErrorKind::UnknownConstant: return "UnknownConstant";
  case ErrorKind::NotAFunction: return "NotAFunction";
  case ErrorKind::NotAPair: return "NotAPair";
  case ErrorKind::TypeMismatch: return "TypeMismatch";
  case ErrorKind::CannotInfer: return "CannotInfer";
  case ErrorKind::FuelExhausted: return "FuelExhausted";
  case ErrorKind::NonlinearPattern: return "NonlinearPattern";
  case ErrorKind::HigherOrderPattern: return "HigherOrderPattern";
  case ErrorKind::IllTypedRule: return "IllTypedRule";
  case ErrorKind::HeadNotDeclared: return "HeadNotDeclared";
  case ErrorKind::TerminationRejected: return "TerminationRejected";
  case ErrorKind::UnsolvedMeta: return "UnsolvedMeta";
  case ErrorKind::UnificationFailure: return "UnificationFailure";
  case ErrorKind::OccursCheck: return "OccursCheck";
  case ErrorKind::DepthExhausted: return "DepthExhausted";
  case ErrorKind::NoSolution: return "NoSolution";
  case ErrorKind::DuplicateDeclaration: return "DuplicateDeclaration";
  case ErrorKind::BadDeclaration: return "BadDeclaration";
  case ErrorKind::ParseError: return "ParseError";
  case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace hitt
