#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lazyf/ast.hpp"

namespace lazyf {

enum class Code {
  // parse / well-formedness
  SyntaxError,
  UnboundTypeVar,
  UnknownTypeName,
  ArityMismatch,
  ExBarInArgument,
  DuplicateDefinition,
  // typechecking
  NotExBar,
  TypeMismatch,
  WitnessMismatch,
  StrictMatchOnExistential,
  UnpackOfFunction,
  UnknownConstructor,
  RefinementFailure,
  CannotInfer,
  UnboundVariable,
  NotQuantified,
  NoPackFound,
  AmbiguousWitness,
  // runtime
  StepLimitExceeded,
  CycleDetected,
  PatternMatchFailure,
  PrimitiveError,
  ApplyNonFunction,
  // driver
  IOError
};

const char* code_name(Code c);

struct Diagnostic {
  Code code = Code::TypeMismatch;
  std::string message;
  SourceSpan span;
  TypePtr expected;  // present exactly for mismatch-style codes
  TypePtr actual;
  std::string rule;  // typing rule name, when one applies
};

// `file:line:col: error[CODE]: message` plus expected/actual lines.
std::string render_diagnostic(const Diagnostic& d);

// One JSON object per diagnostic: {code, message, file, line, col, expected,
// actual, rule}.
std::string render_diagnostic_json(const Diagnostic& d);

// Thrown inside the checker; caught at top-level-binding granularity.
struct TypeError {
  Diagnostic diag;
};

[[noreturn]] void fail(Code code, std::string msg, SourceSpan sp, std::string rule = "",
                       TypePtr expected = nullptr, TypePtr actual = nullptr);

}  // namespace lazyf
