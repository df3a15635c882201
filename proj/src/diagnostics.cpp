#include "lazyf/diagnostics.hpp"

#include <sstream>

#include "lazyf/pretty.hpp"
#include "json.hpp"

namespace lazyf {

const char* code_name(Code c) {
  switch (c) {
    case Code::SyntaxError: return "SyntaxError";
    case Code::UnboundTypeVar: return "UnboundTypeVar";
    case Code::UnknownTypeName: return "UnknownTypeName";
    case Code::ArityMismatch: return "ArityMismatch";
    case Code::ExBarInArgument: return "ExBarInArgument";
    case Code::DuplicateDefinition: return "DuplicateDefinition";
    case Code::NotExBar: return "NotExBar";
    case Code::TypeMismatch: return "TypeMismatch";
    case Code::WitnessMismatch: return "WitnessMismatch";
    case Code::StrictMatchOnExistential: return "StrictMatchOnExistential";
    case Code::UnpackOfFunction: return "UnpackOfFunction";
    case Code::UnknownConstructor: return "UnknownConstructor";
    case Code::RefinementFailure: return "RefinementFailure";
    case Code::CannotInfer: return "CannotInfer";
    case Code::UnboundVariable: return "UnboundVariable";
    case Code::NotQuantified: return "NotQuantified";
    case Code::NoPackFound: return "NoPackFound";
    case Code::AmbiguousWitness: return "AmbiguousWitness";
    case Code::StepLimitExceeded: return "StepLimitExceeded";
    case Code::CycleDetected: return "CycleDetected";
    case Code::PatternMatchFailure: return "PatternMatchFailure";
    case Code::PrimitiveError: return "PrimitiveError";
    case Code::ApplyNonFunction: return "ApplyNonFunction";
    case Code::IOError: return "IOError";
  }
  return "Unknown";
}

std::string render_diagnostic(const Diagnostic& d) {
  std::ostringstream os;
  os << (d.span.file.empty() ? "<input>" : d.span.file) << ":" << d.span.line << ":"
     << d.span.col << ": error[" << code_name(d.code) << "]: " << d.message;
  if (d.expected) os << "\n  expected: " << pretty_type(d.expected);
  if (d.actual) os << "\n  actual:   " << pretty_type(d.actual);
  return os.str();
}

std::string render_diagnostic_json(const Diagnostic& d) {
  nlohmann::json j;
  j["code"] = code_name(d.code);
  j["message"] = d.message;
  j["file"] = d.span.file;
  j["line"] = d.span.line;
  j["col"] = d.span.col;
  j["expected"] = d.expected ? pretty_type(d.expected) : nullptr;
  j["actual"] = d.actual ? pretty_type(d.actual) : nullptr;
  j["rule"] = d.rule.empty() ? nlohmann::json(nullptr) : nlohmann::json(d.rule);
  return j.dump();
}

void fail(Code code, std::string msg, SourceSpan sp, std::string rule, TypePtr expected,
          TypePtr actual) {
  Diagnostic d;
  d.code = code;
  d.message = std::move(msg);
  d.span = std::move(sp);
  d.rule = std::move(rule);
  d.expected = std::move(expected);
  d.actual = std::move(actual);
  throw TypeError{std::move(d)};
}

}  // namespace lazyf
