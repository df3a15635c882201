#pragma once

#include <optional>
#include <string>

#include "lazyf/ast.hpp"
#include "lazyf/diagnostics.hpp"

namespace lazyf {

struct ParseResult {
  ProgramPtr program;             // null on error
  std::optional<Diagnostic> error;
};

// Parses .lzf source text. Every node carries a SourceSpan into `file`.
ParseResult parse_program(const std::string& text, const std::string& file);

// Convenience for tests/tools: parse a single type or term in isolation.
TypePtr parse_type_string(const std::string& text);
TermPtr parse_term_string(const std::string& text);

}  // namespace lazyf
