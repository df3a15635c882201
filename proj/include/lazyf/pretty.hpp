#pragma once

#include <string>

#include "lazyf/ast.hpp"

namespace lazyf {

// Stable, re-parsable surface syntax. parse(pretty(parse(x))) is a fixed
// point structurally.
std::string pretty_type(const TypePtr& t);
std::string pretty_pattern(const PatPtr& p);
std::string pretty_term(const TermPtr& t);
std::string pretty_program(const Program& p);

}  // namespace lazyf
