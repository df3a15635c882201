#pragma once

// Call-by-need evaluation of checked programs: updateable thunks, recursive
// let via knot-tying, strict vs irrefutable matching, ordered function
// alternatives, black-hole cycle detection, and per-cell match counters.
//
// The machine keeps its own frame stack, so force chains bounded only by the
// step budget (e.g. spine-strict traversals of infinite trees) cannot
// overflow the C++ stack.
//
// Types are fully erased at runtime: pack, exbar introduction and type
// application evaluate to their payload in place, and unpack patterns bind
// the payload cell directly. Stripping those nodes from a program leaves
// evaluation step counts unchanged.

#include <ostream>
#include <string>
#include <vector>

#include "lazyf/ast.hpp"
#include "lazyf/diagnostics.hpp"

namespace lazyf {

struct EvalConfig {
  long long max_steps = 10'000'000;  // force transitions before abort
  bool counters = false;
  bool trace = false;
  std::ostream* trace_out = nullptr;
};

// One row per heap cell holding a constructor value: where that value was
// allocated and how often a strict pattern scrutinized the cell.
struct CellCount {
  SourceSpan site;
  std::string ctor;
  long long matches = 0;
};

struct CounterRow {  // per allocation site
  SourceSpan site;
  std::string ctor;
  long long allocs = 0;
  long long matches = 0;
};

struct EvalOutcome {
  bool ok = false;
  std::string rendered;
  Code error = Code::PrimitiveError;
  std::string error_message;
  long long steps = 0;
  std::vector<CellCount> cell_counts;
  std::vector<CounterRow> site_counters;
};

// Deep-forces and renders `main`. The program must have passed
// check_program.
EvalOutcome eval_main(const Program& p, const EvalConfig& cfg);

// Exposed for the memoization and laziness tests: evaluates the named
// top-level binding to WHNF twice and reports the steps used by each force.
struct ForceTwiceReport {
  long long first_steps = 0;
  long long second_steps = 0;
};
ForceTwiceReport force_twice(const Program& p, const std::string& name,
                             const EvalConfig& cfg);

}  // namespace lazyf
