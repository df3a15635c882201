#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lazyf/ast.hpp"
#include "lazyf/diagnostics.hpp"

namespace lazyf {

struct CheckResult {
  bool ok = false;
  // declared signatures in declaration order, resolved
  std::vector<std::pair<std::string, TypePtr>> types;
  std::vector<Diagnostic> diags;
  // opaque type names registered during the run (unpack sites, skolems);
  // ids are positions, used by the registry-audit tests
  std::vector<std::string> name_registry;

  TypePtr type_of(const std::string& name) const {
    for (auto& [n, t] : types)
      if (n == name) return t;
    return nullptr;
  }
};

// Checks every top-level binding body against its signature. Diagnostics
// from independent bindings are aggregated; within one binding the first
// error wins.
CheckResult check_program(const Program& p);

}  // namespace lazyf
