#pragma once

// Pure type-level computations shared by the checker: capture-avoiding
// substitution, alpha equivalence, the exbar elimination/introduction
// shapes, and well-formedness.

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "lazyf/ast.hpp"
#include "lazyf/diagnostics.hpp"

namespace lazyf {

// Free type variables of sigma (variables not bound by an enclosing
// forall/exbar/packed binder inside sigma itself).
void free_type_vars(const TypePtr& t, std::set<std::string>& out);

bool contains_meta(const TypePtr& t);
bool occurs_meta(long long meta_id, const TypePtr& t);
bool mentions_var(const TypePtr& t, const std::string& var);
bool mentions_name(const TypePtr& t, long long name_id);

// Every free occurrence of `binder` in sigma replaced by `replacement`;
// bound occurrences untouched; bound variables renamed when capture would
// occur.
TypePtr subst_type(const TypePtr& sigma, const std::string& binder,
                   const TypePtr& replacement);

// Equality up to renaming of forall/exbar/packed binders. Names compare by
// identity. Both sides are expected to be Meta-free; Metas compare by id.
bool alpha_equal(const TypePtr& a, const TypePtr& b);

// push(t1 -> t2) = subst(t1) -> push(t2); push(non-arrow) = packed codomain.
// eliminate_exbar requires sigma = exbar a . body and throws TypeError
// (NotExBar) otherwise. intro_shape takes the already-stripped body.
TypePtr eliminate_exbar(const TypePtr& sigma, const TypePtr& name);
TypePtr intro_shape(const TypePtr& body, const std::string& binder,
                    const TypePtr& witness);

// Environment view for well-formedness checking.
struct WfEnv {
  std::set<std::string> bound_vars;          // in-scope type variables
  std::unordered_set<long long> names;        // registered opaque Names
  std::unordered_map<std::string, int> cons;  // type constructor arities
};

WfEnv builtin_wf_env();

// ok iff all free variables are bound, every Name is registered, every Con
// head is declared with matching arity, and no exbar occurs inside an arrow
// domain.
std::optional<Diagnostic> well_formed(const WfEnv& env, const TypePtr& t);

}  // namespace lazyf
