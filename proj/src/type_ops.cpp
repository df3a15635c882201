#include "lazyf/type_ops.hpp"

#include <atomic>

#include "lazyf/pretty.hpp"

namespace lazyf {

void free_type_vars(const TypePtr& t, std::set<std::string>& out) {
  if (!t) return;
  switch (t->kind) {
    case TypeKind::Var:
      out.insert(t->var);
      break;
    case TypeKind::Name:
    case TypeKind::Meta:
      break;
    case TypeKind::Arrow:
      free_type_vars(t->t1, out);
      free_type_vars(t->t2, out);
      break;
    case TypeKind::Forall:
    case TypeKind::ExBar: {
      std::set<std::string> inner;
      free_type_vars(t->t1, inner);
      inner.erase(t->var);
      out.insert(inner.begin(), inner.end());
      break;
    }
    case TypeKind::Packed: {
      free_type_vars(t->t1, out);  // witness never binds
      std::set<std::string> inner;
      free_type_vars(t->t2, inner);
      inner.erase(t->var);
      out.insert(inner.begin(), inner.end());
      break;
    }
    case TypeKind::Con:
      for (auto& a : t->args) free_type_vars(a, out);
      break;
  }
}

bool contains_meta(const TypePtr& t) {
  if (!t) return false;
  switch (t->kind) {
    case TypeKind::Meta: return true;
    case TypeKind::Var:
    case TypeKind::Name: return false;
    case TypeKind::Arrow: return contains_meta(t->t1) || contains_meta(t->t2);
    case TypeKind::Forall:
    case TypeKind::ExBar: return contains_meta(t->t1);
    case TypeKind::Packed: return contains_meta(t->t1) || contains_meta(t->t2);
    case TypeKind::Con:
      for (auto& a : t->args)
        if (contains_meta(a)) return true;
      return false;
  }
  return false;
}

bool occurs_meta(long long meta_id, const TypePtr& t) {
  if (!t) return false;
  switch (t->kind) {
    case TypeKind::Meta: return t->id == meta_id;
    case TypeKind::Var:
    case TypeKind::Name: return false;
    case TypeKind::Arrow: return occurs_meta(meta_id, t->t1) || occurs_meta(meta_id, t->t2);
    case TypeKind::Forall:
    case TypeKind::ExBar: return occurs_meta(meta_id, t->t1);
    case TypeKind::Packed:
      return occurs_meta(meta_id, t->t1) || occurs_meta(meta_id, t->t2);
    case TypeKind::Con:
      for (auto& a : t->args)
        if (occurs_meta(meta_id, a)) return true;
      return false;
  }
  return false;
}

bool mentions_var(const TypePtr& t, const std::string& var) {
  std::set<std::string> fv;
  free_type_vars(t, fv);
  return fv.count(var) > 0;
}

bool mentions_name(const TypePtr& t, long long name_id) {
  if (!t) return false;
  switch (t->kind) {
    case TypeKind::Name: return t->id == name_id;
    case TypeKind::Var:
    case TypeKind::Meta: return false;
    case TypeKind::Arrow:
      return mentions_name(t->t1, name_id) || mentions_name(t->t2, name_id);
    case TypeKind::Forall:
    case TypeKind::ExBar: return mentions_name(t->t1, name_id);
    case TypeKind::Packed:
      return mentions_name(t->t1, name_id) || mentions_name(t->t2, name_id);
    case TypeKind::Con:
      for (auto& a : t->args)
        if (mentions_name(a, name_id)) return true;
      return false;
  }
  return false;
}

// Fresh binder names for capture avoidance, e.g. "a!3".
static std::string fresh_binder(const std::string& base) {
  static std::atomic<long long> counter{0};
  return base + "!" + std::to_string(++counter);
}

TypePtr subst_type(const TypePtr& sigma, const std::string& binder,
                   const TypePtr& replacement) {
  if (!sigma) return sigma;
  switch (sigma->kind) {
    case TypeKind::Var:
      return sigma->var == binder ? replacement : sigma;
    case TypeKind::Name:
    case TypeKind::Meta:
      return sigma;
    case TypeKind::Arrow: {
      auto d = subst_type(sigma->t1, binder, replacement);
      auto c = subst_type(sigma->t2, binder, replacement);
      if (d == sigma->t1 && c == sigma->t2) return sigma;
      return tarrow(d, c);
    }
    case TypeKind::Forall:
    case TypeKind::ExBar: {
      if (sigma->var == binder) return sigma;  // shadowed
      std::string b = sigma->var;
      TypePtr body = sigma->t1;
      if (mentions_var(replacement, b) && mentions_var(body, binder)) {
        std::string nb = fresh_binder(b);
        body = subst_type(body, b, tvar(nb));
        b = nb;
      }
      auto nbody = subst_type(body, binder, replacement);
      if (nbody == sigma->t1 && b == sigma->var) return sigma;
      return sigma->kind == TypeKind::Forall ? tforall(b, nbody) : texbar(b, nbody);
    }
    case TypeKind::Packed: {
      auto w = subst_type(sigma->t1, binder, replacement);
      if (sigma->var == binder) {
        if (w == sigma->t1) return sigma;
        return tpacked(sigma->var, w, sigma->t2);
      }
      std::string b = sigma->var;
      TypePtr body = sigma->t2;
      if (mentions_var(replacement, b) && mentions_var(body, binder)) {
        std::string nb = fresh_binder(b);
        body = subst_type(body, b, tvar(nb));
        b = nb;
      }
      auto nbody = subst_type(body, binder, replacement);
      return tpacked(b, w, nbody);
    }
    case TypeKind::Con: {
      std::vector<TypePtr> args;
      args.reserve(sigma->args.size());
      bool changed = false;
      for (auto& a : sigma->args) {
        auto na = subst_type(a, binder, replacement);
        changed |= (na != a);
        args.push_back(na);
      }
      if (!changed) return sigma;
      return tcon(sigma->con, std::move(args), sigma->span);
    }
  }
  return sigma;
}

namespace {

// de Bruijn–style comparison: binder occurrences are compared through the
// rename stacks.
struct AlphaCmp {
  std::vector<std::pair<std::string, std::string>> scope;

  int lookup_left(const std::string& v) const {
    for (int i = (int)scope.size() - 1; i >= 0; i--)
      if (scope[i].first == v) return i;
    return -1;
  }
  int lookup_right(const std::string& v) const {
    for (int i = (int)scope.size() - 1; i >= 0; i--)
      if (scope[i].second == v) return i;
    return -1;
  }

  bool eq(const TypePtr& a, const TypePtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case TypeKind::Var: {
        int la = lookup_left(a->var);
        int lb = lookup_right(b->var);
        if (la != lb) return false;
        if (la == -1) return a->var == b->var;  // both free
        return true;
      }
      case TypeKind::Name: return a->id == b->id;
      case TypeKind::Meta: return a->id == b->id;
      case TypeKind::Arrow: return eq(a->t1, b->t1) && eq(a->t2, b->t2);
      case TypeKind::Forall:
      case TypeKind::ExBar: {
        scope.emplace_back(a->var, b->var);
        bool r = eq(a->t1, b->t1);
        scope.pop_back();
        return r;
      }
      case TypeKind::Packed: {
        if (!eq(a->t1, b->t1)) return false;  // witness: binder not in scope
        scope.emplace_back(a->var, b->var);
        bool r = eq(a->t2, b->t2);
        scope.pop_back();
        return r;
      }
      case TypeKind::Con: {
        if (a->con != b->con || a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); i++)
          if (!eq(a->args[i], b->args[i])) return false;
        return true;
      }
    }
    return false;
  }
};

}  // namespace

bool alpha_equal(const TypePtr& a, const TypePtr& b) {
  AlphaCmp cmp;
  return cmp.eq(a, b);
}

static TypePtr push_shape(const TypePtr& body, const std::string& binder,
                          const TypePtr& witness) {
  if (body->kind == TypeKind::Arrow)
    return tarrow(subst_type(body->t1, binder, witness),
                  push_shape(body->t2, binder, witness));
  return tpacked(binder, witness, body);
}

TypePtr eliminate_exbar(const TypePtr& sigma, const TypePtr& name) {
  if (!sigma || sigma->kind != TypeKind::ExBar)
    fail(Code::NotExBar, "type application of an exbar requires an exbar type",
         sigma ? sigma->span : SourceSpan{}, "E.E", nullptr, sigma);
  return push_shape(sigma->t1, sigma->var, name);
}

TypePtr intro_shape(const TypePtr& body, const std::string& binder,
                    const TypePtr& witness) {
  return push_shape(body, binder, witness);
}

WfEnv builtin_wf_env() {
  WfEnv env;
  env.cons["Int"] = 0;
  env.cons["Bool"] = 0;
  env.cons["Char"] = 0;
  env.cons["String"] = 0;
  env.cons[kConUnit] = 0;
  env.cons[kConTuple] = -1;  // any arity >= 2
  return env;
}

static TypePtr strip_foralls(TypePtr t) {
  while (t && t->kind == TypeKind::Forall) t = t->t1;
  return t;
}

static std::optional<Diagnostic> wf_walk(const WfEnv& env, const TypePtr& t,
                                         std::set<std::string> bound) {
  if (!t) return std::nullopt;
  auto diag = [&](Code c, std::string msg) {
    Diagnostic d;
    d.code = c;
    d.message = std::move(msg);
    d.span = t->span;
    return d;
  };
  switch (t->kind) {
    case TypeKind::Var:
      if (!bound.count(t->var))
        return diag(Code::UnboundTypeVar, "unbound type variable '" + t->var + "'");
      return std::nullopt;
    case TypeKind::Name:
      if (!env.names.count(t->id))
        return diag(Code::UnknownTypeName,
                    "type name '" + t->label + "' is not registered in the environment");
      return std::nullopt;
    case TypeKind::Meta:
      return std::nullopt;  // checker-internal; never user-facing
    case TypeKind::Arrow: {
      // contravariant exbar: an argument may not itself be exbar-typed
      if (strip_foralls(t->t1)->kind == TypeKind::ExBar)
        return diag(Code::ExBarInArgument,
                    "exbar may not appear as the type of a function argument");
      if (auto d = wf_walk(env, t->t1, bound)) return d;
      return wf_walk(env, t->t2, bound);
    }
    case TypeKind::Forall: {
      bound.insert(t->var);
      return wf_walk(env, t->t1, bound);
    }
    case TypeKind::ExBar: {
      bound.insert(t->var);
      return wf_walk(env, t->t1, bound);
    }
    case TypeKind::Packed: {
      if (auto d = wf_walk(env, t->t1, bound)) return d;
      if (mentions_var(t->t1, t->var))
        return diag(Code::UnboundTypeVar,
                    "packed witness may not mention its own binder '" + t->var + "'");
      bound.insert(t->var);
      return wf_walk(env, t->t2, bound);
    }
    case TypeKind::Con: {
      auto it = env.cons.find(t->con);
      if (it == env.cons.end())
        return diag(Code::UnknownTypeName, "unknown type constructor '" + t->con + "'");
      int arity = it->second;
      if (arity == -1) {  // tuple: any arity >= 2
        if (t->args.size() < 2)
          return diag(Code::ArityMismatch, "tuple type needs at least 2 components");
      } else if ((int)t->args.size() != arity) {
        return diag(Code::ArityMismatch,
                    "type constructor '" + t->con + "' expects " + std::to_string(arity) +
                        " argument(s), got " + std::to_string(t->args.size()));
      }
      for (auto& a : t->args)
        if (auto d = wf_walk(env, a, bound)) return d;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<Diagnostic> well_formed(const WfEnv& env, const TypePtr& t) {
  return wf_walk(env, t, env.bound_vars);
}

}  // namespace lazyf
