#include "lazyf/typecheck.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "lazyf/pretty.hpp"
#include "lazyf/type_ops.hpp"

namespace lazyf {

namespace {

// Thrown when inference meets an unsolved Meta in function position; the
// let-group worklist requeues the binding and retries after siblings have
// been processed.
struct NeedsRetry {};

struct NameInfo {
  std::string label;
  int level;
};

struct MetaInfo {
  int level;
  TypePtr solution;  // null while unsolved
};

struct GroupCtx {
  std::unordered_set<long long> own_names;        // names registered by this group
  std::unordered_set<long long> used_as_type;     // names used as tyapp/annotation
  std::vector<std::tuple<long long, TypePtr, SourceSpan>> witnesses;
};

struct CtorInfo {
  std::string data_name;
  TypePtr sig;  // closed
  int arity;
};

class Checker {
 public:
  explicit Checker(const Program& p) : prog_(p) {}

  CheckResult run() {
    CheckResult res;
    collect_datas(res);
    collect_signatures(res);
    if (!res.diags.empty()) {
      for (auto& n : names_) res.name_registry.push_back(n.label);
      return res;
    }

    for (auto& b : prog_.binds) {
      long long meta_mark = (long long)metas_.size();
      try {
        scopes_.clear();
        tyscopes_.clear();
        refine_.clear();
        refine_trail_.clear();
        groups_.clear();
        pending_unpack_ = nullptr;
        pending_consumed_ = false;
        level_ = 0;
        check(b.body, b.sig);
        for (long long m = meta_mark; m < (long long)metas_.size(); m++) {
          if (!metas_[m].solution)
            fail(Code::CannotInfer,
                 "could not determine all types in the body of '" + b.name + "'",
                 b.span);
        }
        if (b.name == "main") check_printable(b.sig, b.span);
      } catch (TypeError& e) {
        res.diags.push_back(e.diag);
      } catch (NeedsRetry&) {
        Diagnostic d;
        d.code = Code::CannotInfer;
        d.message = "cannot infer a type for the body of '" + b.name + "'";
        d.span = b.span;
        res.diags.push_back(d);
      }
    }

    res.ok = res.diags.empty();
    for (auto& [n, t] : globals_decl_order_) res.types.emplace_back(n, t);
    for (auto& n : names_) res.name_registry.push_back(n.label);
    return res;
  }

 private:
  const Program& prog_;

  std::unordered_map<std::string, int> data_arity_;
  std::unordered_map<std::string, CtorInfo> ctors_;
  std::unordered_map<std::string, TypePtr> globals_;
  std::vector<std::pair<std::string, TypePtr>> globals_decl_order_;

  std::vector<NameInfo> names_;
  std::vector<MetaInfo> metas_;
  std::unordered_map<long long, TypePtr> refine_;
  std::vector<long long> refine_trail_;
  int level_ = 0;

  std::vector<std::vector<std::pair<std::string, TypePtr>>> scopes_;
  std::vector<std::vector<std::pair<std::string, TypePtr>>> tyscopes_;
  std::unordered_map<const Pattern*, TypePtr> unpack_names_;
  std::vector<GroupCtx*> groups_;
  TypePtr pending_unpack_;       // implicit E.E target for the current let rhs
  bool pending_consumed_ = false;

  // --- state helpers ---------------------------------------------------------

  TypePtr fresh_name(const std::string& label) {
    long long id = (long long)names_.size();
    names_.push_back({label, level_});
    return tname(id, label);
  }

  TypePtr fresh_meta() {
    long long id = (long long)metas_.size();
    metas_.push_back({level_, nullptr});
    return tmeta(id);
  }

  TypePtr norm(TypePtr t) const {
    for (;;) {
      if (!t) return t;
      if (t->kind == TypeKind::Meta && metas_[t->id].solution) {
        t = metas_[t->id].solution;
        continue;
      }
      if (t->kind == TypeKind::Name) {
        auto it = refine_.find(t->id);
        if (it != refine_.end()) {
          t = it->second;
          continue;
        }
      }
      return t;
    }
  }

  TypePtr zonk(const TypePtr& t0) const {
    TypePtr t = norm(t0);
    if (!t) return t;
    switch (t->kind) {
      case TypeKind::Var:
      case TypeKind::Name:
      case TypeKind::Meta:
        return t;
      case TypeKind::Arrow:
        return tarrow(zonk(t->t1), zonk(t->t2));
      case TypeKind::Forall:
        return tforall(t->var, zonk(t->t1));
      case TypeKind::ExBar:
        return texbar(t->var, zonk(t->t1));
      case TypeKind::Packed:
        return tpacked(t->var, zonk(t->t1), zonk(t->t2));
      case TypeKind::Con: {
        std::vector<TypePtr> args;
        for (auto& a : t->args) args.push_back(zonk(a));
        return tcon(t->con, std::move(args), t->span);
      }
    }
    return t;
  }

  int max_name_level(const TypePtr& t0) const {
    TypePtr t = norm(t0);
    if (!t) return 0;
    switch (t->kind) {
      case TypeKind::Name:
        return names_[t->id].level;
      case TypeKind::Var:
      case TypeKind::Meta:
        return 0;
      case TypeKind::Arrow:
        return std::max(max_name_level(t->t1), max_name_level(t->t2));
      case TypeKind::Forall:
      case TypeKind::ExBar:
        return max_name_level(t->t1);
      case TypeKind::Packed:
        return std::max(max_name_level(t->t1), max_name_level(t->t2));
      case TypeKind::Con: {
        int m = 0;
        for (auto& a : t->args) m = std::max(m, max_name_level(a));
        return m;
      }
    }
    return 0;
  }

  void promote_metas(const TypePtr& t0, int level) {
    TypePtr t = norm(t0);
    if (!t) return;
    switch (t->kind) {
      case TypeKind::Meta:
        if (metas_[t->id].level > level) metas_[t->id].level = level;
        return;
      case TypeKind::Arrow:
        promote_metas(t->t1, level);
        promote_metas(t->t2, level);
        return;
      case TypeKind::Forall:
      case TypeKind::ExBar:
        promote_metas(t->t1, level);
        return;
      case TypeKind::Packed:
        promote_metas(t->t1, level);
        promote_metas(t->t2, level);
        return;
      case TypeKind::Con:
        for (auto& a : t->args) promote_metas(a, level);
        return;
      default:
        return;
    }
  }

  bool occurs_meta_deep(long long id, const TypePtr& t0) const {
    TypePtr t = norm(t0);
    if (!t) return false;
    switch (t->kind) {
      case TypeKind::Meta:
        return t->id == id;
      case TypeKind::Arrow:
        return occurs_meta_deep(id, t->t1) || occurs_meta_deep(id, t->t2);
      case TypeKind::Forall:
      case TypeKind::ExBar:
        return occurs_meta_deep(id, t->t1);
      case TypeKind::Packed:
        return occurs_meta_deep(id, t->t1) || occurs_meta_deep(id, t->t2);
      case TypeKind::Con:
        for (auto& a : t->args)
          if (occurs_meta_deep(id, a)) return true;
        return false;
      default:
        return false;
    }
  }

  bool mentions_name_deep(long long id, const TypePtr& t0) const {
    TypePtr t = norm(t0);
    if (!t) return false;
    switch (t->kind) {
      case TypeKind::Name:
        return t->id == id;
      case TypeKind::Arrow:
        return mentions_name_deep(id, t->t1) || mentions_name_deep(id, t->t2);
      case TypeKind::Forall:
      case TypeKind::ExBar:
        return mentions_name_deep(id, t->t1);
      case TypeKind::Packed:
        return mentions_name_deep(id, t->t1) || mentions_name_deep(id, t->t2);
      case TypeKind::Con:
        for (auto& a : t->args)
          if (mentions_name_deep(id, a)) return true;
        return false;
      default:
        return false;
    }
  }

  // --- scopes ------------------------------------------------------------------

  struct ScopeGuard {
    Checker* c;
    size_t scopes, tyscopes;
    int level;
    bool rollback;
    size_t trail;
    ~ScopeGuard() {
      c->scopes_.resize(scopes);
      c->tyscopes_.resize(tyscopes);
      c->level_ = level;
      if (rollback) {
        while (c->refine_trail_.size() > trail) {
          c->refine_.erase(c->refine_trail_.back());
          c->refine_trail_.pop_back();
        }
      }
    }
  };

  ScopeGuard save(bool rollback_refinements = false) {
    return ScopeGuard{this,   scopes_.size(),        tyscopes_.size(),
                      level_, rollback_refinements,  refine_trail_.size()};
  }

  void push_scope() { scopes_.emplace_back(); }
  void push_tyscope() { tyscopes_.emplace_back(); }

  void bind_var(const std::string& name, TypePtr t) {
    if (scopes_.empty()) push_scope();
    scopes_.back().emplace_back(name, std::move(t));
  }

  void bind_tyvar(const std::string& name, TypePtr t) {
    if (tyscopes_.empty()) push_tyscope();
    tyscopes_.back().emplace_back(name, std::move(t));
  }

  TypePtr lookup_var(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
      for (auto jt = it->rbegin(); jt != it->rend(); ++jt)
        if (jt->first == name) return jt->second;
    auto g = globals_.find(name);
    if (g != globals_.end()) return g->second;
    return nullptr;
  }

  TypePtr lookup_tyvar(const std::string& name) const {
    for (auto it = tyscopes_.rbegin(); it != tyscopes_.rend(); ++it)
      for (auto jt = it->rbegin(); jt != it->rend(); ++jt)
        if (jt->first == name) return jt->second;
    return nullptr;
  }

  // --- program tables -----------------------------------------------------------

  void collect_datas(CheckResult& res) {
    data_arity_["Int"] = 0;
    data_arity_["Bool"] = 0;
    data_arity_["Char"] = 0;
    data_arity_["String"] = 0;
    for (auto& d : prog_.datas) {
      if (data_arity_.count(d.name)) {
        Diagnostic diag;
        diag.code = Code::DuplicateDefinition;
        diag.message = "duplicate data declaration '" + d.name + "'";
        diag.span = d.span;
        res.diags.push_back(diag);
        continue;
      }
      data_arity_[d.name] = (int)d.params.size();
    }
    for (auto& d : prog_.datas) {
      for (auto& c : d.ctors) {
        try {
          TypePtr sig = resolve_type(c.sig, c.span);
          // result head must be the declared type at full arity
          TypePtr t = sig;
          int arity = 0;
          while (t->kind == TypeKind::Forall) t = t->t1;
          while (t->kind == TypeKind::Arrow) {
            arity++;
            t = t->t2;
          }
          if (t->kind != TypeKind::Con || t->con != d.name)
            fail(Code::TypeMismatch,
                 "constructor '" + c.name + "' must return '" + d.name + "'", c.span);
          if (ctors_.count(c.name))
            fail(Code::DuplicateDefinition, "duplicate constructor '" + c.name + "'",
                 c.span);
          ctors_[c.name] = CtorInfo{d.name, sig, arity};
        } catch (TypeError& e) {
          res.diags.push_back(e.diag);
        }
      }
    }
  }

  void add_prim(const std::string& name, TypePtr t) { globals_[name] = std::move(t); }

  void collect_signatures(CheckResult& res) {
    add_prim("min", tarrow(t_int(), tarrow(t_int(), t_int())));
    add_prim("ord", tarrow(t_char(), t_int()));
    add_prim("chr", tarrow(t_int(), t_char()));
    add_prim("show", tarrow(t_int(), t_string()));
    add_prim("strEq", tarrow(t_string(), tarrow(t_string(), t_bool())));
    add_prim("error", tforall("a", tarrow(t_string(), tvar("a"))));
    for (auto& b : prog_.binds) {
      try {
        if (globals_.count(b.name))
          fail(Code::DuplicateDefinition, "duplicate binding '" + b.name + "'", b.span);
        TypePtr sig = resolve_type(b.sig, b.span);
        globals_[b.name] = sig;
        globals_decl_order_.emplace_back(b.name, sig);
      } catch (TypeError& e) {
        res.diags.push_back(e.diag);
      }
    }
  }

  void check_printable(const TypePtr& t0, const SourceSpan& sp) {
    TypePtr t = zonk(t0);
    std::function<bool(const TypePtr&)> ok = [&](const TypePtr& u) -> bool {
      switch (u->kind) {
        case TypeKind::Con:
          for (auto& a : u->args)
            if (!ok(a)) return false;
          return true;
        default:
          return false;
      }
    };
    if (!ok(t))
      fail(Code::TypeMismatch, "'main' must have a printable first-order type", sp,
           "", nullptr, t);
  }

  // --- surface type resolution ----------------------------------------------------

  void mark_name_use(long long id) {
    for (auto* g : groups_)
      if (g->own_names.count(id)) g->used_as_type.insert(id);
  }

  TypePtr resolve_type(const TypePtr& t, const SourceSpan& sp,
                       std::set<std::string> bound = {}) {
    if (!t) return t;
    switch (t->kind) {
      case TypeKind::Var: {
        if (bound.count(t->var)) return t;
        if (TypePtr m = lookup_tyvar(t->var)) {
          if (m->kind == TypeKind::Name) mark_name_use(m->id);
          return m;
        }
        fail(Code::UnboundTypeVar, "unbound type variable '" + t->var + "'",
             t->span.file.empty() ? sp : t->span);
      }
      case TypeKind::Name:
      case TypeKind::Meta:
        return t;  // already internal (test-constructed types)
      case TypeKind::Arrow: {
        TypePtr d = resolve_type(t->t1, sp, bound);
        if (strip_foralls(d)->kind == TypeKind::ExBar)
          fail(Code::ExBarInArgument, "exbar may not appear inside an arrow domain",
               t->t1->span.file.empty() ? sp : t->t1->span);
        return tarrow(d, resolve_type(t->t2, sp, bound));
      }
      case TypeKind::Forall:
      case TypeKind::ExBar: {
        bound.insert(t->var);
        TypePtr body = resolve_type(t->t1, sp, bound);
        return t->kind == TypeKind::Forall ? tforall(t->var, body)
                                           : texbar(t->var, body);
      }
      case TypeKind::Packed: {
        TypePtr w = resolve_type(t->t1, sp, bound);
        if (mentions_var(w, t->var))
          fail(Code::UnboundTypeVar,
               "packed witness may not mention its own binder '" + t->var + "'",
               t->span.file.empty() ? sp : t->span);
        bound.insert(t->var);
        TypePtr body = resolve_type(t->t2, sp, bound);
        return tpacked(t->var, w, body);
      }
      case TypeKind::Con: {
        auto it = data_arity_.find(t->con);
        if (t->con == kConUnit || t->con == kConTuple) {
          std::vector<TypePtr> args;
          for (auto& a : t->args) args.push_back(resolve_type(a, sp, bound));
          return tcon(t->con, std::move(args), t->span);
        }
        if (it == data_arity_.end())
          fail(Code::UnknownTypeName, "unknown type constructor '" + t->con + "'",
               t->span.file.empty() ? sp : t->span);
        if ((int)t->args.size() != it->second)
          fail(Code::ArityMismatch,
               "type constructor '" + t->con + "' expects " +
                   std::to_string(it->second) + " argument(s), got " +
                   std::to_string(t->args.size()),
               t->span.file.empty() ? sp : t->span);
        std::vector<TypePtr> args;
        for (auto& a : t->args) args.push_back(resolve_type(a, sp, bound));
        return tcon(t->con, std::move(args), t->span);
      }
    }
    return t;
  }

  static TypePtr strip_foralls(TypePtr t) {
    while (t && t->kind == TypeKind::Forall) t = t->t1;
    return t;
  }

  // --- unification ----------------------------------------------------------------

  void solve_meta(long long id, TypePtr t, const SourceSpan& sp, const char* rule) {
    TypePtr z = zonk(t);
    if (occurs_meta_deep(id, z))
      fail(Code::RefinementFailure, "occurs check failed (cyclic type)", sp, rule,
           nullptr, z);
    int lvl = metas_[id].level;
    if (max_name_level(z) > lvl)
      fail(Code::RefinementFailure,
           "existential type name would escape its scope", sp, rule, nullptr, z);
    promote_metas(z, lvl);
    metas_[id].solution = z;
  }

  void refine_name(long long id, TypePtr t, const SourceSpan& sp, const char* rule) {
    TypePtr z = zonk(t);
    if (mentions_name_deep(id, z))
      fail(Code::RefinementFailure, "occurs check failed in refinement", sp, rule,
           nullptr, z);
    refine_[id] = z;
    refine_trail_.push_back(id);
  }

  void unify(TypePtr a, TypePtr b, const SourceSpan& sp, const char* rule,
             bool allow_refine) {
    a = norm(a);
    b = norm(b);
    if (a == b) return;
    if (a->kind == TypeKind::Meta && b->kind == TypeKind::Meta && a->id == b->id)
      return;
    if (a->kind == TypeKind::Meta) {
      solve_meta(a->id, b, sp, rule);
      return;
    }
    if (b->kind == TypeKind::Meta) {
      solve_meta(b->id, a, sp, rule);
      return;
    }
    if (a->kind == TypeKind::Name && b->kind == TypeKind::Name && a->id == b->id)
      return;
    if (allow_refine && a->kind == TypeKind::Name) {
      refine_name(a->id, b, sp, rule);
      return;
    }
    if (allow_refine && b->kind == TypeKind::Name) {
      refine_name(b->id, a, sp, rule);
      return;
    }
    // diagnostic convention: `a` is the inferred (actual) side, `b` the
    // expected side
    if (a->kind != b->kind)
      fail(Code::TypeMismatch, "type mismatch", sp, rule, zonk(b), zonk(a));
    switch (a->kind) {
      case TypeKind::Var:
        if (a->var != b->var)
          fail(Code::TypeMismatch, "type mismatch", sp, rule, zonk(b), zonk(a));
        return;
      case TypeKind::Name:
        fail(Code::TypeMismatch, "distinct opaque type names", sp, rule, zonk(b),
             zonk(a));
      case TypeKind::Arrow:
        unify(a->t1, b->t1, sp, rule, allow_refine);
        unify(a->t2, b->t2, sp, rule, allow_refine);
        return;
      case TypeKind::Forall:
      case TypeKind::ExBar: {
        // compare bodies at a fresh rigid name one level down, so the escape
        // check rejects any meta solution that would capture the binder
        level_++;
        TypePtr u = fresh_name(a->var);
        unify(subst_type(a->t1, a->var, u), subst_type(b->t1, b->var, u), sp, rule,
              allow_refine);
        level_--;
        return;
      }
      case TypeKind::Packed: {
        unify(a->t1, b->t1, sp, rule, allow_refine);
        level_++;
        TypePtr u = fresh_name(a->var);
        unify(subst_type(a->t2, a->var, u), subst_type(b->t2, b->var, u), sp, rule,
              allow_refine);
        level_--;
        return;
      }
      case TypeKind::Con: {
        if (a->con != b->con || a->args.size() != b->args.size())
          fail(Code::TypeMismatch, "type mismatch", sp, rule, zonk(b), zonk(a));
        for (size_t i = 0; i < a->args.size(); i++)
          unify(a->args[i], b->args[i], sp, rule, allow_refine);
        return;
      }
      default:
        fail(Code::TypeMismatch, "type mismatch", sp, rule, zonk(b), zonk(a));
    }
  }

  // instantiate a forall prefix with fresh metas
  TypePtr instantiate(TypePtr t) {
    t = norm(t);
    while (t->kind == TypeKind::Forall) {
      t = subst_type(t->t1, t->var, fresh_meta());
      t = norm(t);
    }
    return t;
  }

  // --- witness discovery (rule E.I) -------------------------------------------------

  TypePtr ensure_unpack_name(const Pattern* pat) {
    auto it = unpack_names_.find(pat);
    if (it != unpack_names_.end()) return it->second;
    TypePtr n = fresh_name(pat->var);
    unpack_names_[pat] = n;
    return n;
  }

  void collect_group_unpacks(const PatPtr& p,
                             std::vector<const Pattern*>& out) const {
    if (p->kind == PatKind::Unpack) {
      out.push_back(p.get());
      return;  // nested unpacks under an unpack are not allowed
    }
    if (p->kind == PatKind::Tuple)
      for (auto& s : p->sub) collect_group_unpacks(s, out);
  }

  // pack patterns live at the top of a let binding or directly under its
  // tuples; never under ~, a constructor, or another pack
  void validate_pattern_placement(const PatPtr& p, bool unpack_ok) {
    switch (p->kind) {
      case PatKind::Unpack:
        if (!unpack_ok)
          fail(Code::UnpackOfFunction,
               "pack patterns may only appear at the top of a let binding or "
               "directly under a tuple",
               p->span, "unpackpat");
        validate_pattern_placement(p->sub[0], false);
        return;
      case PatKind::Tuple:
        for (auto& s : p->sub) validate_pattern_placement(s, unpack_ok);
        return;
      case PatKind::Lazy:
      case PatKind::Con:
        for (auto& s : p->sub) validate_pattern_placement(s, false);
        return;
      default:
        return;
    }
  }

  // by_name: collect only packs binding `binder`; otherwise collect any tail
  // pack (a pack's binder is local, so a direct tail pack may use its own
  // name), but then never descend into nested exbar introductions
  void discover_in(const TermPtr& t, const std::string& binder, bool by_name,
                   std::vector<std::pair<TypePtr, SourceSpan>>& found) {
    switch (t->kind) {
      case TermKind::Pack:
        if (!by_name || t->binder == binder) {
          TypePtr w = resolve_type(t->ty, t->span);
          found.emplace_back(w, t->span);
        }
        return;
      case TermKind::Lam:
        discover_in(t->body, binder, by_name, found);
        return;
      case TermKind::ExBarIntro:
        if (!by_name || t->binder == binder) return;  // its packs are its own
        discover_in(t->arg, binder, by_name, found);
        return;
      case TermKind::Let: {
        auto guard = save();
        push_tyscope();
        for (auto& b : t->binds) {
          std::vector<const Pattern*> ups;
          collect_group_unpacks(b.pat, ups);
          for (auto* u : ups) bind_tyvar(u->var, ensure_unpack_name(u));
        }
        discover_in(t->body, binder, by_name, found);
        return;
      }
      case TermKind::Case:
        for (auto& br : t->branches) discover_in(br.body, binder, by_name, found);
        return;
      case TermKind::Choice:
        for (auto& a : t->items) discover_in(a, binder, by_name, found);
        return;
      default:
        return;  // tail reached without a pack on this path
    }
  }

  TypePtr discover_witness(const std::string& binder, const TermPtr& body,
                           const SourceSpan& sp) {
    std::vector<std::pair<TypePtr, SourceSpan>> found;
    discover_in(body, binder, true, found);
    if (found.empty()) discover_in(body, binder, false, found);
    if (found.empty())
      fail(Code::NoPackFound,
           "no pack for existential binder '" + binder + "' in return position", sp,
           "E.I");
    for (size_t i = 1; i < found.size(); i++) {
      if (!alpha_equal(zonk(found[0].first), zonk(found[i].first))) {
        std::string msg = "tail packs disagree on the witness for '" + binder +
                          "':";
        for (auto& [w, wsp] : found)
          msg += "\n  " + pretty_type(zonk(w)) + " at line " +
                 std::to_string(wsp.line);
        fail(Code::AmbiguousWitness, msg, sp, "E.I");
      }
    }
    return found[0].first;
  }

  // --- patterns ----------------------------------------------------------------------

  struct PatCtx {
    bool in_let = false;
    bool bind_by_unify = false;  // let patterns unify with pre-bound metas
    GroupCtx* group = nullptr;
  };

  void bind_pattern_var(const std::string& name, TypePtr t, const SourceSpan& sp,
                        const PatCtx& ctx) {
    if (ctx.bind_by_unify) {
      TypePtr existing = lookup_var(name);
      unify(existing, t, sp, "varpat", false);
    } else {
      bind_var(name, std::move(t));
    }
  }

  static bool irrefutable(const PatPtr& p) {
    return p->kind == PatKind::Var || p->kind == PatKind::Wild ||
           p->kind == PatKind::Lazy || p->kind == PatKind::Unpack;
  }

  TypePtr lit_type(const Literal& l) {
    switch (l.kind) {
      case LitKind::Int: return t_int();
      case LitKind::Bool: return t_bool();
      case LitKind::Char: return t_char();
      case LitKind::String: return t_string();
      case LitKind::Unit: return t_unit();
    }
    return t_unit();
  }

  void check_pattern(const PatPtr& p, TypePtr sigma, const PatCtx& ctx) {
    TypePtr t = norm(sigma);
    switch (p->kind) {
      case PatKind::Var:
        bind_pattern_var(p->var, t, p->span, ctx);
        return;
      case PatKind::Wild:
        return;
      case PatKind::Lit:
        unify(t, lit_type(p->lit), p->span, "varpat", false);
        return;
      case PatKind::Lazy:
        check_pattern(p->sub[0], t, ctx);
        return;
      case PatKind::Tuple: {
        if (t->kind == TypeKind::Packed) {
          // distribute the pack over the component that mentions the binder
          TypePtr body = norm(t->t2);
          if (!is_tuple(body) || body->args.size() != p->sub.size())
            fail(Code::TypeMismatch, "tuple pattern cannot match packed type",
                 p->span, "unpackpat", nullptr, zonk(t));
          int hits = 0;
          for (auto& comp : body->args)
            if (mentions_var(comp, t->var)) hits++;
          if (hits != 1)
            fail(Code::TypeMismatch,
                 "packed tuple must mention its binder in exactly one component",
                 p->span, "unpackpat", nullptr, zonk(t));
          for (size_t i = 0; i < p->sub.size(); i++) {
            TypePtr comp = body->args[i];
            TypePtr ct = mentions_var(comp, t->var)
                             ? tpacked(t->var, t->t1, comp)
                             : comp;
            check_pattern(p->sub[i], ct, ctx);
          }
          return;
        }
        if (t->kind == TypeKind::Meta) {
          std::vector<TypePtr> comps;
          for (size_t i = 0; i < p->sub.size(); i++) comps.push_back(fresh_meta());
          unify(t, t_tuple(comps), p->span, "varpat", false);
          for (size_t i = 0; i < p->sub.size(); i++)
            check_pattern(p->sub[i], comps[i], ctx);
          return;
        }
        if (!is_tuple(t) || t->args.size() != p->sub.size()) {
          std::vector<TypePtr> holes;
          for (size_t i = 0; i < p->sub.size(); i++) holes.push_back(tvar("_"));
          fail(Code::TypeMismatch,
               "tuple pattern of " + std::to_string(p->sub.size()) +
                   " components cannot match this type",
               p->span, "varpat", t_tuple(std::move(holes)), zonk(t));
        }
        for (size_t i = 0; i < p->sub.size(); i++)
          check_pattern(p->sub[i], t->args[i], ctx);
        return;
      }
      case PatKind::Con: {
        auto it = ctors_.find(p->var);
        if (it == ctors_.end())
          fail(Code::UnknownConstructor, "unknown constructor '" + p->var + "'",
               p->span);
        const CtorInfo& ci = it->second;
        if ((int)p->sub.size() != ci.arity)
          fail(Code::ArityMismatch,
               "constructor '" + p->var + "' has arity " + std::to_string(ci.arity),
               p->span);
        long long meta_mark = (long long)metas_.size();
        TypePtr inst = instantiate(ci.sig);
        std::vector<TypePtr> fields;
        TypePtr r = inst;
        for (int i = 0; i < ci.arity; i++) {
          r = norm(r);
          fields.push_back(r->t1);
          r = r->t2;
        }
        // GADT refinement: the scrutinee must be headed by the constructor's
        // data type (refining a whole rigid variable would be unsound); the
        // index arguments may then record local equations on rigid names
        if (t->kind == TypeKind::Meta) {
          unify(r, t, p->span, "refine", false);
        } else {
          if (t->kind != TypeKind::Con || t->con != ci.data_name)
            fail(Code::TypeMismatch,
                 "constructor '" + p->var + "' cannot match a value of this type",
                 p->span, "refine", tcon(ci.data_name, {}), zonk(t));
          unify(r, t, p->span, "refine", true);
        }
        // leftover flexible variables of the instantiation become fresh
        // branch-scoped names
        for (long long m = meta_mark; m < (long long)metas_.size(); m++)
          if (!metas_[m].solution)
            metas_[m].solution = fresh_name("t" + std::to_string(m));
        for (size_t i = 0; i < p->sub.size(); i++)
          check_pattern(p->sub[i], fields[i], ctx);
        return;
      }
      case PatKind::Unpack: {
        if (!ctx.in_let)
          fail(Code::UnpackOfFunction,
               "pack patterns may only appear in let bindings", p->span, "unpackpat");
        if (t->kind == TypeKind::Meta) throw NeedsRetry{};
        TypePtr nu = ensure_unpack_name(p.get());
        if (t->kind == TypeKind::ExBar) t = norm(eliminate_exbar(t, nu));
        if (t->kind == TypeKind::Arrow || t->kind == TypeKind::Forall)
          fail(Code::UnpackOfFunction,
               "a function-typed existential cannot be unpacked by a let binding",
               p->span, "unpackpat", nullptr, zonk(t));
        if (t->kind != TypeKind::Packed)
          fail(Code::TypeMismatch, "pack pattern needs a packed existential",
               p->span, "unpackpat", nullptr, zonk(t));
        if (ctx.group)
          ctx.group->witnesses.emplace_back(nu->id, t->t1, p->span);
        check_pattern(p->sub[0], subst_type(t->t2, t->var, nu), ctx);
        return;
      }
    }
  }

  // --- let groups ------------------------------------------------------------------

  void collect_pattern_vars(const PatPtr& p, std::vector<const Pattern*>& out) const {
    switch (p->kind) {
      case PatKind::Var:
        out.push_back(p.get());
        return;
      case PatKind::Wild:
      case PatKind::Lit:
        return;
      default:
        for (auto& s : p->sub) collect_pattern_vars(s, out);
    }
  }

  const Pattern* sole_unpack(const PatPtr& p) const {
    std::vector<const Pattern*> ups;
    collect_group_unpacks(p, ups);
    return ups.size() == 1 ? ups[0] : nullptr;
  }

  void check_let_group(const std::vector<Binding>& binds, const SourceSpan& sp) {
    GroupCtx group;
    groups_.push_back(&group);
    push_scope();
    push_tyscope();

    // phase 1: register unpack names and give every pattern variable a meta,
    // so right-hand sides may refer forward
    std::set<std::string> seen_binders;
    for (auto& b : binds) {
      validate_pattern_placement(b.pat, true);
      std::vector<const Pattern*> ups;
      collect_group_unpacks(b.pat, ups);
      for (auto* u : ups) {
        if (!seen_binders.insert(u->var).second)
          fail(Code::DuplicateDefinition,
               "duplicate unpack binder '" + u->var + "' in binding group", u->span);
        TypePtr n = ensure_unpack_name(u);
        group.own_names.insert(n->id);
        bind_tyvar(u->var, n);
      }
      std::vector<const Pattern*> vars;
      collect_pattern_vars(b.pat, vars);
      for (auto* v : vars) bind_var(v->var, fresh_meta());
    }

    // phase 2: process right-hand sides; requeue when a forward reference is
    // not yet solved enough to proceed
    std::deque<const Binding*> queue;
    for (auto& b : binds) queue.push_back(&b);
    size_t stall = 0;
    while (!queue.empty()) {
      const Binding* b = queue.front();
      queue.pop_front();
      TypePtr saved_pending = pending_unpack_;
      bool saved_consumed = pending_consumed_;
      const Pattern* up = sole_unpack(b->pat);
      pending_unpack_ = up ? ensure_unpack_name(up) : nullptr;
      pending_consumed_ = false;
      try {
        TypePtr rhs_ty = infer(b->rhs);
        PatCtx ctx;
        ctx.in_let = true;
        ctx.bind_by_unify = true;
        ctx.group = &group;
        check_pattern(b->pat, rhs_ty, ctx);
        stall = 0;
      } catch (NeedsRetry&) {
        queue.push_back(b);
        if (++stall > queue.size())
          fail(Code::CannotInfer,
               "cannot order the bindings of this group for inference", sp);
      }
      pending_unpack_ = saved_pending;
      pending_consumed_ = saved_consumed;
    }

    // phase 3: witness consistency per unpack binder
    for (auto& [nid, w0, wsp] : group.witnesses) {
      TypePtr w = zonk(w0);
      if (w->kind == TypeKind::Name && w->id == nid) continue;  // feedback case
      if (group.used_as_type.count(nid))
        fail(Code::WitnessMismatch,
             "the name '" + names_[nid].label +
                 "' is unpacked from a known witness but is also used as a type "
                 "argument in this group",
             wsp, "unpackpat", tname(nid, names_[nid].label), w);
      // otherwise the witness is forgotten (classical unpack)
    }
    groups_.pop_back();
    // scope stays pushed; the caller's ScopeGuard unwinds it
  }

  // --- checking ----------------------------------------------------------------------

  // When a lambda is checked against an exbar type, parameters whose declared
  // type mentions the binder must match lazily.
  void require_lazy_param(const PatPtr& p, const std::string& binder) {
    if (!irrefutable(p))
      fail(Code::StrictMatchOnExistential,
           "parameter of existential type '" + binder + "' must match lazily",
           p->span, "E.I");
  }

  void check_lam(const TermPtr& lam, TypePtr expected) {
    auto guard = save(true);
    push_scope();
    push_tyscope();
    TypePtr t = norm(expected);
    std::string exbinder;       // innermost exbar binder entered
    TypePtr exwitness;
    std::vector<bool> lazy_req;  // aligned with remaining params after E.I

    size_t i = 0;
    while (i < lam->params.size()) {
      t = norm(t);
      if (t->kind == TypeKind::Forall) {
        level_++;
        TypePtr n = fresh_name(t->var);
        bind_tyvar(t->var, n);
        t = subst_type(t->t1, t->var, n);
        continue;
      }
      if (t->kind == TypeKind::ExBar) {
        TypePtr w = discover_witness(t->var, lam->body, lam->span);
        exbinder = t->var;
        exwitness = w;
        // remember which remaining argument positions mentioned the binder
        lazy_req.clear();
        TypePtr walk = t->t1;
        while (walk->kind == TypeKind::Arrow) {
          lazy_req.push_back(mentions_var(walk->t1, t->var));
          walk = walk->t2;
        }
        bind_tyvar(t->var, w);
        t = intro_shape(t->t1, t->var, w);
        continue;
      }
      if (t->kind != TypeKind::Arrow)
        fail(Code::TypeMismatch, "lambda has more parameters than its type",
             lam->params[i]->span, "abs", zonk(expected), nullptr);
      if (!lazy_req.empty()) {
        if (lazy_req.front()) require_lazy_param(lam->params[i], exbinder);
        lazy_req.erase(lazy_req.begin());
      }
      PatCtx ctx;
      check_pattern(lam->params[i], t->t1, ctx);
      t = t->t2;
      i++;
    }
    if (lam->guard) check(lam->guard, t_bool());
    check(lam->body, t);
  }

  void check(const TermPtr& e, TypePtr expected) {
    TypePtr want = norm(expected);
    if (want->kind == TypeKind::Forall) {
      // checking under a forall: skolemize, keeping the binder name in scope
      // for annotations inside e
      auto guard = save(true);
      push_tyscope();
      while (want->kind == TypeKind::Forall) {
        level_++;
        TypePtr n = fresh_name(want->var);
        bind_tyvar(want->var, n);
        want = norm(subst_type(want->t1, want->var, n));
      }
      check_dispatch(e, want);
      return;
    }
    check_dispatch(e, want);
  }

  void check_dispatch(const TermPtr& e, TypePtr want) {
    // rule E.I for non-lambda shapes: discover the witness over all tail
    // packs of e (they must agree), then check against the pushed shape
    if (want->kind == TypeKind::ExBar &&
        (e->kind == TermKind::Let || e->kind == TermKind::Case ||
         e->kind == TermKind::Pack)) {
      auto guard = save(true);
      push_tyscope();
      TypePtr w = discover_witness(want->var, e, e->span);
      bind_tyvar(want->var, w);
      TypePtr target = intro_shape(want->t1, want->var, w);
      if (norm(target)->kind == TypeKind::Arrow)
        fail(Code::TypeMismatch,
             "a pack expression cannot produce a function type", e->span, "pack",
             zonk(want), nullptr);
      check(e, target);
      return;
    }
    switch (e->kind) {
      case TermKind::Choice: {
        if (e->items.size() < 2)
          fail(Code::TypeMismatch, "a choice needs at least two alternatives",
               e->span, "choice");
        size_t arity = 0;
        for (size_t i = 0; i < e->items.size(); i++) {
          const Term* alt = e->items[i].get();
          while (alt->kind == TermKind::ExBarIntro) alt = alt->arg.get();
          if (alt->kind != TermKind::Lam)
            fail(Code::TypeMismatch,
                 "every alternative must be a lambda (possibly under exbar)",
                 e->items[i]->span, "choice");
          if (i == 0) arity = alt->params.size();
          else if (alt->params.size() != arity)
            fail(Code::TypeMismatch, "alternatives have differing arities",
                 e->items[i]->span, "choice");
        }
        for (auto& alt : e->items) check(alt, want);
        return;
      }
      case TermKind::Lam: {
        if (want->kind == TypeKind::Meta) throw NeedsRetry{};
        check_lam(e, want);
        return;
      }
      case TermKind::ExBarIntro: {
        if (want->kind != TypeKind::ExBar)
          fail(Code::TypeMismatch, "exbar introduction needs an exbar type", e->span,
               "E.I", zonk(want), nullptr);
        auto guard = save(true);
        push_tyscope();
        // rename the expected binder to the introduction's binder
        TypePtr body_ty = want->var == e->binder
                              ? want->t1
                              : subst_type(want->t1, want->var, tvar(e->binder));
        TypePtr w = discover_witness(e->binder, e->arg, e->span);
        bind_tyvar(e->binder, w);
        TypePtr target = intro_shape(body_ty, e->binder, w);
        check(e->arg, target);
        return;
      }
      case TermKind::Pack: {
        if (want->kind == TypeKind::Packed) {
          TypePtr w = resolve_type(e->ty, e->span);
          try {
            unify(w, want->t1, e->span, "pack", false);
          } catch (TypeError&) {
            fail(Code::WitnessMismatch, "pack witness does not match the packed type",
                 e->span, "pack", zonk(want->t1), zonk(w));
          }
          check(e->arg, subst_type(want->t2, want->var, want->t1));
          return;
        }
        // fall through: inferable pack (with `as`) compared to expected
        break;
      }
      case TermKind::Let: {
        auto guard = save(true);
        check_let_group(e->binds, e->span);
        check(e->body, want);
        return;
      }
      case TermKind::Case: {
        check_case(e, &want);
        return;
      }
      case TermKind::Con: {
        if (e->var == kConTuple && is_tuple(want) &&
            want->args.size() == e->items.size()) {
          for (size_t i = 0; i < e->items.size(); i++)
            check(e->items[i], want->args[i]);
          return;
        }
        if (e->var != kConTuple && e->var != kConUnit) {
          check_con(e, &want);
          return;
        }
        break;
      }
      default:
        break;
    }
    // fallback: infer and compare
    TypePtr got = infer(e);
    subsume(got, want, e->span);
  }

  // inferred `got` satisfies `want`; instantiates a polymorphic `got` when a
  // monomorphic type is wanted
  void subsume(TypePtr got, TypePtr want, const SourceSpan& sp) {
    got = norm(got);
    want = norm(want);
    if (got->kind == TypeKind::Forall && want->kind != TypeKind::Forall)
      got = instantiate(got);
    unify(got, want, sp, "var", false);
  }

  void check_case(const TermPtr& e, const TypePtr* expected) {
    TypePtr scrut_ty = infer(e->fun);
    TypePtr st = norm(scrut_ty);
    if (st->kind == TypeKind::Packed || st->kind == TypeKind::ExBar)
      fail(Code::TypeMismatch,
           "case cannot scrutinize a packed existential; unpack it with a let "
           "pack pattern",
           e->fun->span, "unpackpat", nullptr, zonk(st));
    TypePtr result = expected ? *expected : fresh_meta();
    for (auto& br : e->branches) {
      auto guard = save(true);
      level_++;
      push_scope();
      PatCtx ctx;
      check_pattern(br.pat, scrut_ty, ctx);
      check(br.body, result);
    }
    if (e->branches.empty())
      fail(Code::TypeMismatch, "case needs at least one branch", e->span);
  }

  TypePtr check_con(const TermPtr& e, const TypePtr* expected) {
    auto it = ctors_.find(e->var);
    if (it == ctors_.end())
      fail(Code::UnknownConstructor, "unknown constructor '" + e->var + "'", e->span);
    const CtorInfo& ci = it->second;
    if ((int)e->items.size() > ci.arity)
      fail(Code::ArityMismatch,
           "constructor '" + e->var + "' has arity " + std::to_string(ci.arity),
           e->span);
    TypePtr inst = instantiate(ci.sig);
    std::vector<TypePtr> fields;
    TypePtr r = inst;
    for (size_t i = 0; i < e->items.size(); i++) {
      r = norm(r);
      fields.push_back(r->t1);
      r = r->t2;
    }
    if (expected) unify(r, *expected, e->span, "app", false);
    for (size_t i = 0; i < e->items.size(); i++) check(e->items[i], fields[i]);
    return r;
  }

  // --- inference -----------------------------------------------------------------------

  TypePtr infer(const TermPtr& e) {
    switch (e->kind) {
      case TermKind::Var: {
        if (TypePtr t = lookup_var(e->var)) return t;
        if (ctors_.count(e->var)) return ctors_[e->var].sig;
        fail(Code::UnboundVariable, "unbound variable '" + e->var + "'", e->span,
             "var");
      }
      case TermKind::Lit:
        return lit_type(e->lit);
      case TermKind::Con: {
        if (e->var == kConUnit) return t_unit();
        if (e->var == kConTuple) {
          std::vector<TypePtr> comps;
          for (auto& a : e->items) comps.push_back(infer(a));
          return t_tuple(std::move(comps));
        }
        return check_con(e, nullptr);
      }
      case TermKind::App: {
        TypePtr ft = norm(infer(e->fun));
        while (true) {
          if (ft->kind == TypeKind::Forall) {
            ft = norm(instantiate(ft));
            continue;
          }
          if (ft->kind == TypeKind::ExBar) {
            if (pending_unpack_ && !pending_consumed_) {
              pending_consumed_ = true;
              ft = norm(eliminate_exbar(ft, pending_unpack_));
              continue;
            }
            fail(Code::CannotInfer,
                 "an exbar-typed function must be eliminated with an explicit "
                 "type application or bound by a pack pattern",
                 e->span, "E.E", nullptr, zonk(ft));
          }
          break;
        }
        if (ft->kind == TypeKind::Meta) throw NeedsRetry{};
        if (ft->kind != TypeKind::Arrow)
          fail(Code::TypeMismatch, "application of a non-function", e->span, "app",
               nullptr, zonk(ft));
        check(e->arg, ft->t1);
        return ft->t2;
      }
      case TermKind::TyApp: {
        TypePtr ft = infer(e->fun);
        TypePtr arg = resolve_type(e->ty, e->span);
        return apply_type(ft, arg, e->span);
      }
      case TermKind::Pack: {
        if (!e->ty2)
          fail(Code::CannotInfer,
               "a pack without an 'as' annotation is not inferable", e->span, "pack");
        TypePtr w = resolve_type(e->ty, e->span);
        std::set<std::string> bound{e->binder};
        TypePtr body = resolve_type(e->ty2, e->span, bound);
        check(e->arg, subst_type(body, e->binder, w));
        return tpacked(e->binder, w, body);
      }
      case TermKind::Let: {
        auto guard = save(true);
        check_let_group(e->binds, e->span);
        return zonk(infer(e->body));
      }
      case TermKind::Case: {
        TypePtr r = fresh_meta();
        TypePtr want = r;
        check_case(e, &want);
        return r;
      }
      case TermKind::Prim: {
        check(e->items[0], t_int());
        check(e->items[1], t_int());
        if (e->var == "+" || e->var == "-" || e->var == "*") return t_int();
        return t_bool();
      }
      case TermKind::Lam:
      case TermKind::Choice:
      case TermKind::ExBarIntro:
        fail(Code::CannotInfer,
             "this expression needs a checking position (declared type)", e->span);
    }
    fail(Code::CannotInfer, "unsupported expression", e->span);
  }

  // e [sigma]: instantiates the first quantifier along the codomain spine;
  // forall and exbar are deliberately not distinguished by position.
  TypePtr apply_type(TypePtr t, const TypePtr& arg, const SourceSpan& sp) {
    t = norm(t);
    if (t->kind == TypeKind::Forall) return subst_type(t->t1, t->var, arg);
    if (t->kind == TypeKind::ExBar) return eliminate_exbar(t, arg);
    if (t->kind == TypeKind::Arrow)
      return tarrow(t->t1, apply_type(t->t2, arg, sp));
    if (t->kind == TypeKind::Meta) throw NeedsRetry{};
    fail(Code::NotQuantified, "type application of a non-quantified value", sp,
         "E.E", nullptr, zonk(t));
  }
};

}  // namespace

CheckResult check_program(const Program& p) {
  Checker c(p);
  return c.run();
}

}  // namespace lazyf
