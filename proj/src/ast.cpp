#include "lazyf/ast.hpp"

namespace lazyf {

Literal lit_int(long long v) {
  Literal l;
  l.kind = LitKind::Int;
  l.int_val = v;
  return l;
}

Literal lit_bool(bool v) {
  Literal l;
  l.kind = LitKind::Bool;
  l.bool_val = v;
  return l;
}

Literal lit_char(char v) {
  Literal l;
  l.kind = LitKind::Char;
  l.char_val = v;
  return l;
}

Literal lit_string(std::string v) {
  Literal l;
  l.kind = LitKind::String;
  l.string_val = std::move(v);
  return l;
}

Literal lit_unit() { return Literal{}; }

bool lit_equal(const Literal& a, const Literal& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case LitKind::Int: return a.int_val == b.int_val;
    case LitKind::Bool: return a.bool_val == b.bool_val;
    case LitKind::Char: return a.char_val == b.char_val;
    case LitKind::String: return a.string_val == b.string_val;
    case LitKind::Unit: return true;
  }
  return false;
}

std::string lit_show(const Literal& l) {
  switch (l.kind) {
    case LitKind::Int: return std::to_string(l.int_val);
    case LitKind::Bool: return l.bool_val ? "True" : "False";
    case LitKind::Char: {
      std::string s = "'";
      if (l.char_val == '\n') s += "\\n";
      else if (l.char_val == '\\') s += "\\\\";
      else if (l.char_val == '\'') s += "\\'";
      else s += l.char_val;
      return s + "'";
    }
    case LitKind::String: {
      std::string s = "\"";
      for (char c : l.string_val) {
        if (c == '\n') s += "\\n";
        else if (c == '"') s += "\\\"";
        else if (c == '\\') s += "\\\\";
        else s += c;
      }
      return s + "\"";
    }
    case LitKind::Unit: return "()";
  }
  return "";
}

// --- type factories ---------------------------------------------------------

static std::shared_ptr<Type> mk_type(TypeKind k) {
  auto t = std::make_shared<Type>();
  t->kind = k;
  return t;
}

TypePtr tvar(std::string name, SourceSpan sp) {
  auto t = mk_type(TypeKind::Var);
  t->var = std::move(name);
  t->span = sp;
  return t;
}

TypePtr tname(long long id, std::string label) {
  auto t = mk_type(TypeKind::Name);
  t->id = id;
  t->label = std::move(label);
  return t;
}

TypePtr tarrow(TypePtr dom, TypePtr cod) {
  auto t = mk_type(TypeKind::Arrow);
  t->t1 = std::move(dom);
  t->t2 = std::move(cod);
  return t;
}

TypePtr tforall(std::string binder, TypePtr body) {
  auto t = mk_type(TypeKind::Forall);
  t->var = std::move(binder);
  t->t1 = std::move(body);
  return t;
}

TypePtr texbar(std::string binder, TypePtr body) {
  auto t = mk_type(TypeKind::ExBar);
  t->var = std::move(binder);
  t->t1 = std::move(body);
  return t;
}

TypePtr tpacked(std::string binder, TypePtr witness, TypePtr body) {
  auto t = mk_type(TypeKind::Packed);
  t->var = std::move(binder);
  t->t1 = std::move(witness);
  t->t2 = std::move(body);
  return t;
}

TypePtr tcon(std::string name, std::vector<TypePtr> args, SourceSpan sp) {
  auto t = mk_type(TypeKind::Con);
  t->con = std::move(name);
  t->args = std::move(args);
  t->span = sp;
  return t;
}

TypePtr tmeta(long long id) {
  auto t = mk_type(TypeKind::Meta);
  t->id = id;
  return t;
}

TypePtr t_int() { return tcon("Int"); }
TypePtr t_bool() { return tcon("Bool"); }
TypePtr t_char() { return tcon("Char"); }
TypePtr t_string() { return tcon("String"); }
TypePtr t_unit() { return tcon(kConUnit); }
TypePtr t_tuple(std::vector<TypePtr> fields) { return tcon(kConTuple, std::move(fields)); }

bool is_tuple(const TypePtr& t) {
  return t && t->kind == TypeKind::Con && t->con == kConTuple;
}

// --- pattern factories -------------------------------------------------------

static std::shared_ptr<Pattern> mk_pat(PatKind k, SourceSpan sp) {
  auto p = std::make_shared<Pattern>();
  p->kind = k;
  p->span = sp;
  return p;
}

PatPtr pvar(std::string name, SourceSpan sp) {
  auto p = mk_pat(PatKind::Var, sp);
  p->var = std::move(name);
  return p;
}

PatPtr pwild(SourceSpan sp) { return mk_pat(PatKind::Wild, sp); }

PatPtr ptuple(std::vector<PatPtr> fields, SourceSpan sp) {
  auto p = mk_pat(PatKind::Tuple, sp);
  p->sub = std::move(fields);
  return p;
}

PatPtr pcon(std::string ctor, std::vector<PatPtr> args, SourceSpan sp) {
  auto p = mk_pat(PatKind::Con, sp);
  p->var = std::move(ctor);
  p->sub = std::move(args);
  return p;
}

PatPtr plazy(PatPtr inner, SourceSpan sp) {
  auto p = mk_pat(PatKind::Lazy, sp);
  p->sub.push_back(std::move(inner));
  return p;
}

PatPtr punpack(std::string binder, PatPtr inner, SourceSpan sp) {
  auto p = mk_pat(PatKind::Unpack, sp);
  p->var = std::move(binder);
  p->sub.push_back(std::move(inner));
  return p;
}

PatPtr plit(Literal l, SourceSpan sp) {
  auto p = mk_pat(PatKind::Lit, sp);
  p->lit = std::move(l);
  return p;
}

// --- term factories ----------------------------------------------------------

static std::shared_ptr<Term> mk_term(TermKind k, SourceSpan sp) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  t->span = sp;
  return t;
}

TermPtr evar(std::string name, SourceSpan sp) {
  auto t = mk_term(TermKind::Var, sp);
  t->var = std::move(name);
  return t;
}

TermPtr eapp(TermPtr f, TermPtr a) {
  auto t = mk_term(TermKind::App, span_join(f->span, a->span));
  t->fun = std::move(f);
  t->arg = std::move(a);
  return t;
}

TermPtr etyapp(TermPtr f, TypePtr ty) {
  auto t = mk_term(TermKind::TyApp, f->span);
  t->fun = std::move(f);
  t->ty = std::move(ty);
  return t;
}

TermPtr elam(std::vector<PatPtr> params, TermPtr body, TermPtr guard, SourceSpan sp) {
  auto t = mk_term(TermKind::Lam, sp);
  t->params = std::move(params);
  t->body = std::move(body);
  t->guard = std::move(guard);
  return t;
}

TermPtr eexbar(std::string binder, TermPtr body, SourceSpan sp) {
  auto t = mk_term(TermKind::ExBarIntro, sp);
  t->binder = std::move(binder);
  t->arg = std::move(body);
  return t;
}

TermPtr epack(std::string binder, TypePtr witness, TermPtr payload, TypePtr as_body,
              SourceSpan sp) {
  auto t = mk_term(TermKind::Pack, sp);
  t->binder = std::move(binder);
  t->ty = std::move(witness);
  t->arg = std::move(payload);
  t->ty2 = std::move(as_body);
  return t;
}

TermPtr echoice(std::vector<TermPtr> alts, SourceSpan sp) {
  auto t = mk_term(TermKind::Choice, sp);
  t->items = std::move(alts);
  return t;
}

TermPtr elet(std::vector<Binding> binds, TermPtr body, SourceSpan sp) {
  auto t = mk_term(TermKind::Let, sp);
  t->binds = std::move(binds);
  t->body = std::move(body);
  return t;
}

TermPtr ecase(TermPtr scrut, std::vector<CaseBranch> branches, SourceSpan sp) {
  auto t = mk_term(TermKind::Case, sp);
  t->fun = std::move(scrut);
  t->branches = std::move(branches);
  return t;
}

TermPtr econ(std::string ctor, std::vector<TermPtr> args, SourceSpan sp) {
  auto t = mk_term(TermKind::Con, sp);
  t->var = std::move(ctor);
  t->items = std::move(args);
  return t;
}

TermPtr elit(Literal l, SourceSpan sp) {
  auto t = mk_term(TermKind::Lit, sp);
  t->lit = std::move(l);
  return t;
}

TermPtr eprim(std::string op, std::vector<TermPtr> args, SourceSpan sp) {
  auto t = mk_term(TermKind::Prim, sp);
  t->var = std::move(op);
  t->items = std::move(args);
  return t;
}

// --- structural equality (span-insensitive) ----------------------------------

bool type_equal_structural(const TypePtr& a, const TypePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::Var: return a->var == b->var;
    case TypeKind::Name: return a->id == b->id;
    case TypeKind::Meta: return a->id == b->id;
    case TypeKind::Arrow:
      return type_equal_structural(a->t1, b->t1) && type_equal_structural(a->t2, b->t2);
    case TypeKind::Forall:
    case TypeKind::ExBar:
      return a->var == b->var && type_equal_structural(a->t1, b->t1);
    case TypeKind::Packed:
      return a->var == b->var && type_equal_structural(a->t1, b->t1) &&
             type_equal_structural(a->t2, b->t2);
    case TypeKind::Con: {
      if (a->con != b->con || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); i++)
        if (!type_equal_structural(a->args[i], b->args[i])) return false;
      return true;
    }
  }
  return false;
}

bool pattern_equal_structural(const PatPtr& a, const PatPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->var != b->var) return false;
  if (a->kind == PatKind::Lit && !lit_equal(a->lit, b->lit)) return false;
  if (a->sub.size() != b->sub.size()) return false;
  for (size_t i = 0; i < a->sub.size(); i++)
    if (!pattern_equal_structural(a->sub[i], b->sub[i])) return false;
  return true;
}

bool term_equal_structural(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->var != b->var || a->binder != b->binder) return false;
  if (!term_equal_structural(a->fun, b->fun)) return false;
  if (!term_equal_structural(a->arg, b->arg)) return false;
  if (!term_equal_structural(a->guard, b->guard)) return false;
  if (!term_equal_structural(a->body, b->body)) return false;
  if ((a->ty == nullptr) != (b->ty == nullptr)) return false;
  if (a->ty && !type_equal_structural(a->ty, b->ty)) return false;
  if ((a->ty2 == nullptr) != (b->ty2 == nullptr)) return false;
  if (a->ty2 && !type_equal_structural(a->ty2, b->ty2)) return false;
  if (a->kind == TermKind::Lit && !lit_equal(a->lit, b->lit)) return false;
  if (a->params.size() != b->params.size()) return false;
  for (size_t i = 0; i < a->params.size(); i++)
    if (!pattern_equal_structural(a->params[i], b->params[i])) return false;
  if (a->items.size() != b->items.size()) return false;
  for (size_t i = 0; i < a->items.size(); i++)
    if (!term_equal_structural(a->items[i], b->items[i])) return false;
  if (a->binds.size() != b->binds.size()) return false;
  for (size_t i = 0; i < a->binds.size(); i++) {
    if (!pattern_equal_structural(a->binds[i].pat, b->binds[i].pat)) return false;
    if (!term_equal_structural(a->binds[i].rhs, b->binds[i].rhs)) return false;
  }
  if (a->branches.size() != b->branches.size()) return false;
  for (size_t i = 0; i < a->branches.size(); i++) {
    if (!pattern_equal_structural(a->branches[i].pat, b->branches[i].pat)) return false;
    if (!term_equal_structural(a->branches[i].body, b->branches[i].body)) return false;
  }
  return true;
}

bool program_equal_structural(const Program& a, const Program& b) {
  if (a.datas.size() != b.datas.size() || a.binds.size() != b.binds.size()) return false;
  for (size_t i = 0; i < a.datas.size(); i++) {
    const DataDecl& da = a.datas[i];
    const DataDecl& db = b.datas[i];
    if (da.name != db.name || da.params != db.params) return false;
    if (da.ctors.size() != db.ctors.size()) return false;
    for (size_t j = 0; j < da.ctors.size(); j++) {
      if (da.ctors[j].name != db.ctors[j].name) return false;
      if (!type_equal_structural(da.ctors[j].sig, db.ctors[j].sig)) return false;
    }
  }
  for (size_t i = 0; i < a.binds.size(); i++) {
    if (a.binds[i].name != b.binds[i].name) return false;
    if (!type_equal_structural(a.binds[i].sig, b.binds[i].sig)) return false;
    if (!term_equal_structural(a.binds[i].body, b.binds[i].body)) return false;
  }
  return true;
}

}  // namespace lazyf
