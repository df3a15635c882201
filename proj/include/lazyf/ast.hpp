#pragma once

// Abstract syntax for LazyF: types, terms, patterns and whole programs.
// All nodes are immutable and shared; SourceSpans point back into the
// original .lzf text for diagnostics.

#include <memory>
#include <string>
#include <vector>

namespace lazyf {

struct SourceSpan {
  std::string file;
  int line = 1, col = 1;          // start, 1-based
  int end_line = 1, end_col = 1;  // inclusive end
};

inline SourceSpan span_join(const SourceSpan& a, const SourceSpan& b) {
  SourceSpan s = a;
  s.end_line = b.end_line;
  s.end_col = b.end_col;
  return s;
}

// ---------------------------------------------------------------------------
// Literals

enum class LitKind { Int, Bool, Char, String, Unit };

struct Literal {
  LitKind kind = LitKind::Unit;
  long long int_val = 0;
  bool bool_val = false;
  char char_val = 0;
  std::string string_val;
};

Literal lit_int(long long v);
Literal lit_bool(bool v);
Literal lit_char(char v);
Literal lit_string(std::string v);
Literal lit_unit();
bool lit_equal(const Literal& a, const Literal& b);
std::string lit_show(const Literal& l);

// ---------------------------------------------------------------------------
// Types (the sigma grammar)

enum class TypeKind {
  Var,     // type variable (bound by forall/exbar/packed or a data decl)
  Name,    // opaque type constant, unique per unpack site
  Arrow,   // domain -> codomain
  Forall,  // forall binder . body
  ExBar,   // exbar binder . body
  Packed,  // <(binder = witness), body>
  Con,     // applied type constructor (Int, Bool, tuples, user data)
  Meta     // checker-internal unification variable
};

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  TypeKind kind;
  SourceSpan span;
  std::string var;           // Var name; binder for Forall/ExBar/Packed
  long long id = -1;         // Name id / Meta id
  std::string label;         // Name: source binder text, for diagnostics
  TypePtr t1, t2;            // Arrow: dom/cod; Forall/ExBar: body = t1;
                             // Packed: witness = t1, body = t2
  std::string con;           // Con constructor name
  std::vector<TypePtr> args; // Con arguments
};

// Built-in type constructor names. Tuples are a single constructor whose
// arity is the argument count.
inline const char* kConUnit = "()";
inline const char* kConTuple = "(,)";

TypePtr tvar(std::string name, SourceSpan sp = {});
TypePtr tname(long long id, std::string label);
TypePtr tarrow(TypePtr dom, TypePtr cod);
TypePtr tforall(std::string binder, TypePtr body);
TypePtr texbar(std::string binder, TypePtr body);
TypePtr tpacked(std::string binder, TypePtr witness, TypePtr body);
TypePtr tcon(std::string name, std::vector<TypePtr> args = {}, SourceSpan sp = {});
TypePtr tmeta(long long id);

TypePtr t_int();
TypePtr t_bool();
TypePtr t_char();
TypePtr t_string();
TypePtr t_unit();
TypePtr t_tuple(std::vector<TypePtr> fields);

bool is_tuple(const TypePtr& t);

// ---------------------------------------------------------------------------
// Patterns

enum class PatKind { Var, Wild, Tuple, Con, Lazy, Unpack, Lit };

struct Pattern;
using PatPtr = std::shared_ptr<const Pattern>;

struct Pattern {
  PatKind kind;
  SourceSpan span;
  std::string var;          // Var name; Con constructor; Unpack type-name binder
  std::vector<PatPtr> sub;  // Tuple fields; Con arguments; Lazy/Unpack inner
  Literal lit;
};

PatPtr pvar(std::string name, SourceSpan sp = {});
PatPtr pwild(SourceSpan sp = {});
PatPtr ptuple(std::vector<PatPtr> fields, SourceSpan sp = {});
PatPtr pcon(std::string ctor, std::vector<PatPtr> args, SourceSpan sp = {});
PatPtr plazy(PatPtr inner, SourceSpan sp = {});
PatPtr punpack(std::string binder, PatPtr inner, SourceSpan sp = {});
PatPtr plit(Literal l, SourceSpan sp = {});

// ---------------------------------------------------------------------------
// Terms (the e grammar)

enum class TermKind {
  Var,         // v
  App,         // f a
  TyApp,       // f [sigma]
  Lam,         // \p1 .. pn -> body, with an optional equation guard
  ExBarIntro,  // exbar a . body
  Pack,        // pack (a = sigma) payload [as sigma_body]
  Choice,      // e1 ||| ... ||| en
  Let,         // let { p = e ; ... } in body   (always recursive)
  Case,        // case e of { p -> e ; ... }
  Con,         // saturated constructor / tuple application
  Lit,
  Prim         // built-in binary operator application
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Binding {
  PatPtr pat;
  TermPtr rhs;
};

struct CaseBranch {
  PatPtr pat;
  TermPtr body;
};

struct Term {
  TermKind kind;
  SourceSpan span;
  std::string var;                  // Var name; Con ctor ("(,)" for tuples); Prim op
  TermPtr fun, arg;                 // App; TyApp fun; Case scrutinee = fun;
                                    // ExBarIntro/Pack payload = arg
  TypePtr ty, ty2;                  // TyApp argument; Pack witness = ty, "as" = ty2
  std::string binder;               // ExBarIntro / Pack binder
  std::vector<PatPtr> params;       // Lam
  TermPtr guard, body;              // Lam
  std::vector<TermPtr> items;       // Choice alternatives; Con args; Prim args
  std::vector<Binding> binds;       // Let
  std::vector<CaseBranch> branches; // Case
  Literal lit;
};

TermPtr evar(std::string name, SourceSpan sp = {});
TermPtr eapp(TermPtr f, TermPtr a);
TermPtr etyapp(TermPtr f, TypePtr ty);
TermPtr elam(std::vector<PatPtr> params, TermPtr body, TermPtr guard = nullptr,
             SourceSpan sp = {});
TermPtr eexbar(std::string binder, TermPtr body, SourceSpan sp = {});
TermPtr epack(std::string binder, TypePtr witness, TermPtr payload,
              TypePtr as_body = nullptr, SourceSpan sp = {});
TermPtr echoice(std::vector<TermPtr> alts, SourceSpan sp = {});
TermPtr elet(std::vector<Binding> binds, TermPtr body, SourceSpan sp = {});
TermPtr ecase(TermPtr scrut, std::vector<CaseBranch> branches, SourceSpan sp = {});
TermPtr econ(std::string ctor, std::vector<TermPtr> args, SourceSpan sp = {});
TermPtr elit(Literal l, SourceSpan sp = {});
TermPtr eprim(std::string op, std::vector<TermPtr> args, SourceSpan sp = {});

// ---------------------------------------------------------------------------
// Programs

struct CtorDecl {
  std::string name;
  TypePtr sig;  // full constructor signature, forall-closed over the params
  SourceSpan span;
};

struct DataDecl {
  std::string name;
  std::vector<std::string> params;
  std::vector<CtorDecl> ctors;
  bool gadt_syntax = false;
  SourceSpan span;
};

struct TopBinding {
  std::string name;
  TypePtr sig;   // mandatory
  TermPtr body;  // equations already desugared to Choice-of-Lams
  SourceSpan span;
};

struct Program {
  std::string file;
  std::vector<DataDecl> datas;
  std::vector<TopBinding> binds;

  const TopBinding* find(const std::string& name) const {
    for (auto& b : binds)
      if (b.name == name) return &b;
    return nullptr;
  }
};

using ProgramPtr = std::shared_ptr<Program>;

// Structural equality ignoring source spans (used by parser round-trip tests
// and the corpus tooling).
bool type_equal_structural(const TypePtr& a, const TypePtr& b);
bool term_equal_structural(const TermPtr& a, const TermPtr& b);
bool pattern_equal_structural(const PatPtr& a, const PatPtr& b);
bool program_equal_structural(const Program& a, const Program& b);

}  // namespace lazyf
