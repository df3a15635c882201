#include "lazyf/pretty.hpp"

#include <sstream>

namespace lazyf {

namespace {

bool type_atomic(const TypePtr& t) {
  switch (t->kind) {
    case TypeKind::Var:
    case TypeKind::Name:
    case TypeKind::Meta:
    case TypeKind::Packed:
      return true;
    case TypeKind::Con:
      return t->args.empty() || t->con == kConTuple;
    default:
      return false;
  }
}

void print_type(std::ostringstream& os, const TypePtr& t, bool atom_pos) {
  switch (t->kind) {
    case TypeKind::Var:
      os << t->var;
      return;
    case TypeKind::Name:
      os << t->label << "#" << t->id;
      return;
    case TypeKind::Meta:
      os << "?" << t->id;
      return;
    case TypeKind::Arrow: {
      if (atom_pos) os << "(";
      // domain binds tighter; arrow is right-associative
      bool dom_parens = t->t1->kind == TypeKind::Arrow ||
                        t->t1->kind == TypeKind::Forall ||
                        t->t1->kind == TypeKind::ExBar;
      if (dom_parens) os << "(";
      print_type(os, t->t1, false);
      if (dom_parens) os << ")";
      os << " -> ";
      print_type(os, t->t2, false);
      if (atom_pos) os << ")";
      return;
    }
    case TypeKind::Forall:
    case TypeKind::ExBar: {
      if (atom_pos) os << "(";
      os << (t->kind == TypeKind::Forall ? "forall " : "exbar ") << t->var;
      TypePtr body = t->t1;
      while (body->kind == t->kind) {  // collapse consecutive binders
        os << " " << body->var;
        body = body->t1;
      }
      os << " . ";
      print_type(os, body, false);
      if (atom_pos) os << ")";
      return;
    }
    case TypeKind::Packed: {
      os << "<(" << t->var << " = ";
      print_type(os, t->t1, false);
      os << "), ";
      print_type(os, t->t2, false);
      os << ">";
      return;
    }
    case TypeKind::Con: {
      if (t->con == kConUnit) {
        os << "()";
        return;
      }
      if (t->con == kConTuple) {
        os << "(";
        for (size_t i = 0; i < t->args.size(); i++) {
          if (i) os << ", ";
          print_type(os, t->args[i], false);
        }
        os << ")";
        return;
      }
      if (t->args.empty()) {
        os << t->con;
        return;
      }
      if (atom_pos) os << "(";
      os << t->con;
      for (auto& a : t->args) {
        os << " ";
        bool p = !type_atomic(a);
        if (p) os << "(";
        print_type(os, a, !p && a->kind == TypeKind::Con && !a->args.empty());
        if (p) os << ")";
      }
      if (atom_pos) os << ")";
      return;
    }
  }
}

}  // namespace

std::string pretty_type(const TypePtr& t) {
  if (!t) return "<null>";
  std::ostringstream os;
  print_type(os, t, false);
  return os.str();
}

namespace {

void print_pattern(std::ostringstream& os, const PatPtr& p, bool atom_pos) {
  switch (p->kind) {
    case PatKind::Var:
      os << p->var;
      return;
    case PatKind::Wild:
      os << "_";
      return;
    case PatKind::Lit:
      os << lit_show(p->lit);
      return;
    case PatKind::Tuple: {
      os << "(";
      for (size_t i = 0; i < p->sub.size(); i++) {
        if (i) os << ", ";
        print_pattern(os, p->sub[i], false);
      }
      os << ")";
      return;
    }
    case PatKind::Con: {
      if (p->sub.empty()) {
        os << p->var;
        return;
      }
      if (atom_pos) os << "(";
      os << p->var;
      for (auto& s : p->sub) {
        os << " ";
        print_pattern(os, s, true);
      }
      if (atom_pos) os << ")";
      return;
    }
    case PatKind::Lazy: {
      os << "~";
      print_pattern(os, p->sub[0], true);
      return;
    }
    case PatKind::Unpack: {
      if (atom_pos) os << "(";
      os << "pack " << p->var << " ";
      print_pattern(os, p->sub[0], true);
      if (atom_pos) os << ")";
      return;
    }
  }
}

}  // namespace

std::string pretty_pattern(const PatPtr& p) {
  if (!p) return "<null>";
  std::ostringstream os;
  print_pattern(os, p, false);
  return os.str();
}

namespace {

// Expression precedence levels used by both parser and printer:
//   0  lambda / let / case / exbar / pack / choice
//   4  < <= ==        (non-assoc)
//   6  + -            (left)
//   7  *              (left)
//   10 application, type application
//   11 atoms
int prim_prec(const std::string& op) {
  if (op == "*") return 7;
  if (op == "+" || op == "-") return 6;
  if (op == "<" || op == "<=" || op == "==") return 4;
  return 10;
}

void print_term(std::ostringstream& os, const TermPtr& t, int min_prec) {
  switch (t->kind) {
    case TermKind::Var:
      os << t->var;
      return;
    case TermKind::Lit:
      os << lit_show(t->lit);
      return;
    case TermKind::App: {
      if (min_prec > 10) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      print_term(os, t->fun, 10);
      os << " ";
      print_term(os, t->arg, 11);
      return;
    }
    case TermKind::TyApp: {
      if (min_prec > 10) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      print_term(os, t->fun, 10);
      os << " [" << pretty_type(t->ty) << "]";
      return;
    }
    case TermKind::Con: {
      if (t->var == kConUnit) {
        os << "()";
        return;
      }
      if (t->var == kConTuple) {
        os << "(";
        for (size_t i = 0; i < t->items.size(); i++) {
          if (i) os << ", ";
          print_term(os, t->items[i], 0);
        }
        os << ")";
        return;
      }
      if (t->items.empty()) {
        os << t->var;
        return;
      }
      if (min_prec > 10) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      os << t->var;
      for (auto& a : t->items) {
        os << " ";
        print_term(os, a, 11);
      }
      return;
    }
    case TermKind::Prim: {
      int p = prim_prec(t->var);
      if (min_prec > p) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      // left-assoc ops allow equal precedence on the left only
      print_term(os, t->items[0], p);
      os << " " << t->var << " ";
      print_term(os, t->items[1], p + 1);
      return;
    }
    case TermKind::Lam: {
      if (min_prec > 0) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      os << "\\";
      for (size_t i = 0; i < t->params.size(); i++) {
        if (i) os << " ";
        print_pattern(os, t->params[i], true);
      }
      if (t->guard) {
        os << " | ";
        print_term(os, t->guard, 0);
      }
      os << " -> ";
      print_term(os, t->body, 0);
      return;
    }
    case TermKind::ExBarIntro: {
      if (min_prec > 0) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      os << "exbar " << t->binder << " . ";
      print_term(os, t->arg, 0);
      return;
    }
    case TermKind::Pack: {
      if (min_prec > 0) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      os << "pack (" << t->binder << " = " << pretty_type(t->ty) << ") ";
      print_term(os, t->arg, 11);
      if (t->ty2) os << " as " << pretty_type(t->ty2);
      return;
    }
    case TermKind::Choice: {
      if (min_prec > 0) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      for (size_t i = 0; i < t->items.size(); i++) {
        if (i) os << " ||| ";
        print_term(os, t->items[i], 1);
      }
      return;
    }
    case TermKind::Let: {
      if (min_prec > 0) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      os << "let { ";
      for (size_t i = 0; i < t->binds.size(); i++) {
        if (i) os << " ; ";
        print_pattern(os, t->binds[i].pat, false);
        os << " = ";
        print_term(os, t->binds[i].rhs, 0);
      }
      os << " } in ";
      print_term(os, t->body, 0);
      return;
    }
    case TermKind::Case: {
      if (min_prec > 0) {
        os << "(";
        print_term(os, t, 0);
        os << ")";
        return;
      }
      os << "case ";
      print_term(os, t->fun, 1);
      os << " of { ";
      for (size_t i = 0; i < t->branches.size(); i++) {
        if (i) os << " ; ";
        print_pattern(os, t->branches[i].pat, false);
        os << " -> ";
        print_term(os, t->branches[i].body, 0);
      }
      os << " }";
      return;
    }
  }
}

}  // namespace

std::string pretty_term(const TermPtr& t) {
  if (!t) return "<null>";
  std::ostringstream os;
  print_term(os, t, 0);
  return os.str();
}

std::string pretty_program(const Program& p) {
  std::ostringstream os;
  for (auto& d : p.datas) {
    os << "data " << d.name;
    for (auto& tp : d.params) os << " " << tp;
    os << " where {";
    for (size_t i = 0; i < d.ctors.size(); i++) {
      os << (i ? " ; " : " ") << d.ctors[i].name << " : " << pretty_type(d.ctors[i].sig);
    }
    os << " } ;\n";
  }
  for (auto& b : p.binds) {
    os << b.name << " : " << pretty_type(b.sig) << " ;\n";
    os << b.name << " = " << pretty_term(b.body) << " ;\n";
  }
  return os.str();
}

}  // namespace lazyf
