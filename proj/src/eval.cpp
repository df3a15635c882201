#include "lazyf/eval.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <variant>

namespace lazyf {

namespace {

struct RuntimeErr {
  Code code;
  std::string msg;
};

[[noreturn]] void rt_fail(Code c, std::string msg) { throw RuntimeErr{c, std::move(msg)}; }

using Ref = int;

struct EnvNode;
using EnvPtr = std::shared_ptr<EnvNode>;

struct EnvNode {
  EnvPtr parent;
  std::vector<std::pair<std::string, Ref>> slots;
};

Ref env_lookup(const EnvPtr& env, const std::string& name) {
  for (const EnvNode* n = env.get(); n; n = n->parent.get())
    for (auto it = n->slots.rbegin(); it != n->slots.rend(); ++it)
      if (it->first == name) return it->second;
  return -1;
}

enum class Prim {
  Add, Sub, Mul, Lt, Le, EqI, Min, Ord, Chr, Show, StrEq, Error
};

struct PrimDef {
  Prim op;
  int arity;
};

const std::unordered_map<std::string, PrimDef>& prim_table() {
  static const std::unordered_map<std::string, PrimDef> t = {
      {"+", {Prim::Add, 2}},     {"-", {Prim::Sub, 2}},   {"*", {Prim::Mul, 2}},
      {"<", {Prim::Lt, 2}},      {"<=", {Prim::Le, 2}},   {"==", {Prim::EqI, 2}},
      {"min", {Prim::Min, 2}},   {"ord", {Prim::Ord, 1}}, {"chr", {Prim::Chr, 1}},
      {"show", {Prim::Show, 1}}, {"strEq", {Prim::StrEq, 2}},
      {"error", {Prim::Error, 1}}};
  return t;
}

struct Closure {
  const Term* node;  // Lam or Choice
  EnvPtr env;
  std::vector<Ref> args;
  int arity;
};

struct DataV {
  std::string ctor;
  std::vector<Ref> fields;
  const Term* site;  // allocation site
};

struct TupleV {
  std::vector<Ref> fields;
};

struct BuiltinV {
  Prim op;
  int arity;
  std::vector<Ref> args;
};

struct CtorFnV {
  std::string ctor;
  int arity;
  std::vector<Ref> args;
  const Term* site;
};

using Value = std::variant<Literal, Closure, DataV, TupleV, BuiltinV, CtorFnV>;

enum class CellState : unsigned char { Thunk, Proj, BlackHole, Valued };

struct Cell {
  CellState state = CellState::Thunk;
  const Term* term = nullptr;  // Thunk body / allocation site
  EnvPtr env;
  Ref src = -1;  // Proj source
  int proj_idx = -1;
  Value val;
  long long match_count = 0;
};

// ---------------------------------------------------------------------------

int ctor_arity_from_sig(const TypePtr& sig) {
  const Type* t = sig.get();
  while (t->kind == TypeKind::Forall) t = t->t1.get();
  int n = 0;
  while (t->kind == TypeKind::Arrow) {
    n++;
    t = t->t2.get();
  }
  return n;
}

struct Machine {
  const Program& prog;
  EvalConfig cfg;
  std::deque<Cell> heap;
  EnvPtr globals = std::make_shared<EnvNode>();
  std::unordered_map<std::string, int> ctor_arity;
  long long steps = 0;
  std::map<const Term*, long long> allocs_by_site;

  explicit Machine(const Program& p, EvalConfig c) : prog(p), cfg(std::move(c)) {
    for (auto& d : prog.datas)
      for (auto& ct : d.ctors) ctor_arity[ct.name] = ctor_arity_from_sig(ct.sig);
  }

  // --- heap ------------------------------------------------------------------

  Ref alloc_thunk(const Term* t, EnvPtr env) {
    heap.push_back(Cell{});
    Cell& c = heap.back();
    c.state = CellState::Thunk;
    c.term = t;
    c.env = std::move(env);
    return (Ref)heap.size() - 1;
  }

  Ref alloc_proj(Ref src, int idx) {
    heap.push_back(Cell{});
    Cell& c = heap.back();
    c.state = CellState::Proj;
    c.src = src;
    c.proj_idx = idx;
    return (Ref)heap.size() - 1;
  }

  Ref alloc_value(Value v) {
    heap.push_back(Cell{});
    Cell& c = heap.back();
    c.state = CellState::Valued;
    c.val = std::move(v);
    return (Ref)heap.size() - 1;
  }

  void count_step() {
    if (++steps > cfg.max_steps)
      rt_fail(Code::StepLimitExceeded,
              "step budget of " + std::to_string(cfg.max_steps) + " exceeded");
  }

  // --- machine frames ----------------------------------------------------------

  struct Frame {
    enum class K { Update, ProjSel, Apply, Alts, Guard, CaseSel, PrimRun } k;
    Ref cell = -1;               // Update/ProjSel
    std::vector<Ref> args;       // Apply pending / Alts args / PrimRun arg cells
    size_t idx = 0;              // Apply next arg / Alts alt index / PrimRun arg idx
    const Term* node = nullptr;  // Alts: Lam|Choice; CaseSel: Case; Guard: the Lam
    EnvPtr env;                  // Alts/CaseSel closure env; Guard bound env
    Ref scrut = -1;              // CaseSel
    std::vector<Ref> counted;    // match episode cells
    Prim op = Prim::Add;         // PrimRun
    std::vector<Value> vals;     // PrimRun collected
    EnvPtr bound_env;            // Guard: environment with parameter binds
  };

  std::vector<Frame> stack;

  struct Control {
    enum class K { Eval, Force, Ret } k;
    const Term* term = nullptr;
    EnvPtr env;
    Ref ref = -1;
    Value val;
  };

  Control ctl;

  void set_eval(const Term* t, EnvPtr env) {
    ctl.k = Control::K::Eval;
    ctl.term = t;
    ctl.env = std::move(env);
  }
  void set_force(Ref r) {
    ctl.k = Control::K::Force;
    ctl.ref = r;
  }
  void set_ret(Value v) {
    ctl.k = Control::K::Ret;
    ctl.val = std::move(v);
  }

  // --- lazy binding ---------------------------------------------------------------

  void bind_lazy(const PatPtr& p, Ref r, std::vector<std::pair<std::string, Ref>>& out) {
    switch (p->kind) {
      case PatKind::Var:
        out.emplace_back(p->var, r);
        return;
      case PatKind::Wild:
      case PatKind::Lit:
        return;  // never forced by a lazy binding
      case PatKind::Lazy:
      case PatKind::Unpack:
        bind_lazy(p->sub[0], r, out);
        return;
      case PatKind::Tuple:
      case PatKind::Con:
        for (size_t i = 0; i < p->sub.size(); i++) {
          const PatPtr& s = p->sub[i];
          if (s->kind == PatKind::Wild || s->kind == PatKind::Lit) continue;
          bind_lazy(s, alloc_proj(r, (int)i), out);
        }
        return;
    }
  }

  // --- strict matching --------------------------------------------------------------

  struct MatchRes {
    enum class K { Match, NoMatch, Need } k;
    Ref need = -1;
  };

  MatchRes try_match(const PatPtr& p, Ref r,
                     std::vector<std::pair<std::string, Ref>>& binds,
                     std::vector<Ref>& episode) {
    switch (p->kind) {
      case PatKind::Var:
        binds.emplace_back(p->var, r);
        return {MatchRes::K::Match, -1};
      case PatKind::Wild:
        return {MatchRes::K::Match, -1};
      case PatKind::Lazy:
      case PatKind::Unpack:
        bind_lazy(p->sub[0], r, binds);
        return {MatchRes::K::Match, -1};
      case PatKind::Lit: {
        Cell& c = heap[r];
        if (c.state != CellState::Valued) return {MatchRes::K::Need, r};
        const Literal* l = std::get_if<Literal>(&c.val);
        if (!l) rt_fail(Code::PatternMatchFailure, "literal pattern on non-literal");
        return lit_equal(*l, p->lit) ? MatchRes{MatchRes::K::Match, -1}
                                     : MatchRes{MatchRes::K::NoMatch, -1};
      }
      case PatKind::Tuple: {
        Cell& c = heap[r];
        if (c.state != CellState::Valued) return {MatchRes::K::Need, r};
        const TupleV* v = std::get_if<TupleV>(&c.val);
        if (!v || v->fields.size() != p->sub.size())
          rt_fail(Code::PatternMatchFailure, "tuple pattern mismatch");
        for (size_t i = 0; i < p->sub.size(); i++) {
          MatchRes m = try_match(p->sub[i], v->fields[i], binds, episode);
          if (m.k != MatchRes::K::Match) return m;
        }
        return {MatchRes::K::Match, -1};
      }
      case PatKind::Con: {
        Cell& c = heap[r];
        if (c.state != CellState::Valued) return {MatchRes::K::Need, r};
        const DataV* v = std::get_if<DataV>(&c.val);
        if (!v) rt_fail(Code::PatternMatchFailure, "constructor pattern on non-data");
        if (std::find(episode.begin(), episode.end(), r) == episode.end()) {
          episode.push_back(r);
          heap[r].match_count++;
        }
        if (v->ctor != p->var) return {MatchRes::K::NoMatch, -1};
        for (size_t i = 0; i < p->sub.size(); i++) {
          MatchRes m = try_match(p->sub[i], v->fields[i], binds, episode);
          if (m.k != MatchRes::K::Match) return m;
        }
        return {MatchRes::K::Match, -1};
      }
    }
    return {MatchRes::K::NoMatch, -1};
  }

  // --- evaluation --------------------------------------------------------------------

  Ref cell_for(const TermPtr& t, const EnvPtr& env) {
    if (t->kind == TermKind::Var) {
      Ref r = env_lookup(env, t->var);
      if (r >= 0) return r;
      Ref g = env_lookup(globals, t->var);
      if (g >= 0) return g;
      // builtin or constructor used as a value
      auto pit = prim_table().find(t->var);
      if (pit != prim_table().end())
        return alloc_value(BuiltinV{pit->second.op, pit->second.arity, {}});
      auto cit = ctor_arity.find(t->var);
      if (cit != ctor_arity.end()) {
        if (cit->second == 0) return alloc_value(make_data(t->var, {}, t.get()));
        return alloc_value(CtorFnV{t->var, cit->second, {}, t.get()});
      }
      rt_fail(Code::ApplyNonFunction, "unbound variable '" + t->var + "' at runtime");
    }
    return alloc_thunk(t.get(), env);
  }

  DataV make_data(const std::string& ctor, std::vector<Ref> fields, const Term* site) {
    allocs_by_site[site]++;
    return DataV{ctor, std::move(fields), site};
  }

  static int closure_arity(const Term* node) {
    if (node->kind == TermKind::Lam) return (int)node->params.size();
    const Term* alt = node->items[0].get();
    while (alt->kind == TermKind::ExBarIntro) alt = alt->arg.get();
    return (int)alt->params.size();
  }

  void trace_force(Ref r, const Cell& c, const char* what) {
    if (!cfg.trace || !cfg.trace_out) return;
    const Term* site = c.term;
    *cfg.trace_out << "force cell#" << r << " (site "
                   << (site ? site->span.file : "<proj>") << ":"
                   << (site ? site->span.line : 0) << ") -> " << what << "\n";
  }

  const char* value_desc(const Value& v) {
    if (std::holds_alternative<Literal>(v)) return "literal";
    if (std::holds_alternative<Closure>(v)) return "closure";
    if (std::holds_alternative<DataV>(v)) return "data";
    if (std::holds_alternative<TupleV>(v)) return "tuple";
    if (std::holds_alternative<BuiltinV>(v)) return "builtin";
    return "constructor";
  }

  void step_eval() {
    const Term* t = ctl.term;
    EnvPtr env = ctl.env;
    switch (t->kind) {
      case TermKind::Var: {
        Ref r = env_lookup(env, t->var);
        if (r < 0) r = env_lookup(globals, t->var);
        if (r >= 0) {
          set_force(r);
          return;
        }
        auto pit = prim_table().find(t->var);
        if (pit != prim_table().end()) {
          set_ret(BuiltinV{pit->second.op, pit->second.arity, {}});
          return;
        }
        auto cit = ctor_arity.find(t->var);
        if (cit != ctor_arity.end()) {
          if (cit->second == 0) set_ret(make_data(t->var, {}, t));
          else set_ret(CtorFnV{t->var, cit->second, {}, t});
          return;
        }
        rt_fail(Code::ApplyNonFunction, "unbound variable '" + t->var + "' at runtime");
      }
      case TermKind::Lit:
        set_ret(t->lit);
        return;
      case TermKind::Lam:
      case TermKind::Choice:
        set_ret(Closure{t, env, {}, closure_arity(t)});
        return;
      case TermKind::ExBarIntro:
        set_eval(t->arg.get(), env);
        return;
      case TermKind::Pack:
        set_eval(t->arg.get(), env);
        return;
      case TermKind::TyApp:
        set_eval(t->fun.get(), env);
        return;
      case TermKind::App: {
        Frame f;
        f.k = Frame::K::Apply;
        f.args.push_back(cell_for(t->arg, env));
        f.idx = 0;
        stack.push_back(std::move(f));
        set_eval(t->fun.get(), env);
        return;
      }
      case TermKind::Con: {
        if (t->var == kConUnit) {
          set_ret(lit_unit());
          return;
        }
        std::vector<Ref> fields;
        fields.reserve(t->items.size());
        for (auto& a : t->items) fields.push_back(cell_for(a, env));
        if (t->var == kConTuple) {
          set_ret(TupleV{std::move(fields)});
          return;
        }
        auto cit = ctor_arity.find(t->var);
        int arity = cit == ctor_arity.end() ? (int)t->items.size() : cit->second;
        if ((int)fields.size() == arity)
          set_ret(make_data(t->var, std::move(fields), t));
        else
          set_ret(CtorFnV{t->var, arity, std::move(fields), t});
        return;
      }
      case TermKind::Prim: {
        Frame f;
        f.k = Frame::K::PrimRun;
        f.op = prim_table().at(t->var).op;
        for (auto& a : t->items) f.args.push_back(cell_for(a, env));
        f.idx = 0;
        Ref first = f.args[0];
        stack.push_back(std::move(f));
        set_force(first);
        return;
      }
      case TermKind::Let: {
        EnvPtr env2 = std::make_shared<EnvNode>();
        env2->parent = env;
        for (auto& b : t->binds) {
          Ref rhs = alloc_thunk(b.rhs.get(), env2);
          bind_lazy(b.pat, rhs, env2->slots);
        }
        set_eval(t->body.get(), env2);
        return;
      }
      case TermKind::Case: {
        Frame f;
        f.k = Frame::K::CaseSel;
        f.node = t;
        f.env = env;
        f.scrut = cell_for(t->fun, env);
        f.idx = 0;
        drive_case(std::move(f));
        return;
      }
    }
  }


  void drive_case(Frame&& f) {
    const Term* node = f.node;
    for (size_t k = f.idx; k < node->branches.size(); k++) {
      std::vector<std::pair<std::string, Ref>> binds;
      MatchRes m = try_match(node->branches[k].pat, f.scrut, binds, f.counted);
      if (m.k == MatchRes::K::Need) {
        f.idx = k;
        Ref need = m.need;
        stack.push_back(std::move(f));
        set_force(need);
        return;
      }
      if (m.k == MatchRes::K::Match) {
        EnvPtr env2 = std::make_shared<EnvNode>();
        env2->parent = f.env;
        env2->slots = std::move(binds);
        set_eval(node->branches[k].body.get(), env2);
        return;
      }
    }
    rt_fail(Code::PatternMatchFailure, "no case branch matched");
  }

  static const Term* alt_lam(const Term* node, size_t k) {
    const Term* alt =
        node->kind == TermKind::Choice ? node->items[k].get() : node;
    while (alt->kind == TermKind::ExBarIntro) alt = alt->arg.get();
    return alt;
  }

  static size_t alt_count(const Term* node) {
    return node->kind == TermKind::Choice ? node->items.size() : 1;
  }

  void drive_alts(Frame&& f) {
    const Term* node = f.node;
    for (size_t k = f.idx; k < alt_count(node); k++) {
      const Term* lam = alt_lam(node, k);
      std::vector<std::pair<std::string, Ref>> binds;
      bool nomatch = false;
      for (size_t i = 0; i < lam->params.size(); i++) {
        MatchRes m = try_match(lam->params[i], f.args[i], binds, f.counted);
        if (m.k == MatchRes::K::Need) {
          f.idx = k;
          Ref need = m.need;
          stack.push_back(std::move(f));
          set_force(need);
          return;
        }
        if (m.k == MatchRes::K::NoMatch) {
          nomatch = true;
          break;
        }
      }
      if (nomatch) continue;
      EnvPtr env2 = std::make_shared<EnvNode>();
      env2->parent = f.env;
      env2->slots = std::move(binds);
      if (lam->guard) {
        Frame g;
        g.k = Frame::K::Guard;
        g.node = f.node;
        g.env = f.env;
        g.args = f.args;
        g.idx = k;
        g.counted = f.counted;
        g.vals.clear();
        // keep the bound environment for the body
        g.cell = -1;
        g.scrut = -1;
        g.bound_env = env2;
        stack.push_back(std::move(g));
        set_eval(lam->guard.get(), env2);
        return;
      }
      set_eval(lam->body.get(), env2);
      return;
    }
    rt_fail(Code::PatternMatchFailure, "no function alternative matched");
  }

  void apply_builtin_saturated(BuiltinV&& b) {
    Frame f;
    f.k = Frame::K::PrimRun;
    f.op = b.op;
    f.args = std::move(b.args);
    f.idx = 0;
    Ref first = f.args[0];
    stack.push_back(std::move(f));
    set_force(first);
  }

  void run_prim(Frame& f) {
    // all argument values collected in f.vals
    auto as_int = [&](size_t i) { return std::get<Literal>(f.vals[i]).int_val; };
    switch (f.op) {
      case Prim::Add: set_ret(lit_int(as_int(0) + as_int(1))); return;
      case Prim::Sub: set_ret(lit_int(as_int(0) - as_int(1))); return;
      case Prim::Mul: set_ret(lit_int(as_int(0) * as_int(1))); return;
      case Prim::Lt: set_ret(lit_bool(as_int(0) < as_int(1))); return;
      case Prim::Le: set_ret(lit_bool(as_int(0) <= as_int(1))); return;
      case Prim::EqI: set_ret(lit_bool(as_int(0) == as_int(1))); return;
      case Prim::Min: set_ret(lit_int(std::min(as_int(0), as_int(1)))); return;
      case Prim::Ord:
        set_ret(lit_int((long long)(unsigned char)std::get<Literal>(f.vals[0]).char_val));
        return;
      case Prim::Chr: {
        long long v = as_int(0);
        if (v < 0 || v > 255) rt_fail(Code::PrimitiveError, "chr out of range");
        set_ret(lit_char((char)v));
        return;
      }
      case Prim::Show:
        set_ret(lit_string(std::to_string(as_int(0))));
        return;
      case Prim::StrEq:
        set_ret(lit_bool(std::get<Literal>(f.vals[0]).string_val ==
                         std::get<Literal>(f.vals[1]).string_val));
        return;
      case Prim::Error:
        rt_fail(Code::PrimitiveError,
                "error: " + std::get<Literal>(f.vals[0]).string_val);
    }
  }

  void ret_into_frame(Frame&& f) {
    switch (f.k) {
      case Frame::K::Update: {
        Cell& c = heap[f.cell];
        c.state = CellState::Valued;
        c.val = ctl.val;
        c.env.reset();
        trace_force(f.cell, c, value_desc(ctl.val));
        return;  // control stays Ret
      }
      case Frame::K::ProjSel: {
        const Value& w = ctl.val;
        Ref field = -1;
        if (const TupleV* tv = std::get_if<TupleV>(&w)) {
          if (f.idx >= tv->fields.size())
            rt_fail(Code::PatternMatchFailure, "irrefutable pattern failed");
          field = tv->fields[f.idx];
        } else if (const DataV* dv = std::get_if<DataV>(&w)) {
          if (f.idx >= dv->fields.size())
            rt_fail(Code::PatternMatchFailure, "irrefutable pattern failed");
          field = dv->fields[f.idx];
        } else {
          rt_fail(Code::PatternMatchFailure, "irrefutable pattern failed");
        }
        Frame u;
        u.k = Frame::K::Update;
        u.cell = f.cell;
        stack.push_back(std::move(u));
        set_force(field);
        return;
      }
      case Frame::K::Apply: {
        Value fv = std::move(ctl.val);
        size_t remaining = f.args.size() - f.idx;
        if (Closure* cl = std::get_if<Closure>(&fv)) {
          size_t needed = (size_t)cl->arity - cl->args.size();
          size_t take = std::min(needed, remaining);
          for (size_t i = 0; i < take; i++) cl->args.push_back(f.args[f.idx + i]);
          f.idx += take;
          if (cl->args.size() < (size_t)cl->arity) {
            set_ret(std::move(fv));
            return;
          }
          if (f.idx < f.args.size()) stack.push_back(f);  // leftover args
          Frame alts;
          alts.k = Frame::K::Alts;
          alts.node = cl->node;
          alts.env = cl->env;
          alts.args = std::move(cl->args);
          alts.idx = 0;
          drive_alts(std::move(alts));
          return;
        }
        if (BuiltinV* b = std::get_if<BuiltinV>(&fv)) {
          size_t needed = (size_t)b->arity - b->args.size();
          size_t take = std::min(needed, remaining);
          for (size_t i = 0; i < take; i++) b->args.push_back(f.args[f.idx + i]);
          f.idx += take;
          if (b->args.size() < (size_t)b->arity) {
            set_ret(std::move(fv));
            return;
          }
          if (f.idx < f.args.size()) stack.push_back(f);
          apply_builtin_saturated(std::move(*b));
          return;
        }
        if (CtorFnV* ct = std::get_if<CtorFnV>(&fv)) {
          size_t needed = (size_t)ct->arity - ct->args.size();
          size_t take = std::min(needed, remaining);
          for (size_t i = 0; i < take; i++) ct->args.push_back(f.args[f.idx + i]);
          f.idx += take;
          if (ct->args.size() < (size_t)ct->arity) {
            set_ret(std::move(fv));
            return;
          }
          if (f.idx < f.args.size()) stack.push_back(f);
          set_ret(make_data(ct->ctor, std::move(ct->args), ct->site));
          return;
        }
        rt_fail(Code::ApplyNonFunction, "application of a non-function value");
      }
      case Frame::K::Alts:
        // a forced cell came back; retry the alternatives
        drive_alts(std::move(f));
        return;
      case Frame::K::Guard: {
        const Literal* l = std::get_if<Literal>(&ctl.val);
        if (l && l->kind == LitKind::Bool && l->bool_val) {
          const Term* lam = alt_lam(f.node, f.idx);
          set_eval(lam->body.get(), f.bound_env);
          return;
        }
        f.idx++;
        Frame alts;
        alts.k = Frame::K::Alts;
        alts.node = f.node;
        alts.env = f.env;
        alts.args = std::move(f.args);
        alts.idx = f.idx;
        alts.counted = std::move(f.counted);
        drive_alts(std::move(alts));
        return;
      }
      case Frame::K::CaseSel:
        drive_case(std::move(f));
        return;
      case Frame::K::PrimRun: {
        f.vals.push_back(std::move(ctl.val));
        f.idx++;
        if (f.idx < f.args.size()) {
          Ref next = f.args[f.idx];
          stack.push_back(std::move(f));
          set_force(next);
          return;
        }
        run_prim(f);
        return;
      }
    }
  }

  Value force(Ref root) {
    size_t base = stack.size();
    set_force(root);
    for (;;) {
      switch (ctl.k) {
        case Control::K::Force: {
          Cell& c = heap[ctl.ref];
          switch (c.state) {
            case CellState::Valued:
              set_ret(c.val);
              break;
            case CellState::BlackHole:
              rt_fail(Code::CycleDetected, "black hole re-entered (value depends on itself)");
            case CellState::Thunk: {
              count_step();
              c.state = CellState::BlackHole;
              Frame u;
              u.k = Frame::K::Update;
              u.cell = ctl.ref;
              stack.push_back(std::move(u));
              set_eval(c.term, c.env);
              break;
            }
            case CellState::Proj: {
              count_step();
              c.state = CellState::BlackHole;
              Frame p;
              p.k = Frame::K::ProjSel;
              p.cell = ctl.ref;
              p.idx = (size_t)c.proj_idx;
              Ref src = c.src;
              stack.push_back(std::move(p));
              set_force(src);
              break;
            }
          }
          break;
        }
        case Control::K::Eval:
          step_eval();
          break;
        case Control::K::Ret: {
          if (stack.size() == base) return std::move(ctl.val);
          Frame f = std::move(stack.back());
          stack.pop_back();
          ret_into_frame(std::move(f));
          break;
        }
      }
    }
  }

  // --- program setup -------------------------------------------------------------------

  void load_globals() {
    for (auto& b : prog.binds) {
      Ref r = alloc_thunk(b.body.get(), globals);
      globals->slots.emplace_back(b.name, r);
    }
  }

  // --- deep forcing and rendering --------------------------------------------------------

  void deep_force(Ref root) {
    std::vector<std::pair<Ref, size_t>> stk;  // cell, next child
    std::unordered_set<Ref> on_path;
    stk.emplace_back(root, 0);
    while (!stk.empty()) {
      auto& [r, child] = stk.back();
      if (child == 0) {
        if (on_path.count(r))
          rt_fail(Code::CycleDetected, "cyclic value cannot be printed");
        on_path.insert(r);
        force(r);
      }
      const Value& v = heap[r].val;
      const std::vector<Ref>* fields = nullptr;
      if (const DataV* dv = std::get_if<DataV>(&v)) fields = &dv->fields;
      else if (const TupleV* tv = std::get_if<TupleV>(&v)) fields = &tv->fields;
      if (!fields || child >= fields->size()) {
        on_path.erase(r);
        stk.pop_back();
        continue;
      }
      Ref next = (*fields)[child];
      child++;
      stk.emplace_back(next, 0);
    }
  }

  std::string render(Ref r, bool atom) {
    const Value& v = heap[r].val;
    if (const Literal* l = std::get_if<Literal>(&v)) return lit_show(*l);
    if (const TupleV* tv = std::get_if<TupleV>(&v)) {
      std::string s = "(";
      for (size_t i = 0; i < tv->fields.size(); i++) {
        if (i) s += ", ";
        s += render(tv->fields[i], false);
      }
      return s + ")";
    }
    if (const DataV* dv = std::get_if<DataV>(&v)) {
      if (dv->fields.empty()) return dv->ctor;
      std::string s = dv->ctor;
      for (Ref f : dv->fields) s += " " + render(f, true);
      if (atom) s = "(" + s + ")";
      return s;
    }
    return "<function>";
  }

  void collect_counters(EvalOutcome& out) {
    std::map<std::pair<const Term*, std::string>, CounterRow> rows;
    for (Ref r = 0; r < (Ref)heap.size(); r++) {
      const Cell& c = heap[r];
      if (c.state != CellState::Valued) continue;
      const DataV* dv = std::get_if<DataV>(&c.val);
      if (!dv || !dv->site) continue;
      CellCount cc;
      cc.site = dv->site->span;
      cc.ctor = dv->ctor;
      cc.matches = c.match_count;
      out.cell_counts.push_back(cc);
      auto& row = rows[{dv->site, dv->ctor}];
      row.site = dv->site->span;
      row.ctor = dv->ctor;
      row.matches += c.match_count;
    }
    for (auto& [site, n] : allocs_by_site) {
      // attribute allocations to rows; sites without surviving data cells
      // still get an alloc row
      for (auto& [key, row] : rows)
        if (key.first == site) row.allocs = n;
    }
    for (auto& [key, row] : rows) out.site_counters.push_back(row);
  }
};

}  // namespace

EvalOutcome eval_main(const Program& p, const EvalConfig& cfg0) {
  EvalOutcome out;
  EvalConfig cfg = cfg0;
  if (cfg.max_steps < 1) cfg.max_steps = 1;
  Machine m(p, cfg);
  m.load_globals();
  Ref main_ref = env_lookup(m.globals, "main");
  if (main_ref < 0) {
    out.error = Code::IOError;
    out.error_message = "program has no 'main'";
    return out;
  }
  try {
    m.deep_force(main_ref);
    out.rendered = m.render(main_ref, false);
    out.ok = true;
  } catch (RuntimeErr& e) {
    out.error = e.code;
    out.error_message = e.msg;
  }
  out.steps = m.steps;
  m.collect_counters(out);
  return out;
}

ForceTwiceReport force_twice(const Program& p, const std::string& name,
                             const EvalConfig& cfg) {
  Machine m(p, cfg);
  m.load_globals();
  Ref r = env_lookup(m.globals, name);
  ForceTwiceReport rep;
  if (r < 0) return rep;
  long long before = m.steps;
  m.force(r);
  rep.first_steps = m.steps - before;
  before = m.steps;
  m.force(r);
  rep.second_steps = m.steps - before;
  return rep;
}

}  // namespace lazyf
