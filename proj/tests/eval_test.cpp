#include "lazyf/eval.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <sstream>

#include "lazyf/corpus.hpp"
#include "lazyf/parser.hpp"
#include "lazyf/typecheck.hpp"
#include "test_util.hpp"

using namespace lazyf;
using lazyf::testing::check_or_die;
using lazyf::testing::parse_corpus;
using lazyf::testing::parse_or_die;

namespace {

EvalOutcome run_text(const std::string& text, long long budget = 1'000'000,
                     bool counters = false) {
  ProgramPtr p = parse_or_die(text);
  check_or_die(*p);
  EvalConfig cfg;
  cfg.max_steps = budget;
  cfg.counters = counters;
  return eval_main(*p, cfg);
}

std::string run_value(const std::string& text) {
  EvalOutcome out = run_text(text);
  EXPECT_TRUE(out.ok) << out.error_message;
  return out.rendered;
}

Code run_error(const std::string& text, long long budget = 100'000) {
  EvalOutcome out = run_text(text, budget);
  EXPECT_FALSE(out.ok);
  return out.error;
}

// --- force -------------------------------------------------------------------------

TEST(Force, SecondForceIsStepFree) {
  ProgramPtr p = parse_or_die("main : Int ; main = 1 + 2 * 3 ;");
  check_or_die(*p);
  EvalConfig cfg;
  ForceTwiceReport rep = force_twice(*p, "main", cfg);
  EXPECT_GT(rep.first_steps, 0);
  EXPECT_EQ(rep.second_steps, 0);
}

TEST(Force, SelfDependentThunkIsCycle) {
  EXPECT_EQ(run_error("main : Int ; main = let { x = x } in x ;"),
            Code::CycleDetected);
}

TEST(Force, ProductiveKnotTerminates) {
  // let { (m, r) = repmin' t m } on a leaf tree
  EXPECT_EQ(run_value("data Tree = Leaf Int | Bin Tree Tree ;\n"
                      "repmin' : Tree -> Int -> (Int, Tree) ;\n"
                      "repmin' (Leaf v) m = (v, Leaf m) ;\n"
                      "repmin' (Bin l r) m = (0, Leaf 0) ;\n"
                      "main : Tree ;\n"
                      "main = let { (m, r) = repmin' (Leaf 7) m } in r ;\n"),
            "Leaf 7");
}

// --- match --------------------------------------------------------------------------

TEST(Match, LazyTupleDoesNotForce) {
  // the scrutinee would error if forced; the irrefutable match never does
  EXPECT_EQ(run_value("f : (Int, Int) -> Int ;\n"
                      "f ~(a, b) = 7 ;\n"
                      "main : Int ;\n"
                      "main = f (error \"boom\") ;\n"),
            "7");
}

TEST(Match, StrictTupleForces) {
  EXPECT_EQ(run_error("f : (Int, Int) -> Int ;\n"
                      "f (a, b) = 7 ;\n"
                      "main : Int ;\n"
                      "main = f (error \"boom\") ;\n"),
            Code::PrimitiveError);
}

TEST(Match, LazyProjectionForcesOnDemand) {
  EXPECT_EQ(run_value("f : (Int, Int) -> Int ;\n"
                      "f ~(a, b) = a ;\n"
                      "main : Int ;\n"
                      "main = f (4, error \"unused\") ;\n"),
            "4");
}

TEST(Match, AlternativesTriedInOrder) {
  EXPECT_EQ(run_value("data Tree = Leaf Int | Bin Tree Tree ;\n"
                      "h : Bool -> Int ;\n"
                      "h True = 1 ;\n"
                      "h False = 2 ;\n"
                      "main : Int ;\n"
                      "main = h False ;\n"),
            "2");
}

TEST(Match, NoAlternativeMatches) {
  EXPECT_EQ(run_error("h : Bool -> Int ;\n"
                      "h True = 1 ;\n"
                      "main : Int ;\n"
                      "main = h False ;\n"),
            Code::PatternMatchFailure);
}

TEST(Match, GuardFailureFallsThrough) {
  EXPECT_EQ(run_value("k : Int -> Int ;\n"
                      "k v | v < 3 = 1 ;\n"
                      "k v = 2 ;\n"
                      "main : Int ;\n"
                      "main = k 2 + k 5 ;\n"),
            "3");
}

TEST(Match, ArgumentsSharedAcrossAlternatives) {
  // the failing first alternative forces the argument; the second sees the
  // same cell, so the whole run performs the work once
  ProgramPtr p = parse_or_die(
      "data T2 = A | B ;\n"
      "pick : T2 -> Int ;\n"
      "pick A = 1 ;\n"
      "pick B = 2 ;\n"
      "main : Int ;\n"
      "main = pick B ;\n");
  check_or_die(*p);
  EvalConfig cfg;
  cfg.counters = true;
  EvalOutcome out = eval_main(*p, cfg);
  ASSERT_TRUE(out.ok);
  // one episode: the B cell is counted once even though two alternatives
  // inspected it
  long long total = 0;
  for (auto& cc : out.cell_counts)
    if (cc.ctor == "B") total += cc.matches;
  EXPECT_EQ(total, 1);
}

// --- type erasure ---------------------------------------------------------------------

TermPtr strip_types(const TermPtr& t);

PatPtr strip_types_pat(const PatPtr& p) {
  switch (p->kind) {
    case PatKind::Unpack:
      return strip_types_pat(p->sub[0]);
    case PatKind::Var:
    case PatKind::Wild:
    case PatKind::Lit:
      return p;
    default: {
      auto q = std::make_shared<Pattern>(*p);
      for (auto& s : q->sub) s = strip_types_pat(s);
      return q;
    }
  }
}

TermPtr strip_types(const TermPtr& t) {
  if (!t) return t;
  switch (t->kind) {
    case TermKind::TyApp:
      return strip_types(t->fun);
    case TermKind::Pack:
    case TermKind::ExBarIntro:
      return strip_types(t->arg);
    default: {
      auto u = std::make_shared<Term>(*t);
      u->fun = strip_types(u->fun);
      u->arg = strip_types(u->arg);
      u->guard = strip_types(u->guard);
      u->body = strip_types(u->body);
      for (auto& i : u->items) i = strip_types(i);
      for (auto& b : u->binds) {
        b.pat = strip_types_pat(b.pat);
        b.rhs = strip_types(b.rhs);
      }
      for (auto& br : u->branches) {
        br.pat = strip_types_pat(br.pat);
        br.body = strip_types(br.body);
      }
      for (auto& pp : u->params) pp = strip_types_pat(pp);
      return u;
    }
  }
}

TEST(Erasure, StrippedProgramsAgreeOnValueAndSteps) {
  const char* files[] = {"repmin.lzf",       "repmin_strict.lzf", "repmin2.lzf",
                         "idtree.lzf",       "idtree_annot.lzf",  "idtree_twophase.lzf",
                         "sorttree_list.lzf", "sorttree_prod.lzf", "st_v1.lzf",
                         "st_demo.lzf",      "prelude.lzf",       "idtree_inf.lzf"};
  for (const char* f : files) {
    ProgramPtr p = parse_corpus(f);
    ASSERT_TRUE(check_program(*p).ok) << f;
    Program stripped = *p;
    for (auto& b : stripped.binds) b.body = strip_types(b.body);
    EvalConfig cfg;
    EvalOutcome a = eval_main(*p, cfg);
    EvalOutcome b = eval_main(stripped, cfg);
    ASSERT_TRUE(a.ok) << f;
    ASSERT_TRUE(b.ok) << f;
    EXPECT_EQ(a.rendered, b.rendered) << f;
    EXPECT_EQ(a.steps, b.steps) << f;
  }
}

TEST(Erasure, TypeApplicationCostsNothing) {
  ProgramPtr p1 = parse_or_die(
      "id2 : forall a . a -> a ; id2 x = x ;\n"
      "main : Int ; main = id2 [Int] 4 ;\n");
  ProgramPtr p2 = parse_or_die(
      "id2 : forall a . a -> a ; id2 x = x ;\n"
      "main : Int ; main = id2 4 ;\n");
  check_or_die(*p1);
  check_or_die(*p2);
  EvalConfig cfg;
  EXPECT_EQ(eval_main(*p1, cfg).steps, eval_main(*p2, cfg).steps);
}

// --- budgets and cycles ------------------------------------------------------------------

TEST(Budget, InfiniteListExceedsBudget) {
  EXPECT_EQ(run_error("data List a = Nil | Cons a (List a) ;\n"
                      "nats : Int -> List Int ;\n"
                      "nats n = Cons n (nats (n + 1)) ;\n"
                      "main : List Int ;\n"
                      "main = nats 0 ;\n",
                      10'000),
            Code::StepLimitExceeded);
}

TEST(Budget, CyclicValueAsMainIsCycleDetected) {
  EXPECT_EQ(run_error("data List a = Nil | Cons a (List a) ;\n"
                      "main : List Int ;\n"
                      "main = let { xs = Cons 1 xs } in xs ;\n"),
            Code::CycleDetected);
}

// --- counters -------------------------------------------------------------------------------

long long counted_matches(const EvalOutcome& out, const std::string& ctor) {
  long long n = 0;
  for (auto& cc : out.cell_counts)
    if (cc.ctor == ctor) n += cc.matches;
  return n;
}

TEST(Counters, StrictRepminMatchesTwicePerNode) {
  ProgramPtr p = parse_corpus("repmin_strict.lzf");
  check_or_die(*p);
  GeneratedTree g = gen_tree(11, 5);
  Program p2 = with_generated_main(*p, "repmin", g);
  ASSERT_TRUE(check_program(p2).ok);
  EvalConfig cfg;
  cfg.counters = true;
  EvalOutcome out = eval_main(p2, cfg);
  ASSERT_TRUE(out.ok);
  EXPECT_EQ(check_generated_match_counts(out, 2), "");
}

TEST(Counters, LazyRepminMatchesOncePerNode) {
  for (const char* f : {"repmin.lzf", "repmin2.lzf"}) {
    ProgramPtr p = parse_corpus(f);
    check_or_die(*p);
    GeneratedTree g = gen_tree(12, 5);
    Program p2 = with_generated_main(*p, f == std::string("repmin.lzf")
                                             ? "repmin"
                                             : "repmin2",
                                     g);
    ASSERT_TRUE(check_program(p2).ok);
    EvalConfig cfg;
    cfg.counters = true;
    EvalOutcome out = eval_main(p2, cfg);
    ASSERT_TRUE(out.ok) << f;
    EXPECT_EQ(check_generated_match_counts(out, 1), "") << f;
  }
}

// --- memoization property over random thunks -------------------------------------------------

std::string random_arith(std::mt19937_64& rng, int depth) {
  if (depth <= 0) return std::to_string(rng() % 100);
  switch (rng() % 4) {
    case 0: return "(" + random_arith(rng, depth - 1) + " + " +
                   random_arith(rng, depth - 1) + ")";
    case 1: return "(" + random_arith(rng, depth - 1) + " * " +
                   random_arith(rng, depth - 1) + ")";
    case 2: return "(min " + random_arith(rng, depth - 1) + " " +
                   random_arith(rng, depth - 1) + ")";
    default:
      return "(let { q = " + random_arith(rng, depth - 1) + " } in q + q)";
  }
}

TEST(Memoization, ThousandRandomThunks) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; i++) {
    std::string text = "main : Int ;\nmain = " + random_arith(rng, 3) + " ;\n";
    ProgramPtr p = parse_or_die(text);
    ASSERT_TRUE(check_program(*p).ok) << text;
    EvalConfig cfg;
    ForceTwiceReport rep = force_twice(*p, "main", cfg);
    ASSERT_GT(rep.first_steps, 0) << text;
    ASSERT_EQ(rep.second_steps, 0) << text;
  }
}

TEST(Determinism, IdenticalStepsAndOutputs) {
  for (const char* f : {"repmin.lzf", "st_demo.lzf", "sorttree_prod.lzf"}) {
    ProgramPtr p = parse_corpus(f);
    check_or_die(*p);
    EvalConfig cfg;
    EvalOutcome a = eval_main(*p, cfg);
    EvalOutcome b = eval_main(*p, cfg);
    EXPECT_EQ(a.rendered, b.rendered) << f;
    EXPECT_EQ(a.steps, b.steps) << f;
  }
}

TEST(St, WriteSTRefThreadsState) {
  std::string lib = lazyf::testing::read_file(lazyf::testing::corpus_dir() + "/st.lzf");
  std::string prog = lib +
      "\nmain : Int ;\n"
      "main = runST (bindST (newSTRef 1) (\\r ->\n"
      "       bindST (writeSTRef r 9) (\\u ->\n"
      "       readSTRef r))) ;\n";
  EXPECT_EQ(run_value(prog), "9");
}

TEST(St, TwoRefsInterleaved) {
  std::string lib = lazyf::testing::read_file(lazyf::testing::corpus_dir() + "/st.lzf");
  std::string prog = lib +
      "\nmain : (Int, Int) ;\n"
      "main = runST (bindST (newSTRef 10) (\\r1 ->\n"
      "       bindST (newSTRef 20) (\\r2 ->\n"
      "       bindST (modifySTRef r1 (\\x -> x + 1)) (\\u ->\n"
      "       bindST (readSTRef r1) (\\a ->\n"
      "       bindST (readSTRef r2) (\\b ->\n"
      "       returnST (a, b))))))) ;\n";
  EXPECT_EQ(run_value(prog), "(11, 20)");
}

TEST(ExBar, GuardedAlternativesUnderExbar) {
  EXPECT_EQ(run_value("f : exbar v . Int -> (v, Int) ;\n"
                      "f x | x < 0 = pack (v = Int) (0, 0 - x) ;\n"
                      "f x = pack (v = Int) (x, x) ;\n"
                      "use : Int -> Int ;\n"
                      "use n = let { pack t (a, b) = f n } in b ;\n"
                      "main : (Int, Int) ;\n"
                      "main = (use (0 - 4), use 5) ;\n"),
            "(4, 5)");
}

// --- tracing ------------------------------------------------------------------------------------

TEST(Trace, EmitsForceLines) {
  ProgramPtr p = parse_or_die("main : Int ; main = 1 + 2 ;");
  check_or_die(*p);
  std::ostringstream trace;
  EvalConfig cfg;
  cfg.trace = true;
  cfg.trace_out = &trace;
  EvalOutcome out = eval_main(*p, cfg);
  ASSERT_TRUE(out.ok);
  EXPECT_NE(trace.str().find("force cell#"), std::string::npos);
}

TEST(Apply, OverApplicationThroughReturnedClosure) {
  // constF has arity 1 and returns a lambda; the second argument flows
  // through the leftover-argument path of the apply frame
  EXPECT_EQ(run_value("constF : Int -> Int -> Int ;\n"
                      "constF x = \\y -> x ;\n"
                      "main : Int ;\n"
                      "main = constF 1 2 ;\n"),
            "1");
}

TEST(Apply, PartiallyAppliedBuiltin) {
  EXPECT_EQ(run_value("cap : Int -> Int ;\n"
                      "cap = min 3 ;\n"
                      "main : Int ;\n"
                      "main = cap 9 + cap 2 ;\n"),
            "5");
}

TEST(Apply, PartiallyAppliedConstructor) {
  EXPECT_EQ(run_value("data Tree = Leaf Int | Bin Tree Tree ;\n"
                      "mk : Int -> Tree ;\n"
                      "mk = Leaf ;\n"
                      "main : Tree ;\n"
                      "main = mk 6 ;\n"),
            "Leaf 6");
}

TEST(Prim, ChrOutOfRange) {
  EXPECT_EQ(run_error("main : Char ; main = chr 7777 ;"), Code::PrimitiveError);
}

// --- rendering ------------------------------------------------------------------------------------

TEST(Render, TupleStringAndData) {
  EXPECT_EQ(run_value("main : (String, Int) ; main = (\"2\", 5) ;"), "(\"2\", 5)");
  EXPECT_EQ(run_value("data Tree = Leaf Int | Bin Tree Tree ;\n"
                      "main : Tree ; main = Bin (Leaf 1) (Leaf 1) ;"),
            "Bin (Leaf 1) (Leaf 1)");
  EXPECT_EQ(run_value("main : () ; main = () ;"), "()");
  EXPECT_EQ(run_value("main : Char ; main = chr (ord 'a' + 1) ;"), "'b'");
}

}  // namespace
