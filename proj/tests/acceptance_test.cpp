// Acceptance suite: one test per criterion, each printing a pass/fail line.

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <random>

#include "lazyf/corpus.hpp"
#include "lazyf/eval.hpp"
#include "lazyf/parser.hpp"
#include "lazyf/pretty.hpp"
#include "lazyf/type_ops.hpp"
#include "lazyf/typecheck.hpp"
#include "test_util.hpp"

using namespace lazyf;
using lazyf::testing::check_or_die;
using lazyf::testing::corpus_dir;
using lazyf::testing::parse_corpus;
using lazyf::testing::parse_or_die;
using lazyf::testing::run_cli;

namespace {

struct CriterionLine {
  const char* name;
  bool passed = false;
  ~CriterionLine() {
    printf("[criterion] %-28s %s\n", name, passed ? "PASS" : "FAIL");
    fflush(stdout);
  }
};

constexpr int kTrees = 200;
constexpr int kMaxDepth = 8;

// 1. ST demo value: `lazyf run corpus/st_demo.lzf` prints ("2", 5) exactly.
TEST(Acceptance, Criterion1StDemoValue) {
  CriterionLine line{"1 st-demo value"};
  auto res = run_cli("run " + corpus_dir() + "/st_demo.lzf");
  EXPECT_EQ(res.exit_code, 0);
  EXPECT_EQ(res.stdout_text, "(\"2\", 5)\n");
  line.passed = res.exit_code == 0 && res.stdout_text == "(\"2\", 5)\n";
}

// 2. Laziness contrast: the exbar version prints "Bin" within 10^6 steps on
//    the infinite tree; the two-phase variant exceeds the same budget.
TEST(Acceptance, Criterion2LazinessContrast) {
  CriterionLine line{"2 laziness contrast"};
  ProgramPtr lazy = parse_corpus("idtree_inf.lzf");
  check_or_die(*lazy);
  EvalConfig cfg;
  cfg.max_steps = 1'000'000;
  EvalOutcome out = eval_main(*lazy, cfg);
  ASSERT_TRUE(out.ok) << out.error_message;
  EXPECT_EQ(out.rendered, "\"Bin\"");
  EXPECT_LE(out.steps, 1'000'000);

  // same infinite-tree main spliced onto the two-phase variant
  ProgramPtr two = parse_corpus("idtree_twophase.lzf");
  Program p2 = *two;
  SourceSpan sp;
  sp.file = "<generated>";
  TermPtr inftree = econ("Bin", {evar("inftree", sp), evar("inftree", sp)}, sp);
  std::vector<Binding> binds{{pvar("inftree", sp), inftree}};
  TermPtr body =
      elet(std::move(binds),
           eapp(evar("top", sp), eapp(evar("idTree2", sp), evar("inftree", sp))), sp);
  for (auto& b : p2.binds) {
    if (b.name == "main") {
      b.sig = tcon("String", {});
      b.body = body;
    }
  }
  ASSERT_TRUE(check_program(p2).ok);
  EvalOutcome out2 = eval_main(p2, cfg);
  EXPECT_FALSE(out2.ok);
  EXPECT_EQ(out2.error, Code::StepLimitExceeded);
  line.passed = out.ok && out.rendered == "\"Bin\"" && out.steps <= 1'000'000 &&
                !out2.ok && out2.error == Code::StepLimitExceeded;
}

// 3. Traversal counts on 200 random trees: strict repmin matches every input
//    node exactly twice; repmin and repmin2 exactly once.
TEST(Acceptance, Criterion3TraversalCounts) {
  CriterionLine line{"3 traversal counts"};
  struct Case {
    const char* file;
    const char* fn;
    long long expected;
  } cases[] = {{"repmin_strict.lzf", "repmin", 2},
               {"repmin.lzf", "repmin", 1},
               {"repmin2.lzf", "repmin2", 1}};
  bool all = true;
  for (auto& c : cases) {
    ProgramPtr p = parse_corpus(c.file);
    ASSERT_TRUE(check_program(*p).ok);
    for (int i = 0; i < kTrees; i++) {
      GeneratedTree g = gen_tree(1000 + i, kMaxDepth);
      Program p2 = with_generated_main(*p, c.fn, g);
      ASSERT_TRUE(check_program(p2).ok) << c.file;
      EvalConfig cfg;
      cfg.counters = true;
      EvalOutcome out = eval_main(p2, cfg);
      ASSERT_TRUE(out.ok) << c.file << ": " << out.error_message;
      std::string err = check_generated_match_counts(out, c.expected);
      EXPECT_EQ(err, "") << c.file << " tree " << i << " (" << g.literal << ")";
      all &= err.empty();
    }
  }
  line.passed = all;
}

// 4. Oracle equivalence on the same 200 trees: repmin output equals the
//    oracle, idTree is the identity, both sortTrees preserve shape, sort the
//    prefix traversal, preserve the leaf multiset, and equal oracle_sort.
TEST(Acceptance, Criterion4OracleEquivalence) {
  CriterionLine line{"4 oracle equivalence"};
  bool all = true;
  auto run_on = [&](const Program& base, const char* fn,
                    const GeneratedTree& g) -> std::string {
    Program p2 = with_generated_main(base, fn, g);
    CheckResult cr = check_program(p2);
    EXPECT_TRUE(cr.ok);
    if (!cr.ok) return "<check failed>";
    EvalConfig cfg;
    EvalOutcome out = eval_main(p2, cfg);
    EXPECT_TRUE(out.ok) << out.error_message;
    return out.ok ? out.rendered : "<runtime error>";
  };
  ProgramPtr repmin = parse_corpus("repmin.lzf");
  ProgramPtr idtree = parse_corpus("idtree.lzf");
  ProgramPtr sort_list = parse_corpus("sorttree_list.lzf");
  ProgramPtr sort_prod = parse_corpus("sorttree_prod.lzf");
  for (int i = 0; i < kTrees; i++) {
    GeneratedTree g = gen_tree(1000 + i, kMaxDepth);
    std::string want_repmin = host_render(oracle_repmin(g.tree));
    std::string want_id = host_render(g.tree);
    HostTreePtr sorted = oracle_sort(g.tree);
    std::string want_sorted = host_render(sorted);
    // oracle self-checks: shape preserved, prefix sorted, multiset preserved
    EXPECT_TRUE(host_shape_equal(g.tree, sorted));
    std::vector<int> in_l, out_l;
    host_leaves(g.tree, in_l);
    host_leaves(sorted, out_l);
    EXPECT_TRUE(std::is_sorted(out_l.begin(), out_l.end()));
    std::sort(in_l.begin(), in_l.end());
    EXPECT_EQ(in_l, out_l);

    bool ok = run_on(*repmin, "repmin", g) == want_repmin &&
              run_on(*idtree, "idTree", g) == want_id &&
              run_on(*sort_list, "sortTree", g) == want_sorted &&
              run_on(*sort_prod, "sortTree", g) == want_sorted;
    EXPECT_TRUE(ok) << "tree " << i << ": " << g.literal;
    all &= ok;
  }
  line.passed = all;
}

// 5. Typing derivations: the CLI reports the declared idTree' signature,
//    and eliminating it at a fresh name reproduces the derivation type.
TEST(Acceptance, Criterion5TypingDerivation) {
  CriterionLine line{"5 typing derivation"};
  auto res = run_cli("types " + corpus_dir() + "/idtree_annot.lzf");
  EXPECT_EQ(res.exit_code, 0);
  bool has_line =
      res.stdout_text.find("idTree' : exbar t_vs . Tree -> t_vs -> (t_vs, Tree)") !=
      std::string::npos;
  EXPECT_TRUE(has_line) << res.stdout_text;

  ProgramPtr p = parse_corpus("idtree_annot.lzf");
  CheckResult cr = check_or_die(*p);
  TypePtr sig = cr.type_of("idTree'");
  ASSERT_TRUE(sig);
  TypePtr nu = tname(424242, "nu");
  TypePtr out = eliminate_exbar(sig, nu);
  TypePtr want = tarrow(
      tcon("Tree"),
      tarrow(nu, tpacked("t_vs", nu, t_tuple({tvar("t_vs"), tcon("Tree")}))));
  bool elim_ok = alpha_equal(out, want);
  EXPECT_TRUE(elim_ok) << pretty_type(out);
  line.passed = res.exit_code == 0 && has_line && elim_ok;
}

// 6. Safety rejection with the exact diagnostic codes.
TEST(Acceptance, Criterion6SafetyRejection) {
  CriterionLine line{"6 safety rejection"};
  CheckResult safety = check_program(*parse_corpus("safety.lzf"));
  CheckResult bad = check_program(*parse_corpus("idtree_bad.lzf"));
  ASSERT_FALSE(safety.ok);
  ASSERT_FALSE(bad.ok);
  EXPECT_EQ(safety.diags[0].code, Code::UnpackOfFunction);
  EXPECT_EQ(bad.diags[0].code, Code::TypeMismatch);
  line.passed = safety.diags[0].code == Code::UnpackOfFunction &&
                bad.diags[0].code == Code::TypeMismatch;
}

// 7. STRef mechanics derived by brute-force index walks.
TEST(Acceptance, Criterion7StRefMechanics) {
  CriterionLine line{"7 stref mechanics"};
  const char* lib =
      "data STRef s a where { RZ : forall a b . STRef (a, b) a ;\n"
      "                       RS : forall r a b . STRef r a -> STRef (b, r) a } ;\n"
      "rlookup : forall s a . STRef s a -> s -> a ;\n"
      "rlookup RZ (x, w) = x ;\n"
      "rlookup (RS rr) (w, y) = rlookup rr y ;\n"
      "rmodify : forall s a . (a -> a) -> STRef s a -> s -> s ;\n"
      "rmodify f RZ (x, y) = (f x, y) ;\n"
      "rmodify f (RS rr) (x, y) = (x, rmodify f rr y) ;\n";
  auto run = [&](const std::string& main_decl) {
    ProgramPtr p = parse_or_die(std::string(lib) + main_decl);
    CheckResult cr = check_program(*p);
    EXPECT_TRUE(cr.ok);
    EvalConfig cfg;
    EvalOutcome out = eval_main(*p, cfg);
    EXPECT_TRUE(out.ok) << out.error_message;
    return out.rendered;
  };
  std::string a = run("main : Int ;\nmain = rlookup RZ (5, ()) ;\n");
  std::string b = run("main : Int ;\nmain = rlookup (RS RZ) (1, (2, ())) ;\n");
  std::string c = run(
      "main : (Int, (Int, ())) ;\n"
      "main = rmodify (\\x -> x + 1) (RS RZ) (1, (2, ())) ;\n");
  EXPECT_EQ(a, "5");
  EXPECT_EQ(b, "2");
  EXPECT_EQ(c, "(1, (3, ()))");
  line.passed = a == "5" && b == "2" && c == "(1, (3, ()))";
}

// 8. Property suites: alpha-equivalence is an equivalence relation, the
//    E.E/re-abstraction round trip holds, memoization makes second forces
//    free, and every corpus file is a parser round-trip fixed point.
TypePtr rand_type(std::mt19937_64& rng, int depth) {
  if (depth <= 0) return rng() % 2 ? t_int() : tvar("a");
  switch (rng() % 6) {
    case 0: return tvar(std::string(1, (char)('a' + rng() % 3)));
    case 1: return t_int();
    case 2: return tarrow(rand_type(rng, depth - 1), rand_type(rng, depth - 1));
    case 3: return tforall(std::string(1, (char)('a' + rng() % 3)),
                           rand_type(rng, depth - 1));
    case 4: return texbar(std::string(1, (char)('a' + rng() % 3)),
                          rand_type(rng, depth - 1));
    default: return t_tuple({rand_type(rng, depth - 1), rand_type(rng, depth - 1)});
  }
}

TypePtr rename_all(const TypePtr& t, int& n) {
  switch (t->kind) {
    case TypeKind::Forall:
    case TypeKind::ExBar: {
      std::string fresh = "z" + std::to_string(n++);
      TypePtr body = rename_all(subst_type(t->t1, t->var, tvar(fresh)), n);
      return t->kind == TypeKind::Forall ? tforall(fresh, body)
                                         : texbar(fresh, body);
    }
    case TypeKind::Arrow:
      return tarrow(rename_all(t->t1, n), rename_all(t->t2, n));
    case TypeKind::Packed:
      return tpacked(t->var, rename_all(t->t1, n), t->t2);
    case TypeKind::Con: {
      std::vector<TypePtr> args;
      for (auto& a : t->args) args.push_back(rename_all(a, n));
      return tcon(t->con, std::move(args));
    }
    default:
      return t;
  }
}

TEST(Acceptance, Criterion8PropertySuites) {
  CriterionLine line{"8 property suites"};
  bool ok = true;

  // alpha-equivalence: reflexive, symmetric, transitive (1000 random types)
  std::mt19937_64 rng(31337);
  int renamer = 0;
  for (int i = 0; i < 1000; i++) {
    TypePtr a = rand_type(rng, 4);
    TypePtr b = rename_all(a, renamer);
    TypePtr c = rename_all(b, renamer);
    ok &= alpha_equal(a, a);
    ok &= alpha_equal(a, b) == alpha_equal(b, a);
    ok &= alpha_equal(a, b) && alpha_equal(b, c) ? alpha_equal(a, c) : true;
  }
  EXPECT_TRUE(ok);

  // E.E round-trip on 500 random exbar types: substituting the binder back
  // for the name and unwrapping the packed codomain recovers the type
  std::function<TypePtr(const TypePtr&, long long, const std::string&)> unwrap =
      [&](const TypePtr& t, long long id, const std::string& binder) -> TypePtr {
    std::function<TypePtr(const TypePtr&)> repl = [&](const TypePtr& u) -> TypePtr {
      if (u->kind == TypeKind::Name && u->id == id) return tvar(binder);
      switch (u->kind) {
        case TypeKind::Arrow: return tarrow(repl(u->t1), repl(u->t2));
        case TypeKind::Forall: return tforall(u->var, repl(u->t1));
        case TypeKind::ExBar: return texbar(u->var, repl(u->t1));
        case TypeKind::Packed: return tpacked(u->var, repl(u->t1), repl(u->t2));
        case TypeKind::Con: {
          std::vector<TypePtr> args;
          for (auto& x : u->args) args.push_back(repl(x));
          return tcon(u->con, std::move(args));
        }
        default: return u;
      }
    };
    if (t->kind == TypeKind::Arrow)
      return tarrow(repl(t->t1), unwrap(t->t2, id, binder));
    EXPECT_EQ(t->kind, TypeKind::Packed);
    return t->t2;
  };
  for (int i = 0; i < 500; i++) {
    TypePtr body = rand_type(rng, 4);
    TypePtr sig = texbar("q", subst_type(body, "a", tvar("q")));
    long long id = 900000 + i;
    TypePtr eliminated = eliminate_exbar(sig, tname(id, "nu"));
    TypePtr back = texbar("q", unwrap(eliminated, id, "q"));
    bool same = alpha_equal(back, sig);
    EXPECT_TRUE(same) << pretty_type(sig);
    ok &= same;
  }

  // memoization on 1000 random thunks
  std::function<std::string(int)> arith = [&](int depth) -> std::string {
    if (depth <= 0) return std::to_string(rng() % 100);
    switch (rng() % 3) {
      case 0: return "(" + arith(depth - 1) + " + " + arith(depth - 1) + ")";
      case 1: return "(min " + arith(depth - 1) + " " + arith(depth - 1) + ")";
      default: return "(let { q = " + arith(depth - 1) + " } in q * q)";
    }
  };
  for (int i = 0; i < 1000; i++) {
    std::string text = "main : Int ;\nmain = " + arith(2) + " ;\n";
    ProgramPtr p = parse_or_die(text);
    if (!check_program(*p).ok) {
      ok = false;
      break;
    }
    EvalConfig cfg;
    ForceTwiceReport rep = force_twice(*p, "main", cfg);
    ok &= rep.first_steps > 0 && rep.second_steps == 0;
  }
  EXPECT_TRUE(ok);

  // parser round-trip fixed point on every corpus file
  for (const auto& f : corpus_required_files()) {
    std::string text = lazyf::testing::read_file(corpus_dir() + "/" + f);
    ParseResult first = parse_program(text, f);
    ASSERT_FALSE(first.error.has_value());
    ParseResult second = parse_program(pretty_program(*first.program), f);
    ASSERT_FALSE(second.error.has_value()) << f;
    bool same = program_equal_structural(*first.program, *second.program);
    EXPECT_TRUE(same) << f;
    ok &= same;
  }

  line.passed = ok;
}

}  // namespace
