#include "lazyf/type_ops.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "lazyf/parser.hpp"
#include "lazyf/pretty.hpp"

using namespace lazyf;

namespace {

TypePtr ty(const std::string& s) { return parse_type_string(s); }

// Random Meta-free types for the property suites.
struct TypeGen {
  std::mt19937_64 rng;
  explicit TypeGen(unsigned long long seed) : rng(seed) {}

  int pick(int n) { return (int)(rng() % (unsigned long long)n); }

  std::string var_name() { return std::string(1, (char)('a' + pick(4))); }

  TypePtr gen(int depth) {
    if (depth <= 0) {
      switch (pick(4)) {
        case 0: return tvar(var_name());
        case 1: return t_int();
        case 2: return tname(pick(3), "n");
        default: return t_bool();
      }
    }
    switch (pick(8)) {
      case 0: return tvar(var_name());
      case 1: return t_int();
      case 2: return tname(pick(3), "n");
      case 3: return tarrow(gen(depth - 1), gen(depth - 1));
      case 4: return tforall(var_name(), gen(depth - 1));
      case 5: return texbar(var_name(), gen(depth - 1));
      case 6: return t_tuple({gen(depth - 1), gen(depth - 1)});
      default: {
        // packed: witness must not mention the binder; use a closed witness
        return tpacked(var_name(), t_int(), gen(depth - 1));
      }
    }
  }
};

// Systematic binder renaming used to manufacture alpha-equal variants.
TypePtr rename_binders(const TypePtr& t, int& counter) {
  switch (t->kind) {
    case TypeKind::Var:
    case TypeKind::Name:
    case TypeKind::Meta:
    case TypeKind::Con: {
      if (t->kind == TypeKind::Con) {
        std::vector<TypePtr> args;
        for (auto& a : t->args) args.push_back(rename_binders(a, counter));
        return tcon(t->con, std::move(args));
      }
      return t;
    }
    case TypeKind::Arrow:
      return tarrow(rename_binders(t->t1, counter), rename_binders(t->t2, counter));
    case TypeKind::Forall:
    case TypeKind::ExBar: {
      std::string fresh = "r" + std::to_string(counter++);
      TypePtr body = subst_type(t->t1, t->var, tvar(fresh));
      body = rename_binders(body, counter);
      return t->kind == TypeKind::Forall ? tforall(fresh, body) : texbar(fresh, body);
    }
    case TypeKind::Packed: {
      std::string fresh = "r" + std::to_string(counter++);
      TypePtr body = subst_type(t->t2, t->var, tvar(fresh));
      body = rename_binders(body, counter);
      return tpacked(fresh, rename_binders(t->t1, counter), body);
    }
  }
  return t;
}

// Inverse of eliminate_exbar for the round-trip property: replace the name
// by the binder everywhere and unwrap the packed codomain.
TypePtr reabstract_walk(const TypePtr& t, long long name_id, const std::string& binder) {
  if (t->kind == TypeKind::Arrow) {
    std::function<TypePtr(const TypePtr&)> replace = [&](const TypePtr& u) -> TypePtr {
      if (u->kind == TypeKind::Name && u->id == name_id) return tvar(binder);
      switch (u->kind) {
        case TypeKind::Arrow: return tarrow(replace(u->t1), replace(u->t2));
        case TypeKind::Forall: return tforall(u->var, replace(u->t1));
        case TypeKind::ExBar: return texbar(u->var, replace(u->t1));
        case TypeKind::Packed:
          return tpacked(u->var, replace(u->t1), replace(u->t2));
        case TypeKind::Con: {
          std::vector<TypePtr> args;
          for (auto& a : u->args) args.push_back(replace(a));
          return tcon(u->con, std::move(args));
        }
        default: return u;
      }
    };
    return tarrow(replace(t->t1), reabstract_walk(t->t2, name_id, binder));
  }
  // packed codomain: drop the recorded witness, keep the body
  EXPECT_EQ(t->kind, TypeKind::Packed);
  return t->t2;
}

TypePtr reabstract(const TypePtr& eliminated, long long name_id,
                   const std::string& binder) {
  return texbar(binder, reabstract_walk(eliminated, name_id, binder));
}

// --- subst_type -------------------------------------------------------------

TEST(SubstType, DirectSubstitution) {
  // t_vs -> (t_vs, Tree) with t_vs := Int
  TypePtr sigma = tarrow(tvar("t_vs"), t_tuple({tvar("t_vs"), tcon("Tree")}));
  TypePtr out = subst_type(sigma, "t_vs", t_int());
  EXPECT_TRUE(alpha_equal(out, tarrow(t_int(), t_tuple({t_int(), tcon("Tree")}))));
}

TEST(SubstType, ShadowedBinder) {
  TypePtr sigma = tforall("t_vs", tvar("t_vs"));
  TypePtr out = subst_type(sigma, "t_vs", t_int());
  EXPECT_TRUE(alpha_equal(out, sigma));
}

TEST(SubstType, PackedBindsItsBody) {
  // <(t_vs = Int), (t_vs, Tree)> : binder occurrences in the body are bound
  TypePtr sigma = tpacked("t_vs", t_int(), t_tuple({tvar("t_vs"), tcon("Tree")}));
  TypePtr out = subst_type(sigma, "t_vs", t_bool());
  EXPECT_TRUE(alpha_equal(out, sigma));
}

TEST(SubstType, CaptureAvoidance) {
  // (forall b . a -> b)[a := b] must rename the bound b
  TypePtr sigma = tforall("b", tarrow(tvar("a"), tvar("b")));
  TypePtr out = subst_type(sigma, "a", tvar("b"));
  EXPECT_TRUE(alpha_equal(out, tforall("c", tarrow(tvar("b"), tvar("c")))));
  EXPECT_FALSE(alpha_equal(out, tforall("b", tarrow(tvar("b"), tvar("b")))));
}

TEST(SubstType, IdempotentWhenBinderGone) {
  TypeGen g(7);
  for (int i = 0; i < 300; i++) {
    TypePtr sigma = g.gen(4);
    TypePtr repl = g.gen(2);
    if (mentions_var(repl, "a")) continue;
    TypePtr once = subst_type(sigma, "a", repl);
    TypePtr twice = subst_type(once, "a", repl);
    EXPECT_TRUE(alpha_equal(once, twice));
  }
}

// --- alpha_equal --------------------------------------------------------------

TEST(AlphaEqual, BinderRenaming) {
  EXPECT_TRUE(alpha_equal(ty("exbar a . a -> a"), ty("exbar b . b -> b")));
}

TEST(AlphaEqual, OpaqueNamesAreRigid) {
  EXPECT_FALSE(alpha_equal(tname(1, "n"), tname(2, "n")));
  EXPECT_TRUE(alpha_equal(tname(1, "x"), tname(1, "y")));
}

TEST(AlphaEqual, SignatureNormalization) {
  EXPECT_TRUE(alpha_equal(ty("exbar t_vs . Tree -> t_vs -> (t_vs, Tree)"),
                          ty("exbar x . Tree -> x -> (x, Tree)")));
}

TEST(AlphaEqual, FreeVarsCompareByName) {
  EXPECT_FALSE(alpha_equal(ty("a -> a"), ty("b -> b")));
  EXPECT_TRUE(alpha_equal(ty("a -> a"), ty("a -> a")));
}

TEST(AlphaEqual, BoundVsFree) {
  EXPECT_FALSE(alpha_equal(ty("forall a . a -> b"), ty("forall b . b -> b")));
}

TEST(AlphaEqualProperty, EquivalenceRelation) {
  TypeGen g(42);
  int renamer = 0;
  for (int i = 0; i < 1000; i++) {
    TypePtr a = g.gen(4);
    TypePtr b = rename_binders(a, renamer);
    TypePtr c = rename_binders(b, renamer);
    TypePtr d = g.gen(4);
    // reflexive
    EXPECT_TRUE(alpha_equal(a, a));
    // symmetric
    EXPECT_EQ(alpha_equal(a, b), alpha_equal(b, a));
    EXPECT_EQ(alpha_equal(a, d), alpha_equal(d, a));
    // transitive on the constructed chain
    ASSERT_TRUE(alpha_equal(a, b));
    ASSERT_TRUE(alpha_equal(b, c));
    EXPECT_TRUE(alpha_equal(a, c));
    if (alpha_equal(a, d) && alpha_equal(d, b)) EXPECT_TRUE(alpha_equal(a, b));
  }
}

// --- eliminate_exbar / intro_shape ---------------------------------------------

TEST(EliminateExbar, IdTreeSignature) {
  // eliminating the idTree' signature at a fresh name t_vsl:
  //   Tree -> t_vsl -> <(t_vs = t_vsl), (t_vs, Tree)>
  TypePtr sig = ty("exbar t_vs . Tree -> t_vs -> (t_vs, Tree)");
  TypePtr nu = tname(17, "t_vsl");
  TypePtr out = eliminate_exbar(sig, nu);
  TypePtr want = tarrow(
      tcon("Tree"),
      tarrow(nu, tpacked("t_vs", nu, t_tuple({tvar("t_vs"), tcon("Tree")}))));
  EXPECT_TRUE(alpha_equal(out, want)) << pretty_type(out);
}

TEST(EliminateExbar, NonArrowBody) {
  // push on a non-arrow body wraps the whole body
  TypePtr sig = ty("exbar x . (x, x -> Bool -> (x, Int))");
  TypePtr nu = tname(3, "t_c");
  TypePtr out = eliminate_exbar(sig, nu);
  TypePtr body = ty("(x, x -> Bool -> (x, Int))");
  EXPECT_TRUE(alpha_equal(out, tpacked("x", nu, body))) << pretty_type(out);
}

TEST(EliminateExbar, ZeroArrowCase) {
  TypePtr sig = texbar("a", tvar("a"));
  TypePtr nu = tname(9, "nu");
  EXPECT_TRUE(alpha_equal(eliminate_exbar(sig, nu), tpacked("a", nu, tvar("a"))));
}

TEST(EliminateExbar, RejectsNonExbar) {
  EXPECT_THROW(eliminate_exbar(t_int(), tname(0, "n")), TypeError);
}

TEST(IntroShape, DerivationConclusion) {
  // Tree -> Int -> <(t_vs = Int), (t_vs, Tree)>
  TypePtr body = ty("Tree -> t_vs -> (t_vs, Tree)");
  TypePtr out = intro_shape(body, "t_vs", t_int());
  TypePtr want = tarrow(
      tcon("Tree"),
      tarrow(t_int(), tpacked("t_vs", t_int(), t_tuple({tvar("t_vs"), tcon("Tree")}))));
  EXPECT_TRUE(alpha_equal(out, want)) << pretty_type(out);
}

TEST(IntroShape, PairWitness) {
  TypePtr body = ty("Tree -> t_vs -> (t_vs, Tree)");
  TypePtr w = t_tuple({tvar("t_vsl"), tvar("t_vsr")});
  TypePtr out = intro_shape(body, "t_vs", w);
  TypePtr want =
      tarrow(tcon("Tree"),
             tarrow(w, tpacked("t_vs", w, t_tuple({tvar("t_vs"), tcon("Tree")}))));
  EXPECT_TRUE(alpha_equal(out, want));
}

TEST(IntroShape, BinderAbsentFromBody) {
  TypePtr out = intro_shape(t_int(), "t", t_bool());
  EXPECT_TRUE(alpha_equal(out, tpacked("t", t_bool(), t_int())));
}

TEST(ExbarShapeProperty, EliminationEqualsIntroShape) {
  TypeGen g(99);
  for (int i = 0; i < 600; i++) {
    TypePtr body = g.gen(4);
    TypePtr nu = tname(1000 + i, "nu");
    EXPECT_TRUE(alpha_equal(eliminate_exbar(texbar("a", body), nu),
                            intro_shape(body, "a", nu)));
  }
}

TEST(ExbarShapeProperty, ReabstractionRoundTrip) {
  // E.E then re-abstraction is the identity on exbar types (500 random)
  TypeGen g(123);
  int renamer = 0;
  int tested = 0;
  for (int i = 0; tested < 500 && i < 5000; i++) {
    TypePtr body = g.gen(4);
    TypePtr sig = texbar("q", subst_type(body, "a", tvar("q")));
    long long id = 50000 + i;
    TypePtr nu = tname(id, "nu");
    if (mentions_name(sig, id)) continue;
    TypePtr eliminated = eliminate_exbar(sig, nu);
    // the walk needs the arrow spine / packed codomain shape produced by E.E
    TypePtr back = reabstract(eliminated, id, "q");
    EXPECT_TRUE(alpha_equal(back, sig))
        << pretty_type(sig) << "  !=  " << pretty_type(back);
    (void)rename_binders(sig, renamer);
    tested++;
  }
  EXPECT_EQ(tested, 500);
}

// --- well_formed -----------------------------------------------------------------

TEST(WellFormed, DeclaredConstructor) {
  WfEnv env = builtin_wf_env();
  env.cons["Tree"] = 0;
  EXPECT_FALSE(well_formed(env, ty("Tree -> Int")).has_value());
}

TEST(WellFormed, UnboundTypeVar) {
  WfEnv env = builtin_wf_env();
  auto d = well_formed(env, tvar("t_vs"));
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->code, Code::UnboundTypeVar);
}

TEST(WellFormed, UnknownTypeName) {
  WfEnv env = builtin_wf_env();
  auto d = well_formed(env, ty("STRef s a"));
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->code, Code::UnknownTypeName);
}

TEST(WellFormed, UnregisteredOpaqueName) {
  WfEnv env = builtin_wf_env();
  auto d = well_formed(env, tname(5, "t"));
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->code, Code::UnknownTypeName);
  env.names.insert(5);
  EXPECT_FALSE(well_formed(env, tname(5, "t")).has_value());
}

TEST(WellFormed, ArityMismatch) {
  WfEnv env = builtin_wf_env();
  env.cons["Tree"] = 0;
  auto d = well_formed(env, tcon("Tree", {t_int()}));
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->code, Code::ArityMismatch);
}

TEST(WellFormed, ContravariantExbarRejected) {
  WfEnv env = builtin_wf_env();
  auto d = well_formed(env, tarrow(texbar("x", tvar("x")), t_int()));
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->code, Code::ExBarInArgument);
}

TEST(WellFormed, ExbarInCodomainComponentAllowed) {
  // the v1 ST field shape: trest -> s -> (a, exbar t . t, s)
  WfEnv env = builtin_wf_env();
  TypePtr t = tforall(
      "trest",
      tforall("s", tforall("a", tarrow(tvar("trest"),
                                       tarrow(tvar("s"),
                                              t_tuple({tvar("a"), texbar("t", tvar("t")),
                                                       tvar("s")}))))));
  EXPECT_FALSE(well_formed(env, t).has_value());
}

TEST(WellFormedProperty, Monotone) {
  TypeGen g(5);
  for (int i = 0; i < 200; i++) {
    TypePtr t = g.gen(4);
    WfEnv env = builtin_wf_env();
    env.cons["Tree"] = 0;
    for (long long n = 0; n < 3; n++) env.names.insert(n);
    env.bound_vars = {"a", "b", "c", "d"};
    if (well_formed(env, t).has_value()) continue;
    WfEnv bigger = env;
    bigger.cons["Extra"] = 2;
    bigger.names.insert(77);
    bigger.bound_vars.insert("zz");
    EXPECT_FALSE(well_formed(bigger, t).has_value());
  }
}

}  // namespace
