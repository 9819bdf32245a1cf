#include <gtest/gtest.h>

#include <optional>

#include "hitt/coh.hpp"
#include "hitt/print.hpp"
#include "checks.hpp"

using namespace hitt;
using namespace testing_support;

namespace {

Session& prelude() {
  static Session s = session_with({"prelude"});
  return s;
}

std::string witness_of(const Session& s, const std::string& name) { return coh_witness(s, name); }

std::size_t depth_of(const Session& s, const std::string& name) {
  std::size_t d = 0;
  coh_witness(s, name, &d);
  return d;
}

} // namespace

TEST(Elaborator, CompositionThroughCoherenceSolvesMetas) {
  Session& s = prelude();
  EXPECT_TRUE(s.env().contains(Name("pq")));
  Locals l = locals(s, {{"X", "Type"}, {"a", "X"}, {"b", "X"}, {"c", "X"}, {"p", "a == b"}, {"q", "b == c"}});
  auto [t, ty] = elab(s, "& composition p q", &l);
  EXPECT_TRUE(conv(s.env(), l.scope.ctx, ty, term(s, "a == c", &l)));
}

TEST(Elaborator, PartialCompositionLeavesAHole) {
  Session& s = prelude();
  Locals l = locals(s, {{"X", "Type"}, {"a", "X"}, {"b", "X"}, {"p", "a == b"}});
  EXPECT_EQ(error_of([&] { elab(s, "& composition p", &l); }), ErrorKind::UnsolvedMeta);
}

TEST(Elaborator, MetaSolvedByIdentity) {
  Session& s = prelude();
  Budget b{kDefaultFuel};
  Elaborator el(s.env(), b);
  Scope scope;
  Term nat = Term::constant(Name("Nat"));
  Term m = el.fresh_meta(scope, Term::pi(Name("x"), false, nat, nat), "test");
  Term id = Term::lam(Name("x"), false, Term::var(0));
  ASSERT_EQ(el.unify(m, id), UnifyResult::Ok);
  el.finish_constraints();
  EXPECT_TRUE(equal(el.finalize(m), id));
}

TEST(Elaborator, NonPatternConstraintIsPostponedThenFails) {
  Session& s = prelude();
  Budget b{kDefaultFuel};
  Elaborator el(s.env(), b);
  Scope scope;
  Term nat = Term::constant(Name("Nat"));
  Term ty = Term::pi(Name("x"), false, nat, Term::pi(Name("y"), false, nat, nat));
  Term m = el.fresh_meta(scope, ty, "test");
  Term a = Term::constant(Name("O"));
  ASSERT_EQ(el.unify(Term::app(Term::app(m, a), a), a), UnifyResult::Ok);
  EXPECT_EQ(el.open_constraints(), 1u);
  EXPECT_EQ(error_of([&] { el.finish_constraints(); }), ErrorKind::UnificationFailure);
}

TEST(Elaborator, SolvedConstraintsConvertAfterSubstitution) {
  CheckOptions opts;
  opts.audit = true;
  auto m = load_manifest(corpus_dir() / "manifest.txt");
  opts.root = m.dir;
  Session s(opts);
  for (const auto& f : m.tier(1)) {
    auto r = check_one(s, m.dir / f, f);
    EXPECT_EQ(r.status, "ok") << f << ": " << r.message;
  }
  EXPECT_GT(s.audited(), 1000u);
}

TEST(Elaborator, CompositionWitness) {
  EXPECT_EQ(witness_of(prelude(), "composition"), "J (J idp-Coh)");
  EXPECT_EQ(depth_of(prelude(), "composition"), 3u);
}

TEST(Elaborator, ReflexivityWitness) {
  Session s = session_with({"prelude"});
  declare(s, "coh refl-coh : {X : Type} {a : X} -> Coh (a == a)");
  EXPECT_EQ(witness_of(s, "refl-coh"), "idp-Coh");
}

TEST(Elaborator, ExcohMatchesShortestWitness) {
  Session& s = prelude();
  std::size_t depth = depth_of(s, "excoh");
  ASSERT_GT(depth, 0u);
  EXPECT_LE(depth, 12u);
  auto shortest = bfs_witnesses({"prelude"}, goal_decl("prelude", "excoh"), 12);
  ASSERT_EQ(shortest.chains.size(), 1u) << shortest.tried << " chains tried";
  EXPECT_EQ(shortest.length, depth);
  EXPECT_EQ(unparen(witness_of(s, "excoh")), shortest.chains.front());
}

// Every goal shallow enough for exhaustive search has exactly one shortest
// witness, and the search finds it.
TEST(Elaborator, ShallowGoalsHaveAUniqueShortestWitness) {
  struct Goal {
    const char* file;
    std::vector<std::string> deps;
    const char* name;
  };
  std::vector<Goal> goals = {{"prelude", {"prelude"}, "composition"},
                             {"prelude", {"prelude"}, "square-tb"},
                             {"prelude", {"prelude"}, "ap-square"},
                             {"structure-j", {"jinf", "ja"}, "eta-coh"},
                             {"inj", {"jss-elim", "structure-j"}, "inJ-eta-coh"},
                             {"gamma-inf-red", {"structure-inf"}, "gamma-inf-coh"},
                             {"eta-inf-red", {"gamma-inf-red"}, "eta-inf-K"}};
  for (const auto& g : goals) {
    Session s = session_with({g.file});
    std::size_t depth = 0;
    std::string w = coh_witness(s, g.name, &depth);
    auto shortest = bfs_witnesses(g.deps, goal_decl(g.file, g.name), 10);
    ASSERT_EQ(shortest.chains.size(), 1u) << g.name;
    EXPECT_EQ(shortest.length, depth) << g.name;
    EXPECT_EQ(unparen(w), shortest.chains.front()) << g.name;
  }
}

TEST(Elaborator, CoherenceSearchRespectsDepthLimit) {
  CheckOptions opts;
  opts.coh_depth = 4;
  Session s = session_with({}, opts);
  auto f = surface::load_file((corpus_dir() / "prelude.hit").string());
  std::optional<ErrorKind> err;
  for (const auto& d : f.decls) {
    if (d.name == "excoh") {
      err = error_of([&] { s.check_decl(d); });
      break;
    }
    s.check_decl(d);
  }
  ASSERT_TRUE(err);
  EXPECT_EQ(*err, ErrorKind::DepthExhausted);
}

TEST(Elaborator, ImplicitArgumentsAreInserted) {
  Session& s = prelude();
  Locals l = locals(s, {{"X", "Type"}, {"x", "X"}});
  EXPECT_EQ(error_of([&] { elab(s, "idp", &l); }), ErrorKind::UnsolvedMeta);
  auto [u, uty] = elab(s, "idp {X} {x}", &l);
  EXPECT_TRUE(conv(s.env(), l.scope.ctx, uty, term(s, "x == x", &l)));
  EXPECT_EQ(error_of([&] { elab(s, "idp {X} {X}", &l); }), ErrorKind::TypeMismatch);
}
