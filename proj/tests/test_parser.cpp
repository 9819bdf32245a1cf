#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "support.hpp"

using hitt::Error;
using hitt::ErrorKind;
using namespace hitt::surface;
using namespace testing_support;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_dir()))
    if (e.path().extension() == ".hit") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// Random syntax trees covering every expression and declaration form.
class Gen {
public:
  explicit Gen(std::uint32_t seed) : rng_(seed) {}

  SourceFile file() {
    SourceFile f;
    int n = 1 + pick(6);
    for (int i = 0; i < n; ++i) f.decls.push_back(decl(true));
    return f;
  }

private:
  int pick(int n) { return static_cast<int>(rng_() % static_cast<unsigned>(n)); }

  std::string ident() {
    static const char* pool[] = {"a", "b", "x", "y'", "f", "g", "P", "A", "B1", "inl", "push-beta", "J-rev", "e=",
                                 "alpha*", "n", "star"};
    return pool[pick(16)];
  }

  ExprPtr leaf() {
    Expr e;
    switch (pick(6)) {
    case 0: e.kind = ExprKind::Hole; break;
    case 1: e.kind = ExprKind::Type; break;
    default: e.kind = ExprKind::Ident; e.name = ident(); break;
    }
    return make_expr(std::move(e));
  }

  Binder typed(int depth, bool allow_implicit) {
    Binder b;
    b.implicit = allow_implicit && pick(2);
    int k = 1 + pick(3);
    for (int i = 0; i < k; ++i) b.names.push_back(pick(6) ? ident() : "_");
    b.type = expr(depth - 1);
    return b;
  }

  ExprPtr expr(int depth) {
    if (depth <= 0) return leaf();
    Expr e;
    switch (pick(12)) {
    case 0:
      return leaf();
    case 1:
    case 2:
      e.kind = ExprKind::App;
      e.a = expr(depth - 1);
      e.b = expr(depth - 1);
      e.implicit = pick(4) == 0;
      break;
    case 3: {
      e.kind = ExprKind::Lam;
      int k = 1 + pick(3);
      for (int i = 0; i < k; ++i) {
        int form = pick(3);
        if (form == 0) {
          Binder b;
          b.names.push_back(ident());
          e.binders.push_back(std::move(b));
        } else if (form == 1) {
          Binder b;
          b.implicit = true;
          b.names.push_back(ident());
          if (pick(2)) b.type = expr(depth - 1);
          e.binders.push_back(std::move(b));
        } else {
          e.binders.push_back(typed(depth, false));
        }
      }
      e.a = expr(depth - 1);
      break;
    }
    case 4: {
      e.kind = ExprKind::Pi;
      int k = 1 + pick(2);
      for (int i = 0; i < k; ++i) e.binders.push_back(typed(depth, true));
      e.a = expr(depth - 1);
      break;
    }
    case 5: {
      e.kind = ExprKind::Sigma;
      Binder b;
      b.names.push_back(ident());
      b.type = expr(depth - 1);
      e.binders.push_back(std::move(b));
      e.a = expr(depth - 1);
      break;
    }
    case 6:
      e.kind = ExprKind::Arrow;
      e.a = expr(depth - 1);
      e.b = expr(depth - 1);
      break;
    case 7:
      e.kind = ExprKind::Eq;
      e.a = expr(depth - 1);
      e.b = expr(depth - 1);
      break;
    case 8:
      e.kind = ExprKind::Product;
      e.a = expr(depth - 1);
      e.b = expr(depth - 1);
      break;
    case 9:
      e.kind = ExprKind::Pair;
      e.a = expr(depth - 1);
      e.b = expr(depth - 1);
      break;
    case 10:
      e.kind = ExprKind::Fst;
      e.a = expr(depth - 1);
      break;
    default:
      e.kind = ExprKind::Snd;
      e.a = expr(depth - 1);
      break;
    }
    return make_expr(std::move(e));
  }

  ExprPtr clause_lhs(const std::string& name) {
    Expr head;
    head.kind = ExprKind::Ident;
    head.name = name;
    ExprPtr t = make_expr(std::move(head));
    int k = pick(4);
    for (int i = 0; i < k; ++i) {
      Expr e;
      e.kind = ExprKind::App;
      e.a = t;
      e.implicit = pick(3) == 0;
      e.b = expr(1);
      t = make_expr(std::move(e));
    }
    return t;
  }

  Decl decl(bool top) {
    Decl d;
    d.name = ident();
    int form = top ? pick(8) : 2 + pick(2);
    switch (form) {
    case 0: d.kind = DeclKind::Postulate; d.type = expr(4); break;
    case 1: d.kind = DeclKind::Coh; d.type = expr(4); break;
    case 2: d.kind = DeclKind::Def; d.type = expr(3); d.body = expr(4); break;
    case 3: {
      d.kind = DeclKind::Def;
      d.type = expr(3);
      int k = 1 + pick(3);
      for (int i = 0; i < k; ++i) d.clauses.push_back({{}, clause_lhs(d.name), expr(3)});
      break;
    }
    case 4: d.kind = DeclKind::Rewrite; break;
    case 5: d.kind = DeclKind::Instance; break;
    case 6: d.kind = DeclKind::Import; break;
    default: {
      d.kind = DeclKind::Mutual;
      d.name.clear();
      int k = 1 + pick(3);
      for (int i = 0; i < k; ++i) d.members.push_back(decl(false));
      break;
    }
    }
    return d;
  }

  std::mt19937 rng_;
};

std::set<std::size_t> token_offsets(const std::string& src) {
  std::set<std::size_t> out;
  for (const auto& t : tokenize(src)) out.insert(t.pos.offset);
  return out;
}

} // namespace

TEST(Parser, SinglePostulate) {
  auto f = parse_file("postulate A : Type");
  ASSERT_EQ(f.decls.size(), 1u);
  EXPECT_EQ(f.decls[0].kind, DeclKind::Postulate);
  EXPECT_EQ(f.decls[0].name, "A");
  EXPECT_EQ(f.decls[0].type->kind, ExprKind::Type);
}

TEST(Parser, HigherInductiveDefinitionShape) {
  const char* src = R"(
postulate epsJ : JA
postulate alphaJ : A -> JA -> JA
postulate deltaJ : (x : JA) -> x == alphaJ star x
postulate JA-elim : {P : JA -> Type} (eps* : P epsJ)
  (alpha* : (a : A) (x : JA) -> P x -> P (alphaJ a x))
  (delta* : (x : JA) (y : P x) -> PathOver P (deltaJ x) y (alpha* star x y))
  -> (x : JA) -> P x
rewrite JA-elim-eps-beta
rewrite JA-elim-alpha-beta
)";
  auto f = parse_file(src);
  std::size_t postulates = 0, rewrites = 0;
  for (const auto& d : f.decls) {
    postulates += d.kind == DeclKind::Postulate;
    rewrites += d.kind == DeclKind::Rewrite;
  }
  EXPECT_EQ(postulates, 4u);
  EXPECT_EQ(rewrites, 2u);
  EXPECT_EQ(f.decls[3].name, "JA-elim");
  EXPECT_EQ(f.decls[3].type->kind, ExprKind::Pi);
}

TEST(Parser, MissingTypeIsReportedAtTheColon) {
  try {
    parse_file("def f : = x");
    FAIL() << "expected a parse error";
  } catch (const ParseFailure& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_EQ(e.pos().line, 1u);
    EXPECT_EQ(e.pos().column, 7u);
    EXPECT_EQ(e.pos().offset, 6u);
  }
}

TEST(Parser, PostulatePrintsOnOneLine) {
  auto f = parse_file("postulate push : {X Y Z : Type} {f : Z -> X} {g : Z -> Y}\n  (c : Z)\n  -> inl (f c) == inr (g c)");
  std::string s = print(f);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1);
  EXPECT_EQ(s.back(), '\n');
}

TEST(Parser, PrinterParenthesizesForAssociativity) {
  EXPECT_EQ(print(*parse_expr("f (g x) y")), "f (g x) y");
  EXPECT_EQ(print(*parse_expr("((f x) y)")), "f x y");
  EXPECT_EQ(print(*parse_expr("(A -> B) -> C")), "(A -> B) -> C");
  EXPECT_EQ(print(*parse_expr("A -> (B -> C)")), "A -> B -> C");
  EXPECT_EQ(print(*parse_expr("(a == b) == c")), "(a == b) == c");
  EXPECT_EQ(print(*parse_expr("f (\\ x -> x) a")), "f (\\x -> x) a");
  EXPECT_EQ(print(*parse_expr("A * (B * C)")), "A * B * C");
  EXPECT_EQ(print(*parse_expr("(A * B) * C")), "(A * B) * C");
}

TEST(Parser, CorpusRoundTrips) {
  auto files = corpus_files();
  ASSERT_GE(files.size(), 14u);
  for (const auto& p : files) {
    auto f = parse_file(slurp(p));
    auto g = parse_file(print(f));
    EXPECT_TRUE(alpha_equal(f, g)) << p;
    EXPECT_EQ(print(f), print(g)) << p;
  }
}

TEST(Parser, GeneratedFilesRoundTrip) {
  Gen gen(99);
  for (int i = 0; i < 1000; ++i) {
    SourceFile f = gen.file();
    std::string text = print(f);
    SourceFile g;
    try {
      g = parse_file(text);
    } catch (const Error& e) {
      FAIL() << "case " << i << ": " << e.what() << "\n" << text;
    }
    ASSERT_TRUE(alpha_equal(f, g)) << "case " << i << "\n" << text << "---\n" << print(g);
  }
}

TEST(Parser, ErrorsPointAtTokenBoundaries) {
  std::mt19937 rng(5);
  int errors = 0;
  for (const auto& p : corpus_files()) {
    std::string text = slurp(p);
    for (int k = 0; k < 40; ++k) {
      std::string broken = text;
      std::size_t at = rng() % broken.size();
      static const char* junk[] = {":", "=", "(", ")", "{", "->", "|", "def", ","};
      broken.insert(at, std::string(" ") + junk[rng() % 9] + " ");
      try {
        parse_file(broken);
      } catch (const ParseFailure& e) {
        ++errors;
        EXPECT_LE(e.pos().offset, broken.size());
        EXPECT_TRUE(token_offsets(broken).count(e.pos().offset)) << p << " offset " << e.pos().offset;
      }
    }
  }
  EXPECT_GT(errors, 100);
}
