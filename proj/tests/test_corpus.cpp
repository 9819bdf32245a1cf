#include <gtest/gtest.h>

#include <chrono>
#include <fstream>

#include "checks.hpp"

using namespace hitt;
using namespace testing_support;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("hitt-corpus-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                                     "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path / name) << text; }
};

Session& tier1() {
  static Session s = [] {
    auto m = load_manifest(corpus_dir() / "manifest.txt");
    CheckOptions opts;
    opts.root = m.dir;
    Session s(opts);
    for (const auto& f : m.tier(1)) s.check_file(m.dir / f);
    return s;
  }();
  return s;
}

} // namespace

TEST(Corpus, ManifestParsesTiersInOrder) {
  auto m = parse_manifest("# c\n[tier-1]\na.hit\n  b.hit  # trailing\n\n[tier-2]\nc.hit\n", "/d");
  ASSERT_EQ(m.tier(1).size(), 2u);
  EXPECT_EQ(m.tier(1)[1], "b.hit");
  EXPECT_EQ(m.tier(2), std::vector<std::string>{"c.hit"});
  EXPECT_TRUE(m.tier(7).empty());
  EXPECT_EQ(error_of([] { parse_manifest("a.hit\n", "/d"); }), ErrorKind::ParseError);
  EXPECT_EQ(error_of([] { parse_manifest("[tier-x]\n", "/d"); }), ErrorKind::ParseError);
}

TEST(Corpus, MissingFileIsReportedBeforeChecking) {
  TempDir dir;
  dir.write("broken.hit", "def f : = x\n");
  dir.write("manifest.txt", "[tier-1]\nbroken.hit\nabsent.hit\n");
  auto m = load_manifest(dir.path / "manifest.txt");
  EXPECT_EQ(error_of([&] { run_tier(m, 1); }), ErrorKind::Io);
}

TEST(Corpus, EmptyTierGivesEmptyReport) {
  TempDir dir;
  dir.write("manifest.txt", "[tier-1]\n[tier-2]\n");
  auto r = run_tier(load_manifest(dir.path / "manifest.txt"), 2);
  EXPECT_TRUE(r.reports.empty());
  EXPECT_TRUE(r.ok());
}

TEST(Corpus, FailuresAreReportedPerFile) {
  TempDir dir;
  dir.write("good.hit", "postulate B : Type\n");
  dir.write("bad.hit", "import good\npostulate b : B\ndef c : B = B\n");
  dir.write("manifest.txt", "[tier-1]\ngood.hit\nbad.hit\n");
  auto r = run_tier(load_manifest(dir.path / "manifest.txt"), 1);
  ASSERT_EQ(r.reports.size(), 2u);
  EXPECT_EQ(r.reports[0].status, "ok");
  EXPECT_EQ(r.reports[1].status, "TypeMismatch");
  EXPECT_FALSE(r.ok());
}

TEST(Corpus, ReportFieldsAndDeterministicSerialization) {
  auto m = load_manifest(corpus_dir() / "manifest.txt");
  auto a = run_tier(m, 1);
  auto b = run_tier(m, 1);
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    auto ja = to_json(a.reports[i]);
    auto jb = to_json(b.reports[i]);
    for (const char* k : {"name", "status", "millis", "steps", "depth"}) EXPECT_TRUE(ja.contains(k)) << k;
    EXPECT_EQ(ja.size(), 5u);
    ja.erase("millis");
    jb.erase("millis");
    EXPECT_EQ(ja.dump(), jb.dump());
    EXPECT_EQ(nlohmann::json::parse(ja.dump()), ja);
  }
  Session s1 = session_with({"maps"});
  Session s2 = session_with({"maps"});
  EXPECT_EQ(serialize(s1.env()), serialize(s2.env()));
}

TEST(Corpus, TierOneChecksWithinBudget) {
  auto m = load_manifest(corpus_dir() / "manifest.txt");
  auto t0 = std::chrono::steady_clock::now();
  auto r = run_tier(m, 1);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_GE(r.reports.size(), 14u);
  for (const auto& rep : r.reports) EXPECT_EQ(rep.status, "ok") << rep.name << ": " << rep.message;
  EXPECT_LT(secs, 120.0);
}

TEST(Corpus, CoherenceDepthsAreReported) {
  auto r = run_tier(load_manifest(corpus_dir() / "manifest.txt"), 1);
  std::map<std::string, std::size_t> depth;
  for (const auto& rep : r.reports) depth[rep.name] = rep.depth;
  EXPECT_EQ(depth["prelude.hit"], 9u); // excoh
  EXPECT_GT(depth["eta-inf-red.hit"], 0u);
  EXPECT_EQ(depth["pointed.hit"], 0u);
}

TEST(Corpus, InclusionEquationHoldsOnlyForNumerals) {
  Session& s = tier1();
  EXPECT_FALSE(inclusion_equation_converts(s, std::nullopt));
  for (int k = 0; k <= 4; ++k) EXPECT_TRUE(inclusion_equation_converts(s, k)) << "n = " << k;
}

TEST(Corpus, SubjectReduction) {
  auto r = subject_reduction(tier1().env());
  EXPECT_GT(r.rules, 100u);
  for (const auto& f : r.failures) ADD_FAILURE() << f;
}

TEST(Corpus, MapsHaveTheirComputationRules) {
  Session& s = tier1();
  Locals l = locals(s, {{"n", "Nat"}, {"x", "Jn n"}});
  EXPECT_TRUE(conv(s.env(), l.scope.ctx, term(s, "to (in-inf n x)", &l), term(s, "inJ n x", &l)));
  Locals e;
  EXPECT_TRUE(conv(s.env(), e.scope.ctx, term(s, "from epsJ"), term(s, "eps-inf")));
  Locals a = locals(s, {{"a", "A"}, {"y", "JA"}});
  EXPECT_TRUE(conv(s.env(), a.scope.ctx, term(s, "from (alphaJ a y)", &a), term(s, "alpha-inf a (from y)", &a)));
}
