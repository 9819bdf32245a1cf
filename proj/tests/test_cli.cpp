#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>

#include <json.hpp>

#include "support.hpp"

using testing_support::corpus_dir;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(HITT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string corpus(const std::string& f) { return (corpus_dir() / f).string(); }

} // namespace

TEST(Cli, ChecksThePrelude) { EXPECT_EQ(run("check " + corpus("prelude.hit")).code, 0); }

TEST(Cli, ModelAsJson) {
  auto r = run("model --m 2 --n 2 --json");
  EXPECT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["classes"], 3);
  EXPECT_EQ(j["bijection"], true);
}

TEST(Cli, MissingFileIsAUsageError) { EXPECT_EQ(run("check nosuchfile.hit").code, 2); }

TEST(Cli, BadFlagsAreUsageErrors) {
  EXPECT_EQ(run("check --frobnicate " + corpus("prelude.hit")).code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("model --m 0 --n 2").code, 2);
}

TEST(Cli, TypeErrorIsADomainFailure) {
  auto path = std::filesystem::temp_directory_path() / "hitt-cli-bad.hit";
  std::ofstream(path) << "postulate B : Type\npostulate b : B\ndef c : B = B\n";
  EXPECT_EQ(run("check " + path.string()).code, 1);
  std::ofstream(path) << "def f : = x\n";
  EXPECT_EQ(run("check " + path.string()).code, 2);
  std::filesystem::remove(path);
}

TEST(Cli, CoherenceWitness) {
  auto r = run("coh " + corpus("prelude.hit") + " --goal composition --json");
  EXPECT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["witness"], "J (J idp-Coh)");
  EXPECT_EQ(run("coh " + corpus("prelude.hit") + " --goal nothing").code, 1);
}

TEST(Cli, NormalForm) {
  auto r = run("nf " + corpus("prelude.hit") + " --term idp-Coh --json");
  EXPECT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["nf"], "\\{X} {a} -> coh-in idp");
}

TEST(Cli, CorpusTierIsDeterministic) {
  auto a = run("corpus " + corpus("manifest.txt") + " --tier 1 --json");
  auto b = run("corpus " + corpus("manifest.txt") + " --tier 1 --json");
  EXPECT_EQ(a.code, 0);
  auto ja = nlohmann::json::parse(a.out), jb = nlohmann::json::parse(b.out);
  ASSERT_EQ(ja.size(), jb.size());
  for (std::size_t i = 0; i < ja.size(); ++i) {
    ja[i].erase("millis");
    jb[i].erase("millis");
  }
  EXPECT_EQ(ja, jb);
  EXPECT_EQ(run("corpus " + corpus("manifest.txt") + " --tier 9").code, 0);
}
