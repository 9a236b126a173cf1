#include "mvops/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace mvops;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& s, const std::string& what) { return s.find(what) != std::string::npos; }

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mvops_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  // Disk pair data written from the library: P and Q three-term data and the
  // relation from the Fourier coefficients.
  void write_disk_files() const {
    const DiskAdjacent b = disk_adjacent(0.5L, 4);
    write("ttr_p.json", to_json(b.theorems.ttr_p).dump());
    write("ttr_q.json", to_json(b.theorems.ttr_q).dump());
    write("rel.json", to_json(b.pair.relation).dump());
  }

  fs::path dir_;
};

}  // namespace

TEST(Cli, FamilyDiskPasses) {
  const Outcome r = invoke({"family", "disk", "--mu", "1.5", "--N", "3"});
  EXPECT_EQ(r.code, cli::kExitPass) << r.out << r.err;
  EXPECT_TRUE(contains(r.out, "family: disk"));
  EXPECT_TRUE(contains(r.out, "rank class: full"));
  EXPECT_TRUE(contains(r.out, "result: PASS"));
}

TEST(Cli, ChebyshevExpectedNegative) {
  const Outcome r = invoke({"family", "cheb-koornwinder", "--kind", "3", "--rho", "1", "--N", "3"});
  EXPECT_EQ(r.code, cli::kExitFail);
  EXPECT_TRUE(contains(r.out, "verdict: not orthogonal (expected: not orthogonal)"));
  EXPECT_TRUE(contains(r.out, "result: FAIL (matches expectation: not orthogonal)"));
  const Outcome ok = invoke({"family", "cheb-koornwinder:kind=2,rho=0.5", "--N", "3"});
  EXPECT_EQ(ok.code, cli::kExitPass) << ok.out;
  EXPECT_TRUE(contains(ok.out, "C~ closed form: aligned"));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"family"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"family", "sphere"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"family", "disk", "--mu", "abc"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"family", "disk", "--N", "0"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"counterexample", "--n", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"--tol-rank", "-1", "counterexample"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"--tol-rank", "x", "counterexample"}).code, cli::kExitUsage);
  const Outcome help = invoke({"--help"});
  EXPECT_EQ(help.code, cli::kExitPass);
  EXPECT_TRUE(contains(help.out, "counterexample"));
}

TEST(Cli, CounterexampleLines) {
  // the demonstration passes when every rank deficiency appears as predicted
  const Outcome r = invoke({"counterexample", "--n", "5"});
  EXPECT_EQ(r.code, cli::kExitPass);
  for (int n = 1; n <= 5; ++n)
    EXPECT_TRUE(contains(r.out, "n=" + std::to_string(n) + ": rank " + std::to_string(n - 1) + ", expected n-1 = " +
                                    std::to_string(n - 1) + "  PASS"))
        << r.out;
  EXPECT_TRUE(contains(r.out, "n=1: joint rank 1 of 2"));
  EXPECT_FALSE(contains(r.out, "FAIL  compatibility"));
  EXPECT_FALSE(contains(r.out, "FAIL  rank C~ (n=2, i=2)"));
}

TEST(Cli, JsonSchema) {
  const Outcome r = invoke({"--json", "counterexample", "--n", "3"});
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"command", "manifest", "tolerances", "records", "pass", "timing_ms", "details"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["manifest"], manifest::kManifestVersion);
  EXPECT_EQ(j["command"], "mvops --json counterexample --n 3");
  EXPECT_EQ(j["pass"], true);
  EXPECT_DOUBLE_EQ(j["tolerances"]["rank"].get<double>(), 1e-9);
  EXPECT_DOUBLE_EQ(j["tolerances"]["residual"].get<double>(), 1e-8);
  const auto& rec = j["records"][0];
  EXPECT_EQ(rec["name"], "rank C~ in direction 1");
}

TEST(Cli, RankTolerancePrecedence) {
  ::setenv("MVOPS_TOL_RANK", "1e-6", 1);
  auto tol_of = [](const Outcome& r) { return nlohmann::json::parse(r.out)["tolerances"]["rank"].get<double>(); };
  EXPECT_DOUBLE_EQ(tol_of(invoke({"--json", "counterexample", "--n", "2"})), 1e-6);
  EXPECT_DOUBLE_EQ(tol_of(invoke({"--json", "--tol-rank", "1e-11", "counterexample", "--n", "2"})), 1e-11);
  ::unsetenv("MVOPS_TOL_RANK");
  EXPECT_DOUBLE_EQ(tol_of(invoke({"--json", "counterexample", "--n", "2"})), 1e-9);
}

TEST_F(TempDir, CheckBothDirectionsOnDiskData) {
  write_disk_files();
  const Outcome t4 = invoke({"check", "--theorem", "4", "--ttr", path("ttr_p.json"), "--relation", path("rel.json")});
  EXPECT_EQ(t4.code, cli::kExitPass) << t4.out << t4.err;
  EXPECT_TRUE(contains(t4.out, "P known, Q built"));
  EXPECT_TRUE(contains(t4.out, "verdict: orthogonal"));
  const Outcome t3 = invoke({"check", "--theorem", "3", "--ttr", path("ttr_q.json"), "--relation", path("rel.json")});
  EXPECT_EQ(t3.code, cli::kExitPass) << t3.out << t3.err;
  const Outcome bad = invoke({"check", "--theorem", "5", "--ttr", path("ttr_q.json"), "--relation", path("rel.json")});
  EXPECT_EQ(bad.code, cli::kExitUsage);
}

TEST_F(TempDir, CheckPerturbationIsSeeded) {
  write_disk_files();
  const std::vector<std::string> base{"--json", "check", "--theorem", "4", "--ttr", path("ttr_p.json"),
                                      "--relation", path("rel.json"), "--perturb", "1e-3"};
  auto with_seed = [&](const std::string& s) {
    std::vector<std::string> a{"--seed", s};
    a.insert(a.end(), base.begin(), base.end());
    const Outcome r = invoke(a);
    EXPECT_EQ(r.code, cli::kExitFail);
    auto j = nlohmann::json::parse(r.out);
    return j["records"].dump();
  };
  EXPECT_EQ(with_seed("7"), with_seed("7"));
  EXPECT_NE(with_seed("7"), with_seed("8"));
}

TEST_F(TempDir, ZeroRelationFromPlainText) {
  write_disk_files();
  std::string text;
  for (int n = 1; n <= 4; ++n) text += to_text(Matrix::Zero(n + 1, n));
  write("zero.txt", text);
  const Outcome r = invoke({"check", "--theorem", "4", "--ttr", path("ttr_p.json"), "--relation", path("zero.txt")});
  EXPECT_EQ(r.code, cli::kExitPass) << r.out << r.err;
}

TEST_F(TempDir, BadFiles) {
  write_disk_files();
  write("garbage.json", "{ not json");
  write("wrong_d.txt", to_text(Matrix::Zero(3, 1)));
  EXPECT_EQ(invoke({"check", "--theorem", "4", "--ttr", path("missing.json"), "--relation", path("rel.json")}).code,
            cli::kExitUsage);
  EXPECT_EQ(invoke({"check", "--theorem", "4", "--ttr", path("garbage.json"), "--relation", path("rel.json")}).code,
            cli::kExitUsage);
  EXPECT_EQ(invoke({"check", "--theorem", "4", "--ttr", path("ttr_p.json"), "--relation", path("garbage.json")}).code,
            cli::kExitUsage);
  EXPECT_EQ(invoke({"check", "--theorem", "4", "--ttr", path("ttr_p.json"), "--relation", path("wrong_d.txt")}).code,
            cli::kExitUsage);
  EXPECT_EQ(invoke({"generate", "--ttr", path("rel.json")}).code, cli::kExitUsage);
}

TEST_F(TempDir, SystemGenerateRelate) {
  const Outcome s = invoke({"system", "disk:mu=0", "--N", "4", "--out", path("q.json"), "--ttr-out", path("ttr.json")});
  EXPECT_EQ(s.code, cli::kExitPass) << s.out << s.err;
  const Outcome g = invoke({"generate", "--ttr", path("ttr.json"), "--functional", "disk:mu=0", "--out", path("g.json")});
  EXPECT_EQ(g.code, cli::kExitPass) << g.out << g.err;
  const PolySystem q = polysystem_from_json(cli::detail::read_json(path("q.json")));
  const PolySystem gen = polysystem_from_json(cli::detail::read_json(path("g.json")));
  for (int n = 0; n <= 4; ++n) EXPECT_LE(max_abs(q[n].coeffs() - gen[n].coeffs()), 1e-12L);

  // P for (1 - x) on the disk is not in the catalog; write it from the library
  const MomentFunctional u = left_multiply(LinearPoly{{-1, 0}, 1}, disk_functional(0));
  write("p.json", to_json(gram_schmidt_monic(u, 4).first).dump());
  const Outcome rel = invoke({"relate", "--q", path("q.json"), "--p", path("q.json"), "--functional", "disk:mu=0", "--out",
                       path("rel.json")});
  EXPECT_EQ(rel.code, cli::kExitPass) << rel.out << rel.err;
  EXPECT_TRUE(contains(rel.out, "rank class: zero"));
  EXPECT_EQ(classify_ranks(cli::detail::read_relation(path("rel.json"))).cls, RankClass::Zero);
  // P's functional is not a catalog entry, so only the Q side is checked by name
  const Outcome mismatch = invoke({"relate", "--q", path("q.json"), "--p", path("p.json"), "--functional", "disk:mu=0"});
  EXPECT_EQ(mismatch.code, cli::kExitFail);
}

TEST(Cli, SystemReportsQuasiDefiniteFailure) {
  KrallParams p;
  const Real a1 = *krall_gate_root(p, 4);
  const Outcome r = invoke({"--json", "system", "krall-laguerre:alpha=0.5,a1=" + format_real(a1), "--N", "6"});
  EXPECT_EQ(r.code, cli::kExitFail) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["details"]["failure_degree"], 4);
  EXPECT_EQ(j["details"]["singular_gram_block"], 3);
}

TEST(Cli, ExitCodesFromProcess) {
#ifndef MVOPS_CLI_PATH
  GTEST_SKIP() << "built without the CLI path";
#else
  const char* exe = MVOPS_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((std::string(exe) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("family disk --N 2"), 0);
  EXPECT_EQ(status("counterexample --n 3"), 0);
  EXPECT_EQ(status("family cheb-koornwinder --kind 1 --rho 1 --N 2"), 1);
  EXPECT_EQ(status("family nothing"), 2);
  EXPECT_EQ(status("--no-such-flag counterexample"), 2);
#endif
}
