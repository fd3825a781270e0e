#include "homog/cli.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace homog;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "homog");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / ("homog_test_cli_" + leaf);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_problem(const fs::path& dir, const std::string& name, const std::string& extra) {
  const fs::path p = dir / name;
  std::ofstream(p) << "[bstruct]\nd = 1\nn = 1\nm = 1\nB = [[[1]]]\n\n[A]\nscalar = \"2 + sin(2*pi*xi1)\"\n"
                   << extra;
  return p;
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ValidateAcceptsEveryPreset) {
  for (const char* p : {"harmonic1d", "lowerorder1d", "magnetic2d", "pauli2d"}) {
    const Outcome o = run({"validate", "--preset", p});
    EXPECT_EQ(o.code, kExitOk) << p << o.err;
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_EQ(j["command"], "validate");
    EXPECT_EQ(j["problem"], std::string("preset:") + p);
  }
}

TEST(Cli, ValidationFailureExitCode) {
  const fs::path dir = scratch("validation");
  const fs::path bad = write_problem(dir, "bad.toml", "[V]\nscalar = [1, 0.5]\n");
  const Outcome o = run({"validate", "--config", bad.string()});
  EXPECT_EQ(o.code, kExitValidation);
  EXPECT_NE(o.err.find("V[1][1]"), std::string::npos) << o.err;
  EXPECT_EQ(run({"effective", "--config", bad.string()}).code, kExitValidation);
  const fs::path indefinite = dir / "indef.toml";
  std::ofstream(indefinite) << "[bstruct]\nd = 1\nn = 1\nm = 1\nB = [[[1]]]\n[A]\nscalar = \"sin(2*pi*xi1)\"\n";
  EXPECT_EQ(run({"converge", "--config", indefinite.string()}).code, kExitValidation);
}

TEST(Cli, EffectiveHarmonicMean) {
  const Outcome o = run({"effective", "--preset", "harmonic1d"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  const double a2 = j["coefficients"]["nodes"]["0"]["A2"][0][0][0].get<double>();
  EXPECT_NEAR(a2, std::sqrt(3.0), 1e-6);
}

TEST(Cli, CrossCheckExitCode) {
  const Outcome o = run({"effective", "--preset", "lowerorder1d", "--cross-check-tolerance", "1e-300"});
  EXPECT_EQ(o.code, kExitCrossCheck);
  EXPECT_NE(o.err.find("cross-check"), std::string::npos);
}

TEST(Cli, CriteriaExitCode) {
  const Outcome o = run({"spectrum", "--preset", "harmonic1d", "--periods", "8", "9", "10"});
  EXPECT_EQ(o.code, kExitCriteria) << o.err;
  EXPECT_FALSE(o.out.empty());
}

TEST(Cli, SolverExitCode) {
  const Outcome o = run({"effective", "--preset", "harmonic1d", "--cell-accept-residual", "1e-30"});
  EXPECT_EQ(o.code, kExitSolver);
  const fs::path dir = scratch("solver");
  const fs::path p = write_problem(dir, "p.toml", "[run]\ncell_accept_residual = 1e-30\n");
  EXPECT_EQ(run({"effective", "--config", p.string()}).code, kExitSolver);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"bogus", "--preset", "harmonic1d"}).code, kExitUsage);
  EXPECT_EQ(run({"validate"}).code, kExitUsage);
  EXPECT_EQ(run({"validate", "--preset", "nope"}).code, kExitUsage);
  EXPECT_EQ(run({"validate", "--config", "/nonexistent/p.toml"}).code, kExitUsage);
  EXPECT_EQ(run({"validate", "--preset", "harmonic1d", "--config", "x.toml"}).code, kExitUsage);
  EXPECT_EQ(run({"spectrum", "--preset", "harmonic1d", "--k", "20"}).code, kExitUsage);
  EXPECT_EQ(run({"converge", "--preset", "harmonic1d", "--periods", "8", "16"}).code, kExitUsage);
  EXPECT_EQ(run({"converge", "--preset", "harmonic1d", "--eps", "1.0", "0.5", "0.25"}).code, kExitUsage);
  EXPECT_EQ(run({"converge", "--preset", "harmonic1d", "--lambda", "5"}).code, kExitUsage);
  EXPECT_EQ(run({"effective", "--preset", "harmonic1d", "--cell-backend", "magic"}).code, kExitUsage);
}

TEST(Cli, RunTableFillsDefaults) {
  const fs::path dir = scratch("runtable");
  const fs::path p = write_problem(dir, "p.toml", "[run]\nperiods = [8, 16]\n");
  EXPECT_EQ(run({"converge", "--config", p.string()}).code, kExitUsage);
  EXPECT_EQ(run({"converge", "--config", p.string(), "--periods", "8", "16", "32", "--no-fd-probe"}).code,
            kExitOk);
}

TEST(Cli, ConvergeWritesReports) {
  const fs::path dir = scratch("converge");
  const Outcome o = run({"converge", "--preset", "harmonic1d", "--periods", "8", "16", "32", "64",
                         "--out", dir.string(), "--format", "csv", "--export-matrices"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_EQ(o.out.rfind("eps,err_L2,err_W1_corrected,err_W1_uncorrected\n", 0), 0u);
  EXPECT_EQ(slurp(dir / "converge.csv"), o.out);
  const auto j = nlohmann::json::parse(slurp(dir / "converge.json"));
  EXPECT_GE(j["report"]["rate_L2"].get<double>(), 0.9);
  EXPECT_TRUE(fs::exists(dir / "H_eps.mtx"));
  EXPECT_TRUE(fs::exists(dir / "G_eps.mtx"));
}

TEST(Cli, BinaryIsDeterministic) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const std::string base =
      std::string(HOMOG_CLI_PATH) + " spectrum --preset harmonic1d --periods 8 16 32 --k 2 --out ";
  ASSERT_EQ(shell(base + a.string() + " > " + (a / "stdout").string()), kExitOk);
  ASSERT_EQ(shell(base + b.string() + " > " + (b / "stdout").string()), kExitOk);
  EXPECT_EQ(slurp(a / "spectrum.json"), slurp(b / "spectrum.json"));
  EXPECT_EQ(slurp(a / "stdout"), slurp(b / "stdout"));
  EXPECT_EQ(slurp(a / "stdout"), slurp(a / "spectrum.json"));
  EXPECT_EQ(shell(std::string(HOMOG_CLI_PATH) + " validate --preset nope 2> /dev/null"), kExitUsage);
}
