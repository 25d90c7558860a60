#include "pdwg/study.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace pdwg;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PDWG_STUDY_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pdwg_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Config, DefaultsMatchTheLadder) {
  const RunConfig c;
  EXPECT_EQ(c.example, 1);
  EXPECT_EQ(c.refinements, (std::vector<int>{2, 4, 8}));
  EXPECT_EQ(c.stab.rho1, 1.0);
  EXPECT_EQ(c.stab.rho3, 1.0);
  EXPECT_EQ(c.stab.gamma, -1.0);
  EXPECT_EQ(c.quad_degree, 4);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, ParsesKeyValueStream) {
  std::istringstream in(
      "# study\n[run]\nexample = 5\nrefinements = [2, 4]\ngamma = 2/3\nrho2 = 0.5  # weight\n"
      "gamma-exp = 1\nsolver = \"minres\"\ntol = 1e-9\n");
  RunConfig c;
  parse_config_stream(in, c);
  EXPECT_EQ(c.example, 5);
  EXPECT_EQ(c.refinements, (std::vector<int>{2, 4}));
  EXPECT_NEAR(*c.problem.gamma, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(c.stab.rho2, 0.5);
  EXPECT_EQ(c.stab.gamma, 1.0);
  EXPECT_EQ(c.solver.method, SolverMethod::Minres);
  EXPECT_EQ(*c.solver.tol, 1e-9);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, RejectsBadInput) {
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "colour", "red"), ConfigError);
  EXPECT_THROW(apply_setting(c, "example", "x"), ConfigError);
  EXPECT_THROW(apply_setting(c, "example", "1.5"), ConfigError);
  EXPECT_THROW(apply_setting(c, "solver", "cg"), ConfigError);
  EXPECT_THROW(apply_setting(c, "beta-source", "maybe"), ConfigError);
  std::istringstream bad("example 3\n");
  EXPECT_THROW(parse_config_stream(bad, c), ConfigError);

  auto invalid = [](auto mutate) {
    RunConfig r;
    mutate(r);
    EXPECT_THROW(validate(r), ConfigError);
  };
  invalid([](RunConfig& r) { r.example = 8; });
  invalid([](RunConfig& r) { r.refinements = {2, 3}; });
  invalid([](RunConfig& r) { r.refinements = {}; });
  invalid([](RunConfig& r) { r.stab.rho1 = 0.0; });
  invalid([](RunConfig& r) { r.stab.gamma = -2.0; });
  invalid([](RunConfig& r) { r.quad_degree = 0; });
  invalid([](RunConfig& r) { r.solver.tol = 2.0; });
  invalid([](RunConfig& r) { r.example = 4, r.refinements = {1, 2}; });
  invalid([](RunConfig& r) { r.example = 5, r.problem.gamma = 0.9; });
  invalid([](RunConfig& r) { r.problem.beta_source = true; });
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--selftest -q"), 0);
  EXPECT_EQ(run("--selftest --mutate-kernels -q"), 3);
  EXPECT_EQ(run("--example 9 -q"), 2);
  EXPECT_EQ(run("--refinements 2,3 -q"), 2);
  EXPECT_EQ(run("--no-such-flag"), 2);
  EXPECT_EQ(run("--config /nonexistent/pdwg.toml"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path cfg = scratch("study.toml"), csv = scratch("flags.csv");
  std::ofstream(cfg) << "example = 3\nrefinements = 2,4\n";
  ASSERT_EQ(run("--config " + cfg.string() + " --example 1 --refinements 2 --csv " + csv.string() + " -q"), 0);
  const std::string text = slurp(csv);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);  // header plus the single level
  EXPECT_EQ(text.substr(text.find('\n') + 1, 2), "2,");
}

TEST(Cli, RerunsProduceIdenticalCsv) {
  const fs::path a = scratch("a.csv"), b = scratch("b.csv");
  ASSERT_EQ(run("--example 4 --refinements 2 --solver direct --csv " + a.string() + " -q"), 0);
  ASSERT_EQ(run("--example 4 --refinements 2 --solver direct --csv " + b.string() + " -q"), 0);
  const std::string ta = slurp(a);
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, slurp(b));
}

TEST(Cli, WritesVtkAndMarkdown) {
  const fs::path prefix = scratch("ex7"), md = scratch("ex7.md");
  ASSERT_EQ(run("--example 7 --refinements 2 --vtk " + prefix.string() + " --md " + md.string() + " -q"), 0);
  const std::string vtk = slurp(prefix.string() + "_n2.vtk");
  EXPECT_EQ(vtk.rfind("# vtk DataFile Version", 0), 0u);
  EXPECT_NE(vtk.find("UNSTRUCTURED_GRID"), std::string::npos);
  EXPECT_NE(vtk.find("eta_h"), std::string::npos);
  EXPECT_NE(vtk.find("error_density"), std::string::npos);
  const std::string table = slurp(md);
  EXPECT_NE(table.find("Example 7"), std::string::npos);
  EXPECT_NE(table.find("| 2 |"), std::string::npos);
}
