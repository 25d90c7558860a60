// Batch convergence studies for the PDWG div-curl solver.
//
//   pdwg_study --example 1 --refinements 2,4,8 --csv ex1.csv --md ex1.md
//   pdwg_study --config study.toml --solver minres
//   pdwg_study --selftest
//
// Exit status: 0 success, 1 solver failure, 2 invalid configuration,
// 3 selftest failure.

#include "pdwg/pdwg.hpp"

#include "CLI11.hpp"
#include "blas_env.hpp"

#include <iostream>
#include <map>
#include <string>

namespace {

enum Exit { kOk = 0, kSolverFailure = 1, kBadConfig = 2, kSelftestFailure = 3 };

int run_selftest(std::uint64_t seed, bool mutate) {
  bool ok = true;
  for (const auto& r : pdwg::run_selftest(seed, mutate)) {
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? kOk : kSelftestFailure;
}

}  // namespace

int main(int argc, char** argv) {
  pdwg_tools::pin_blas_core(argv);

  CLI::App app{"Primal-dual weak Galerkin convergence studies for div-curl systems"};
  app.option_defaults()->always_capture_default();

  // Everything except --config and the mode switches is collected as raw text
  // and applied after the config file, so flags override file settings.
  std::map<std::string, std::string> flags;
  auto flag = [&](const std::string& name, const std::string& help) {
    app.add_option_function<std::string>(
        "--" + name, [&flags, name](const std::string& v) { flags[name] = v; }, help);
  };
  flag("example", "example id 1..7");
  flag("refinements", "comma separated lattice sizes n (1/h), each doubling the previous");
  flag("rho1", "stabilizer weight for lambda");
  flag("rho2", "stabilizer weight for q");
  flag("rho3", "stabilizer weight for s");
  flag("gamma-exp", "exponent of h in the s stabilizer");
  flag("quad-degree", "load and error quadrature degree");
  flag("solver", "auto, direct or minres");
  flag("tol", "relative residual tolerance");
  flag("max-iter", "MINRES iteration cap");
  flag("csv", "write the report as CSV");
  flag("md", "write the report as a Markdown table");
  flag("vtk", "prefix for per-level VTK cell fields");
  flag("export-matrix", "prefix for Matrix Market dumps of each system");
  flag("gamma", "singularity exponent (examples 5, 7)");
  flag("alpha", "angular parameter (examples 5, 6, 7)");
  flag("beta", "weight of the smooth rotational term (example 7)");
  flag("beta-source", "true: add the source beta pi cos(pi x) cos(pi y) to example 7");
  flag("gamma1", "first singularity exponent (example 6)");
  flag("gamma2", "second singularity exponent (example 6)");
  flag("seed", "seed for randomized self tests");

  std::string config_path;
  bool selftest = false, mutate = false, quiet = false;
  app.add_option("--config", config_path, "key = value file; command line flags win")->check(CLI::ExistingFile);
  app.add_flag("--selftest", selftest, "run the invariant suites and exit");
  app.add_flag("--mutate-kernels", mutate, "flip the weak curl sign inside --selftest (fault injection)")
      ->group("Developer");
  app.add_flag("-q,--quiet", quiet, "no progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadConfig;
  }

  pdwg::RunConfig cfg;
  try {
    if (!config_path.empty()) pdwg::parse_config_file(config_path, cfg);
    for (const auto& [k, v] : flags) pdwg::apply_setting(cfg, k, v);
    if (selftest) return run_selftest(cfg.seed, mutate);
    pdwg::validate(cfg);
  } catch (const pdwg::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kBadConfig;
  }

  try {
    if (!quiet) std::cerr << "example " << cfg.example << "\n";
    const pdwg::StudyResult res = pdwg::run_study(cfg, quiet ? nullptr : &std::cerr);
    std::cout << pdwg::to_markdown(res.report);
    return res.solver_failure ? kSolverFailure : kOk;
  } catch (const pdwg::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
}
