#pragma once

// Convergence-study driver: configuration, validation, and the per-level
// mesh -> assemble -> solve -> recover -> measure pipeline.

#include "pdwg/analysis.hpp"
#include "pdwg/assembly.hpp"
#include "pdwg/mesh.hpp"
#include "pdwg/problems.hpp"
#include "pdwg/solver.hpp"
#include "pdwg/vtk.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdwg {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  int example = 1;
  std::vector<int> refinements{2, 4, 8};
  StabilizationParams stab;
  int quad_degree = 4;
  SolverOptions solver;
  ProblemParams problem;
  std::string csv_path, md_path, vtk_prefix, matrix_prefix;
  std::uint64_t seed = 20240611;
};

inline void validate(const RunConfig& c) {
  if (c.example < 1 || c.example > 7) throw ConfigError("example must be in 1..7");
  if (c.refinements.empty()) throw ConfigError("refinements must not be empty");
  for (std::size_t i = 0; i < c.refinements.size(); ++i) {
    if (c.refinements[i] < 1) throw ConfigError("refinement levels must be positive");
    if (i > 0 && c.refinements[i] != 2 * c.refinements[i - 1])
      throw ConfigError("each refinement level must double the previous one");
  }
  if (!(c.stab.rho1 > 0.0 && c.stab.rho2 > 0.0 && c.stab.rho3 > 0.0))
    throw ConfigError("rho1, rho2, rho3 must be positive");
  if (!(c.stab.gamma >= -1.0)) throw ConfigError("gamma exponent must be >= -1");
  if (c.quad_degree < 1) throw ConfigError("quadrature degree must be >= 1");
  if (c.solver.tol && !(*c.solver.tol > 0.0 && *c.solver.tol < 1.0))
    throw ConfigError("solver tolerance must lie in (0,1)");
  if (c.solver.max_iter < 1) throw ConfigError("max_iter must be positive");
  const DomainSpec dom = build_domain(c.example);
  for (int n : c.refinements)
    if (!lattice_aligned(dom, n))
      throw ConfigError("n=" + std::to_string(n) + " does not resolve the domain of example " +
                        std::to_string(c.example) + " (use an even n)");
  try {
    make_problem(c.example, c.problem);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\"'");
  const auto e = s.find_last_not_of(" \t\r\"'");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& v) {
  // Accept simple fractions such as 2/3.
  const auto slash = v.find('/');
  try {
    std::size_t pos = 0;
    if (slash != std::string::npos) {
      const double a = std::stod(v.substr(0, slash)), b = std::stod(v.substr(slash + 1));
      if (b == 0.0) throw std::invalid_argument("division by zero");
      return a / b;
    }
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for '" + key + "': " + v);
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_number(key, v);
  if (x != static_cast<int>(x)) throw ConfigError("'" + key + "' must be an integer: " + v);
  return static_cast<int>(x);
}

}  // namespace detail

inline std::vector<int> parse_refinements(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (ch != '[' && ch != ']') s += ch;
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(detail::parse_int("refinements", item));
  }
  return out;
}

/// Apply one key=value setting (keys match the long CLI flags, with '-' or '_').
inline void apply_setting(RunConfig& c, std::string key, const std::string& value) {
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string v = detail::trim(value);
  if (key == "example") c.example = detail::parse_int(key, v);
  else if (key == "refinements") c.refinements = parse_refinements(v);
  else if (key == "rho1") c.stab.rho1 = detail::parse_number(key, v);
  else if (key == "rho2") c.stab.rho2 = detail::parse_number(key, v);
  else if (key == "rho3") c.stab.rho3 = detail::parse_number(key, v);
  else if (key == "gamma_exp") c.stab.gamma = detail::parse_number(key, v);
  else if (key == "quad_degree") c.quad_degree = detail::parse_int(key, v);
  else if (key == "solver") {
    try {
      c.solver.method = parse_solver_method(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "tol") c.solver.tol = detail::parse_number(key, v);
  else if (key == "max_iter") c.solver.max_iter = detail::parse_int(key, v);
  else if (key == "csv") c.csv_path = v;
  else if (key == "md") c.md_path = v;
  else if (key == "vtk") c.vtk_prefix = v;
  else if (key == "export_matrix") c.matrix_prefix = v;
  else if (key == "gamma") c.problem.gamma = detail::parse_number(key, v);
  else if (key == "alpha") c.problem.alpha = detail::parse_number(key, v);
  else if (key == "beta") c.problem.beta = detail::parse_number(key, v);
  else if (key == "gamma1") c.problem.gamma1 = detail::parse_number(key, v);
  else if (key == "gamma2") c.problem.gamma2 = detail::parse_number(key, v);
  else if (key == "beta_source") {
    if (v == "true" || v == "1") c.problem.beta_source = true;
    else if (v == "false" || v == "0") c.problem.beta_source = false;
    else throw ConfigError("'beta_source' must be true or false: " + v);
  } else if (key == "seed") c.seed = static_cast<std::uint64_t>(detail::parse_number(key, v));
  else throw ConfigError("unknown configuration key '" + key + "'");
}

/// key = value lines; '#' starts a comment; [section] headers are ignored.
inline void parse_config_stream(std::istream& in, RunConfig& c, const std::string& origin = "config") {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    apply_setting(c, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

inline void parse_config_file(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  parse_config_stream(in, c, path);
}

inline std::string describe_params(const ProblemSpec& spec) {
  std::ostringstream os;
  switch (spec.example) {
    case 5: os << "gamma=" << spec.gamma << ", alpha=" << spec.alpha; break;
    case 6: os << "gamma1=" << spec.gamma1 << ", gamma2=" << spec.gamma2 << ", alpha=" << spec.alpha; break;
    case 7:
      os << "gamma=" << spec.gamma << ", alpha=" << spec.alpha << ", beta=" << spec.beta;
      if (spec.beta_source) os << ", beta source";
      break;
    default: break;
  }
  return os.str();
}

struct StudyResult {
  ConvergenceReport report;
  bool solver_failure = false;
};

inline std::string level_path(const std::string& prefix, int n, const std::string& ext) {
  return prefix + "_n" + std::to_string(n) + ext;
}

/// One refinement level. Throws on failure.
inline LevelResult run_level(const RunConfig& cfg, const ProblemSpec& spec, const DomainSpec& dom, int n,
                             std::ostream* log) {
  LevelResult L;
  L.n = n;
  const Mesh mesh = build_structured_tet_mesh(dom, n);
  L.h = mesh.h;
  L.num_tets = mesh.num_tets();
  SolutionFields sol;
  {
    const GlobalSystem sys = assemble_system(spec, mesh, cfg.stab, cfg.quad_degree);
    L.free_dofs = sys.dofs.num_free();
    if (log) *log << "  n=" << n << ": " << mesh.num_tets() << " tets, " << L.free_dofs << " free dofs\n";
    if (!cfg.matrix_prefix.empty())
      export_matrix_market(sys, level_path(cfg.matrix_prefix, n, ".mtx"),
                           level_path(cfg.matrix_prefix, n, "_rhs.mtx"));
    sol = solve(sys, cfg.solver);
    L.method = sol.stats.method;
    L.iterations = sol.stats.iterations;
    L.relative_residual = sol.stats.relative_residual;
    const CavityRecovery rec = recover_cavity_constants(sys, sol);
    L.cavity_constants = rec.constants;
    L.residual_before_recovery = rec.residual_before;
    L.residual_after_recovery = rec.residual_after;
    if (rec.rank_deficient && log) *log << "  warning: cavity least-squares system is rank deficient, c = 0\n";
    L.err_dual = triple_norm_dual(sys, sol);
    L.err_s = triple_norm_s(sys, sol);
  }
  L.err_u = error_u(spec, sol.u, mesh, cfg.quad_degree);
  L.err_Qu = error_Qu(spec, sol.u, mesh, cfg.quad_degree);

  std::vector<Vec3> eta;
  if (dom.first_betti > 0) {
    HarmonicField hf = harmonic_from_solution(spec, mesh, sol, cfg.quad_degree);
    L.harmonic_norm = hf.norm;
    eta = std::move(hf.eta);
  }
  if (!cfg.vtk_prefix.empty()) {
    const TetRule rule = tet_rule(cfg.quad_degree);
    const std::vector<Vec3> qu = project_field(spec.exact_u, mesh, rule);
    std::vector<double> density(mesh.num_tets());
    for (Index t = 0; t < mesh.num_tets(); ++t) {
      const auto& g = mesh.geometry[t];
      const Vec3 e = qu[t] - sol.u[t];
      density[t] = e.dot(l2_project_cell(spec.epsilon, g, rule) * e);
    }
    VtkCellData data;
    data.vectors = {{"u_h", &sol.u}, {"Q_h_u", &qu}};
    if (!eta.empty()) data.vectors.emplace_back("eta_h", &eta);
    data.scalars = {{"error_density", &density}};
    write_vtk(level_path(cfg.vtk_prefix, n, ".vtk"), mesh, data, "example " + std::to_string(cfg.example));
  }
  return L;
}

inline StudyResult run_study(const RunConfig& cfg, std::ostream* log = nullptr) {
  validate(cfg);
  const ProblemSpec spec = make_problem(cfg.example, cfg.problem);
  const DomainSpec dom = build_domain(cfg.example);
  StudyResult out;
  out.report.example = cfg.example;
  out.report.params = describe_params(spec);
  out.report.stab = cfg.stab;
  out.report.quad_degree = cfg.quad_degree;
  for (int n : cfg.refinements) {
    try {
      out.report.levels.push_back(run_level(cfg, spec, dom, n, log));
    } catch (const std::exception& e) {
      LevelResult L;
      L.n = n;
      L.failed = true;
      L.error = e.what();
      out.report.levels.push_back(L);
      out.solver_failure = true;
      if (log) *log << "  n=" << n << " failed: " << e.what() << "\n";
    }
  }
  if (!cfg.csv_path.empty()) {
    std::ofstream f(cfg.csv_path);
    if (!f) throw std::runtime_error("cannot write " + cfg.csv_path);
    f << to_csv(out.report);
  }
  if (!cfg.md_path.empty()) {
    std::ofstream f(cfg.md_path);
    if (!f) throw std::runtime_error("cannot write " + cfg.md_path);
    f << to_markdown(out.report);
  }
  return out;
}

}  // namespace pdwg
