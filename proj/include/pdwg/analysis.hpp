#pragma once

// Error measures, convergence rates, report serialization and extraction of
// discrete normal eps-harmonic fields.

#include "pdwg/assembly.hpp"
#include "pdwg/mesh.hpp"
#include "pdwg/problems.hpp"
#include "pdwg/solver.hpp"
#include "pdwg/weak_ops.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdwg {

/// ||eps^{1/2} (u - u_h)|| with u_h piecewise constant, by volume quadrature.
inline double error_u(const ProblemSpec& spec, const std::vector<Vec3>& u_h, const Mesh& mesh,
                      int quad_degree) {
  if (static_cast<Index>(u_h.size()) != mesh.num_tets())
    throw std::invalid_argument("error_u: one value per tet required");
  const TetRule rule = tet_rule(quad_degree);
  double sum = 0.0;
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    const auto& g = mesh.geometry[t];
    double cell = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3 x = map_point(g.vertices, rule.points[q]);
      const Vec3 e = spec.exact_u(x) - u_h[t];
      cell += rule.weights[q] * e.dot(spec.epsilon(x) * e);
    }
    sum += g.volume * cell;
  }
  return std::sqrt(std::max(0.0, sum));
}

/// ||eps^{1/2} (Q_h u - u_h)||; the integrand is piecewise constant.
inline double error_Qu(const ProblemSpec& spec, const std::vector<Vec3>& u_h, const Mesh& mesh,
                       int quad_degree) {
  if (static_cast<Index>(u_h.size()) != mesh.num_tets())
    throw std::invalid_argument("error_Qu: one value per tet required");
  const TetRule rule = tet_rule(quad_degree);
  double sum = 0.0;
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    const auto& g = mesh.geometry[t];
    const Vec3 e = l2_project_cell(spec.exact_u, g, rule) - u_h[t];
    const Mat3 eps = l2_project_cell(spec.epsilon, g, rule);
    sum += g.volume * e.dot(eps * e);
  }
  return std::sqrt(std::max(0.0, sum));
}

/// s1(lambda, q; lambda, q)^{1/2}; the exact dual variables vanish.
inline double triple_norm_dual(const GlobalSystem& sys, const SolutionFields& fields) {
  const Vector x = fields.raw.head(sys.dofs.num_dual());
  return std::sqrt(std::max(0.0, x.dot(sys.S1 * x)));
}

/// s2(s, s)^{1/2}; the exact s vanishes.
inline double triple_norm_s(const GlobalSystem& sys, const SolutionFields& fields) {
  const Vector x = fields.raw.segment(sys.dofs.off_s0, sys.dofs.num_s());
  return std::sqrt(std::max(0.0, x.dot(sys.S2 * x)));
}

/// log2(e_coarse / e_fine) per consecutive pair; empty when either error is
/// zero or not finite.
inline std::vector<std::optional<double>> convergence_rates(const std::vector<double>& errors) {
  std::vector<std::optional<double>> rates;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double a = errors[i - 1], b = errors[i];
    if (a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b)) rates.emplace_back(std::log2(a / b));
    else rates.emplace_back(std::nullopt);
  }
  return rates;
}

struct LevelResult {
  int n = 0;         // lattice cells per unit length ("1/h" in the tables)
  double h = 0.0;    // max tet diameter
  Index num_tets = 0;
  Index free_dofs = 0;
  double err_u = 0.0, err_Qu = 0.0, err_dual = 0.0, err_s = 0.0;
  SolverMethod method = SolverMethod::Direct;
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> cavity_constants;
  double residual_before_recovery = 0.0;
  double residual_after_recovery = 0.0;
  double harmonic_norm = 0.0;  // ||eps^{1/2} eta_h||, toroidal domains only
  bool failed = false;
  std::string error;           // failure message for an aborted level
};

struct ConvergenceReport {
  int example = 0;
  std::string params;  // human-readable problem parameters
  StabilizationParams stab;
  int quad_degree = 4;
  std::vector<LevelResult> levels;

  [[nodiscard]] std::vector<const LevelResult*> completed() const {
    std::vector<const LevelResult*> out;
    for (const auto& l : levels)
      if (!l.failed) out.push_back(&l);
    return out;
  }
  /// Rates of one error column over consecutive completed levels.
  [[nodiscard]] std::vector<std::optional<double>> rates(double LevelResult::*member) const {
    std::vector<double> e;
    for (const auto* l : completed()) e.push_back(l->*member);
    return convergence_rates(e);
  }
};

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// 1.64e-1 style (three significant digits, no exponent padding).
inline std::string sci3(double v) {
  if (v == 0.0) return "0";
  if (!std::isfinite(v)) return "nan";
  int e = static_cast<int>(std::floor(std::log10(std::abs(v))));
  double m = v / std::pow(10.0, e);
  if (std::abs(m) >= 9.995) {
    m /= 10.0;
    ++e;
  }
  return fmt("%.2f", m) + "e" + std::to_string(e);
}

inline std::string rate_str(const std::optional<double>& r) { return r ? fmt("%.2f", *r) : ""; }

}  // namespace detail

/// CSV columns: inv_h,h,tets,free_dofs,err_u,rate_u,err_Qu,rate_Qu,err_dual,
/// rate_dual,err_s,rate_s,solver,iterations,rel_residual,cavity_c,
/// residual_before,residual_after,harmonic_norm,status
inline std::string to_csv(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << "inv_h,h,tets,free_dofs,err_u,rate_u,err_Qu,rate_Qu,err_dual,rate_dual,err_s,rate_s,"
        "solver,iterations,rel_residual,cavity_c,residual_before,residual_after,harmonic_norm,status\n";
  const auto ru = rep.rates(&LevelResult::err_u), rq = rep.rates(&LevelResult::err_Qu),
             rd = rep.rates(&LevelResult::err_dual), rs = rep.rates(&LevelResult::err_s);
  std::size_t k = 0;  // index among completed levels
  for (const auto& l : rep.levels) {
    os << l.n << ',' << detail::fmt("%.10e", l.h) << ',' << l.num_tets << ',' << l.free_dofs << ',';
    if (l.failed) {
      os << ",,,,,,,," << to_string(l.method) << ",,,,,,,failed\n";
      continue;
    }
    auto rate = [&](const std::vector<std::optional<double>>& r) {
      return k == 0 ? std::string() : detail::rate_str(r[k - 1]);
    };
    std::string cav;
    for (std::size_t i = 0; i < l.cavity_constants.size(); ++i)
      cav += (i ? ";" : "") + detail::fmt("%.10e", l.cavity_constants[i]);
    os << detail::fmt("%.10e", l.err_u) << ',' << rate(ru) << ',' << detail::fmt("%.10e", l.err_Qu) << ','
       << rate(rq) << ',' << detail::fmt("%.10e", l.err_dual) << ',' << rate(rd) << ','
       << detail::fmt("%.10e", l.err_s) << ',' << rate(rs) << ',' << to_string(l.method) << ','
       << l.iterations << ',' << detail::fmt("%.3e", l.relative_residual) << ',' << cav << ','
       << detail::fmt("%.10e", l.residual_before_recovery) << ','
       << detail::fmt("%.10e", l.residual_after_recovery) << ',' << detail::fmt("%.10e", l.harmonic_norm)
       << ",ok\n";
    ++k;
  }
  return os.str();
}

/// Markdown table: one row per level, each error followed by its rate.
inline std::string to_markdown(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << "Example " << rep.example;
  if (!rep.params.empty()) os << " (" << rep.params << ")";
  os << ", rho = (" << rep.stab.rho1 << ", " << rep.stab.rho2 << ", " << rep.stab.rho3
     << "), gamma = " << rep.stab.gamma << "\n\n";
  os << "| 1/h | ‖ε^{1/2}e_u‖ | rate | ‖ε^{1/2}e_Qu‖ | rate | ‖(e_λ,e_q)‖_s1 | rate | ‖e_s‖_s2 | rate |\n";
  os << "|---|---|---|---|---|---|---|---|---|\n";
  const auto ru = rep.rates(&LevelResult::err_u), rq = rep.rates(&LevelResult::err_Qu),
             rd = rep.rates(&LevelResult::err_dual), rs = rep.rates(&LevelResult::err_s);
  std::size_t k = 0;
  for (const auto& l : rep.levels) {
    if (l.failed) {
      os << "| " << l.n << " | failed: " << l.error << " | | | | | | | |\n";
      continue;
    }
    auto rate = [&](const std::vector<std::optional<double>>& r) {
      return k == 0 ? std::string("-") : detail::rate_str(r[k - 1]);
    };
    os << "| " << l.n << " | " << detail::sci3(l.err_u) << " | " << rate(ru) << " | "
       << detail::sci3(l.err_Qu) << " | " << rate(rq) << " | " << detail::sci3(l.err_dual) << " | "
       << rate(rd) << " | " << detail::sci3(l.err_s) << " | " << rate(rs) << " |\n";
    ++k;
  }
  bool any_cavity = false;
  for (const auto& l : rep.levels) any_cavity |= !l.cavity_constants.empty();
  if (any_cavity) {
    os << "\n| 1/h | c_1 | residual before | residual after |\n|---|---|---|---|\n";
    for (const auto& l : rep.levels)
      if (!l.failed && !l.cavity_constants.empty())
        os << "| " << l.n << " | " << detail::fmt("%.4e", l.cavity_constants[0]) << " | "
           << detail::sci3(l.residual_before_recovery) << " | " << detail::sci3(l.residual_after_recovery)
           << " |\n";
  }
  return os.str();
}

struct HarmonicField {
  std::vector<Vec3> eta;  // Q_h u - u_h per tet
  double norm = 0.0;      // ||eps^{1/2} eta||
  bool simply_connected = false;
};

/// eta_h = Q_h u - u_h from an existing solve.
inline HarmonicField harmonic_from_solution(const ProblemSpec& spec, const Mesh& mesh,
                                            const SolutionFields& fields, int quad_degree) {
  const TetRule rule = tet_rule(quad_degree);
  HarmonicField h;
  h.eta.resize(mesh.num_tets());
  double sum = 0.0;
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    const auto& g = mesh.geometry[t];
    h.eta[t] = l2_project_cell(spec.exact_u, g, rule) - fields.u[t];
    sum += g.volume * h.eta[t].dot(l2_project_cell(spec.epsilon, g, rule) * h.eta[t]);
  }
  h.norm = std::sqrt(std::max(0.0, sum));
  return h;
}

/// One solve with loads induced by the generator `spec`, returning eta_h.
/// On a simply connected domain the field is only discretization error and
/// `simply_connected` is set so callers can warn.
inline HarmonicField extract_discrete_harmonic(const ProblemSpec& spec, const DomainSpec& domain,
                                               const Mesh& mesh, const StabilizationParams& params,
                                               int quad_degree, const SolverOptions& opt = {}) {
  const GlobalSystem sys = assemble_system(spec, mesh, params, quad_degree);
  SolutionFields fields = solve(sys, opt);
  recover_cavity_constants(sys, fields);
  HarmonicField h = harmonic_from_solution(spec, mesh, fields, quad_degree);
  h.simply_connected = domain.first_betti == 0;
  return h;
}

}  // namespace pdwg
