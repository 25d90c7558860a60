#pragma once

// Invariant suites run by the CLI self-test: kernel identities, commutativity
// with the projections, patch test, system symmetry and a finite-difference
// check of the manufactured loads.

#include "pdwg/analysis.hpp"
#include "pdwg/assembly.hpp"
#include "pdwg/mesh.hpp"
#include "pdwg/problems.hpp"
#include "pdwg/solver.hpp"
#include "pdwg/weak_ops.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace pdwg {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct KernelSet {
  std::function<Vec3(const ElementGeometry&, const ScalarWeakLocal&)> grad = weak_gradient_p0;
  std::function<Vec3(const ElementGeometry&, const VectorWeakLocal&)> curl = weak_curl_p0;
};

/// Kernels with the weak curl sign flipped, for fault-injection runs.
inline KernelSet mutated_kernels() {
  KernelSet k;
  k.curl = [](const ElementGeometry& g, const VectorWeakLocal& psi) -> Vec3 { return -weak_curl_p0(g, psi); };
  return k;
}

/// Random non-degenerate tetrahedron inside the unit cube.
inline ElementGeometry random_tet(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    std::array<Vec3, 4> v;
    for (auto& p : v) p = Vec3(U(rng), U(rng), U(rng));
    double diam = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) diam = std::max(diam, (v[i] - v[j]).norm());
    const double vol = std::abs((v[1] - v[0]).dot((v[2] - v[0]).cross(v[3] - v[0]))) / 6.0;
    if (vol > 1e-2 * diam * diam * diam) return element_geometry(v);
  }
}

inline SuiteResult kernel_identity_suite(int samples, std::uint64_t seed, const KernelSet& k = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ElementGeometry g = random_tet(rng);
    const double scale = 1.0 / g.diameter;
    for (int i = 0; i < 4; ++i) {
      const auto fv = g.face_vertices(i);
      const double area = 0.5 * (fv[1] - fv[0]).cross(fv[2] - fv[0]).norm();
      worst = std::max(worst, std::abs(area - 3.0 * g.volume * g.grad_bary[i].norm()) / area);
      const Vec3 out = (fv[0] + fv[1] + fv[2]) / 3.0 - g.vertices[i];
      if (!(g.normal[i].dot(out) > 0.0)) worst = std::max(worst, 1.0);

      ScalarWeakLocal v;
      v.v0 = U(rng);
      v.vb[i] = 1.0;
      worst = std::max(worst, (k.grad(g, v) + 3.0 * g.grad_bary[i]).norm() / (3.0 * g.grad_bary[i].norm()));

      VectorWeakLocal psi;
      Vec3 t(U(rng), U(rng), U(rng));
      t -= t.dot(g.normal[i]) * g.normal[i];
      psi.psib[i] = t;
      psi.psi0 = Vec3(U(rng), U(rng), U(rng));
      const Vec3 expect = 3.0 * t.cross(g.grad_bary[i]);
      worst = std::max(worst, (k.curl(g, psi) - expect).norm() / std::max(expect.norm(), scale));
    }
    ScalarWeakLocal c;
    c.v0 = 0.3;
    c.vb = {1.7, 1.7, 1.7, 1.7};
    worst = std::max(worst, k.grad(g, c).norm() * g.diameter / 1.7);
  }
  std::ostringstream os;
  os << samples << " tets, max relative deviation " << worst;
  return {"kernel identities", worst <= 1e-11, os.str()};
}

/// grad_w(Q_h phi) = Q_0 grad phi and curl_w(Q_h psi) = Q_0 curl psi for
/// affine phi, psi on random tets.
inline SuiteResult commutativity_suite(int samples, std::uint64_t seed, const KernelSet& k = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const TetRule cell = tet_rule(1);
  const TriangleRule face = triangle_rule(1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ElementGeometry g = random_tet(rng);
    const double a = U(rng);
    const Vec3 b(U(rng), U(rng), U(rng));
    const Vec3 c(U(rng), U(rng), U(rng));
    Mat3 M;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) M(i, j) = U(rng);
    auto phi = [&](const Vec3& x) { return a + b.dot(x); };
    auto psi = [&](const Vec3& x) -> Vec3 { return c + M * x; };
    const Vec3 curl_psi(M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1));

    ScalarWeakLocal qphi;
    VectorWeakLocal qpsi;
    qphi.v0 = l2_project_cell(phi, g, cell);
    qpsi.psi0 = l2_project_cell(psi, g, cell);
    for (int i = 0; i < 4; ++i) {
      const FaceGeometry fg = face_geometry(g, i);
      qphi.vb[i] = l2_project_face(phi, fg, face);
      qpsi.psib[i] = l2_project_face(psi, fg, face);
    }
    worst = std::max(worst, (k.grad(g, qphi) - b).norm() / std::max(1.0, b.norm()));
    worst = std::max(worst, (k.curl(g, qpsi) - curl_psi).norm() / std::max(1.0, curl_psi.norm()));
  }
  std::ostringstream os;
  os << samples << " random affine pairs, max relative deviation " << worst;
  return {"commutativity", worst <= 1e-11, os.str()};
}

/// Constant u with eps = diag(3,2,1) on the unit cube is reproduced exactly.
inline SuiteResult patch_test_suite(int n = 2) {
  const Mat3 eps = Eigen::Vector3d(3.0, 2.0, 1.0).asDiagonal();
  const ProblemSpec spec = make_constant_problem(Vec3(0.3, -1.2, 0.7), eps);
  const Mesh mesh = build_structured_tet_mesh(build_domain(1), n);
  const GlobalSystem sys = assemble_system(spec, mesh, {}, 2);
  const SolutionFields sol = solve(sys, {SolverMethod::Direct, 1e-12});
  const double eu = error_u(spec, sol.u, mesh, 2);
  const double ed = triple_norm_dual(sys, sol);
  const double es = triple_norm_s(sys, sol);
  std::ostringstream os;
  os << "n=" << n << " e_u=" << eu << " dual=" << ed << " s=" << es;
  return {"patch test", eu <= 1e-8 && ed <= 1e-8 && es <= 1e-8, os.str()};
}

/// Exact symmetry of A, semidefiniteness of s1/s2 on random vectors, and a
/// zero solution for homogeneous data.
inline SuiteResult symmetry_suite(std::uint64_t seed, int n = 2) {
  const ProblemSpec spec = make_problem(1);
  const Mesh mesh = build_structured_tet_mesh(build_domain(1), n);
  const GlobalSystem sys = assemble_system(spec, mesh, {}, 4);
  const SparseMatrix At = sys.A_full.transpose();
  double asym = 0.0;
  const SparseMatrix D = sys.A_full - At;
  for (int k = 0; k < D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(D, k); it; ++it) asym = std::max(asym, std::abs(it.value()));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  double min_q = 0.0;
  for (int s = 0; s < 100; ++s) {
    Vector x1(sys.S1.rows()), x2(sys.S2.rows());
    for (Index i = 0; i < x1.size(); ++i) x1[i] = N(rng);
    for (Index i = 0; i < x2.size(); ++i) x2[i] = N(rng);
    min_q = std::min({min_q, x1.dot(sys.S1 * x1) / x1.squaredNorm(), x2.dot(sys.S2 * x2) / x2.squaredNorm()});
  }

  GlobalSystem hom = sys;
  hom.F.setZero();
  hom.F_full.setZero();
  const SolutionFields z = solve(hom, {SolverMethod::Direct});
  const double zmax = z.raw.cwiseAbs().maxCoeff();

  std::ostringstream os;
  os << "max|A-A^T|=" << asym << " min Rayleigh(s1,s2)=" << min_q << " max|x_hom|=" << zmax;
  return {"system symmetry", asym == 0.0 && min_q >= -1e-12 && zmax == 0.0, os.str()};
}

/// Fourth-order central differences of eps u: returns (div(eps u), curl u).
inline std::pair<double, Vec3> fd_div_curl(const ProblemSpec& spec, const Vec3& x, double h) {
  Mat3 J_eu, J_u;  // J(i, d) = d/dx_d of component i
  for (int d = 0; d < 3; ++d) {
    auto at = [&](double s) {
      Vec3 y = x;
      y[d] += s * h;
      return y;
    };
    auto deriv = [&](const std::function<Vec3(const Vec3&)>& F) -> Vec3 {
      return (-F(at(2)) + 8.0 * F(at(1)) - 8.0 * F(at(-1)) + F(at(-2))) / (12.0 * h);
    };
    J_u.col(d) = deriv(spec.exact_u);
    J_eu.col(d) = deriv([&](const Vec3& y) -> Vec3 { return spec.epsilon(y) * spec.exact_u(y); });
  }
  const Vec3 curl(J_u(2, 1) - J_u(1, 2), J_u(0, 2) - J_u(2, 0), J_u(1, 0) - J_u(0, 1));
  return {J_eu.trace(), curl};
}

struct OracleCase {
  int example;
  ProblemParams params;
  std::string label;
};

inline std::vector<OracleCase> oracle_cases() {
  std::vector<OracleCase> c;
  for (int e = 1; e <= 4; ++e) c.push_back({e, {}, "example " + std::to_string(e)});
  for (double gmm : {1.25, 1.0, 2.0 / 3.0}) {
    ProblemParams p;
    p.gamma = gmm;
    c.push_back({5, p, "example 5 gamma=" + std::to_string(gmm)});
  }
  c.push_back({6, {}, "example 6"});
  for (double b : {1.0, 5.0}) {
    ProblemParams p;
    p.beta = b;
    c.push_back({7, p, "example 7 beta=" + std::to_string(b)});
  }
  return c;
}

/// Finite-difference check of f = div(eps u) and g = curl u at random
/// interior points at least `min_dist` from any singular axis.
inline SuiteResult load_oracle_suite(std::uint64_t seed, int points = 100, double min_dist = 0.1) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::string worst_case;
  for (const auto& oc : oracle_cases()) {
    const ProblemSpec spec = make_problem(oc.example, oc.params);
    const DomainSpec dom = build_domain(oc.example);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int accepted = 0;
    while (accepted < points) {
      Vec3 x;
      for (int d = 0; d < 3; ++d) x[d] = dom.bounds.lo[d] + U(rng) * (dom.bounds.hi[d] - dom.bounds.lo[d]);
      if (!dom.contains(x) || spec.singular_distance(x) < min_dist) continue;
      ++accepted;
      const auto [div, curl] = fd_div_curl(spec, x, 1e-3);
      const double f = spec.f(x);
      const Vec3 g = spec.g(x);
      const double df = std::abs(div - f) / std::max(1.0, std::abs(f));
      const double dg = (curl - g).norm() / std::max(1.0, g.norm());
      if (std::max(df, dg) > worst) {
        worst = std::max(df, dg);
        worst_case = oc.label;
      }
    }
  }
  std::ostringstream os;
  os << oracle_cases().size() << " problems x " << points << " points, max relative deviation " << worst;
  if (!worst_case.empty()) os << " (" << worst_case << ")";
  return {"load oracle", worst <= 1e-5, os.str()};
}

inline std::vector<SuiteResult> run_selftest(std::uint64_t seed, bool mutate_kernels = false) {
  const KernelSet k = mutate_kernels ? mutated_kernels() : KernelSet{};
  std::vector<SuiteResult> out;
  auto guarded = [&](const std::string& name, const std::function<SuiteResult()>& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };
  guarded("kernel identities", [&] { return kernel_identity_suite(200, seed, k); });
  guarded("commutativity", [&] { return commutativity_suite(1000, seed + 1, k); });
  guarded("patch test", [] { return patch_test_suite(); });
  guarded("system symmetry", [&] { return symmetry_suite(seed + 2); });
  guarded("load oracle", [&] { return load_oracle_suite(seed + 3); });
  return out;
}

}  // namespace pdwg
