#include "pdwg/analysis.hpp"
#include "pdwg/study.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pdwg;

namespace {

Mesh cube(int n) { return build_structured_tet_mesh(build_domain(1), n); }

Mesh reference_tet_mesh() {
  return mesh_from_tets({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {{0, 1, 2, 3}});
}

}  // namespace

TEST(Rates, ClosedFormCases) {
  const auto r = convergence_rates({4.0, 1.0});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(*r[0], 2.0);
  EXPECT_NEAR(*convergence_rates({1.64e-1, 8.16e-2})[0], 1.01, 0.005);
  EXPECT_DOUBLE_EQ(*convergence_rates({0.3, 0.3})[0], 0.0);
}

TEST(Rates, ZeroErrorIsUndefined) {
  const auto r = convergence_rates({1.0, 0.0, 0.5});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_FALSE(r[0].has_value());
  EXPECT_FALSE(r[1].has_value());
  EXPECT_TRUE(convergence_rates({1.0}).empty());
}

TEST(ErrorU, ProjectionOfConstantIsExact) {
  const ProblemSpec spec = make_constant_problem(Vec3(1, -2, 3), Mat3::Identity());
  const Mesh m = cube(2);
  const auto qu = project_field(spec.exact_u, m, tet_rule(4));
  EXPECT_LT(error_u(spec, qu, m, 4), 1e-12);
  EXPECT_LT(error_Qu(spec, qu, m, 4), 1e-12);
}

TEST(ErrorU, WeightedConstantErrorClosedForm) {
  // eps = 4I and a unit error everywhere: 2 sqrt(|Omega|).
  const ProblemSpec spec = make_constant_problem(Vec3(0, 0, 1), 4.0 * Mat3::Identity());
  const Mesh m = build_structured_tet_mesh(build_domain(3), 2);
  const std::vector<Vec3> uh(m.num_tets(), Vec3::Zero());
  const double vol = build_domain(3).volume();
  EXPECT_NEAR(error_u(spec, uh, m, 4), 2.0 * std::sqrt(vol), 1e-12);
  EXPECT_NEAR(error_Qu(spec, uh, m, 4), 2.0 * std::sqrt(vol), 1e-12);
}

TEST(ErrorQu, SingleTetUnitDifference) {
  const ProblemSpec spec = make_constant_problem(Vec3(1, 0, 0), Mat3::Identity());
  const Mesh m = reference_tet_mesh();
  EXPECT_NEAR(error_Qu(spec, {Vec3::Zero()}, m, 4), std::sqrt(1.0 / 6.0), 1e-15);
  EXPECT_THROW(error_Qu(spec, {}, m, 4), std::invalid_argument);
  EXPECT_THROW(error_u(spec, {}, m, 4), std::invalid_argument);
}

TEST(ErrorU, CellMeanIsTheOptimalConstant) {
  const ProblemSpec spec = make_problem(1);
  const Mesh m = cube(2);
  const TetRule rule = tet_rule(6);
  const auto qu = project_field(spec.exact_u, m, rule);
  const double best = error_u(spec, qu, m, 6);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto other = qu;
    const auto t = static_cast<std::size_t>(rng() % other.size());
    other[t] += 0.05 * Vec3(N(rng), N(rng), N(rng));
    EXPECT_GT(error_u(spec, other, m, 6), best);
  }
}

TEST(TripleNorms, ZeroFieldsAndHandCase) {
  const Mesh m = reference_tet_mesh();
  const GlobalSystem sys = assemble_system(make_constant_problem(Vec3::Zero(), Mat3::Identity()), m,
                                           {1.0, 1.0, 1.0, 1.0}, 2);
  SolutionFields z = unpack_solution(sys.dofs, Vector::Zero(sys.dofs.total));
  EXPECT_EQ(triple_norm_dual(sys, z), 0.0);
  EXPECT_EQ(triple_norm_s(sys, z), 0.0);

  Vector raw = Vector::Zero(sys.dofs.total);
  raw[sys.dofs.lambda0(0)] = 1.0;
  raw[sys.dofs.s0(0)] = 1.0;
  const SolutionFields x = unpack_solution(sys.dofs, raw);
  const auto& g = m.geometry[0];
  const double area = g.face_area[0] + g.face_area[1] + g.face_area[2] + g.face_area[3];
  EXPECT_NEAR(triple_norm_dual(sys, x), std::sqrt(area / g.diameter), 1e-14);
  EXPECT_NEAR(triple_norm_s(sys, x), std::sqrt(area / g.diameter), 1e-14);
}

TEST(Convergence, DualAndStabilizerNormsContractOnSmoothExample) {
  RunConfig cfg;
  cfg.example = 1;
  cfg.refinements = {4, 8};
  const StudyResult r = run_study(cfg);
  ASSERT_FALSE(r.solver_failure);
  const auto& L = r.report.levels;
  const double coarse = L[0].err_dual + L[0].err_s, fine = L[1].err_dual + L[1].err_s;
  EXPECT_GE(coarse / fine, 1.8);
}

TEST(Harmonic, SimplyConnectedFieldVanishesUnderRefinement) {
  const ProblemSpec spec = make_problem(1);
  const DomainSpec dom = build_domain(1);
  double prev = 0.0;
  for (int n : {2, 4, 8}) {
    const HarmonicField h = extract_discrete_harmonic(spec, dom, build_structured_tet_mesh(dom, n), {}, 4);
    EXPECT_TRUE(h.simply_connected);
    if (n > 2) EXPECT_LT(h.norm, 0.6 * prev);
    prev = h.norm;
  }
}

TEST(Harmonic, ToroidalExtractionMatchesQuError) {
  const ProblemSpec spec = make_problem(7);
  const DomainSpec dom = build_domain(7);
  const Mesh m = build_structured_tet_mesh(dom, 2);
  const HarmonicField h = extract_discrete_harmonic(spec, dom, m, {}, 4);
  EXPECT_FALSE(h.simply_connected);
  ASSERT_EQ(static_cast<Index>(h.eta.size()), m.num_tets());
  const GlobalSystem sys = assemble_system(spec, m, {}, 4);
  const SolutionFields s = solve(sys);
  EXPECT_NEAR(h.norm, error_Qu(spec, s.u, m, 4), 1e-10);
}

TEST(Harmonic, SpuriousBetaSourceStallsTheFieldError) {
  // With the non-solenoidal source the discrete field no longer approximates
  // u, while the dual and stabilizer norms still contract.
  RunConfig cfg;
  cfg.example = 7;
  cfg.problem.beta_source = true;
  const StudyResult r = run_study(cfg);
  ASSERT_FALSE(r.solver_failure);
  const auto q = r.report.rates(&LevelResult::err_Qu);
  const auto d = r.report.rates(&LevelResult::err_dual);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_LE(*q[1], 0.3);
  EXPECT_GE(*d[1], 0.55);
  EXPECT_NEAR(r.report.levels[0].err_Qu, 0.808, 0.05);
}

TEST(Report, CsvSchemaAndValues) {
  ConvergenceReport rep;
  rep.example = 1;
  LevelResult a, b, c;
  a.n = 2;
  a.err_u = 4.0;
  a.err_Qu = a.err_dual = a.err_s = 1.0;
  b.n = 4;
  b.err_u = 1.0;
  b.err_Qu = b.err_dual = b.err_s = 0.5;
  c.n = 8;
  c.failed = true;
  c.error = "boom";
  rep.levels = {a, b, c};
  const std::string csv = to_csv(rep);
  std::istringstream in(csv);
  std::string header, l1, l2, l3;
  std::getline(in, header);
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  EXPECT_EQ(header,
            "inv_h,h,tets,free_dofs,err_u,rate_u,err_Qu,rate_Qu,err_dual,rate_dual,err_s,rate_s,"
            "solver,iterations,rel_residual,cavity_c,residual_before,residual_after,harmonic_norm,status");
  auto cols = [](const std::string& line) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(line);
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  const auto h = cols(header), c1 = cols(l1), c2 = cols(l2), c3 = cols(l3);
  EXPECT_EQ(c1.size(), h.size());
  EXPECT_EQ(c2.size(), h.size());
  EXPECT_EQ(c3.size(), h.size());
  EXPECT_EQ(c1[5], "");
  EXPECT_EQ(c2[5], "2.00");
  EXPECT_EQ(c2[7], "1.00");
  EXPECT_EQ(c1.back(), "ok");
  EXPECT_EQ(c3.back(), "failed");
}

TEST(Report, MarkdownMirrorsTableLayout) {
  ConvergenceReport rep;
  rep.example = 1;
  LevelResult a, b;
  a.n = 2;
  a.err_u = 1.64e-1;
  a.err_Qu = a.err_dual = a.err_s = 1.0;
  b.n = 4;
  b.err_u = 8.16e-2;
  b.err_Qu = b.err_dual = b.err_s = 0.5;
  rep.levels = {a, b};
  const std::string md = to_markdown(rep);
  EXPECT_NE(md.find("| 2 | 1.64e-1 | - |"), std::string::npos) << md;
  EXPECT_NE(md.find("| 4 | 8.16e-2 | 1.01 |"), std::string::npos) << md;
  EXPECT_EQ(md.find("c_1"), std::string::npos);
}
