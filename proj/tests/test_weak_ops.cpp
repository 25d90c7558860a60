#include "pdwg/mesh.hpp"
#include "pdwg/selftest.hpp"
#include "pdwg/weak_ops.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pdwg;

namespace {

ElementGeometry ref_tet() {
  return element_geometry({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)});
}

Vec3 tangential(const Vec3& v, const Vec3& n) { return v - v.dot(n) * n; }

}  // namespace

TEST(WeakGradient, ConstantHasZeroGradient) {
  const ScalarWeakLocal v{1.0, {1.0, 1.0, 1.0, 1.0}};
  EXPECT_LT(weak_gradient_p0(ref_tet(), v).norm(), 1e-14);
}

TEST(WeakGradient, SingleFaceOnReferenceTet) {
  // Face x = 0 is opposite vertex 1.
  ScalarWeakLocal v;
  v.vb[1] = 1.0;
  EXPECT_TRUE(weak_gradient_p0(ref_tet(), v).isApprox(Vec3(-3, 0, 0), 1e-14));
}

TEST(WeakGradient, IndependentOfCellValue) {
  ScalarWeakLocal a{0.0, {0.3, -1.0, 2.0, 0.5}};
  ScalarWeakLocal b = a;
  b.v0 = 17.0;
  EXPECT_EQ(weak_gradient_p0(ref_tet(), a), weak_gradient_p0(ref_tet(), b));
}

TEST(WeakGradient, AffineTraceGivesExactGradient) {
  std::mt19937_64 rng(7);
  const TriangleRule rule = triangle_rule(1);
  for (int k = 0; k < 20; ++k) {
    const ElementGeometry g = random_tet(rng);
    auto w = [](const Vec3& x) { return x[0] + 2.0 * x[1] + 3.0 * x[2]; };
    ScalarWeakLocal v;
    for (int i = 0; i < 4; ++i) v.vb[i] = l2_project_face(w, face_geometry(g, i), rule);
    EXPECT_TRUE(weak_gradient_p0(g, v).isApprox(Vec3(1, 2, 3), 1e-11));
  }
}

TEST(WeakCurl, ZeroTraceGivesZero) { EXPECT_EQ(weak_curl_p0(ref_tet(), {}), Vec3::Zero()); }

TEST(WeakCurl, SingleFaceIsCoNormal) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const ElementGeometry g = random_tet(rng);
    for (int i = 0; i < 4; ++i) {
      VectorWeakLocal psi;
      const Vec3 w = tangential(Vec3(0.3, -0.7, 1.1), g.normal[i]);
      psi.psib[i] = w;
      EXPECT_TRUE(weak_curl_p0(g, psi).isApprox(3.0 * w.cross(g.grad_bary[i]), 1e-10));
    }
  }
}

TEST(WeakCurl, ConstantFieldHasZeroCurl) {
  const ElementGeometry g = ref_tet();
  const Vec3 c(1.0, -2.0, 0.5);
  VectorWeakLocal psi;
  psi.psi0 = c;
  for (int i = 0; i < 4; ++i) psi.psib[i] = tangential(c, g.normal[i]);
  EXPECT_LT(weak_curl_p0(g, psi).norm(), 1e-14);
}

TEST(WeakCurl, RejectsNonTangentialTrace) {
  VectorWeakLocal psi;
  psi.psib[0] = ref_tet().normal[0];
  EXPECT_THROW(weak_curl_p0(ref_tet(), psi), std::invalid_argument);
}

TEST(WeakOps, Linearity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const ElementGeometry g = random_tet(rng);
  ScalarWeakLocal a, b, ab;
  VectorWeakLocal p, q, pq;
  for (int i = 0; i < 4; ++i) {
    a.vb[i] = U(rng);
    b.vb[i] = U(rng);
    ab.vb[i] = 2.0 * a.vb[i] - b.vb[i];
    p.psib[i] = tangential(Vec3(U(rng), U(rng), U(rng)), g.normal[i]);
    q.psib[i] = tangential(Vec3(U(rng), U(rng), U(rng)), g.normal[i]);
    pq.psib[i] = 2.0 * p.psib[i] - q.psib[i];
  }
  EXPECT_TRUE(weak_gradient_p0(g, ab).isApprox(2.0 * weak_gradient_p0(g, a) - weak_gradient_p0(g, b), 1e-12));
  EXPECT_TRUE(weak_curl_p0(g, pq).isApprox(2.0 * weak_curl_p0(g, p) - weak_curl_p0(g, q), 1e-12));
}

TEST(WeakOps, NormalFlipWithSignsIsInvariant) {
  // Store face data against a flipped normal and undo it with the sign.
  const Mesh m = build_structured_tet_mesh(build_domain(1), 1);
  for (Index t = 0; t < m.num_tets(); ++t) {
    const auto& g = m.geometry[t];
    ScalarWeakLocal direct, via_sign;
    for (int i = 0; i < 4; ++i) {
      const Index f = m.tet_faces[t][i];
      const Vec3 stored = -m.face_normals[f];
      const double sign = -m.tet_face_signs[t][i];
      direct.vb[i] = 0.1 * (f + 1);
      via_sign.vb[i] = 0.1 * (f + 1) * sign * stored.dot(g.normal[i]);
    }
    EXPECT_TRUE(weak_gradient_p0(g, direct).isApprox(weak_gradient_p0(g, via_sign), 1e-13));
  }
}

TEST(Commutativity, RandomAffineFields) {
  const SuiteResult r = commutativity_suite(1000, 42);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Commutativity, SignMutationIsDetected) {
  const SuiteResult r = commutativity_suite(50, 42, mutated_kernels());
  EXPECT_FALSE(r.passed) << r.detail;
}

TEST(Projection, CellAverages) {
  const ElementGeometry g = ref_tet();
  const TetRule r4 = tet_rule(4);
  EXPECT_NEAR(l2_project_cell([](const Vec3&) { return 5.0; }, g, r4), 5.0, 1e-14);
  EXPECT_NEAR(l2_project_cell([](const Vec3& x) { return x[0]; }, g, r4), 0.25, 1e-14);
  EXPECT_NEAR(l2_project_cell([](const Vec3& x) { return x[0] * x[0]; }, g, r4), 0.1, 1e-14);
  const Vec3 c = l2_project_cell([](const Vec3& x) -> Vec3 { return x; }, g, r4);
  EXPECT_TRUE(c.isApprox(Vec3(0.25, 0.25, 0.25), 1e-14));
}

TEST(Projection, FaceAverages) {
  const TriangleRule r = triangle_rule(4);
  FaceGeometry fx{{Vec3(0, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, Vec3(1, 0, 0), 0.5};
  EXPECT_LT(l2_project_face([](const Vec3&) -> Vec3 { return Vec3(1, 0, 0); }, fx, r).norm(), 1e-15);
  EXPECT_NEAR(l2_project_face([](const Vec3& x) { return x[0]; }, fx, r), 0.0, 1e-15);
  FaceGeometry fz{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, Vec3(0, 0, 1), 0.5};
  EXPECT_TRUE(l2_project_face([](const Vec3&) -> Vec3 { return Vec3(1, 1, 0); }, fz, r).isApprox(Vec3(1, 1, 0)));
}

TEST(Projection, ProjectFieldOnMesh) {
  const Mesh m = build_structured_tet_mesh(build_domain(1), 2);
  const auto c = project_field([](const Vec3&) -> Vec3 { return Vec3(1, 2, 3); }, m, tet_rule(4));
  for (const auto& v : c) EXPECT_TRUE(v.isApprox(Vec3(1, 2, 3), 1e-14));
  const auto x = project_field([](const Vec3& p) -> Vec3 { return p; }, m, tet_rule(4));
  for (Index t = 0; t < m.num_tets(); ++t) EXPECT_TRUE(x[t].isApprox(m.geometry[t].centroid, 1e-14));
}

TEST(Projection, SingularFieldStaysFinite) {
  const ProblemSpec spec = make_problem(3);
  const Mesh m = build_structured_tet_mesh(build_domain(3), 2);
  for (const auto& v : project_field(spec.exact_u, m, tet_rule(4))) EXPECT_TRUE(v.allFinite());
}
