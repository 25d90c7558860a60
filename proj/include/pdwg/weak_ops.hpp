#pragma once

// Lowest-order (k = 0) discrete weak gradient / weak curl kernels and the
// L2 projections onto piecewise constants used by the scheme.
//
// With constant test fields the defining identities reduce to boundary sums:
//   weak gradient:  |T| grad_w v  =  sum_F |F| v_b,F n_F
//   weak curl:      |T| curl_w psi = -sum_F |F| psi_b,F x n_F
// so neither kernel depends on the cell value.

#include "pdwg/mesh.hpp"
#include "pdwg/quadrature.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace pdwg {

/// Polynomial degree of the weak spaces. Only k = 0 is implemented.
inline constexpr int kElementDegree = 0;

struct ScalarWeakLocal {
  double v0 = 0.0;
  std::array<double, 4> vb{};  // face i opposite vertex i
};

struct VectorWeakLocal {
  Vec3 psi0 = Vec3::Zero();
  std::array<Vec3, 4> psib{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
};

inline Vec3 weak_gradient_p0(const ElementGeometry& g, const ScalarWeakLocal& v) {
  Vec3 r = Vec3::Zero();
  for (int i = 0; i < 4; ++i) r += v.vb[i] * g.face_area[i] * g.normal[i];
  return r / g.volume;
}

inline Vec3 weak_curl_p0(const ElementGeometry& g, const VectorWeakLocal& psi) {
  Vec3 r = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    const double off = psi.psib[i].dot(g.normal[i]);
    if (std::abs(off) > 1e-12 * std::max(1.0, psi.psib[i].norm()))
      throw std::invalid_argument("weak_curl_p0: face value " + std::to_string(i) +
                                  " is not tangential (psi.n = " + std::to_string(off) + ")");
    r -= g.face_area[i] * psi.psib[i].cross(g.normal[i]);
  }
  return r / g.volume;
}

struct FaceGeometry {
  std::array<Vec3, 3> vertices;
  Vec3 normal = Vec3::Zero();
  double area = 0.0;
};

inline FaceGeometry face_geometry(const ElementGeometry& g, int local_face) {
  return {g.face_vertices(local_face), g.normal[local_face], g.face_area[local_face]};
}

inline FaceGeometry face_geometry(const Mesh& mesh, Index f) {
  return {mesh.face_vertices(f), mesh.face_normals[f], mesh.face_areas[f]};
}

/// Cell average of a scalar or vector field (Q_0 / the vector cell projection).
template <class Field>
auto l2_project_cell(Field&& field, const ElementGeometry& g, const TetRule& rule) {
  using R = std::decay_t<decltype(field(Vec3{}))>;
  if (rule.degree < 1) throw std::invalid_argument("l2_project_cell: quadrature degree < 1");
  R acc;
  if constexpr (std::is_arithmetic_v<R>) acc = 0;
  else acc = R::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q)
    acc += rule.weights[q] * field(map_point(g.vertices, rule.points[q]));
  return acc;
}

/// Face average (scalar Q_b) or tangential face average (vector face projection).
template <class Field>
auto l2_project_face(Field&& field, const FaceGeometry& face, const TriangleRule& rule) {
  using R = std::decay_t<decltype(field(Vec3{}))>;
  if (rule.degree < 1) throw std::invalid_argument("l2_project_face: quadrature degree < 1");
  R acc;
  if constexpr (std::is_arithmetic_v<R>) acc = 0;
  else acc = R::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q)
    acc += rule.weights[q] * field(map_point(face.vertices, rule.points[q]));
  if constexpr (std::is_arithmetic_v<R>) {
    return acc;
  } else {
    const Vec3 mean = acc;
    return Vec3(mean - mean.dot(face.normal) * face.normal);
  }
}

/// Elementwise cell averages of a vector field (the V_h projection).
template <class Field>
std::vector<Vec3> project_field(Field&& u, const Mesh& mesh, const TetRule& rule) {
  std::vector<Vec3> out(mesh.num_tets());
  for (Index t = 0; t < mesh.num_tets(); ++t) out[t] = l2_project_cell(u, mesh.geometry[t], rule);
  return out;
}

}  // namespace pdwg
