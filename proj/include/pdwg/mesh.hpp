#pragma once

// Structured tetrahedral meshes of lattice-aligned box-union domains.
//
// A domain is a bounding box minus a list of axis-aligned excluded boxes.
// Excluded boxes that touch the bounding box surface carve notches or tunnels
// (their walls belong to the exterior boundary component Gamma_0); boxes
// strictly inside the bounding box are cavities and each contributes a
// separate boundary component Gamma_i, i >= 1.
//
// Every lattice cube is split into 6 tetrahedra along its main diagonal
// (Kuhn subdivision), which gives a conforming mesh for any union of cubes.

#include "pdwg/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdwg {

using Index = int;

/// Component id for interior faces; boundary faces carry 0..L.
inline constexpr int kInteriorFace = -1;

enum class DomainFamily { UnitCube, LShapedPrism, CubeWithCavity, Toroid1Hole, Toroid2Holes };

inline std::string to_string(DomainFamily f) {
  switch (f) {
    case DomainFamily::UnitCube: return "UnitCube";
    case DomainFamily::LShapedPrism: return "LShapedPrism";
    case DomainFamily::CubeWithCavity: return "CubeWithCavity";
    case DomainFamily::Toroid1Hole: return "Toroid1Hole";
    case DomainFamily::Toroid2Holes: return "Toroid2Holes";
  }
  return "?";
}

struct Box {
  Vec3 lo;
  Vec3 hi;

  [[nodiscard]] bool contains_open(const Vec3& p) const {
    return (p.array() > lo.array()).all() && (p.array() < hi.array()).all();
  }
  [[nodiscard]] bool contains_closed(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= lo.array() - tol).all() && (p.array() <= hi.array() + tol).all();
  }
  /// True if p lies on the surface of the box (within tol).
  [[nodiscard]] bool on_surface(const Vec3& p, double tol) const {
    if (!contains_closed(p, tol)) return false;
    for (int d = 0; d < 3; ++d)
      if (std::abs(p[d] - lo[d]) <= tol || std::abs(p[d] - hi[d]) <= tol) return true;
    return false;
  }
  /// Strictly inside `outer`, touching none of its faces.
  [[nodiscard]] bool strictly_inside(const Box& outer) const {
    return (lo.array() > outer.lo.array()).all() && (hi.array() < outer.hi.array()).all();
  }
  [[nodiscard]] double volume() const { return (hi - lo).prod(); }
  [[nodiscard]] double surface_area() const {
    const Vec3 e = hi - lo;
    return 2.0 * (e[0] * e[1] + e[1] * e[2] + e[0] * e[2]);
  }
};

struct DomainSpec {
  DomainFamily family = DomainFamily::UnitCube;
  Box bounds;
  std::vector<Box> excluded;
  int first_betti = 0;  // number of tunnels

  /// Boundary components: Gamma_0 plus one per cavity.
  [[nodiscard]] int num_components() const {
    int n = 1;
    for (const auto& b : excluded)
      if (b.strictly_inside(bounds)) ++n;
    return n;
  }
  /// Component id of each excluded box (0 for notches/tunnels).
  [[nodiscard]] std::vector<int> excluded_component() const {
    std::vector<int> ids;
    int next = 1;
    for (const auto& b : excluded) ids.push_back(b.strictly_inside(bounds) ? next++ : 0);
    return ids;
  }
  [[nodiscard]] bool contains(const Vec3& p) const {
    if (!bounds.contains_open(p)) return false;
    for (const auto& b : excluded)
      if (b.contains_closed(p)) return false;
    return true;
  }
  [[nodiscard]] double volume() const {
    double v = bounds.volume();
    for (const auto& b : excluded) v -= b.volume();
    return v;
  }
};

/// Domain of numerical example `example_id` (1..7).
inline DomainSpec build_domain(int example_id) {
  DomainSpec d;
  switch (example_id) {
    case 1:
    case 2:
      d.family = DomainFamily::UnitCube;
      d.bounds = {Vec3(0, 0, 0), Vec3(1, 1, 1)};
      break;
    case 3:
      d.family = DomainFamily::LShapedPrism;
      d.bounds = {Vec3(-1, -1, 0), Vec3(1, 1, 1)};
      d.excluded.push_back({Vec3(0, -1, 0), Vec3(1, 0, 1)});
      break;
    case 4:
      d.family = DomainFamily::CubeWithCavity;
      d.bounds = {Vec3(-1.5, -1.5, -1.5), Vec3(0.5, 0.5, 0.5)};
      d.excluded.push_back({Vec3(-1, -1, -1), Vec3(0, 0, 0)});
      break;
    case 5:
    case 7:
      d.family = DomainFamily::Toroid1Hole;
      d.bounds = {Vec3(-1, -1, 0), Vec3(0.5, 0.5, 0.5)};
      d.excluded.push_back({Vec3(-0.5, -0.5, 0), Vec3(0, 0, 0.5)});
      d.first_betti = 1;
      break;
    case 6:
      d.family = DomainFamily::Toroid2Holes;
      d.bounds = {Vec3(-1, -1, 0), Vec3(1.5, 1.5, 0.5)};
      d.excluded.push_back({Vec3(-0.5, -0.5, 0), Vec3(0, 0, 0.5)});
      d.excluded.push_back({Vec3(0.5, -0.5, 0), Vec3(1, 0, 0.5)});
      d.first_betti = 2;
      break;
    default:
      throw std::invalid_argument("build_domain: unknown example id " + std::to_string(example_id));
  }
  return d;
}

struct ElementGeometry {
  std::array<Vec3, 4> vertices;
  double volume = 0.0;
  std::array<Vec3, 4> grad_bary;   // gradient of barycentric coordinate i
  std::array<double, 4> face_area; // face i is opposite vertex i
  std::array<Vec3, 4> normal;      // outward unit normal of face i
  double diameter = 0.0;
  Vec3 centroid = Vec3::Zero();

  [[nodiscard]] std::array<Vec3, 3> face_vertices(int i) const {
    std::array<Vec3, 3> fv;
    int k = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i) fv[k++] = vertices[j];
    return fv;
  }
};

/// Geometry of a tetrahedron given by its four vertices.
inline ElementGeometry element_geometry(const std::array<Vec3, 4>& v) {
  ElementGeometry g;
  g.vertices = v;
  Mat3 J;
  J.col(0) = v[1] - v[0];
  J.col(1) = v[2] - v[0];
  J.col(2) = v[3] - v[0];
  const double det = J.determinant();
  double scale = 0.0;
  for (int i = 1; i < 4; ++i) scale = std::max(scale, (v[i] - v[0]).norm());
  if (!(std::abs(det) > 1e-14 * scale * scale * scale))
    throw std::invalid_argument("element_geometry: degenerate (zero-volume) tetrahedron");
  g.volume = std::abs(det) / 6.0;
  // Rows of J^{-1} are the gradients of barycentric coordinates 1..3.
  const Mat3 Jinv = J.inverse();
  for (int i = 1; i < 4; ++i) g.grad_bary[i] = Jinv.row(i - 1).transpose();
  g.grad_bary[0] = -(g.grad_bary[1] + g.grad_bary[2] + g.grad_bary[3]);
  for (int i = 0; i < 4; ++i) {
    const double gn = g.grad_bary[i].norm();
    g.normal[i] = -g.grad_bary[i] / gn;
    g.face_area[i] = 3.0 * g.volume * gn;
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) g.diameter = std::max(g.diameter, (v[i] - v[j]).norm());
  g.centroid = 0.25 * (v[0] + v[1] + v[2] + v[3]);
  return g;
}

struct Mesh {
  int n = 0;  // lattice cells per unit length
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 4>> tets;
  std::vector<std::array<Index, 3>> faces;             // sorted vertex triple
  std::vector<Vec3> face_normals;                      // canonical unit normal
  std::vector<double> face_areas;
  std::vector<std::array<Index, 2>> face_tets;         // second is -1 on the boundary
  std::vector<std::array<Index, 4>> tet_faces;         // local face i opposite vertex i
  std::vector<std::array<std::int8_t, 4>> tet_face_signs;  // +1 if canonical normal is outward
  std::vector<int> face_component;                     // kInteriorFace or 0..L
  std::vector<ElementGeometry> geometry;
  int num_components = 1;
  double h = 0.0;  // max tet diameter

  [[nodiscard]] Index num_vertices() const { return static_cast<Index>(vertices.size()); }
  [[nodiscard]] Index num_tets() const { return static_cast<Index>(tets.size()); }
  [[nodiscard]] Index num_faces() const { return static_cast<Index>(faces.size()); }
  [[nodiscard]] bool is_boundary(Index f) const { return face_tets[f][1] < 0; }
  [[nodiscard]] std::array<Vec3, 3> face_vertices(Index f) const {
    return {vertices[faces[f][0]], vertices[faces[f][1]], vertices[faces[f][2]]};
  }
  [[nodiscard]] Vec3 face_centroid(Index f) const {
    return (vertices[faces[f][0]] + vertices[faces[f][1]] + vertices[faces[f][2]]) / 3.0;
  }
  [[nodiscard]] Index count_component_faces(int component) const {
    return static_cast<Index>(std::count(face_component.begin(), face_component.end(), component));
  }
};

inline ElementGeometry element_geometry(const Mesh& mesh, Index t) {
  if (t < 0 || t >= mesh.num_tets())
    throw std::out_of_range("element_geometry: tet index " + std::to_string(t) + " out of range");
  const auto& tv = mesh.tets[t];
  return element_geometry(std::array<Vec3, 4>{mesh.vertices[tv[0]], mesh.vertices[tv[1]],
                                              mesh.vertices[tv[2]], mesh.vertices[tv[3]]});
}

/// Faces, incidences and element geometry of `mesh.tets`. Faces are numbered
/// by first appearance; the lowest-index incident tet fixes the canonical
/// normal. All boundary faces are tagged as component 0.
inline void build_topology(Mesh& mesh) {
  mesh.faces.clear();
  mesh.face_normals.clear();
  mesh.face_areas.clear();
  mesh.face_tets.clear();
  mesh.geometry.clear();
  mesh.h = 0.0;
  std::map<std::array<Index, 3>, Index> face_index;
  mesh.tet_faces.resize(mesh.tets.size());
  mesh.tet_face_signs.resize(mesh.tets.size());
  mesh.geometry.reserve(mesh.tets.size());
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    mesh.geometry.push_back(element_geometry(mesh, t));
    const auto& g = mesh.geometry.back();
    mesh.h = std::max(mesh.h, g.diameter);
    for (int i = 0; i < 4; ++i) {
      std::array<Index, 3> key{};
      int m = 0;
      for (int j = 0; j < 4; ++j)
        if (j != i) key[m++] = mesh.tets[t][j];
      std::sort(key.begin(), key.end());
      auto [it, inserted] = face_index.try_emplace(key, mesh.num_faces());
      const Index f = it->second;
      if (inserted) {
        mesh.faces.push_back(key);
        mesh.face_normals.push_back(g.normal[i]);
        mesh.face_areas.push_back(g.face_area[i]);
        mesh.face_tets.push_back({t, -1});
        mesh.tet_face_signs[t][i] = 1;
      } else {
        if (mesh.face_tets[f][1] >= 0)
          throw std::logic_error("build_topology: face shared by more than two tets");
        mesh.face_tets[f][1] = t;
        mesh.tet_face_signs[t][i] = mesh.face_normals[f].dot(g.normal[i]) > 0.0 ? 1 : -1;
      }
      mesh.tet_faces[t][i] = f;
    }
  }
  mesh.face_component.assign(mesh.faces.size(), kInteriorFace);
  for (Index f = 0; f < mesh.num_faces(); ++f)
    if (mesh.is_boundary(f)) mesh.face_component[f] = 0;
  mesh.num_components = 1;
}

/// Mesh from explicit vertices and tets (single boundary component).
inline Mesh mesh_from_tets(std::vector<Vec3> vertices, std::vector<std::array<Index, 4>> tets) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.tets = std::move(tets);
  for (const auto& t : mesh.tets)
    for (Index v : t)
      if (v < 0 || v >= mesh.num_vertices())
        throw std::out_of_range("mesh_from_tets: vertex index out of range");
  build_topology(mesh);
  return mesh;
}

/// Tag every face with its boundary component (kInteriorFace for interior faces).
inline std::vector<int> classify_boundary_faces(const Mesh& mesh, const DomainSpec& domain) {
  const double tol = 1e-9 * std::max(1.0, (domain.bounds.hi - domain.bounds.lo).norm());
  const auto box_component = domain.excluded_component();
  std::vector<int> tags(mesh.num_faces(), kInteriorFace);
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.is_boundary(f)) continue;
    const Vec3 c = mesh.face_centroid(f);
    int tag = -2;
    if (domain.bounds.on_surface(c, tol)) tag = 0;
    for (std::size_t b = 0; b < domain.excluded.size() && tag == -2; ++b)
      if (domain.excluded[b].on_surface(c, tol)) tag = box_component[b];
    if (tag == -2)
      throw std::runtime_error("classify_boundary_faces: boundary face " + std::to_string(f) +
                               " lies on no boundary component (mesh/domain mismatch)");
    tags[f] = tag;
  }
  return tags;
}

/// True if every box corner of the domain lies on the lattice of spacing 1/n.
inline bool lattice_aligned(const DomainSpec& domain, int n) {
  if (n < 1) return false;
  auto on = [n](const Vec3& p) {
    for (int d = 0; d < 3; ++d)
      if (std::abs(p[d] * n - std::round(p[d] * n)) > 1e-9) return false;
    return true;
  };
  if (!on(domain.bounds.lo) || !on(domain.bounds.hi)) return false;
  for (const auto& b : domain.excluded)
    if (!on(b.lo) || !on(b.hi)) return false;
  return true;
}

/// Kuhn-subdivided lattice mesh with `n` cells per unit length.
inline Mesh build_structured_tet_mesh(const DomainSpec& domain, int n) {
  if (n < 1) throw std::invalid_argument("build_structured_tet_mesh: n must be >= 1");
  auto lattice = [n](double x, const char* what) {
    const double s = x * n;
    const double r = std::round(s);
    if (std::abs(s - r) > 1e-9)
      throw std::invalid_argument(std::string("build_structured_tet_mesh: ") + what +
                                  " is not aligned with the lattice of spacing 1/" +
                                  std::to_string(n) + " (use an even n)");
    return static_cast<int>(r);
  };
  std::array<int, 3> lo{}, hi{};
  for (int d = 0; d < 3; ++d) {
    lo[d] = lattice(domain.bounds.lo[d], "bounding box");
    hi[d] = lattice(domain.bounds.hi[d], "bounding box");
  }
  for (const auto& b : domain.excluded)
    for (int d = 0; d < 3; ++d) {
      lattice(b.lo[d], "excluded box");
      lattice(b.hi[d], "excluded box");
    }
  const std::array<int, 3> cells{hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]};
  const double spacing = 1.0 / n;

  auto cell_in_domain = [&](int i, int j, int k) {
    const Vec3 c((lo[0] + i + 0.5) * spacing, (lo[1] + j + 0.5) * spacing,
                 (lo[2] + k + 0.5) * spacing);
    for (const auto& b : domain.excluded)
      if (b.contains_open(c)) return false;
    return true;
  };

  const std::array<int, 3> nv{cells[0] + 1, cells[1] + 1, cells[2] + 1};
  auto lattice_id = [&](int i, int j, int k) { return (k * nv[1] + j) * nv[0] + i; };
  std::vector<char> used(static_cast<std::size_t>(nv[0]) * nv[1] * nv[2], 0);
  for (int k = 0; k < cells[2]; ++k)
    for (int j = 0; j < cells[1]; ++j)
      for (int i = 0; i < cells[0]; ++i)
        if (cell_in_domain(i, j, k))
          for (int c = 0; c < 8; ++c)
            used[lattice_id(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1))] = 1;

  Mesh mesh;
  mesh.n = n;
  std::vector<Index> vid(used.size(), -1);
  for (int k = 0; k < nv[2]; ++k)
    for (int j = 0; j < nv[1]; ++j)
      for (int i = 0; i < nv[0]; ++i)
        if (used[lattice_id(i, j, k)]) {
          vid[lattice_id(i, j, k)] = mesh.num_vertices();
          mesh.vertices.emplace_back((lo[0] + i) * spacing, (lo[1] + j) * spacing,
                                     (lo[2] + k) * spacing);
        }

  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int k = 0; k < cells[2]; ++k)
    for (int j = 0; j < cells[1]; ++j)
      for (int i = 0; i < cells[0]; ++i) {
        if (!cell_in_domain(i, j, k)) continue;
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<Index, 4> tet{};
          tet[0] = vid[lattice_id(c[0], c[1], c[2])];
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            tet[s + 1] = vid[lattice_id(c[0], c[1], c[2])];
          }
          mesh.tets.push_back(tet);
        }
      }

  build_topology(mesh);
  mesh.face_component = classify_boundary_faces(mesh, domain);
  mesh.num_components = domain.num_components();
  return mesh;
}

}  // namespace pdwg
