#pragma once

// Degree-of-freedom numbering and assembly of the lowest-order saddle-point
// system
//
//   [ S1   B  ] [ (lambda, q) ]   [ F ]
//   [ B^T -S2 ] [ (u, s)      ] = [ 0 ]
//
// Raw unknown order is lambda0, lambda_b, q0, q_b, u, s0, s_b (tets then
// faces, mesh order). Constrained entries (q_b and s_b on the boundary, one
// pinned lambda0) are removed from the solved system by row/column deletion.
// Cavity s_b entries are held at zero and recovered afterwards.

#include "pdwg/mesh.hpp"
#include "pdwg/problems.hpp"
#include "pdwg/quadrature.hpp"
#include "pdwg/weak_ops.hpp"

#include <Eigen/Sparse>
#include <unsupported/Eigen/SparseExtra>

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdwg {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

enum class DofBlock { Lambda0, LambdaB, Q0, QB, U, S0, SB };

inline std::string to_string(DofBlock b) {
  switch (b) {
    case DofBlock::Lambda0: return "lambda0";
    case DofBlock::LambdaB: return "lambda_b";
    case DofBlock::Q0: return "q0";
    case DofBlock::QB: return "q_b";
    case DofBlock::U: return "u";
    case DofBlock::S0: return "s0";
    case DofBlock::SB: return "s_b";
  }
  return "?";
}

struct DofMap {
  Index num_tets = 0;
  Index num_faces = 0;

  Index off_lambda0 = 0, off_lambdab = 0, off_q0 = 0, off_qb = 0;
  Index off_u = 0, off_s0 = 0, off_sb = 0, total = 0;

  // Unit edge directions from the lowest-index vertex of each face.
  std::vector<std::array<Vec3, 2>> face_tangents;

  std::vector<char> constrained;              // raw -> fixed to zero in the base solve
  std::vector<Index> raw_to_free;             // -1 for constrained entries
  std::vector<Index> free_to_raw;
  std::vector<std::vector<Index>> cavity_sb;  // raw s_b entries of Gamma_i, i = 1..L
  Index pinned_lambda0 = -1;

  [[nodiscard]] Index lambda0(Index t) const { return off_lambda0 + t; }
  [[nodiscard]] Index lambdab(Index f) const { return off_lambdab + f; }
  [[nodiscard]] Index q0(Index t, int d) const { return off_q0 + 3 * t + d; }
  [[nodiscard]] Index qb(Index f, int j) const { return off_qb + 2 * f + j; }
  [[nodiscard]] Index u(Index t, int d) const { return off_u + 3 * t + d; }
  [[nodiscard]] Index s0(Index t) const { return off_s0 + t; }
  [[nodiscard]] Index sb(Index f) const { return off_sb + f; }

  /// Size of the (lambda, q) block; the (u, s) block starts here.
  [[nodiscard]] Index num_dual() const { return off_u; }
  /// Size of the s block (s0 and s_b), starting at off_s0.
  [[nodiscard]] Index num_s() const { return total - off_s0; }
  [[nodiscard]] Index num_free() const { return static_cast<Index>(free_to_raw.size()); }

  [[nodiscard]] DofBlock block_of(Index raw) const {
    if (raw < off_lambdab) return DofBlock::Lambda0;
    if (raw < off_q0) return DofBlock::LambdaB;
    if (raw < off_qb) return DofBlock::Q0;
    if (raw < off_u) return DofBlock::QB;
    if (raw < off_s0) return DofBlock::U;
    if (raw < off_sb) return DofBlock::S0;
    return DofBlock::SB;
  }

  /// Human-readable location of a raw entry, e.g. "q_b[face 12, tangent 1]".
  [[nodiscard]] std::string describe(Index raw) const {
    const DofBlock b = block_of(raw);
    const std::string name = to_string(b);
    switch (b) {
      case DofBlock::Lambda0: return name + "[tet " + std::to_string(raw - off_lambda0) + "]";
      case DofBlock::LambdaB: return name + "[face " + std::to_string(raw - off_lambdab) + "]";
      case DofBlock::Q0:
        return name + "[tet " + std::to_string((raw - off_q0) / 3) + ", comp " +
               std::to_string((raw - off_q0) % 3) + "]";
      case DofBlock::QB:
        return name + "[face " + std::to_string((raw - off_qb) / 2) + ", tangent " +
               std::to_string((raw - off_qb) % 2) + "]";
      case DofBlock::U:
        return name + "[tet " + std::to_string((raw - off_u) / 3) + ", comp " +
               std::to_string((raw - off_u) % 3) + "]";
      case DofBlock::S0: return name + "[tet " + std::to_string(raw - off_s0) + "]";
      case DofBlock::SB: return name + "[face " + std::to_string(raw - off_sb) + "]";
    }
    return name;
  }
};

inline std::array<Vec3, 2> face_tangent_basis(const Mesh& mesh, Index f) {
  const auto& fv = mesh.faces[f];  // sorted, so fv[0] is the lowest index
  const Vec3 a = mesh.vertices[fv[0]];
  return {(mesh.vertices[fv[1]] - a).normalized(), (mesh.vertices[fv[2]] - a).normalized()};
}

inline DofMap build_dof_map(const Mesh& mesh) {
  DofMap m;
  m.num_tets = mesh.num_tets();
  m.num_faces = mesh.num_faces();
  const Index nt = m.num_tets, nf = m.num_faces;
  m.off_lambda0 = 0;
  m.off_lambdab = m.off_lambda0 + nt;
  m.off_q0 = m.off_lambdab + nf;
  m.off_qb = m.off_q0 + 3 * nt;
  m.off_u = m.off_qb + 2 * nf;
  m.off_s0 = m.off_u + 3 * nt;
  m.off_sb = m.off_s0 + nt;
  m.total = m.off_sb + nf;

  m.face_tangents.resize(nf);
  for (Index f = 0; f < nf; ++f) m.face_tangents[f] = face_tangent_basis(mesh, f);

  m.constrained.assign(m.total, 0);
  m.cavity_sb.assign(std::max(0, mesh.num_components - 1), {});
  for (Index f = 0; f < nf; ++f) {
    const int c = mesh.face_component[f];
    if (c == kInteriorFace) continue;
    m.constrained[m.qb(f, 0)] = 1;
    m.constrained[m.qb(f, 1)] = 1;
    m.constrained[m.sb(f)] = 1;
    if (c >= 1) m.cavity_sb.at(c - 1).push_back(m.sb(f));
  }
  if (nt > 0) {
    m.pinned_lambda0 = m.lambda0(0);
    m.constrained[m.pinned_lambda0] = 1;
  }

  m.raw_to_free.assign(m.total, -1);
  for (Index i = 0; i < m.total; ++i)
    if (!m.constrained[i]) {
      m.raw_to_free[i] = static_cast<Index>(m.free_to_raw.size());
      m.free_to_raw.push_back(i);
    }
  return m;
}

/// Cell means of the material tensor.
inline std::vector<Mat3> cell_epsilon(const Mesh& mesh, const std::function<Mat3(const Vec3&)>& eps,
                                      const TetRule& rule) {
  std::vector<Mat3> out(mesh.num_tets());
  for (Index t = 0; t < mesh.num_tets(); ++t) out[t] = l2_project_cell(eps, mesh.geometry[t], rule);
  return out;
}

/// B as a num_dual x (total - num_dual) block: rows are (lambda, q) test
/// entries, columns are (u, s) trial entries offset by dofs.num_dual().
inline SparseMatrix assemble_Bh(const Mesh& mesh, const std::vector<Mat3>& eps, const DofMap& dofs) {
  if (static_cast<Index>(eps.size()) != mesh.num_tets())
    throw std::invalid_argument("assemble_Bh: one epsilon per tet required");
  const Index c0 = dofs.num_dual();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_tets()) * 48);
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    const auto& g = mesh.geometry[t];
    for (int i = 0; i < 4; ++i) {
      const Index f = mesh.tet_faces[t][i];
      const Vec3& n = g.normal[i];
      const Vec3 en = g.face_area[i] * (eps[t] * n);
      for (int d = 0; d < 3; ++d) {
        // (u, eps grad_w phi): phi_b couples to u
        trip.emplace_back(dofs.lambdab(f), dofs.u(t, d) - c0, en[d]);
        // (psi_0, eps grad_w s): psi_0 couples to s_b
        trip.emplace_back(dofs.q0(t, d), dofs.sb(f) - c0, en[d]);
      }
      // (u, curl_w psi) with psi_b = sum_j qb_j t_j
      for (int j = 0; j < 2; ++j) {
        const Vec3 c = -g.face_area[i] * dofs.face_tangents[f][j].cross(n);
        for (int d = 0; d < 3; ++d) trip.emplace_back(dofs.qb(f, j), dofs.u(t, d) - c0, c[d]);
      }
    }
  }
  SparseMatrix B(c0, dofs.total - c0);
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

/// s1 on the (lambda, q) block.
inline SparseMatrix assemble_s1(const Mesh& mesh, double rho1, double rho2, const DofMap& dofs) {
  if (!(rho1 > 0.0) || !(rho2 > 0.0))
    throw std::invalid_argument("assemble_s1: rho1 and rho2 must be positive");
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_tets()) * 4 * 30);
  auto sym = [&trip](Index a, Index b, double v) {
    trip.emplace_back(a, b, v);
    if (a != b) trip.emplace_back(b, a, v);
  };
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    const auto& g = mesh.geometry[t];
    const double hinv = 1.0 / g.diameter;
    for (int i = 0; i < 4; ++i) {
      const Index f = mesh.tet_faces[t][i];
      const double area = g.face_area[i];

      const double cl = rho1 * hinv * area;
      sym(dofs.lambda0(t), dofs.lambda0(t), cl);
      sym(dofs.lambda0(t), dofs.lambdab(f), -cl);
      sym(dofs.lambdab(f), dofs.lambdab(f), cl);

      // |(q0 - T qb) x n|^2 = q0^T P q0 - 2 q0^T T qb + qb^T T^T T qb, P = I - n n^T
      const double cq = rho2 * hinv * area;
      const Vec3& n = g.normal[i];
      const Mat3 P = Mat3::Identity() - n * n.transpose();
      const auto& tb = dofs.face_tangents[f];
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) sym(dofs.q0(t, a), dofs.q0(t, b), cq * P(a, b));
      for (int a = 0; a < 3; ++a)
        for (int j = 0; j < 2; ++j) sym(dofs.q0(t, a), dofs.qb(f, j), -cq * tb[j][a]);
      for (int j = 0; j < 2; ++j)
        for (int k = j; k < 2; ++k) sym(dofs.qb(f, j), dofs.qb(f, k), cq * tb[j].dot(tb[k]));
    }
  }
  SparseMatrix S(dofs.num_dual(), dofs.num_dual());
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

/// s2 on the s block (s0 then s_b, offset by dofs.off_s0).
inline SparseMatrix assemble_s2(const Mesh& mesh, double rho3, double gamma, const DofMap& dofs) {
  if (!(rho3 > 0.0)) throw std::invalid_argument("assemble_s2: rho3 must be positive");
  if (!(gamma >= -1.0)) throw std::invalid_argument("assemble_s2: gamma must be >= -1");
  const Index o = dofs.off_s0;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_tets()) * 16);
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    const auto& g = mesh.geometry[t];
    const double scale = rho3 * std::pow(g.diameter, -gamma);
    for (int i = 0; i < 4; ++i) {
      const Index f = mesh.tet_faces[t][i];
      const double c = scale * g.face_area[i];
      trip.emplace_back(dofs.s0(t) - o, dofs.s0(t) - o, c);
      trip.emplace_back(dofs.s0(t) - o, dofs.sb(f) - o, -c);
      trip.emplace_back(dofs.sb(f) - o, dofs.s0(t) - o, -c);
      trip.emplace_back(dofs.sb(f) - o, dofs.sb(f) - o, c);
    }
  }
  SparseMatrix S(dofs.num_s(), dofs.num_s());
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

/// Raw load vector: (g, psi_0) - (f, phi_0) + <phi_1, phi_b> on boundary faces.
inline Vector assemble_rhs(const ProblemSpec& spec, const Mesh& mesh, const DofMap& dofs,
                           int quad_degree) {
  const TetRule vol = tet_rule(quad_degree);
  const TriangleRule surf = triangle_rule(quad_degree);
  Vector F = Vector::Zero(dofs.total);
  for (Index t = 0; t < mesh.num_tets(); ++t) {
    const auto& g = mesh.geometry[t];
    const Vec3 gm = l2_project_cell(spec.g, g, vol);
    const double fm = l2_project_cell(spec.f, g, vol);
    for (int d = 0; d < 3; ++d) F[dofs.q0(t, d)] += g.volume * gm[d];
    F[dofs.lambda0(t)] -= g.volume * fm;
  }
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.is_boundary(f)) continue;
    const FaceGeometry fg = face_geometry(mesh, f);  // canonical normal is outward here
    auto phi1 = [&](const Vec3& x) { return spec.phi1(x, fg.normal); };
    F[dofs.lambdab(f)] += fg.area * l2_project_face(phi1, fg, surf);
  }
  return F;
}

struct StabilizationParams {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double rho3 = 1.0;
  double gamma = -1.0;  // exponent of h_T in s2
};

struct GlobalSystem {
  DofMap dofs;
  StabilizationParams params;
  SparseMatrix S1;      // (lambda, q) block
  SparseMatrix S2;      // s block
  SparseMatrix A_full;  // raw entries, constraints not applied
  Vector F_full;
  SparseMatrix A;       // free entries only
  Vector F;
  std::vector<Vector> indicators;  // raw indicator of each cavity's s_b entries

  [[nodiscard]] Vector restrict_to_free(const Vector& raw) const {
    Vector out(dofs.num_free());
    for (Index i = 0; i < dofs.num_free(); ++i) out[i] = raw[dofs.free_to_raw[i]];
    return out;
  }
  [[nodiscard]] Vector expand_to_raw(const Vector& free) const {
    Vector out = Vector::Zero(dofs.total);
    for (Index i = 0; i < dofs.num_free(); ++i) out[dofs.free_to_raw[i]] = free[i];
    return out;
  }
};

/// A = [[S1, B], [B^T, -S2]] over raw entries, then restricted to free ones.
inline GlobalSystem assemble_global(const DofMap& dofs, const SparseMatrix& S1, const SparseMatrix& B,
                                    const SparseMatrix& S2, const Vector& F_raw,
                                    const StabilizationParams& params = {}) {
  const Index nd = dofs.num_dual();
  const Index nus = dofs.total - nd;
  const Index s_shift = dofs.off_s0;
  if (S1.rows() != nd || S1.cols() != nd || B.rows() != nd || B.cols() != nus ||
      S2.rows() != dofs.num_s() || S2.cols() != dofs.num_s() || F_raw.size() != dofs.total)
    throw std::invalid_argument("assemble_global: block dimensions do not match the dof map");

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(S1.nonZeros() + 2 * B.nonZeros() + S2.nonZeros()));
  for (int k = 0; k < S1.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(S1, k); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      trip.emplace_back(it.row(), nd + it.col(), it.value());
      trip.emplace_back(nd + it.col(), it.row(), it.value());
    }
  for (int k = 0; k < S2.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(S2, k); it; ++it)
      trip.emplace_back(s_shift + it.row(), s_shift + it.col(), -it.value());

  GlobalSystem sys;
  sys.dofs = dofs;
  sys.params = params;
  sys.S1 = S1;
  sys.S2 = S2;
  sys.A_full.resize(dofs.total, dofs.total);
  sys.A_full.setFromTriplets(trip.begin(), trip.end());
  sys.F_full = F_raw;

  std::vector<Triplet> free_trip;
  free_trip.reserve(trip.size());
  for (int k = 0; k < sys.A_full.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.A_full, k); it; ++it) {
      const Index r = dofs.raw_to_free[it.row()];
      const Index c = dofs.raw_to_free[it.col()];
      if (r >= 0 && c >= 0) free_trip.emplace_back(r, c, it.value());
    }
  sys.A.resize(dofs.num_free(), dofs.num_free());
  sys.A.setFromTriplets(free_trip.begin(), free_trip.end());
  sys.F = sys.restrict_to_free(F_raw);

  for (const auto& group : dofs.cavity_sb) {
    Vector s = Vector::Zero(dofs.total);
    for (Index i : group) s[i] = 1.0;
    sys.indicators.push_back(std::move(s));
  }
  return sys;
}

/// Full pipeline for one mesh: dof map, blocks, loads, global system.
inline GlobalSystem assemble_system(const ProblemSpec& spec, const Mesh& mesh,
                                    const StabilizationParams& params, int quad_degree) {
  const DofMap dofs = build_dof_map(mesh);
  const auto eps = cell_epsilon(mesh, spec.epsilon, tet_rule(quad_degree));
  const SparseMatrix B = assemble_Bh(mesh, eps, dofs);
  const SparseMatrix S1 = assemble_s1(mesh, params.rho1, params.rho2, dofs);
  const SparseMatrix S2 = assemble_s2(mesh, params.rho3, params.gamma, dofs);
  const Vector F = assemble_rhs(spec, mesh, dofs, quad_degree);
  return assemble_global(dofs, S1, B, S2, F, params);
}

/// Writes the free-entry matrix and load in Matrix Market coordinate format.
inline void export_matrix_market(const GlobalSystem& sys, const std::string& matrix_path,
                                 const std::string& rhs_path) {
  if (!Eigen::saveMarket(sys.A, matrix_path))
    throw std::runtime_error("export_matrix_market: cannot write " + matrix_path);
  if (!rhs_path.empty() && !Eigen::saveMarketVector(sys.F, rhs_path))
    throw std::runtime_error("export_matrix_market: cannot write " + rhs_path);
}

}  // namespace pdwg
