#pragma once

// Quadrature rules on the reference triangle and tetrahedron, expressed in
// barycentric coordinates with weights normalized to sum to one (so a rule
// returns the *mean* of the integrand; multiply by the measure to integrate).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdwg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

template <int NumVertices>
struct SimplexRule {
  std::vector<std::array<double, NumVertices>> points;  // barycentric
  std::vector<double> weights;                          // sum to 1
  int degree = 0;                                       // exactness degree

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

using TriangleRule = SimplexRule<3>;
using TetRule = SimplexRule<4>;

namespace detail {

/// Gauss-Jacobi nodes/weights on [0,1] for the weight (1-u)^a, by Golub-Welsch.
/// Weights integrate against (1-u)^a du, so they sum to 1/(a+1).
inline void gauss_jacobi_unit(int npts, int a, std::vector<double>& nodes,
                              std::vector<double>& weights) {
  const double alpha = a;
  const double beta = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(npts, npts);
  for (int n = 0; n < npts; ++n) {
    const double s = 2.0 * n + alpha + beta;
    J(n, n) = (n == 0) ? (beta - alpha) / (alpha + beta + 2.0)
                       : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (n + 1 < npts) {
      const double m = n + 1.0;
      const double t = 2.0 * m + alpha + beta;
      const double b = std::sqrt(4.0 * m * (m + alpha) * (m + beta) * (m + alpha + beta) /
                                 (t * t * (t + 1.0) * (t - 1.0)));
      J(n, n + 1) = b;
      J(n + 1, n) = b;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  const double mu0 = std::pow(2.0, alpha + beta + 1.0) * std::tgamma(alpha + 1.0) *
                     std::tgamma(beta + 1.0) / std::tgamma(alpha + beta + 2.0);
  nodes.resize(npts);
  weights.resize(npts);
  const double scale = std::pow(2.0, -alpha - 1.0);
  for (int i = 0; i < npts; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    nodes[i] = 0.5 * (eig.eigenvalues()(i) + 1.0);
    weights[i] = scale * mu0 * v0 * v0;
  }
}

inline int conical_points(int degree) { return (degree + 2) / 2; }

inline TetRule conical_tet_rule(int degree) {
  const int m = conical_points(degree);
  std::vector<double> x2, w2, x1, w1, x0, w0;
  gauss_jacobi_unit(m, 2, x2, w2);
  gauss_jacobi_unit(m, 1, x1, w1);
  gauss_jacobi_unit(m, 0, x0, w0);
  TetRule rule;
  rule.degree = 2 * m - 1;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const double l1 = x2[i];
        const double l2 = (1.0 - x2[i]) * x1[j];
        const double l3 = (1.0 - x2[i]) * (1.0 - x1[j]) * x0[k];
        rule.points.push_back({1.0 - l1 - l2 - l3, l1, l2, l3});
        rule.weights.push_back(6.0 * w2[i] * w1[j] * w0[k]);
      }
  return rule;
}

inline TriangleRule conical_triangle_rule(int degree) {
  const int m = conical_points(degree);
  std::vector<double> x1, w1, x0, w0;
  gauss_jacobi_unit(m, 1, x1, w1);
  gauss_jacobi_unit(m, 0, x0, w0);
  TriangleRule rule;
  rule.degree = 2 * m - 1;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double l1 = x1[i];
      const double l2 = (1.0 - x1[i]) * x0[j];
      rule.points.push_back({1.0 - l1 - l2, l1, l2});
      rule.weights.push_back(2.0 * w1[i] * w0[j]);
    }
  return rule;
}

inline void add_tet_orbit4(TetRule& r, double a, double w) {
  const double b = 1.0 - 3.0 * a;
  r.points.push_back({b, a, a, a});
  r.points.push_back({a, b, a, a});
  r.points.push_back({a, a, b, a});
  r.points.push_back({a, a, a, b});
  for (int i = 0; i < 4; ++i) r.weights.push_back(w);
}

inline void add_tet_orbit6(TetRule& r, double a, double w) {
  const double b = 0.5 - a;
  r.points.push_back({a, a, b, b});
  r.points.push_back({a, b, a, b});
  r.points.push_back({a, b, b, a});
  r.points.push_back({b, a, a, b});
  r.points.push_back({b, a, b, a});
  r.points.push_back({b, b, a, a});
  for (int i = 0; i < 6; ++i) r.weights.push_back(w);
}

inline void add_tri_orbit3(TriangleRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  r.points.push_back({b, a, a});
  r.points.push_back({a, b, a});
  r.points.push_back({a, a, b});
  for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

}  // namespace detail

/// Symmetric rule exact for total degree >= `degree` on a tetrahedron.
/// Degrees up to 5 use fully symmetric positive-weight rules; higher degrees
/// fall back to a conical (collapsed Gauss-Jacobi) product rule.
inline TetRule tet_rule(int degree) {
  if (degree < 1) throw std::invalid_argument("tet_rule: quadrature degree must be >= 1, got " +
                                              std::to_string(degree));
  TetRule r;
  if (degree == 1) {
    r.points.push_back({0.25, 0.25, 0.25, 0.25});
    r.weights.push_back(1.0);
    r.degree = 1;
  } else if (degree == 2) {
    detail::add_tet_orbit4(r, (5.0 - std::sqrt(5.0)) / 20.0, 0.25);
    r.degree = 2;
  } else if (degree <= 5) {
    // 14-point degree-5 rule (Walkington).
    detail::add_tet_orbit4(r, 0.3108859192633006, 0.1126879257180159);
    detail::add_tet_orbit4(r, 0.0927352503108912, 0.0734930431163619);
    detail::add_tet_orbit6(r, 0.0455037041256496, 0.0425460207770814);
    r.degree = 5;
  } else {
    r = detail::conical_tet_rule(degree);
  }
  return r;
}

inline TriangleRule triangle_rule(int degree) {
  if (degree < 1)
    throw std::invalid_argument("triangle_rule: quadrature degree must be >= 1, got " +
                                std::to_string(degree));
  TriangleRule r;
  if (degree == 1) {
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(1.0);
    r.degree = 1;
  } else if (degree == 2) {
    detail::add_tri_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
    r.degree = 2;
  } else if (degree <= 4) {
    // Dunavant 6-point rule.
    detail::add_tri_orbit3(r, 0.445948490915965, 0.223381589678011);
    detail::add_tri_orbit3(r, 0.091576213509771, 0.109951743655322);
    r.degree = 4;
  } else {
    r = detail::conical_triangle_rule(degree);
  }
  return r;
}

template <std::size_t N>
inline Vec3 map_point(const std::array<Vec3, N>& vertices, const std::array<double, N>& bary) {
  Vec3 x = Vec3::Zero();
  for (std::size_t i = 0; i < N; ++i) x += bary[i] * vertices[i];
  return x;
}

}  // namespace pdwg
