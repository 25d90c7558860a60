#pragma once

// Manufactured problems for the div-curl system
//
//   div(eps u) = f,   curl u = g   in Omega,   eps u . n = phi1   on Gamma.
//
// Every load is a hand-derived closed form; tests cross-check them against
// central differences of the exact field.

#include "pdwg/quadrature.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pdwg {

/// Radius below which a singular-axis evaluation is clamped.
inline constexpr double kSingularRadiusFloor = 1e-14;

struct CylCoords {
  double r = 0.0;
  double theta = 0.0;
};

/// Cylindrical coordinates about the vertical axis through `center`, with the
/// angle taken in [branch_min, branch_min + 2 pi).
inline CylCoords cyl_coords(const Vec3& p, const Eigen::Vector2d& center, double branch_min) {
  const double dx = p[0] - center[0];
  const double dy = p[1] - center[1];
  const double r = std::hypot(dx, dy);
  if (r == 0.0) throw std::domain_error("cyl_coords: point lies on the axis (r = 0)");
  double theta = std::atan2(dy, dx);
  while (theta < branch_min) theta += 2.0 * std::numbers::pi;
  while (theta >= branch_min + 2.0 * std::numbers::pi) theta -= 2.0 * std::numbers::pi;
  return {r, theta};
}

struct ProblemParams {
  std::optional<double> gamma;   // Examples 5, 7
  std::optional<double> alpha;   // Examples 5, 6, 7
  std::optional<double> beta;    // Example 7
  std::optional<double> gamma1;  // Example 6
  std::optional<double> gamma2;  // Example 6
  // Example 7: add f = beta pi cos(pi x) cos(pi y), a source the exact field
  // does not have. Off by default; reproduces the stalled tables in the literature.
  bool beta_source = false;
};

struct ProblemSpec {
  int example = 0;
  std::string regularity;
  // Material tensor; assembly uses its cell means.
  std::function<Mat3(const Vec3&)> epsilon;
  std::function<Vec3(const Vec3&)> exact_u;
  std::function<double(const Vec3&)> f;
  std::function<Vec3(const Vec3&)> g;
  // Distance to the nearest singular set (infinity for smooth problems).
  std::function<double(const Vec3&)> singular_distance;
  // Resolved parameters (defaults filled in).
  double gamma = 0.0, alpha = 0.0, beta = 0.0, gamma1 = 0.0, gamma2 = 0.0;
  bool beta_source = false;

  [[nodiscard]] double phi1(const Vec3& p, const Vec3& normal) const {
    return (epsilon(p) * exact_u(p)).dot(normal);
  }
};

namespace detail {

/// Vertical potential w = r^gamma sin(alpha theta) about a vertical axis.
struct AxisPotential {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double branch_min = 0.0;
  double gamma = 1.0;
  double alpha = 1.0;

  [[nodiscard]] CylCoords coords(const Vec3& p) const {
    const double dx = p[0] - center[0];
    const double dy = p[1] - center[1];
    if (std::hypot(dx, dy) < kSingularRadiusFloor) {
      // Clamp onto a tiny circle along the same (or a fixed) direction.
      const double ang = (dx == 0.0 && dy == 0.0) ? branch_min + 1.0 : std::atan2(dy, dx);
      return cyl_coords(Vec3(center[0] + kSingularRadiusFloor * std::cos(ang),
                             center[1] + kSingularRadiusFloor * std::sin(ang), p[2]),
                        center, branch_min);
    }
    return cyl_coords(p, center, branch_min);
  }
  [[nodiscard]] double value(const Vec3& p) const {
    const auto c = coords(p);
    return std::pow(c.r, gamma) * std::sin(alpha * c.theta);
  }
  /// (d/dx, d/dy) of w.
  [[nodiscard]] Eigen::Vector2d grad(const Vec3& p) const {
    const auto c = coords(p);
    const double rg = std::pow(c.r, gamma - 1.0);
    const double ct = std::cos(c.theta), st = std::sin(c.theta);
    const double sa = std::sin(alpha * c.theta), ca = std::cos(alpha * c.theta);
    return {rg * (gamma * ct * sa - alpha * st * ca), rg * (gamma * st * sa + alpha * ct * ca)};
  }
  /// curl(0, 0, w) = (w_y, -w_x, 0).
  [[nodiscard]] Vec3 curl(const Vec3& p) const {
    const auto d = grad(p);
    return {d[1], -d[0], 0.0};
  }
  /// Laplacian of w.
  [[nodiscard]] double laplacian(const Vec3& p) const {
    const auto c = coords(p);
    return (gamma * gamma - alpha * alpha) * std::pow(c.r, gamma - 2.0) * std::sin(alpha * c.theta);
  }
  [[nodiscard]] double axis_distance(const Vec3& p) const {
    return std::hypot(p[0] - center[0], p[1] - center[1]);
  }
};

inline Vec3 rotational_field(const Vec3& p) {
  using std::numbers::pi;
  return {std::sin(pi * p[0]) * std::cos(pi * p[1]), -std::sin(pi * p[1]) * std::cos(pi * p[0]), 0.0};
}

/// curl of rotational_field; its divergence vanishes identically.
inline Vec3 rotational_field_curl(const Vec3& p) {
  using std::numbers::pi;
  return {0.0, 0.0, 2.0 * pi * std::sin(pi * p[0]) * std::sin(pi * p[1])};
}

inline bool close_to(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

inline double infinite_distance(const Vec3&) { return std::numeric_limits<double>::infinity(); }

}  // namespace detail

/// Exact solution, coefficient and loads of numerical example `example_id`.
inline ProblemSpec make_problem(int example_id, const ProblemParams& params = {}) {
  using detail::AxisPotential;
  using std::numbers::pi;
  ProblemSpec p;
  p.example = example_id;
  p.epsilon = [](const Vec3&) -> Mat3 { return Mat3::Identity(); };
  p.singular_distance = detail::infinite_distance;

  auto reject = [&](const std::string& what) {
    throw std::invalid_argument("make_problem: example " + std::to_string(example_id) + ": " + what);
  };
  if (params.beta_source && example_id != 7) reject("beta_source applies to example 7 only");
  auto no_params = [&] {
    if (params.gamma || params.alpha || params.beta || params.gamma1 || params.gamma2)
      reject("takes no singularity parameters");
  };
  // Wedge cut placed inside the excluded third quadrant about the corner.
  constexpr double kThirdQuadrantCut = -0.75 * std::numbers::pi;

  switch (example_id) {
    case 1: {
      no_params();
      const Mat3 eps = Eigen::Vector3d(3.0, 2.0, 1.0).asDiagonal();
      p.regularity = "H^1";
      p.epsilon = [eps](const Vec3&) -> Mat3 { return eps; };
      p.exact_u = [](const Vec3& x) -> Vec3 { return detail::rotational_field(x) + x; };
      p.f = [](const Vec3& x) { return pi * std::cos(pi * x[0]) * std::cos(pi * x[1]) + 6.0; };
      p.g = detail::rotational_field_curl;
      break;
    }
    case 2: {
      no_params();
      const AxisPotential w{{0.0, 0.0}, kThirdQuadrantCut, 2.0 / 3.0, 2.0};
      p.regularity = "H^{5/3-eps}";
      p.exact_u = [w](const Vec3& x) -> Vec3 {
        return {x[0] * (1.0 - x[0]), x[1] * (1.0 - x[1]), w.value(x) * x[2] * (1.0 - x[2])};
      };
      p.f = [w](const Vec3& x) {
        return (1.0 - 2.0 * x[0]) + (1.0 - 2.0 * x[1]) + w.value(x) * (1.0 - 2.0 * x[2]);
      };
      p.g = [w](const Vec3& x) -> Vec3 {
        const auto d = w.grad(x);
        const double pz = x[2] * (1.0 - x[2]);
        return {d[1] * pz, -d[0] * pz, 0.0};
      };
      p.singular_distance = [w](const Vec3& x) { return w.axis_distance(x); };
      break;
    }
    case 3: {
      no_params();
      // Domain wedge theta in [0, 3 pi / 2]; the cut sits in the excluded quadrant.
      const AxisPotential w{{0.0, 0.0}, -0.25 * pi, 2.0 / 3.0, 2.0 / 3.0};
      p.regularity = "H^{2/3-eps}";
      p.exact_u = [w](const Vec3& x) { return w.curl(x); };
      p.f = [](const Vec3&) { return 0.0; };
      p.g = [](const Vec3&) -> Vec3 { return Vec3::Zero(); };
      p.singular_distance = [w](const Vec3& x) { return w.axis_distance(x); };
      break;
    }
    case 4: {
      no_params();
      constexpr double s = 1.0 / 6.0;
      p.regularity = "H^{2/3-eps}";
      auto radius = [](const Vec3& x) { return std::max(x.norm(), kSingularRadiusFloor); };
      p.exact_u = [radius](const Vec3& x) -> Vec3 { return s * std::pow(radius(x), s - 2.0) * x; };
      p.f = [radius](const Vec3& x) { return s * (s + 1.0) * std::pow(radius(x), s - 2.0); };
      p.g = [](const Vec3&) -> Vec3 { return Vec3::Zero(); };
      p.singular_distance = [](const Vec3& x) { return x.norm(); };
      break;
    }
    case 5: {
      if (params.beta || params.gamma1 || params.gamma2) reject("only gamma and alpha apply");
      p.gamma = params.gamma.value_or(2.0 / 3.0);
      p.alpha = params.alpha.value_or(2.0);
      if (!(detail::close_to(p.gamma, 1.25) || detail::close_to(p.gamma, 1.0) ||
            detail::close_to(p.gamma, 2.0 / 3.0)))
        reject("gamma must be one of 5/4, 1, 2/3");
      if (!detail::close_to(p.alpha, 2.0)) reject("alpha must be 2");
      const AxisPotential w{{0.0, 0.0}, kThirdQuadrantCut, p.gamma, p.alpha};
      p.regularity = "H^{gamma-eps}";
      p.exact_u = [w](const Vec3& x) { return w.curl(x); };
      p.f = [](const Vec3&) { return 0.0; };
      p.g = [w](const Vec3& x) -> Vec3 { return {0.0, 0.0, -w.laplacian(x)}; };
      p.singular_distance = [w](const Vec3& x) { return w.axis_distance(x); };
      break;
    }
    case 6: {
      if (params.gamma || params.beta) reject("only gamma1, gamma2 and alpha apply");
      p.gamma1 = params.gamma1.value_or(0.5);
      p.gamma2 = params.gamma2.value_or(2.0 / 3.0);
      p.alpha = params.alpha.value_or(2.0);
      if (!detail::close_to(p.gamma1, 0.5) || !detail::close_to(p.gamma2, 2.0 / 3.0))
        reject("gamma1 must be 1/2 and gamma2 must be 2/3");
      if (!detail::close_to(p.alpha, 2.0)) reject("alpha must be 2");
      const AxisPotential w1{{0.0, 0.0}, kThirdQuadrantCut, p.gamma1, p.alpha};
      const AxisPotential w2{{1.0, 0.0}, kThirdQuadrantCut, p.gamma2, p.alpha};
      p.regularity = "H^{1/2-eps}";
      p.exact_u = [w1, w2](const Vec3& x) -> Vec3 { return w1.curl(x) + w2.curl(x); };
      p.f = [](const Vec3&) { return 0.0; };
      p.g = [w1, w2](const Vec3& x) -> Vec3 {
        return {0.0, 0.0, -(w1.laplacian(x) + w2.laplacian(x))};
      };
      p.singular_distance = [w1, w2](const Vec3& x) {
        return std::min(w1.axis_distance(x), w2.axis_distance(x));
      };
      break;
    }
    case 7: {
      if (params.gamma1 || params.gamma2) reject("only gamma, alpha and beta apply");
      p.gamma = params.gamma.value_or(2.0 / 3.0);
      p.alpha = params.alpha.value_or(2.0);
      p.beta = params.beta.value_or(1.0);
      if (!detail::close_to(p.gamma, 2.0 / 3.0)) reject("gamma must be 2/3");
      if (!detail::close_to(p.alpha, 2.0)) reject("alpha must be 2");
      if (!(detail::close_to(p.beta, 1.0) || detail::close_to(p.beta, 5.0)))
        reject("beta must be 1 or 5");
      const AxisPotential w{{0.0, 0.0}, kThirdQuadrantCut, p.gamma, p.alpha};
      const double beta = p.beta;
      p.beta_source = params.beta_source;
      p.regularity = "H^{2/3-eps}";
      p.exact_u = [w, beta](const Vec3& x) -> Vec3 {
        return w.curl(x) + beta * detail::rotational_field(x);
      };
      if (params.beta_source)
        p.f = [beta](const Vec3& x) { return beta * pi * std::cos(pi * x[0]) * std::cos(pi * x[1]); };
      else
        p.f = [](const Vec3&) { return 0.0; };
      p.g = [w, beta](const Vec3& x) -> Vec3 {
        return Vec3(0.0, 0.0, -w.laplacian(x)) + beta * detail::rotational_field_curl(x);
      };
      p.singular_distance = [w](const Vec3& x) { return w.axis_distance(x); };
      break;
    }
    default:
      throw std::invalid_argument("make_problem: unknown example id " + std::to_string(example_id));
  }
  return p;
}

/// Constant exact field with constant coefficient: f = 0, g = 0 and
/// phi_1 = (eps c) . n. The scheme reproduces it exactly.
inline ProblemSpec make_constant_problem(const Vec3& c, const Mat3& eps) {
  ProblemSpec p;
  p.example = 0;
  p.regularity = "constant";
  p.epsilon = [eps](const Vec3&) -> Mat3 { return eps; };
  p.exact_u = [c](const Vec3&) -> Vec3 { return c; };
  p.f = [](const Vec3&) { return 0.0; };
  p.g = [](const Vec3&) -> Vec3 { return Vec3::Zero(); };
  p.singular_distance = detail::infinite_distance;
  return p;
}

namespace detail {
inline void check_off_singular(const ProblemSpec& spec, const Vec3& x, const char* who) {
  if (spec.singular_distance(x) < kSingularRadiusFloor)
    throw std::domain_error(std::string(who) + ": point lies on a singular axis of example " +
                            std::to_string(spec.example));
}
}  // namespace detail

inline Vec3 eval_exact_u(const ProblemSpec& spec, const Vec3& x) {
  detail::check_off_singular(spec, x, "eval_exact_u");
  return spec.exact_u(x);
}

inline double eval_f(const ProblemSpec& spec, const Vec3& x) {
  detail::check_off_singular(spec, x, "eval_f");
  return spec.f(x);
}

inline Vec3 eval_g(const ProblemSpec& spec, const Vec3& x) {
  detail::check_off_singular(spec, x, "eval_g");
  return spec.g(x);
}

inline double eval_phi1(const ProblemSpec& spec, const Vec3& x, const Vec3& normal) {
  detail::check_off_singular(spec, x, "eval_phi1");
  if (std::abs(normal.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("eval_phi1: normal must have unit length");
  return spec.phi1(x, normal);
}

}  // namespace pdwg
