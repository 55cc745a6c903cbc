#pragma once

// Analytic background maps and target geometries with closed-form
// derivatives, plus central-difference self checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "charsym/conventions.hpp"

namespace charsym {

struct TargetGeometry {
  enum class Kind { flat, sphere_stereographic, poincare_disk, custom_diagonal };

  Kind kind = Kind::flat;
  /// custom_diagonal only: h = diag(c, 1/c).
  double c = 1.0;

  static TargetGeometry flat() { return {Kind::flat, 1.0}; }
  static TargetGeometry sphere_stereographic() { return {Kind::sphere_stereographic, 1.0}; }
  static TargetGeometry poincare_disk() { return {Kind::poincare_disk, 1.0}; }
  static TargetGeometry custom_diagonal(double c) {
    if (!(c > 0.0) || !std::isfinite(c))
      throw DomainError("custom_diagonal target needs c > 0");
    return {Kind::custom_diagonal, c};
  }

  std::string name() const {
    switch (kind) {
      case Kind::flat: return "flat";
      case Kind::sphere_stereographic: return "sphere_stereographic";
      case Kind::poincare_disk: return "poincare_disk";
      case Kind::custom_diagonal: return "custom_diagonal";
    }
    return "unknown";
  }

  /// Constant metric in the chart (flat and custom_diagonal).
  bool constant() const { return kind == Kind::flat || kind == Kind::custom_diagonal; }

  bool in_domain(const Vec2& y) const {
    if (!y.allFinite()) return false;
    if (kind == Kind::poincare_disk) return y.squaredNorm() < 1.0;
    return true;
  }

  /// h_AB(y)
  Mat2 metric(const Vec2& y) const {
    check_domain(y);
    switch (kind) {
      case Kind::flat: return Mat2::Identity();
      case Kind::custom_diagonal: return Vec2(c, 1.0 / c).asDiagonal();
      case Kind::sphere_stereographic:
      case Kind::poincare_disk: return conformal_factor(y) * Mat2::Identity();
    }
    return Mat2::Identity();
  }

  /// dh[C] = d h_AB / d y^C
  std::array<Mat2, 2> metric_gradient(const Vec2& y) const {
    check_domain(y);
    std::array<Mat2, 2> dh{Mat2::Zero(), Mat2::Zero()};
    if (constant()) return dh;
    const Vec2 grad = conformal_gradient(y);
    for (int C = 0; C < 2; ++C) dh[C] = grad[C] * Mat2::Identity();
    return dh;
  }

  /// Metric sample at y, including d(sqrt det h)/dy.
  TargetMetricSample sample(const Vec2& y) const {
    check_domain(y);
    // Conformal charts: sqrt(det h) equals the conformal factor itself.
    const Vec2 grad = constant() ? Vec2::Zero() : conformal_gradient(y);
    return TargetMetricSample::from_lower(metric(y), grad);
  }

 private:
  void check_domain(const Vec2& y) const {
    if (!in_domain(y))
      throw ChartDomainError(name() + " chart does not contain (" + std::to_string(y[0]) + ", " +
                             std::to_string(y[1]) + ")");
  }

  double conformal_factor(const Vec2& y) const {
    const double r2 = y.squaredNorm();
    const double s = (kind == Kind::sphere_stereographic) ? 1.0 + r2 : 1.0 - r2;
    return 4.0 / (s * s);
  }

  Vec2 conformal_gradient(const Vec2& y) const {
    const double r2 = y.squaredNorm();
    if (kind == Kind::sphere_stereographic) return -16.0 * y / std::pow(1.0 + r2, 3);
    return 16.0 * y / std::pow(1.0 - r2, 3);
  }
};

struct ConstantMap {
  Vec2 y0 = Vec2::Zero();
};

/// phi^A = C^A_a x^a + y0^A
struct LinearMap {
  Jacobian C = Jacobian::Zero();
  Vec2 y0 = Vec2::Zero();
};

/// phi = (A sin(kappa.x), B cos(kappa.x)); rank-one differential everywhere.
struct PlaneWave {
  double A = 1.0;
  double B = 1.0;
  Vec4 kappa = Vec4::Zero();
};

/// phi = (A sin(kappa.x), B sin(mu.x)), kappa != mu.
struct ProductWave {
  double A = 1.0;
  double B = 1.0;
  Vec4 kappa = Vec4::Zero();
  Vec4 mu = Vec4::Zero();
};

/// phi^A = y0^A + C^A_a x^a + 1/2 x^a Q^A_ab x^b. The plane spanned by the two
/// gradients rotates with x, so characteristic rays bend.
struct QuadraticMap {
  Jacobian C = Jacobian::Zero();
  std::array<Mat4, 2> Q{Mat4::Zero(), Mat4::Zero()};
  Vec2 y0 = Vec2::Zero();
};

using Background = std::variant<ConstantMap, LinearMap, PlaneWave, ProductWave, QuadraticMap>;

inline std::string background_name(const Background& bg) {
  struct Visitor {
    std::string operator()(const ConstantMap&) const { return "constant_map"; }
    std::string operator()(const LinearMap&) const { return "linear_map"; }
    std::string operator()(const PlaneWave&) const { return "plane_wave"; }
    std::string operator()(const ProductWave&) const { return "product_wave"; }
    std::string operator()(const QuadraticMap&) const { return "quadratic_map"; }
  };
  return std::visit(Visitor{}, bg);
}

/// Constant and linear maps into a constant-metric chart: every coefficient of
/// the analysis is independent of x.
inline bool is_constant_jet(const Background& bg, const TargetGeometry& geom) {
  const bool affine = std::holds_alternative<ConstantMap>(bg) || std::holds_alternative<LinearMap>(bg);
  return affine && geom.constant();
}

/// phi(x) only, no domain check.
inline Vec2 map_value(const Background& bg, const Vec4& x) {
  struct Visitor {
    const Vec4& x;
    Vec2 operator()(const ConstantMap& m) const { return m.y0; }
    Vec2 operator()(const LinearMap& m) const { return m.C * x + m.y0; }
    Vec2 operator()(const PlaneWave& m) const {
      const double s = m.kappa.dot(x);
      return {m.A * std::sin(s), m.B * std::cos(s)};
    }
    Vec2 operator()(const ProductWave& m) const {
      return {m.A * std::sin(m.kappa.dot(x)), m.B * std::sin(m.mu.dot(x))};
    }
    Vec2 operator()(const QuadraticMap& m) const {
      return m.y0 + m.C * x + 0.5 * Vec2(x.dot(m.Q[0] * x), x.dot(m.Q[1] * x));
    }
  };
  return std::visit(Visitor{x}, bg);
}

namespace detail {

inline JetSample jet_unchecked(const Background& bg, const Vec4& x) {
  struct Visitor {
    const Vec4& x;
    JetSample operator()(const ConstantMap& m) const {
      JetSample j;
      j.phi = m.y0;
      j.hess = {Mat4::Zero(), Mat4::Zero()};
      return j;
    }
    JetSample operator()(const LinearMap& m) const {
      JetSample j;
      j.phi = m.C * x + m.y0;
      j.jac = m.C;
      j.hess = {Mat4::Zero(), Mat4::Zero()};
      return j;
    }
    JetSample operator()(const PlaneWave& m) const {
      const double s = m.kappa.dot(x);
      const double sn = std::sin(s), cs = std::cos(s);
      const Mat4 kk = m.kappa * m.kappa.transpose();
      JetSample j;
      j.phi = {m.A * sn, m.B * cs};
      j.jac.row(0) = m.A * cs * m.kappa.transpose();
      j.jac.row(1) = -m.B * sn * m.kappa.transpose();
      j.hess = {Mat4(-m.A * sn * kk), Mat4(-m.B * cs * kk)};
      return j;
    }
    JetSample operator()(const ProductWave& m) const {
      const double s = m.kappa.dot(x), t = m.mu.dot(x);
      JetSample j;
      j.phi = {m.A * std::sin(s), m.B * std::sin(t)};
      j.jac.row(0) = m.A * std::cos(s) * m.kappa.transpose();
      j.jac.row(1) = m.B * std::cos(t) * m.mu.transpose();
      const Mat4 kk = m.kappa * m.kappa.transpose();
      const Mat4 mm = m.mu * m.mu.transpose();
      j.hess = {Mat4(-m.A * std::sin(s) * kk), Mat4(-m.B * std::sin(t) * mm)};
      return j;
    }
    JetSample operator()(const QuadraticMap& m) const {
      JetSample j;
      j.phi = map_value(Background(m), x);
      j.jac = m.C;
      for (int A = 0; A < 2; ++A) j.jac.row(A) += (m.Q[A] * x).transpose();
      j.hess = m.Q;
      return j;
    }
  };
  JetSample j = std::visit(Visitor{x}, bg);
  j.x = x;
  return j;
}

}  // namespace detail

/// Closed-form value, differential and Hessian of the background at x.
inline JetSample jet_eval(const Background& bg, const TargetGeometry& geom, const Vec4& x) {
  if (const auto* pw = std::get_if<ProductWave>(&bg); pw && pw->kappa == pw->mu)
    throw DomainError("product_wave requires kappa != mu");
  if (const auto* qm = std::get_if<QuadraticMap>(&bg))
    for (const Mat4& q : qm->Q)
      if (q != q.transpose()) throw DomainError("quadratic_map coefficients must be symmetric");
  JetSample j = detail::jet_unchecked(bg, x);
  if (!geom.in_domain(j.phi))
    throw ChartDomainError("background leaves the " + geom.name() + " chart at x = (" +
                           std::to_string(x[0]) + ", " + std::to_string(x[1]) + ", " +
                           std::to_string(x[2]) + ", " + std::to_string(x[3]) + ")");
  return j;
}

/// Relative deviations of closed-form derivatives from central differences.
struct FdCheck {
  double jacobian = 0.0;
  double hessian = 0.0;
  double metric = 0.0;

  double worst() const { return std::max({jacobian, hessian, metric}); }
};

inline FdCheck fd_check(const Background& bg, const TargetGeometry& geom, const Vec4& x) {
  const JetSample jet = jet_eval(bg, geom, x);
  const double step = std::cbrt(std::numeric_limits<double>::epsilon());
  FdCheck out;

  const double jac_scale = std::max(1.0, max_abs(jet.jac));
  double hess_scale = 1.0;
  for (const Mat4& m : *jet.hess) hess_scale = std::max(hess_scale, max_abs(m));

  for (int a = 0; a < 4; ++a) {
    const double h = step * (1.0 + std::abs(x[a]));
    Vec4 xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    const Vec2 dphi = (map_value(bg, xp) - map_value(bg, xm)) / (xp[a] - xm[a]);
    out.jacobian = std::max(out.jacobian, max_abs(Vec2(dphi - jet.jac.col(a))) / jac_scale);

    const Jacobian djac =
        (detail::jet_unchecked(bg, xp).jac - detail::jet_unchecked(bg, xm).jac) / (xp[a] - xm[a]);
    for (int A = 0; A < 2; ++A) {
      const Vec4 exact = (*jet.hess)[A].row(a).transpose();
      out.hessian = std::max(out.hessian, max_abs(Vec4(djac.row(A).transpose() - exact)) / hess_scale);
    }
  }

  // Target metric and sqrt(det h) along the two chart directions at phi(x).
  const auto dh = geom.metric_gradient(jet.phi);
  const TargetMetricSample t = geom.sample(jet.phi);
  const double h_scale = std::max(1.0, max_abs(t.lower));
  for (int C = 0; C < 2; ++C) {
    // The step follows the local length scale: near a chart boundary the
    // metric varies on the scale of the distance to it.
    double reach = 1.0 + std::abs(jet.phi[C]);
    for (int i = 0; i < 60; ++i) {
      Vec2 p = jet.phi, m = jet.phi;
      p[C] += reach;
      m[C] -= reach;
      if (geom.in_domain(p) && geom.in_domain(m)) break;
      reach *= 0.5;
    }
    const double h = step * reach;
    Vec2 yp = jet.phi, ym = jet.phi;
    yp[C] += h;
    ym[C] -= h;
    if (!geom.in_domain(yp) || !geom.in_domain(ym)) throw ChartDomainError("fd_check too close to chart boundary");
    const Mat2 fd = (geom.metric(yp) - geom.metric(ym)) / (yp[C] - ym[C]);
    out.metric = std::max(out.metric, max_abs(Mat2(fd - dh[C])) / std::max(h_scale, max_abs(dh[C])));
    const double fd_w =
        (geom.sample(yp).sqrt_det() - geom.sample(ym).sqrt_det()) / (yp[C] - ym[C]);
    out.metric = std::max(out.metric, std::abs(fd_w - t.grad_sqrt_det[C]) / std::max(h_scale, std::abs(t.grad_sqrt_det[C])));
  }
  return out;
}

}  // namespace charsym
