#pragma once

// Fixed conventions shared by every module.
//
// Base: four dimensions, indices a,b = 0..3, signature (+,-,-,-).
// Target: two dimensions, indices A,B = 0..1 in code (1..2 in the usual
// notation), Riemannian.
//
// Levi-Civita objects are weighted tensors, not bare symbols:
//   eps_AB       =  sqrt(det h) [AB],          [01] = +1
//   eta_abcd     =  sqrt(-det g) [abcd],       [0123] = +1
//   eta^abcd     = -[abcd] / sqrt(-det g)
// so that eps_AB eps^AB = 2 and eta_abcd eta^abcd = -24.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>

#include "charsym/errors.hpp"

namespace charsym {

inline constexpr int kBaseDim = 4;
inline constexpr int kTargetDim = 2;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
/// Row A holds the base gradient of phi^A: jac(A, a) = d_a phi^A.
using Jacobian = Eigen::Matrix<double, kTargetDim, kBaseDim>;

/// Largest absolute entry.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

/// Sign of the permutation (a,b,c,d) of (0,1,2,3); zero on repeated indices.
constexpr int permutation_sign(int a, int b, int c, int d) {
  const int idx[4] = {a, b, c, d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (idx[i] == idx[j]) return 0;
  int sign = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (idx[i] > idx[j]) sign = -sign;
  return sign;
}

/// Base metric at one point: g_ab, g^ab and sqrt(-det g).
struct MetricSample {
  Mat4 lower = Mat4::Identity();
  Mat4 upper = Mat4::Identity();
  double sqrt_neg_det = 1.0;

  /// Validates Lorentzian signature (1 positive, 3 negative eigenvalues).
  static MetricSample from_lower(const Mat4& g) {
    if (max_abs(Mat4(g - g.transpose())) > 1e-14 * (1.0 + max_abs(g)))
      throw DomainError("base metric is not symmetric");
    const double det = g.determinant();
    if (!(det < 0.0)) throw DomainError("base metric must have det g < 0");
    Eigen::SelfAdjointEigenSolver<Mat4> es(g);
    const auto& ev = es.eigenvalues();
    int pos = 0, neg = 0;
    for (int i = 0; i < 4; ++i) {
      if (ev[i] > 0.0) ++pos;
      if (ev[i] < 0.0) ++neg;
    }
    if (pos != 1 || neg != 3)
      throw DomainError("base metric must have signature (+,-,-,-)");
    MetricSample m;
    m.lower = g;
    m.upper = g.inverse();
    m.upper = 0.5 * (m.upper + m.upper.transpose()).eval();
    m.sqrt_neg_det = std::sqrt(-det);
    return m;
  }

  static MetricSample minkowski() {
    MetricSample m;
    m.lower.diagonal() << 1.0, -1.0, -1.0, -1.0;
    m.upper = m.lower;
    m.sqrt_neg_det = 1.0;
    return m;
  }

  double det() const { return -sqrt_neg_det * sqrt_neg_det; }

  /// eta_{abcd}
  double volume_lower(int a, int b, int c, int d) const {
    return sqrt_neg_det * permutation_sign(a, b, c, d);
  }
  /// eta^{abcd}
  double volume_upper(int a, int b, int c, int d) const {
    return -permutation_sign(a, b, c, d) / sqrt_neg_det;
  }
};

/// Target metric at phi(x). `grad_sqrt_det` holds d(sqrt det h)/dy^C, the only
/// target-metric derivative the field equations need.
struct TargetMetricSample {
  Mat2 lower = Mat2::Identity();
  Mat2 upper = Mat2::Identity();
  double det = 1.0;
  Vec2 grad_sqrt_det = Vec2::Zero();

  static TargetMetricSample from_lower(const Mat2& h,
                                       const Vec2& grad_sqrt_det = Vec2::Zero()) {
    const double d = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
    if (!(h(0, 0) > 0.0 && d > 0.0) || std::abs(h(0, 1) - h(1, 0)) > 1e-14 * max_abs(h))
      throw DomainError("target metric must be symmetric positive definite");
    TargetMetricSample t;
    t.lower = h;
    t.det = d;
    t.upper << h(1, 1) / d, -h(0, 1) / d, -h(1, 0) / d, h(0, 0) / d;
    t.grad_sqrt_det = grad_sqrt_det;
    return t;
  }

  static TargetMetricSample flat() { return {}; }

  double sqrt_det() const { return std::sqrt(det); }

  /// eps_AB
  Mat2 area_form() const {
    const double w = sqrt_det();
    Mat2 e;
    e << 0.0, w, -w, 0.0;
    return e;
  }
  /// eps^AB
  Mat2 area_form_upper() const {
    const double w = 1.0 / sqrt_det();
    Mat2 e;
    e << 0.0, w, -w, 0.0;
    return e;
  }
};

/// First (and optionally second) jet of the map at a base point.
struct JetSample {
  Vec4 x = Vec4::Zero();
  Vec2 phi = Vec2::Zero();
  Jacobian jac = Jacobian::Zero();
  /// hess[A](a, b) = d_a d_b phi^A
  std::optional<std::array<Mat4, kTargetDim>> hess;
};

}  // namespace charsym
