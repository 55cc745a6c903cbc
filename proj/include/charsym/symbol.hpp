#pragma once

// Principal part and principal symbol of the sigma2 field equations on a
// two-dimensional target, the two quadratic factors of the characteristic
// polynomial, and the hyperbolicity verdict built from them.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "charsym/conventions.hpp"
#include "charsym/geometry.hpp"
#include "charsym/models.hpp"

namespace charsym {

using GradUp = Eigen::Matrix<double, kBaseDim, kTargetDim>;

namespace detail {

/// d^a phi^P as a 4x2 matrix.
inline GradUp raised_gradient(const JetSample& jet, const MetricSample& g) {
  return g.upper * jet.jac.transpose();
}

/// N_AB = eps_AP eps_BQ d_c phi^P d^c phi^Q
inline Mat2 n_tensor(const JetSample& jet, const MetricSample& g, const TargetMetricSample& h) {
  const Mat2 S = jet.jac * g.upper * jet.jac.transpose();
  const Mat2 eps = h.area_form();
  Mat2 N = eps * S * eps.transpose();
  return 0.5 * (N + N.transpose());
}

}  // namespace detail

/// Coefficients of the second derivatives: M^{ab}_{AB}, symmetric in (a,b)
/// and in (A,B).
struct PrincipalPart {
  std::array<Mat2, 16> M{};  ///< M[4*a + b](A, B)
  Mat2 N = Mat2::Zero();

  const Mat2& at(int a, int b) const { return M[4 * a + b]; }
  Mat2& at(int a, int b) { return M[4 * a + b]; }

  /// M^{ab}_{AB} k_a k_b
  Mat2 contract(const Vec4& k) const {
    Mat2 out = Mat2::Zero();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) out += k[a] * k[b] * at(a, b);
    return out;
  }

  /// Sum of |k_a k_b| max|M^{ab}|, the size of the terms summed by contract().
  double contraction_scale(const Vec4& k) const {
    double s = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s += std::abs(k[a] * k[b]) * max_abs(at(a, b));
    return s;
  }
};

inline PrincipalPart principal_part(const JetSample& jet, const MetricSample& g,
                                    const TargetMetricSample& h, double xi) {
  PrincipalPart pp;
  pp.N = detail::n_tensor(jet, g, h);
  const Mat2 eps = h.area_form();
  const GradUp D = detail::raised_gradient(jet, g);

  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Mat2 m = -g.upper(a, b) * pp.N;
      for (int A = 0; A < 2; ++A)
        for (int B = 0; B < 2; ++B) {
          double acc = 0.0;
          for (int P = 0; P < 2; ++P)
            for (int Q = 0; Q < 2; ++Q) {
              const double coupling = eps(A, P) * eps(B, Q) - xi * pp.N(A, P) * pp.N(B, Q);
              const double sym = 0.5 * (D(a, P) * D(b, Q) + D(a, Q) * D(b, P));
              acc += coupling * sym;
            }
          m(A, B) += acc;
        }
      pp.at(a, b) = m;
    }

  // Enforce the symmetries exactly; the average is commutative in floating point.
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      Mat2 s = 0.5 * (pp.at(a, b) + pp.at(b, a));
      const double off = 0.5 * (s(0, 1) + s(1, 0));
      s(0, 1) = off;
      s(1, 0) = off;
      pp.at(a, b) = s;
      pp.at(b, a) = s;
    }
  return pp;
}

/// Principal symbol in closed form:
///   M_AB(k) = |l|^2 h_AB - |k|^2 N_AB - l_A l_B - xi N_AP N_BQ l^P l^Q,
/// with l^P = d^a phi^P k_a. Independent of principal_part().
inline Mat2 symbol(const JetSample& jet, const MetricSample& g, const TargetMetricSample& h,
                   double xi, const Vec4& k) {
  const Mat2 N = detail::n_tensor(jet, g, h);
  const Vec2 l_up = detail::raised_gradient(jet, g).transpose() * k;
  const Vec2 l_down = h.lower * l_up;
  const double l_sq = l_up.dot(l_down);
  const double k_sq = k.dot(g.upper * k);
  const Vec2 Nl = N * l_up;
  Mat2 M = l_sq * h.lower - k_sq * N - l_down * l_down.transpose() - xi * Nl * Nl.transpose();
  return 0.5 * (M + M.transpose());
}

/// Characteristic polynomial P(x, k) = det M_AB(k).
inline double char_poly(const JetSample& jet, const MetricSample& g, const TargetMetricSample& h,
                        double xi, const Vec4& k) {
  return symbol(jet, g, h, xi, k).determinant();
}

/// Sylvester inertia (n+, n0, n-).
struct Inertia {
  int positive = 0;
  int zero = 0;
  int negative = 0;

  friend bool operator==(const Inertia&, const Inertia&) = default;

  bool lorentzian() const {
    return zero == 0 && ((positive == 1 && negative == 3) || (positive == 3 && negative == 1));
  }
  std::string str() const {
    return "(" + std::to_string(positive) + "," + std::to_string(zero) + "," +
           std::to_string(negative) + ")";
  }
};

inline constexpr double kDefaultRankTolerance = 1e-9;

/// Eigenvalues with |lambda| <= rel_tol * max|lambda| count as zero.
inline Inertia inertia(const Mat4& G, double rel_tol = kDefaultRankTolerance) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(G, Eigen::EigenvaluesOnly);
  const Vec4& ev = es.eigenvalues();
  const double threshold = rel_tol * ev.cwiseAbs().maxCoeff();
  Inertia in;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(ev[i]) <= threshold)
      ++in.zero;
    else if (ev[i] > 0.0)
      ++in.positive;
    else
      ++in.negative;
  }
  return in;
}

/// Orthonormal basis of covectors k with G k = 0, same threshold as inertia().
inline std::vector<Vec4> kernel_basis(const Mat4& G, double rel_tol = kDefaultRankTolerance) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(G);
  const Vec4& ev = es.eigenvalues();
  const double threshold = rel_tol * ev.cwiseAbs().maxCoeff();
  std::vector<Vec4> basis;
  for (int i = 0; i < 4; ++i)
    if (std::abs(ev[i]) <= threshold) basis.push_back(es.eigenvectors().col(i));
  return basis;
}

/// |det G| / max|G_ab|^4, zero for G = 0.
inline double normalized_determinant(const Mat4& G) {
  const double scale = max_abs(G);
  if (scale == 0.0) return 0.0;
  return std::abs(G.determinant()) / std::pow(scale, 4);
}

struct QuadraticForm {
  Mat4 G = Mat4::Zero();
  double det = 0.0;
  Inertia inertia;

  static QuadraticForm from(const Mat4& G, double rel_tol = kDefaultRankTolerance) {
    return {G, G.determinant(), charsym::inertia(G, rel_tol)};
  }
  double operator()(const Vec4& k) const { return k.dot(G * k); }
};

/// The two quadratic factors of the characteristic polynomial.
struct QuadraticForms {
  Mat4 first;   ///< G1^ab = sigma2 g^ab + H^a_c H^cb
  Mat4 second;  ///< G2^ab = g^ab - xi H^a_c H^cb
};

inline QuadraticForms quadratic_forms(const PullbackForm& H, double sigma2, const MetricSample& g,
                                      double xi) {
  Mat4 HH = H.Hsq_mixed * g.upper;
  HH = 0.5 * (HH + HH.transpose()).eval();
  return {sigma2 * g.upper + HH, g.upper - xi * HH};
}

inline QuadraticForms quadratic_forms(const JetSample& jet, const MetricSample& g,
                                      const TargetMetricSample& h, double xi) {
  const StrainData s = strain_and_invariants(jet, h, g);
  return quadratic_forms(pullback_two_form(jet, h, g), s.sigma2(), g, xi);
}

/// Totally symmetric quartic tensor with G4(k,k,k,k) = det(h) P1(k) P2(k).
struct QuarticForm {
  std::array<double, 256> G4{};

  static constexpr int index(int a, int b, int c, int d) { return ((a * 4 + b) * 4 + c) * 4 + d; }
  double at(int a, int b, int c, int d) const { return G4[index(a, b, c, d)]; }

  double operator()(const Vec4& k) const {
    double acc = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) acc += at(a, b, c, d) * k[a] * k[b] * k[c] * k[d];
    return acc;
  }
};

inline QuarticForm quartic_form(const QuadraticForms& forms, double det_h) {
  const Mat4& A = forms.first;
  const Mat4& B = forms.second;
  QuarticForm q;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const double s = A(a, b) * B(c, d) + A(c, d) * B(a, b) + A(a, c) * B(b, d) +
                           A(b, d) * B(a, c) + A(a, d) * B(b, c) + A(b, c) * B(a, d);
          q.G4[QuarticForm::index(a, b, c, d)] = det_h * s / 6.0;
        }
  return q;
}

inline QuarticForm quartic_form(const JetSample& jet, const MetricSample& g,
                                const TargetMetricSample& h, double xi) {
  return quartic_form(quadratic_forms(jet, g, h, xi), h.det);
}

/// |P(k) - det(h) P1(k) P2(k)| / (1 + |P(k)|)
inline double factorization_residual(const JetSample& jet, const MetricSample& g,
                                     const TargetMetricSample& h, double xi, const Vec4& k) {
  const double P = char_poly(jet, g, h, xi, k);
  const QuadraticForms f = quadratic_forms(jet, g, h, xi);
  const double product = h.det * k.dot(f.first * k) * k.dot(f.second * k);
  return std::abs(P - product) / (1.0 + std::abs(P));
}

/// Sum of the absolute values of the 24 Leibniz terms of det(A). Round-off in
/// a computed determinant is proportional to this, not to |det A|.
inline double determinant_scale(const Mat4& A) {
  std::array<int, 4> p{0, 1, 2, 3};
  double s = 0.0;
  do {
    s += std::abs(A(0, p[0]) * A(1, p[1]) * A(2, p[2]) * A(3, p[3]));
  } while (std::next_permutation(p.begin(), p.end()));
  return s;
}

struct DeterminantIdentity {
  double lhs = 0.0;  ///< det(delta + f H^2)
  double U = 0.0;    ///< 1 - f/2 H.H - f^2/16 (H.*H)^2
  double residual = 0.0;
  /// determinant_scale(delta + f H^2)
  double scale = 0.0;
};

/// Holds for every antisymmetric H in four dimensions, pullback or not.
inline DeterminantIdentity determinant_identity(const PullbackForm& H, double f) {
  DeterminantIdentity out;
  const Mat4 A = Mat4::Identity() + f * H.Hsq_mixed;
  out.lhs = A.determinant();
  out.scale = determinant_scale(A);
  out.U = 1.0 - 0.5 * f * H.HH - f * f / 16.0 * H.HdH * H.HdH;
  out.residual = std::abs(out.lhs - out.U * out.U);
  return out;
}

struct PointVerdict {
  double sigma2 = 0.0;
  double xi = 0.0;
  double det_G1 = 0.0;
  double det_G2 = 0.0;
  /// g^{-1} (1 + xi sigma2)^2, the closed form for det G2.
  double det_G2_expected = 0.0;
  Inertia inertia_G1;
  Inertia inertia_G2;
  std::vector<Vec4> kernel_G1;
  bool hyperbolic = false;
  std::vector<std::string> notes;
};

inline PointVerdict degeneracy_report(const JetSample& jet, const MetricSample& g,
                                      const TargetMetricSample& h, double xi,
                                      double rank_tol = kDefaultRankTolerance) {
  const StrainData s = strain_and_invariants(jet, h, g);
  const PullbackForm H = pullback_two_form(jet, h, g);
  const QuadraticForms f = quadratic_forms(H, s.sigma2(), g, xi);

  PointVerdict v;
  v.sigma2 = s.sigma2();
  v.xi = xi;
  v.det_G1 = f.first.determinant();
  v.det_G2 = f.second.determinant();
  const double factor = 1.0 + xi * v.sigma2;
  v.det_G2_expected = factor * factor / g.det();
  v.inertia_G1 = inertia(f.first, rank_tol);
  v.inertia_G2 = inertia(f.second, rank_tol);
  v.kernel_G1 = kernel_basis(f.first, rank_tol);
  v.hyperbolic = v.inertia_G1.lorentzian() && v.inertia_G2.lorentzian();

  if (v.inertia_G1.zero > 0)
    v.notes.push_back("G1 singular: kernel dimension " + std::to_string(v.inertia_G1.zero));
  if (v.inertia_G2.zero > 0)
    v.notes.push_back("G2 singular: kernel dimension " + std::to_string(v.inertia_G2.zero));
  if (H.HH == 0.0) v.notes.push_back("pullback two-form vanishes");
  return v;
}

inline PointVerdict degeneracy_report(const JetSample& jet, const MetricSample& g,
                                      const TargetMetricSample& h, const PowerLagrangian& model,
                                      double rank_tol = kDefaultRankTolerance) {
  const StrainData s = strain_and_invariants(jet, h, g);
  const ModelEval ev = eval_model(model, s.sigma2());
  return degeneracy_report(jet, g, h, ev.xi, rank_tol);
}

/// dH[c](a, b) = d_c H_ab, from the second jet and d(sqrt det h)/dy.
inline std::array<Mat4, 4> two_form_gradient(const JetSample& jet, const TargetMetricSample& h) {
  if (!jet.hess) throw MissingHessian("two-form gradient needs second derivatives of the map");
  const auto& hess = *jet.hess;
  const double w = h.sqrt_det();
  const Eigen::Matrix<double, 1, 4> dw = h.grad_sqrt_det.transpose() * jet.jac;
  const Vec4 j0 = jet.jac.row(0).transpose();
  const Vec4 j1 = jet.jac.row(1).transpose();
  const Mat4 B = j0 * j1.transpose() - j1 * j0.transpose();

  std::array<Mat4, 4> dH;
  for (int c = 0; c < 4; ++c) {
    const Vec4 h0 = hess[0].row(c).transpose();
    const Vec4 h1 = hess[1].row(c).transpose();
    const Mat4 dB = h0 * j1.transpose() + j0 * h1.transpose() - h1 * j0.transpose() -
                    j1 * h0.transpose();
    dH[c] = dw[c] * B + w * dB;
  }
  return dH;
}

struct EomResidual {
  Vec2 residual = Vec2::Zero();
  /// Sum of magnitudes of the contributing terms; residual / (1 + scale) is
  /// the scale-free measure.
  double scale = 0.0;

  double scaled() const { return residual.cwiseAbs().maxCoeff() / (1.0 + scale); }
};

/// d_a(sqrt(-g) L2 H^ab) d_b phi^A for a base metric constant in the chart.
inline EomResidual eom_residual(const JetSample& jet, const MetricSample& g,
                                const TargetMetricSample& h, const PowerLagrangian& model) {
  if (!jet.hess) throw MissingHessian("field-equation residual needs second derivatives");
  const StrainData s = strain_and_invariants(jet, h, g);
  const ModelEval ev = model_derivatives(model, s.sigma2());
  const PullbackForm H = pullback_two_form(jet, h, g);
  const auto dH = two_form_gradient(jet, h);

  Vec4 div = Vec4::Zero();
  Vec4 mag = Vec4::Zero();
  for (int a = 0; a < 4; ++a) {
    const double dsigma2 = H.H_upper.cwiseProduct(dH[a]).sum();
    const Mat4 dH_up = g.upper * dH[a] * g.upper;
    for (int b = 0; b < 4; ++b) {
      const double t1 = ev.L22 * dsigma2 * H.H_upper(a, b);
      const double t2 = ev.L2 * dH_up(a, b);
      div[b] += t1 + t2;
      mag[b] += std::abs(t1) + std::abs(t2);
    }
  }
  EomResidual r;
  r.residual = g.sqrt_neg_det * (jet.jac * div);
  r.scale = g.sqrt_neg_det * (jet.jac.cwiseAbs() * mag).maxCoeff();
  return r;
}

}  // namespace charsym
