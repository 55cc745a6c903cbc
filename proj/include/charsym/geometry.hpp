#pragma once

// First-jet tensor algebra: pulled-back metric, strain, elementary symmetric
// invariants, pullback two-form and its Hodge dual.

#include <array>
#include <cmath>

#include "charsym/conventions.hpp"

namespace charsym {

/// Pulled-back metric and mixed strain with its invariants.
struct StrainData {
  Mat4 L_lower = Mat4::Zero();  ///< L_ab
  Mat4 L_mixed = Mat4::Zero();  ///< L^a_b = g^ac L_cb
  /// sigma[k-1] = sigma_k; sigma_4 = det(L^a_b), kept as a rank diagnostic.
  std::array<double, 4> sigma{};

  double sigma1() const { return sigma[0]; }
  double sigma2() const { return sigma[1]; }
  double sigma3() const { return sigma[2]; }
  double sigma4() const { return sigma[3]; }
};

/// Antisymmetric two-form with all index placements the analysis uses.
struct PullbackForm {
  Mat4 H_lower = Mat4::Zero();    ///< H_ab
  Mat4 H_mixed = Mat4::Zero();    ///< H^a_b
  Mat4 H_upper = Mat4::Zero();    ///< H^ab
  Mat4 Hsq_mixed = Mat4::Zero();  ///< (H^2)^a_b = H^a_c H^c_b
  double HH = 0.0;                ///< H_ab H^ab
  double HdH = 0.0;               ///< H_ab (*H)^ab
};

/// L_ab = h_AB d_a phi^A d_b phi^B
inline Mat4 pullback_metric(const JetSample& jet, const TargetMetricSample& h) {
  Mat4 L = jet.jac.transpose() * h.lower * jet.jac;
  return 0.5 * (L + L.transpose());
}

inline StrainData strain_and_invariants(const Mat4& L_lower, const MetricSample& g) {
  StrainData s;
  s.L_lower = L_lower;
  s.L_mixed = g.upper * L_lower;
  const Mat4 L2 = s.L_mixed * s.L_mixed;
  const double t1 = s.L_mixed.trace();
  const double t2 = L2.trace();
  const double t3 = (L2 * s.L_mixed).trace();
  s.sigma[0] = t1;
  s.sigma[1] = 0.5 * (t1 * t1 - t2);
  s.sigma[2] = (t1 * t1 * t1 - 3.0 * t1 * t2 + 2.0 * t3) / 6.0;
  s.sigma[3] = s.L_mixed.determinant();
  return s;
}

inline StrainData strain_and_invariants(const JetSample& jet,
                                        const TargetMetricSample& h,
                                        const MetricSample& g) {
  return strain_and_invariants(pullback_metric(jet, h), g);
}

/// Normalized residual of L^4 - sigma1 L^3 + sigma2 L^2, which vanishes when
/// the strain has rank at most two.
inline double cayley_hamilton_residual(const StrainData& s) {
  const Mat4& L = s.L_mixed;
  const Mat4 L2 = L * L;
  const Mat4 L3 = L2 * L;
  const Mat4 L4 = L3 * L;
  const Mat4 r = L4 - s.sigma1() * L3 + s.sigma2() * L2;
  const double scale = std::pow(1.0 + max_abs(L), 4);
  return max_abs(r) / scale;
}

/// *H^ab = 1/2 eta^abcd H_cd, for any antisymmetric H_cd.
inline Mat4 hodge_dual(const Mat4& H_lower, const MetricSample& g) {
  Mat4 dual = Mat4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      double acc = 0.0;
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const int s = permutation_sign(a, b, c, d);
          if (s != 0) acc += s * H_lower(c, d);
        }
      dual(a, b) = -0.5 * acc / g.sqrt_neg_det;
    }
  return dual;
}

inline Mat4 hodge_dual(const PullbackForm& H, const MetricSample& g) {
  return hodge_dual(H.H_lower, g);
}

/// Fills every index placement and scalar invariant from H_ab. Works for any
/// antisymmetric matrix, pullback or not.
inline PullbackForm make_two_form(const Mat4& H_lower, const MetricSample& g) {
  PullbackForm f;
  f.H_lower = H_lower;
  f.H_mixed = g.upper * H_lower;
  f.H_upper = f.H_mixed * g.upper;
  f.Hsq_mixed = f.H_mixed * f.H_mixed;
  f.HH = H_lower.cwiseProduct(f.H_upper).sum();
  f.HdH = H_lower.cwiseProduct(hodge_dual(H_lower, g)).sum();
  return f;
}

/// H_ab = eps_AB d_a phi^A d_b phi^B
inline PullbackForm pullback_two_form(const JetSample& jet, const TargetMetricSample& h,
                                      const MetricSample& g) {
  const auto r0 = jet.jac.row(0);
  const auto r1 = jet.jac.row(1);
  const Mat4 H = h.sqrt_det() * (r0.transpose() * r1 - r1.transpose() * r0);
  return make_two_form(H, g);
}

/// Lowers both indices of a contravariant two-tensor.
inline Mat4 lower_indices(const Mat4& upper, const MetricSample& g) {
  return g.lower * upper * g.lower;
}

}  // namespace charsym
