#pragma once

// Reference computations for the test suite. Everything here is written with
// explicit index loops, plain arrays and general-purpose solvers, and never
// calls into the charsym algebra it is used to check.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

namespace oracle {

using M4 = Eigen::Matrix4d;
using M2 = Eigen::Matrix2d;
using V4 = Eigen::Vector4d;
using V2 = Eigen::Vector2d;
using J24 = Eigen::Matrix<double, 2, 4>;

/// Sign of a permutation by counting inversions; 0 if an index repeats.
inline int sign_of(const std::vector<int>& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] == p[j]) return 0;
  int inversions = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inversions;
  return inversions % 2 ? -1 : 1;
}

/// Leibniz expansion over all n! permutations.
template <typename Mat>
double leibniz_det(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  double det = 0.0;
  do {
    double term = sign_of(p);
    for (int i = 0; i < n; ++i) term *= m(i, p[i]);
    det += term;
  } while (std::next_permutation(p.begin(), p.end()));
  return det;
}

/// Sum of |terms| of the Leibniz expansion.
template <typename Mat>
double leibniz_scale(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  double total = 0.0;
  do {
    double term = 1.0;
    for (int i = 0; i < n; ++i) term *= std::abs(m(i, p[i]));
    total += term;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

inline M4 inverse(const M4& m) { return m.fullPivLu().inverse(); }

/// L_ab = d_a phi^A h_AB d_b phi^B
inline M4 pullback(const J24& J, const M2& h) {
  M4 L = M4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int A = 0; A < 2; ++A)
        for (int B = 0; B < 2; ++B) L(a, b) += J(A, a) * h(A, B) * J(B, b);
  return L;
}

/// Elementary symmetric functions e_1..e_4 of the eigenvalues of a general
/// (non-symmetric) matrix.
inline std::array<double, 4> elementary_symmetric(const M4& m) {
  Eigen::EigenSolver<M4> es(m, false);
  const auto ev = es.eigenvalues();
  std::array<std::complex<double>, 5> e{};
  e[0] = 1.0;
  for (int i = 0; i < 4; ++i)
    for (int k = i + 1; k >= 1; --k) e[k] += e[k - 1] * ev[i];
  return {e[1].real(), e[2].real(), e[3].real(), e[4].real()};
}

/// sigma_1..sigma_4 of the mixed strain g^{-1} L.
inline std::array<double, 4> sigmas(const J24& J, const M2& h, const M4& g) {
  return elementary_symmetric(inverse(g) * pullback(J, h));
}

/// H_ab = sqrt(det h) [AB] d_a phi^A d_b phi^B
inline M4 two_form(const J24& J, const M2& h) {
  const double w = std::sqrt(leibniz_det(h));
  M4 H = M4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int A = 0; A < 2; ++A)
        for (int B = 0; B < 2; ++B) H(a, b) += w * sign_of({A, B}) * J(A, a) * J(B, b);
  return H;
}

/// T^ab = g^ac g^bd T_cd
inline M4 raise_both(const M4& T, const M4& g) {
  const M4 gi = inverse(g);
  M4 R = M4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) R(a, b) += gi(a, c) * gi(b, d) * T(c, d);
  return R;
}

inline double full_contraction(const M4& lower, const M4& upper) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) s += lower(a, b) * upper(a, b);
  return s;
}

/// *H^ab = 1/2 eta^abcd H_cd with eta^abcd = -[abcd] / sqrt(-g).
inline M4 dual_upper(const M4& H, const M4& g) {
  const double s = std::sqrt(-leibniz_det(g));
  M4 D = M4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) D(a, b) += 0.5 * (-sign_of({a, b, c, d}) / s) * H(c, d);
  return D;
}

/// H^a_c H^cb
inline M4 h_squared_upper(const M4& H, const M4& g) {
  const M4 Hu = raise_both(H, g);
  M4 R = M4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) R(a, b) += Hu(a, c) * g(c, d) * Hu(d, b);
  return R;
}

/// G1 = sigma2 g^-1 + H H,  G2 = g^-1 - xi H H
inline M4 first_form(const J24& J, const M2& h, const M4& g) {
  const M4 H = two_form(J, h);
  const double sigma2 = 0.5 * full_contraction(H, raise_both(H, g));
  return sigma2 * inverse(g) + h_squared_upper(H, g);
}
inline M4 second_form(const J24& J, const M2& h, const M4& g, double xi) {
  return inverse(g) - xi * h_squared_upper(two_form(J, h), g);
}

/// Field equation d_a(sqrt(-g) L2 H^ab) d_b phi^A for constant g and h, with
/// L2 and L22 supplied as numbers at the current sigma2.
inline V2 field_equation(const J24& J, const std::array<M4, 2>& hess, const M2& h, const M4& g,
                         double L2, double L22) {
  const double w = std::sqrt(leibniz_det(h));
  const double sg = std::sqrt(-leibniz_det(g));
  const M4 gi = inverse(g);
  const M4 H = two_form(J, h);
  const M4 Hu = raise_both(H, g);
  std::array<M4, 4> dH;
  for (int c = 0; c < 4; ++c) {
    dH[c].setZero();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        dH[c](a, b) = w * (hess[0](c, a) * J(1, b) + J(0, a) * hess[1](c, b) -
                           hess[1](c, a) * J(0, b) - J(1, a) * hess[0](c, b));
  }
  V4 div = V4::Zero();
  for (int a = 0; a < 4; ++a) {
    const double ds = full_contraction(dH[a], Hu);
    const M4 dHu = raise_both(dH[a], g);
    for (int b = 0; b < 4; ++b) div[b] += L22 * ds * Hu(a, b) + L2 * dHu(a, b);
  }
  V2 E = V2::Zero();
  for (int A = 0; A < 2; ++A)
    for (int b = 0; b < 4; ++b) E[A] += sg * div[b] * J(A, b);
  return E;
}

/// Principal symbol recovered from the field equation: the coefficient of
/// k_c k_d in its dependence on the second derivatives, rescaled to the
/// covariant normalization M_AB(k) by sqrt(det h) / (L2 sqrt(-g)) and the flat
/// epsilon. Uses xi = 2 L22 / L2 with L2 = 1.
inline M2 symbol_from_field_equation(const J24& J, const M2& h, const M4& g, double xi,
                                     const V4& k) {
  const double L2 = 1.0, L22 = 0.5 * xi;
  const std::array<M4, 2> zero{M4::Zero(), M4::Zero()};
  const V2 base = field_equation(J, zero, h, g, L2, L22);
  M2 raw = M2::Zero();
  for (int B = 0; B < 2; ++B) {
    // The field equation is linear in the second jet; one unit rank-one
    // hessian k k^T per target direction isolates the symbol column.
    std::array<M4, 2> hess = zero;
    hess[B] = k * k.transpose();
    const V2 E = field_equation(J, hess, h, g, L2, L22) - base;
    raw.col(B) = E;
  }
  M2 eps_inv;
  eps_inv << 0.0, -1.0, 1.0, 0.0;
  const double scale = std::sqrt(leibniz_det(h)) / (L2 * std::sqrt(-leibniz_det(g)));
  return scale * eps_inv * raw;
}

/// Signs of the eigenvalues of a symmetric matrix from a general eigen
/// decomposition: (positive, zero, negative) with a relative threshold.
inline std::array<int, 3> inertia(const M4& G, double rel_tol) {
  Eigen::EigenSolver<M4> es(G, false);
  const auto ev = es.eigenvalues();
  double big = 0.0;
  for (int i = 0; i < 4; ++i) big = std::max(big, std::abs(ev[i].real()));
  std::array<int, 3> out{0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    const double v = ev[i].real();
    if (std::abs(v) <= rel_tol * big) ++out[1];
    else if (v > 0) ++out[0];
    else ++out[2];
  }
  return out;
}

}  // namespace oracle
