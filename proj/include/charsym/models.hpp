#pragma once

// Lagrangian families L(sigma2) with closed-form derivatives.

#include <cmath>
#include <string>

#include "charsym/errors.hpp"

namespace charsym {

/// L(sigma2) = coefficient * sigma2^exponent.
struct PowerLagrangian {
  double coefficient = -0.5;
  double exponent = 1.0;

  /// Fractional model that evades Derrick scaling on R^{1+3} with an S^2 target.
  static constexpr PowerLagrangian afz() { return {-0.5, 0.75}; }
  /// Conformally invariant linear model.
  static constexpr PowerLagrangian strongly_coupled() { return {-0.5, 1.0}; }

  bool integer_exponent() const { return exponent == std::floor(exponent); }
};

struct ModelEval {
  double L = 0.0;
  double L2 = 0.0;    ///< dL/dsigma2
  double L22 = 0.0;   ///< d^2L/dsigma2^2
  double L222 = 0.0;  ///< d^3L/dsigma2^3
  double xi = 0.0;    ///< 2 L22 / L2
  /// d xi / d sigma2, needed when transporting rays through a varying background.
  double dxi = 0.0;
};

/// L and its first three sigma2-derivatives. xi and dxi are left at zero;
/// this is all the field equation needs, and it is defined where L2 = 0.
inline ModelEval model_derivatives(const PowerLagrangian& m, double sigma2) {
  const double q = m.exponent;
  const double c = m.coefficient;
  if (!(q > 0.0) || !std::isfinite(q))
    throw DomainError("power-law exponent must be a positive real, got " + std::to_string(q));
  if (!m.integer_exponent() && !(sigma2 > 0.0))
    throw DomainError("fractional power requires sigma2 > 0, got " + std::to_string(sigma2));

  // sigma2^(q-k) with the integer-exponent convention 0^0 = 1.
  auto power = [&](double e) {
    if (e == 0.0) return 1.0;
    return std::pow(sigma2, e);
  };
  ModelEval ev;
  ev.L = c * power(q);
  ev.L2 = c * q * power(q - 1.0);
  ev.L22 = (q == 1.0) ? 0.0 : c * q * (q - 1.0) * power(q - 2.0);
  ev.L222 = (q == 1.0 || q == 2.0) ? 0.0 : c * q * (q - 1.0) * (q - 2.0) * power(q - 3.0);
  return ev;
}

inline ModelEval eval_model(const PowerLagrangian& m, double sigma2) {
  ModelEval ev = model_derivatives(m, sigma2);
  if (ev.L2 == 0.0 || !std::isfinite(ev.L2))
    throw DegenerateModel("dL/dsigma2 vanishes at sigma2 = " + std::to_string(sigma2));
  ev.xi = 2.0 * ev.L22 / ev.L2 + 0.0;  // no -0 for linear models
  ev.dxi = 2.0 * (ev.L222 * ev.L2 - ev.L22 * ev.L22) / (ev.L2 * ev.L2);
  if (!std::isfinite(ev.xi) || !std::isfinite(ev.dxi))
    throw DegenerateModel("xi is not finite at sigma2 = " + std::to_string(sigma2));
  return ev;
}

}  // namespace charsym
