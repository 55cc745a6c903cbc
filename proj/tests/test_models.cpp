#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "charsym/models.hpp"

using namespace charsym;

namespace {

double L_of(const PowerLagrangian& m, double s) { return m.coefficient * std::pow(s, m.exponent); }

std::vector<double> log_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 60; ++i) g.push_back(std::pow(10.0, -3.0 + 6.0 * i / 60.0));
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Models, AfzAtUnitSigma2) {
  const auto ev = eval_model(PowerLagrangian::afz(), 1.0);
  EXPECT_DOUBLE_EQ(ev.L, -0.5);
  EXPECT_DOUBLE_EQ(ev.L2, -3.0 / 8.0);
  EXPECT_DOUBLE_EQ(ev.L22, 3.0 / 32.0);
  EXPECT_DOUBLE_EQ(ev.xi, -0.5);
  EXPECT_DOUBLE_EQ(1.0 + ev.xi * 1.0, 0.5);
}

TEST(Models, StronglyCoupledHasZeroXi) {
  for (double s : {1e-3, 0.5, 1.0, 7.0, -2.0}) {
    const auto ev = eval_model(PowerLagrangian::strongly_coupled(), s);
    EXPECT_EQ(ev.L22, 0.0);
    EXPECT_EQ(ev.xi, 0.0);
    EXPECT_FALSE(std::signbit(ev.xi));
  }
}

TEST(Models, DerivativesMatchCentralDifferences) {
  const std::vector<PowerLagrangian> models{PowerLagrangian::afz(), {-0.5, 1.0}, {2.0, 2.0}, {0.3, 2.5}, {-1.0, 0.4}};
  for (const auto& m : models)
    for (double s : log_grid()) {
      const double d = 1e-5 * s;
      const auto ev = eval_model(m, s);
      const double L2_fd = (L_of(m, s + d) - L_of(m, s - d)) / (2 * d);
      const double L22_fd = (L_of(m, s + d) - 2 * L_of(m, s) + L_of(m, s - d)) / (d * d);
      EXPECT_LE(std::abs(ev.L2 - L2_fd), 1e-6 * std::abs(ev.L2)) << m.exponent << " " << s;
      if (m.exponent != 1.0) EXPECT_LE(rel(ev.L22, L22_fd), 1e-4) << m.exponent << " " << s;

      // xi sigma2 from difference quotients alone: 2 L22 / L2 * sigma2 = 2 (q - 1).
      const double dl = 1e-3 * s;
      const double a = (L_of(m, s + dl) - L_of(m, s - dl)) / (2 * dl);
      const double b = (L_of(m, s + dl) - 2 * L_of(m, s) + L_of(m, s - dl)) / (dl * dl);
      const double xi_fd = 2.0 * b / a;
      EXPECT_NEAR(xi_fd * s, 2.0 * (m.exponent - 1.0), 1e-6 * (1.0 + std::abs(m.exponent - 1.0)));
      EXPECT_NEAR(ev.xi * s, 2.0 * (m.exponent - 1.0), 1e-12);

      const auto up = eval_model(m, s + d), dn = eval_model(m, s - d);
      EXPECT_LE(std::abs(ev.dxi - (up.xi - dn.xi) / (2 * d)), 1e-6 * (1.0 + std::abs(ev.dxi)));
    }
}

TEST(Models, IntegerPowerAcceptsNonPositiveSigma2) {
  const auto ev = eval_model({1.0, 2.0}, -1.5);
  EXPECT_DOUBLE_EQ(ev.L2, -3.0);
  EXPECT_DOUBLE_EQ(ev.L22, 2.0);
}

TEST(Models, DomainErrors) {
  EXPECT_THROW(eval_model(PowerLagrangian::afz(), 0.0), DomainError);
  EXPECT_THROW(eval_model(PowerLagrangian::afz(), -1.0), DomainError);
  EXPECT_THROW(eval_model({1.0, 0.0}, 1.0), DomainError);
  EXPECT_THROW(eval_model({1.0, -1.0}, 1.0), DomainError);
  EXPECT_THROW(eval_model({0.0, 2.0}, 1.0), DegenerateModel);
  EXPECT_THROW(eval_model({1.0, 2.0}, 0.0), DegenerateModel);
}
