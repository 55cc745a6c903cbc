#include <gtest/gtest.h>

#include <vector>

#include "charsym/backgrounds.hpp"
#include "charsym/geometry.hpp"
#include "charsym/sampling.hpp"

using namespace charsym;

namespace {

QuadraticMap sample_quadratic() {
  QuadraticMap q;
  q.C << 0, 1, 0, 0, 0, 0, 1, 0;
  q.Q[0](1, 3) = q.Q[0](3, 1) = 0.5;
  q.Q[0](0, 2) = q.Q[0](2, 0) = 0.3;
  q.Q[1](1, 1) = 0.4;
  q.Q[1](3, 3) = -0.3;
  q.Q[1](0, 1) = q.Q[1](1, 0) = 0.2;
  return q;
}

std::vector<Background> catalog() {
  LinearMap lin;
  lin.C << 0.3, 1.0, -0.2, 0.0, 0.1, 0.0, 0.9, 0.4;
  lin.y0 << 0.1, -0.2;
  return {ConstantMap{Vec2(0.2, -0.1)}, lin, PlaneWave{0.5, 0.4, Vec4(0.2, 1.0, -0.4, 0.3)},
          ProductWave{0.5, 0.4, Vec4(0.3, 1.0, 0.2, 0.0), Vec4(0.1, 0.0, 1.0, 0.5)}, sample_quadratic()};
}

}  // namespace

TEST(Backgrounds, ConstantAndLinearJets) {
  const Vec4 x(0.3, -1.0, 2.0, 0.5);
  const auto c = jet_eval(ConstantMap{Vec2(1.0, 2.0)}, TargetGeometry::flat(), x);
  EXPECT_EQ(c.jac, Jacobian::Zero());
  EXPECT_EQ((*c.hess)[0], Mat4::Zero());
  EXPECT_EQ((*c.hess)[1], Mat4::Zero());

  LinearMap lin;
  lin.C << 1, 2, 3, 4, 5, 6, 7, 8;
  const auto l = jet_eval(lin, TargetGeometry::flat(), x);
  EXPECT_EQ(l.jac, lin.C);
  EXPECT_EQ((*l.hess)[0], Mat4::Zero());
  EXPECT_EQ(l.phi, Vec2(lin.C * x));
}

TEST(Backgrounds, PlaneWaveHasRankOneDifferential) {
  const PlaneWave pw{0.7, 1.3, Vec4(0.2, 1.0, -0.4, 0.3)};
  auto rng = sample_rng(40, 0);
  for (int i = 0; i < 100; ++i) {
    const auto j = jet_eval(pw, TargetGeometry::flat(), uniform_matrix<4, 1>(rng, -4.0, 4.0));
    EXPECT_LE(Eigen::JacobiSVD<Jacobian>(j.jac).singularValues()[1], 1e-15);
    for (int A = 0; A < 2; ++A) {
      const Vec4 r = j.jac.row(A).transpose();
      EXPECT_LE((r - r.dot(pw.kappa) / pw.kappa.squaredNorm() * pw.kappa).norm(), 1e-15);
    }
  }
}

TEST(Backgrounds, ProductWaveIsGenericallyNondegenerate) {
  const ProductWave pw{0.8, 0.6, Vec4(0.0, 1.0, 0.0, 0.0), Vec4(0.0, 0.0, 1.0, 0.5)};
  auto rng = sample_rng(41, 0);
  int nonzero = 0;
  for (int i = 0; i < 200; ++i) {
    const auto j = jet_eval(pw, TargetGeometry::flat(), uniform_matrix<4, 1>(rng, -3.0, 3.0));
    if (std::abs(strain_and_invariants(j, TargetMetricSample::flat(), MetricSample::minkowski()).sigma2()) > 1e-8)
      ++nonzero;
  }
  EXPECT_EQ(nonzero, 200);
  EXPECT_THROW(jet_eval(ProductWave{1, 1, Vec4(1, 0, 0, 0), Vec4(1, 0, 0, 0)}, TargetGeometry::flat(), Vec4::Zero()),
               DomainError);
}

TEST(Backgrounds, HessiansAreSymmetric) {
  auto rng = sample_rng(42, 0);
  for (const auto& bg : catalog())
    for (int i = 0; i < 20; ++i) {
      const auto j = jet_eval(bg, TargetGeometry::flat(), uniform_matrix<4, 1>(rng, -1.0, 1.0));
      ASSERT_TRUE(j.hess.has_value());
      for (const auto& m : *j.hess) EXPECT_EQ(m, Mat4(m.transpose()));
    }
}

TEST(Backgrounds, FiniteDifferenceSelfCheck) {
  const std::vector<TargetGeometry> geoms{TargetGeometry::flat(), TargetGeometry::sphere_stereographic(),
                                          TargetGeometry::poincare_disk(), TargetGeometry::custom_diagonal(2.5)};
  for (const auto& geom : geoms)
    for (const auto& bg : catalog())
      for (std::uint64_t i = 0; i < 100; ++i) {
        auto rng = sample_rng(43, i);
        const Vec4 x = uniform_matrix<4, 1>(rng, -1.0, 1.0);
        if (!geom.in_domain(map_value(bg, x))) continue;
        const auto r = fd_check(bg, geom, x);
        EXPECT_LE(r.jacobian, 1e-7) << background_name(bg) << " " << geom.name();
        EXPECT_LE(r.hessian, 1e-5) << background_name(bg) << " " << geom.name();
        EXPECT_LE(r.metric, 1e-7) << background_name(bg) << " " << geom.name();
      }
}

TEST(Backgrounds, LinearFdIsExactAndProductWaveAtOrigin) {
  LinearMap lin;
  lin.C << 0.3, 1.0, -0.2, 0.0, 0.1, 0.0, 0.9, 0.4;
  // No truncation error; only the eps/step rounding of the difference quotient.
  const double rounding = 8.0 * std::numeric_limits<double>::epsilon() / std::cbrt(std::numeric_limits<double>::epsilon());
  EXPECT_LE(fd_check(lin, TargetGeometry::flat(), Vec4(0.2, 0.1, -0.3, 0.4)).worst(), rounding);
  const ProductWave pw{0.5, 0.4, Vec4(0.3, 1.0, 0.2, 0.0), Vec4(0.1, 0.0, 1.0, 0.5)};
  EXPECT_LE(fd_check(pw, TargetGeometry::flat(), Vec4::Zero()).jacobian, 1e-7);
}

TEST(Backgrounds, SphereMetricDerivativeAlongPath) {
  const auto geom = TargetGeometry::sphere_stereographic();
  for (double t = -1.0; t <= 1.0; t += 0.1) {
    const Vec2 y(0.7 * t, 0.3 - 0.5 * t);
    const auto dh = geom.metric_gradient(y);
    for (int C = 0; C < 2; ++C) {
      const double e = std::cbrt(std::numeric_limits<double>::epsilon());
      Vec2 yp = y, ym = y;
      yp[C] += e;
      ym[C] -= e;
      const Mat2 fd = (geom.metric(yp) - geom.metric(ym)) / (yp[C] - ym[C]);
      EXPECT_LE(max_abs(Mat2(fd - dh[C])), 1e-7 * (1.0 + max_abs(dh[C])));
    }
    // sqrt(det h) is the conformal factor, so its gradient is dh_00.
    EXPECT_NEAR(geom.sample(y).grad_sqrt_det[0], dh[0](0, 0), 1e-14);
  }
}

TEST(Backgrounds, ChartDomains) {
  const auto disk = TargetGeometry::poincare_disk();
  EXPECT_THROW(disk.metric(Vec2(0.8, 0.7)), ChartDomainError);
  EXPECT_THROW(jet_eval(ConstantMap{Vec2(1.0, 0.0)}, disk, Vec4::Zero()), ChartDomainError);
  EXPECT_NO_THROW(jet_eval(ConstantMap{Vec2(0.5, 0.0)}, disk, Vec4::Zero()));
  EXPECT_THROW(TargetGeometry::custom_diagonal(0.0), DomainError);
  const auto cd = TargetGeometry::custom_diagonal(3.0);
  EXPECT_DOUBLE_EQ(cd.sample(Vec2::Zero()).det, 1.0);
  for (const auto& g : {TargetGeometry::sphere_stereographic(), TargetGeometry::poincare_disk()}) {
    const auto s = g.sample(Vec2(0.3, -0.2));
    EXPECT_GT(s.det, 0.0);
    EXPECT_GT(s.lower(0, 0), 0.0);
  }
}

TEST(Backgrounds, QuadraticMapRejectsAsymmetricCoefficients) {
  QuadraticMap q = sample_quadratic();
  q.Q[1](0, 3) = 1.0;
  EXPECT_THROW(jet_eval(q, TargetGeometry::flat(), Vec4::Zero()), DomainError);
}

TEST(Backgrounds, ConstantJetClassification) {
  EXPECT_TRUE(is_constant_jet(ConstantMap{}, TargetGeometry::flat()));
  EXPECT_TRUE(is_constant_jet(LinearMap{}, TargetGeometry::custom_diagonal(2.0)));
  EXPECT_FALSE(is_constant_jet(LinearMap{}, TargetGeometry::sphere_stereographic()));
  EXPECT_FALSE(is_constant_jet(ProductWave{}, TargetGeometry::flat()));
  EXPECT_FALSE(is_constant_jet(sample_quadratic(), TargetGeometry::flat()));
}
