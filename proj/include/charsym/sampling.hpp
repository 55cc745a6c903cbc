#pragma once

// Reproducible random inputs. Every sample owns its own generator derived from
// (seed, index), so results do not depend on how samples are split across
// workers.

#include <cstdint>
#include <random>

#include "charsym/conventions.hpp"

namespace charsym {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Generator for sample `index` of a run seeded with `seed`.
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

/// Uniform in [lo, hi), built from raw bits so it is identical on every
/// standard library.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

template <int R, int C>
Eigen::Matrix<double, R, C> uniform_matrix(std::mt19937_64& rng, double lo, double hi) {
  Eigen::Matrix<double, R, C> m;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) m(i, j) = uniform(rng, lo, hi);
  return m;
}

inline Jacobian random_jacobian(std::mt19937_64& rng) { return uniform_matrix<2, 4>(rng, -1.0, 1.0); }

inline JetSample random_jet(std::mt19937_64& rng, bool with_hessian = false) {
  JetSample j;
  j.x = uniform_matrix<4, 1>(rng, -1.0, 1.0);
  j.phi = uniform_matrix<2, 1>(rng, -1.0, 1.0);
  j.jac = random_jacobian(rng);
  if (with_hessian) {
    std::array<Mat4, 2> hess;
    for (auto& m : hess) {
      const Mat4 r = uniform_matrix<4, 4>(rng, -1.0, 1.0);
      m = 0.5 * (r + r.transpose());
    }
    j.hess = hess;
  }
  return j;
}

/// Symmetric positive definite h with eigenvalues in [0.2, 5] and a random
/// principal frame.
inline TargetMetricSample random_target_metric(std::mt19937_64& rng) {
  const double angle = uniform(rng, 0.0, 3.141592653589793);
  Mat2 R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Vec2 ev(uniform(rng, 0.2, 5.0), uniform(rng, 0.2, 5.0));
  Mat2 h = R * ev.asDiagonal() * R.transpose();
  h = 0.5 * (h + h.transpose()).eval();
  return TargetMetricSample::from_lower(h);
}

/// g = T^t diag(1,-1,-1,-1) T with T a random perturbation of the identity;
/// Sylvester's law keeps the signature Lorentzian.
inline MetricSample random_base_metric(std::mt19937_64& rng, double spread = 0.3) {
  const Mat4 T = Mat4::Identity() + uniform_matrix<4, 4>(rng, -spread, spread);
  Mat4 g = T.transpose() * MetricSample::minkowski().lower * T;
  g = 0.5 * (g + g.transpose()).eval();
  return MetricSample::from_lower(g);
}

inline Mat4 random_antisymmetric(std::mt19937_64& rng) {
  const Mat4 r = uniform_matrix<4, 4>(rng, -1.0, 1.0);
  return r - r.transpose();
}

}  // namespace charsym
