#pragma once

// Bicharacteristic rays of one quadratic branch P_i(x, k) = G_i^ab(x) k_a k_b,
// integrated with classical RK4 on the canonical equations
//   dx^a/dlambda =  dP_i/dk_a = 2 G_i^ab k_b
//   dk_a/dlambda = -dP_i/dx^a
// The Hamiltonian is P_i itself, so the parameter is affine.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "charsym/backgrounds.hpp"
#include "charsym/geometry.hpp"
#include "charsym/models.hpp"
#include "charsym/symbol.hpp"

namespace charsym {

enum class Branch { first = 1, second = 2 };
enum class RootChoice { future, past };
enum class GradientMode { finite_difference, analytic };

/// Everything a ray needs to evaluate G_i along its path.
struct Medium {
  Background background = ConstantMap{};
  TargetGeometry geometry = TargetGeometry::flat();
  MetricSample g = MetricSample::minkowski();
  PowerLagrangian model = PowerLagrangian::strongly_coupled();
};

namespace detail {

struct FormPieces {
  JetSample jet;
  TargetMetricSample h;
  PullbackForm H;
  double sigma2 = 0.0;
  Mat4 HH = Mat4::Zero();  ///< H^a_c H^cb
};

inline FormPieces form_pieces(const Medium& m, const Vec4& x) {
  FormPieces p;
  p.jet = jet_eval(m.background, m.geometry, x);
  p.h = m.geometry.sample(p.jet.phi);
  p.H = pullback_two_form(p.jet, p.h, m.g);
  p.sigma2 = strain_and_invariants(p.jet, p.h, m.g).sigma2();
  p.HH = p.H.Hsq_mixed * m.g.upper;
  p.HH = 0.5 * (p.HH + p.HH.transpose()).eval();
  return p;
}

}  // namespace detail

/// G_i^ab at x. The first branch does not involve the model.
inline Mat4 branch_form(const Medium& m, Branch branch, const Vec4& x) {
  const auto p = detail::form_pieces(m, x);
  if (branch == Branch::first) return p.sigma2 * m.g.upper + p.HH;
  const double xi = eval_model(m.model, p.sigma2).xi;
  return m.g.upper - xi * p.HH;
}

/// dG[c] = d G_i^ab / dx^c
inline std::array<Mat4, 4> branch_form_gradient(const Medium& m, Branch branch, const Vec4& x,
                                                GradientMode mode) {
  std::array<Mat4, 4> dG{Mat4::Zero(), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
  if (is_constant_jet(m.background, m.geometry)) return dG;

  if (mode == GradientMode::finite_difference) {
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
    for (int c = 0; c < 4; ++c) {
      Vec4 xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      dG[c] = (branch_form(m, branch, xp) - branch_form(m, branch, xm)) / (xp[c] - xm[c]);
    }
    return dG;
  }

  const auto p = detail::form_pieces(m, x);
  const auto dH = two_form_gradient(p.jet, p.h);
  const Mat4& gi = m.g.upper;
  ModelEval ev;
  if (branch == Branch::second) ev = eval_model(m.model, p.sigma2);
  for (int c = 0; c < 4; ++c) {
    const double dsigma2 = p.H.H_upper.cwiseProduct(dH[c]).sum();
    const Mat4 dHH = gi * (dH[c] * gi * p.H.H_lower + p.H.H_lower * gi * dH[c]) * gi;
    if (branch == Branch::first)
      dG[c] = dsigma2 * gi + dHH;
    else
      dG[c] = -ev.dxi * dsigma2 * p.HH - ev.xi * dHH;
  }
  return dG;
}

struct NullProjection {
  Vec4 k = Vec4::Zero();
  bool double_root = false;
  /// G k = 0: the covector does not propagate.
  bool kernel = false;
  std::string note;
};

/// Solves G^ab k_a k_b = 0 for k_0 given the spatial components.
inline NullProjection null_project(const Mat4& G, const Vec3& spatial, RootChoice root,
                                   double tol = 1e-12) {
  const double gnorm = max_abs(G);
  const double snorm = spatial.cwiseAbs().maxCoeff();
  const double a = G(0, 0);
  const double b = 2.0 * G.block<1, 3>(0, 1).dot(spatial.transpose());
  const double c = spatial.dot(G.block<3, 3>(1, 1) * spatial);

  const bool a_zero = std::abs(a) <= tol * gnorm;
  const bool b_zero = std::abs(b) <= tol * gnorm * snorm;
  const bool c_zero = std::abs(c) <= tol * gnorm * snorm * snorm;
  if (gnorm == 0.0 || (a_zero && b_zero && c_zero))
    throw FullyDegenerate("every coefficient of the null condition vanishes");

  NullProjection out;
  double k0 = 0.0;
  if (a_zero) {
    if (b_zero) throw NoRealRoot("null condition reduces to a nonzero constant");
    k0 = -c / b;
    out.note = "linear null condition";
  } else {
    double disc = b * b - 4.0 * a * c;
    const double disc_tol = tol * (b * b + 4.0 * std::abs(a * c));
    if (disc < -disc_tol) throw NoRealRoot("direction is not characteristic (negative discriminant)");
    if (disc <= disc_tol) {
      disc = 0.0;
      out.double_root = true;
      out.note = "double root";
    }
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double r1 = q / a;
    double r2 = (q != 0.0) ? c / q : r1;
    if (r1 < r2) std::swap(r1, r2);
    k0 = (root == RootChoice::future) ? r1 : r2;
  }
  out.k << k0, spatial;
  if (max_abs(Vec4(G * out.k)) <= tol * gnorm * max_abs(out.k)) {
    out.kernel = true;
    out.note += out.note.empty() ? "covector in the kernel of G" : "; covector in the kernel of G";
  }
  return out;
}

inline NullProjection null_project(const Medium& m, const Vec4& x, const Vec3& spatial,
                                   Branch branch, RootChoice root, double tol = 1e-12) {
  return null_project(branch_form(m, branch, x), spatial, root, tol);
}

struct RayState {
  double lambda = 0.0;
  Vec4 x = Vec4::Zero();
  Vec4 k = Vec4::Zero();
  double P = 0.0;
};

enum class Termination { span_end, left_domain, degenerate_form, step_underflow };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::span_end: return "span_end";
    case Termination::left_domain: return "left_domain";
    case Termination::degenerate_form: return "degenerate_form";
    case Termination::step_underflow: return "step_underflow";
  }
  return "unknown";
}

struct RayOptions {
  double span = 10.0;
  double step = 1e-3;
  /// Halve the step whenever a single step changes P by more than
  /// drift_tol * (1 + |P(0)|).
  bool adaptive = false;
  double drift_tol = 1e-10;
  double min_step = 1e-12;
  /// |dx/dlambda| <= degeneracy_tol |G| |k| with k != 0 flags a degenerate form.
  double degeneracy_tol = 1e-12;
  GradientMode gradient = GradientMode::finite_difference;
};

struct RayTrace {
  Branch branch = Branch::first;
  std::vector<RayState> states;
  double max_drift = 0.0;
  Termination termination = Termination::span_end;
  std::string note;
};

namespace detail {

struct PhasePoint {
  Vec4 x;
  Vec4 k;
};

struct PhaseRate {
  Vec4 dx;
  Vec4 dk;
  double G_norm = 0.0;
  double P = 0.0;
};

inline PhaseRate canonical_rhs(const Medium& m, Branch branch, const PhasePoint& s,
                               GradientMode mode) {
  const Mat4 G = branch_form(m, branch, s.x);
  const auto dG = branch_form_gradient(m, branch, s.x, mode);
  PhaseRate r;
  r.dx = 2.0 * G * s.k;
  for (int c = 0; c < 4; ++c) r.dk[c] = -s.k.dot(dG[c] * s.k);
  r.G_norm = max_abs(G);
  r.P = s.k.dot(G * s.k);
  return r;
}

}  // namespace detail

inline RayTrace integrate_ray(const Medium& m, Branch branch, const RayState& initial,
                              const RayOptions& opt = {}) {
  using detail::PhasePoint;
  RayTrace trace;
  trace.branch = branch;

  PhasePoint cur{initial.x, initial.k};
  double lambda = initial.lambda;
  const double lambda_end = initial.lambda + opt.span;
  double step = opt.step;

  auto rhs = [&](const PhasePoint& s) { return detail::canonical_rhs(m, branch, s, opt.gradient); };

  detail::PhaseRate r0;
  try {
    r0 = rhs(cur);
  } catch (const ChartDomainError& e) {
    trace.termination = Termination::left_domain;
    trace.note = e.what();
    return trace;
  }
  const double P0 = r0.P;
  trace.states.push_back({lambda, cur.x, cur.k, P0});

  while (lambda < lambda_end) {
    if (cur.k.cwiseAbs().maxCoeff() > 0.0 &&
        r0.dx.cwiseAbs().maxCoeff() <= opt.degeneracy_tol * r0.G_norm * max_abs(cur.k)) {
      trace.termination = Termination::degenerate_form;
      trace.note = "transport velocity vanishes: covector lies in the kernel of the branch form";
      break;
    }

    // A remainder within round-off of a full step is merged into it.
    const double remaining = lambda_end - lambda;
    const double h = (remaining - step <= 1e-9 * step) ? remaining : step;
    PhasePoint next;
    detail::PhaseRate r_next;
    try {
      const auto k1 = r0;
      const auto k2 = rhs({cur.x + 0.5 * h * k1.dx, cur.k + 0.5 * h * k1.dk});
      const auto k3 = rhs({cur.x + 0.5 * h * k2.dx, cur.k + 0.5 * h * k2.dk});
      const auto k4 = rhs({cur.x + h * k3.dx, cur.k + h * k3.dk});
      next.x = cur.x + (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
      next.k = cur.k + (h / 6.0) * (k1.dk + 2.0 * k2.dk + 2.0 * k3.dk + k4.dk);
      r_next = rhs(next);
    } catch (const ChartDomainError& e) {
      trace.termination = Termination::left_domain;
      trace.note = e.what();
      break;
    } catch (const DomainError& e) {
      trace.termination = Termination::left_domain;
      trace.note = e.what();
      break;
    } catch (const DegenerateModel& e) {
      trace.termination = Termination::left_domain;
      trace.note = e.what();
      break;
    }

    if (opt.adaptive && std::abs(r_next.P - r0.P) > opt.drift_tol * (1.0 + std::abs(P0))) {
      step *= 0.5;
      if (step < opt.min_step) {
        trace.termination = Termination::step_underflow;
        trace.note = "step fell below " + std::to_string(opt.min_step);
        break;
      }
      continue;
    }

    lambda = (h == lambda_end - lambda) ? lambda_end : lambda + h;
    cur = next;
    r0 = r_next;
    trace.states.push_back({lambda, cur.x, cur.k, r0.P});
    trace.max_drift = std::max(trace.max_drift, std::abs(r0.P - P0));
  }
  return trace;
}

inline RayTrace integrate_ray(const Medium& m, Branch branch, const Vec4& x0, const Vec4& k0,
                              const RayOptions& opt = {}) {
  return integrate_ray(m, branch, RayState{0.0, x0, k0, 0.0}, opt);
}

}  // namespace charsym
