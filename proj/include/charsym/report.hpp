#pragma once

// Scenario execution and deterministic report serialization.
//
// Files: report.json always (unless format: csv), points.csv for
// point/grid/random modes, ray.csv for ray mode. Floats are written with 17
// significant digits; non-finite JSON values become null.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "charsym/backgrounds.hpp"
#include "charsym/geometry.hpp"
#include "charsym/rays.hpp"
#include "charsym/sampling.hpp"
#include "charsym/scenario.hpp"
#include "charsym/symbol.hpp"

#ifndef CHARSYM_VERSION
#define CHARSYM_VERSION "1.0.0"
#endif

namespace charsym {

inline std::string version_string() { return std::string("charsym ") + CHARSYM_VERSION; }

using Json = nlohmann::ordered_json;

/// printf("%.17g"); "nan"/"inf"/"-inf" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write_json(std::ostringstream& out, const Json& j, int indent) {
  const std::string pad(indent * 2, ' ');
  const std::string inner((indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << inner << Json(it.key()).dump() << ": ";
        write_json(out, it.value(), indent + 1);
      }
      out << "\n" << pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      if (flat) {
        out << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out << ", ";
          write_json(out, j[i], indent + 1);
        }
        out << "]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ",\n";
        out << inner;
        write_json(out, j[i], indent + 1);
      }
      out << "\n" << pad << "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out << (std::isfinite(v) ? format_double(v) : "null");
      return;
    }
    default:
      out << j.dump();
  }
}

template <typename Derived>
Json json_vec(const Eigen::MatrixBase<Derived>& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline Json json_inertia(const Inertia& in) { return Json::array({in.positive, in.zero, in.negative}); }

}  // namespace detail

/// JSON text with 2-space indentation and 17-digit floats.
inline std::string dump_json(const Json& j) {
  std::ostringstream out;
  detail::write_json(out, j, 0);
  out << "\n";
  return out.str();
}

/// Runs fn(i) for i in [0, n) on `threads` workers. Each index is handled by
/// exactly one worker; callers store results by index.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline Json scenario_to_json(const Scenario& s) {
  using detail::json_vec;
  Json j;
  j["base_metric"] = s.base_metric;
  Json target;
  target["geometry"] = s.target.name();
  if (s.target.kind == TargetGeometry::Kind::custom_diagonal) target["c"] = s.target.c;
  j["target"] = target;
  j["model"] = {{"c", s.model.coefficient}, {"q", s.model.exponent}};

  Json bg;
  bg["family"] = background_name(s.background);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantMap>) {
          bg["y0"] = json_vec(m.y0);
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          bg["C"] = Json::array({json_vec(m.C.row(0)), json_vec(m.C.row(1))});
          bg["y0"] = json_vec(m.y0);
        } else if constexpr (std::is_same_v<T, QuadraticMap>) {
          bg["C"] = Json::array({json_vec(m.C.row(0)), json_vec(m.C.row(1))});
          Json q = Json::array();
          for (const Mat4& qa : m.Q) {
            Json rows = Json::array();
            for (int a = 0; a < 4; ++a) rows.push_back(json_vec(qa.row(a)));
            q.push_back(rows);
          }
          bg["Q"] = q;
          bg["y0"] = json_vec(m.y0);
        } else if constexpr (std::is_same_v<T, PlaneWave>) {
          bg["A"] = m.A;
          bg["B"] = m.B;
          bg["kappa"] = json_vec(m.kappa);
        } else {
          bg["A"] = m.A;
          bg["B"] = m.B;
          bg["kappa"] = json_vec(m.kappa);
          bg["mu"] = json_vec(m.mu);
        }
      },
      s.background);
  j["background"] = bg;

  Json an;
  an["mode"] = to_string(s.mode);
  an["seed"] = s.seed;
  switch (s.mode) {
    case Mode::point: an["point"] = json_vec(s.point); break;
    case Mode::grid:
      an["grid"] = {{"min", json_vec(s.grid.min)},
                    {"max", json_vec(s.grid.max)},
                    {"count", Json::array({s.grid.count[0], s.grid.count[1], s.grid.count[2], s.grid.count[3]})}};
      break;
    case Mode::random:
      an["random"] = {{"samples", s.random.samples}, {"min", json_vec(s.random.min)}, {"max", json_vec(s.random.max)}};
      break;
    case Mode::verify: an["verify"] = {{"samples", s.verify_samples}}; break;
    case Mode::ray: {
      const RaySpec& r = s.ray;
      Json ray;
      ray["x"] = json_vec(r.x);
      ray["k_spatial"] = json_vec(r.k_spatial);
      if (r.k) ray["k"] = json_vec(*r.k);
      ray["branch"] = static_cast<int>(r.branch);
      ray["root"] = r.root == RootChoice::future ? "future" : "past";
      ray["span"] = r.options.span;
      ray["step"] = r.options.step;
      ray["adaptive"] = r.options.adaptive;
      ray["drift_tol"] = r.options.drift_tol;
      ray["min_step"] = r.options.min_step;
      ray["gradient"] = r.options.gradient == GradientMode::analytic ? "analytic" : "finite_difference";
      an["ray"] = ray;
      break;
    }
  }
  j["analysis"] = an;
  j["tolerances"] = {{"rank", s.tol.rank},
                     {"factorization", s.tol.factorization},
                     {"identity", s.tol.identity},
                     {"determinant", s.tol.determinant}};
  j["output"] = {{"format", s.output.json && s.output.csv ? "both" : (s.output.json ? "json" : "csv")}};
  return j;
}

/// One analysed base point; `error` is set when the analysis was not possible.
struct PointRecord {
  std::size_t index = 0;
  Vec4 x = Vec4::Zero();
  std::optional<PointVerdict> verdict;
  std::string error;
};

inline PointRecord analyse_point(const Scenario& s, std::size_t index, const Vec4& x) {
  PointRecord rec;
  rec.index = index;
  rec.x = x;
  try {
    const JetSample jet = jet_eval(s.background, s.target, x);
    const TargetMetricSample h = s.target.sample(jet.phi);
    rec.verdict = degeneracy_report(jet, s.base(), h, s.model, s.tol.rank);
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

/// Generated report files (name -> contents) and the process exit code.
struct ReportFiles {
  std::map<std::string, std::string> files;
  int exit_code = 0;
  Json report;
};

struct RunOptions {
  unsigned threads = 1;
};

namespace detail {

inline std::vector<Vec4> sweep_points(const Scenario& s) {
  std::vector<Vec4> pts;
  switch (s.mode) {
    case Mode::point: pts.push_back(s.point); break;
    case Mode::grid:
      pts.reserve(s.grid.size());
      for (std::size_t i = 0; i < s.grid.size(); ++i) pts.push_back(s.grid.point(i));
      break;
    case Mode::random:
      pts.reserve(s.random.samples);
      for (std::uint64_t i = 0; i < s.random.samples; ++i) {
        auto rng = sample_rng(s.seed, i);
        Vec4 x;
        for (int a = 0; a < 4; ++a) x[a] = uniform(rng, s.random.min[a], s.random.max[a]);
        pts.push_back(x);
      }
      break;
    default: break;
  }
  return pts;
}

inline std::string points_csv(const std::vector<PointRecord>& recs) {
  std::ostringstream out;
  out << "index,x0,x1,x2,x3,sigma2,xi,detG1,detG2,n+G1,n0G1,n-G1,n+G2,n0G2,n-G2,hyperbolic\n";
  for (const auto& r : recs) {
    out << r.index;
    for (int a = 0; a < 4; ++a) out << "," << format_double(r.x[a]);
    if (r.verdict) {
      const auto& v = *r.verdict;
      out << "," << format_double(v.sigma2) << "," << format_double(v.xi) << "," << format_double(v.det_G1)
          << "," << format_double(v.det_G2) << "," << v.inertia_G1.positive << "," << v.inertia_G1.zero << ","
          << v.inertia_G1.negative << "," << v.inertia_G2.positive << "," << v.inertia_G2.zero << ","
          << v.inertia_G2.negative << "," << (v.hyperbolic ? "true" : "false") << "\n";
    } else {
      out << ",nan,nan,nan,nan,,,,,,,false\n";
    }
  }
  return out.str();
}

inline Json point_json(const PointRecord& r) {
  Json j;
  j["index"] = r.index;
  j["x"] = json_vec(r.x);
  if (!r.verdict) {
    j["status"] = "error";
    j["error"] = r.error;
    return j;
  }
  const auto& v = *r.verdict;
  j["status"] = "ok";
  j["sigma2"] = v.sigma2;
  j["xi"] = v.xi;
  j["detG1"] = v.det_G1;
  j["detG2"] = v.det_G2;
  j["detG2_closed_form"] = v.det_G2_expected;
  j["inertia_G1"] = json_inertia(v.inertia_G1);
  j["inertia_G2"] = json_inertia(v.inertia_G2);
  Json kernel = Json::array();
  for (const Vec4& k : v.kernel_G1) kernel.push_back(json_vec(k));
  j["kernel_G1"] = kernel;
  j["hyperbolic"] = v.hyperbolic;
  j["notes"] = v.notes;
  return j;
}

inline void run_sweep(const Scenario& s, const RunOptions& opt, ReportFiles& out) {
  const auto pts = sweep_points(s);
  std::vector<PointRecord> recs(pts.size());
  parallel_for(pts.size(), opt.threads, [&](std::size_t i) { recs[i] = analyse_point(s, i, pts[i]); });

  std::size_t ok = 0, singular = 0, all_hyperbolic = 0;
  double det2_min = std::numeric_limits<double>::infinity();
  double det2_max = -std::numeric_limits<double>::infinity();
  double sq_res = 0.0, unsq_res = 0.0;
  const double det_g = s.base().det();
  Json points = Json::array();
  for (const auto& r : recs) {
    points.push_back(point_json(r));
    if (!r.verdict) continue;
    const auto& v = *r.verdict;
    ++ok;
    if (v.inertia_G1.zero > 0) ++singular;
    if (v.hyperbolic) ++all_hyperbolic;
    det2_min = std::min(det2_min, v.det_G2);
    det2_max = std::max(det2_max, v.det_G2);
    const double unsquared = (1.0 + v.xi * v.sigma2) / det_g;
    sq_res = std::max(sq_res, std::abs(v.det_G2 - v.det_G2_expected) / (1.0 + std::abs(v.det_G2_expected)));
    unsq_res = std::max(unsq_res, std::abs(v.det_G2 - unsquared) / (1.0 + std::abs(unsquared)));
  }

  std::string verdict = "UNDETERMINED";
  if (ok > 0) verdict = (singular == 0 && all_hyperbolic == ok) ? "HYPERBOLIC" : "NOT_HYPERBOLIC";

  Json agg;
  agg["points"] = recs.size();
  agg["evaluated"] = ok;
  agg["errors"] = recs.size() - ok;
  agg["singular_G1_fraction"] = ok ? static_cast<double>(singular) / static_cast<double>(ok) : 0.0;
  agg["detG2_min"] = ok ? det2_min : std::numeric_limits<double>::quiet_NaN();
  agg["detG2_max"] = ok ? det2_max : std::numeric_limits<double>::quiet_NaN();
  agg["verdict"] = verdict;
  out.report["aggregate"] = agg;
  out.report["detG2_closed_form"] = {
      {"formula", "det G2 = (1 + xi sigma2)^2 / det g"},
      {"max_residual_squared_factor", sq_res},
      {"max_residual_unsquared_factor", unsq_res},
      {"note", "the unsquared factor (1 + xi sigma2) / det g does not match the determinant"}};
  out.report["points"] = points;
  if (s.output.csv) out.files["points.csv"] = points_csv(recs);
}

/// Per-sample residuals of every identity checked in verify mode.
struct VerifySample {
  double factorization = 0, dual_path = 0, quartic = 0, hh = 0, hdh = 0, cayley_hamilton = 0, rank = 0,
         u2_generic = 0, u2_pullback = 0, detG1 = 0, detG2_squared = 0, detG2_unsquared = 0;
  bool control_nonsingular = false;
};

inline VerifySample verify_sample(const Scenario& s, std::uint64_t index) {
  auto rng = sample_rng(s.seed, index);
  const MetricSample g = s.base();
  const TargetMetricSample h = random_target_metric(rng);
  const JetSample jet = random_jet(rng);
  const Vec4 k = uniform_matrix<4, 1>(rng, -1.0, 1.0);

  const StrainData strain = strain_and_invariants(jet, h, g);
  const double sigma2 = strain.sigma2();
  // xi in [-2, 2] away from the zero of 1 + xi sigma2.
  double xi = uniform(rng, -2.0, 2.0);
  for (int tries = 0; std::abs(1.0 + xi * sigma2) < 1e-3 && tries < 64; ++tries) xi = uniform(rng, -2.0, 2.0);

  VerifySample r;
  r.factorization = factorization_residual(jet, g, h, xi, k);

  const Mat2 closed = symbol(jet, g, h, xi, k);
  const PrincipalPart pp = principal_part(jet, g, h, xi);
  const Mat2 contracted = pp.contract(k);
  r.dual_path = max_abs(Mat2(closed - contracted)) / (1.0 + pp.contraction_scale(k));

  const double P = closed.determinant();
  r.quartic = std::abs(quartic_form(jet, g, h, xi)(k) - P) / (1.0 + std::abs(P));

  const PullbackForm H = pullback_two_form(jet, h, g);
  const double contraction_scale = H.H_lower.cwiseAbs().cwiseProduct(H.H_upper.cwiseAbs()).sum();
  r.hh = std::abs(H.HH - 2.0 * sigma2) / (1.0 + contraction_scale);
  r.hdh = std::abs(H.HdH) / (1.0 + contraction_scale);
  r.cayley_hamilton = cayley_hamilton_residual(strain);
  const double lnorm = 1.0 + max_abs(strain.L_mixed);
  r.rank = std::max(std::abs(strain.sigma3()) / std::pow(lnorm, 3), std::abs(strain.sigma4()) / std::pow(lnorm, 4));

  const PullbackForm generic = make_two_form(random_antisymmetric(rng), g);
  const double f = uniform(rng, -2.0, 2.0);
  const auto id = determinant_identity(generic, f);
  r.u2_generic = id.residual / (1.0 + id.scale);

  const auto idp = determinant_identity(H, -xi);
  const double expected = (1.0 + xi * sigma2) * (1.0 + xi * sigma2);
  r.u2_pullback = std::abs(idp.lhs - expected) / (1.0 + idp.scale);

  const QuadraticForms forms = quadratic_forms(H, sigma2, g, xi);
  r.detG1 = normalized_determinant(forms.first);
  const double d2 = forms.second.determinant();
  const double d2_scale = 1.0 + determinant_scale(forms.second);
  const double sq = expected / g.det();
  const double unsq = (1.0 + xi * sigma2) / g.det();
  r.detG2_squared = std::abs(d2 - sq) / d2_scale;
  r.detG2_unsquared = std::abs(d2 - unsq) / d2_scale;

  // Negative control: a generic two-form in place of the pullback.
  const double fake_sigma2 = 0.5 * generic.HH;
  const Mat4 G1_fake = quadratic_forms(generic, fake_sigma2, g, xi).first;
  r.control_nonsingular = normalized_determinant(G1_fake) > s.tol.determinant;
  return r;
}

inline void run_verify(const Scenario& s, const RunOptions& opt, ReportFiles& out) {
  const std::size_t n = s.verify_samples;
  std::vector<VerifySample> samples(n);
  parallel_for(n, opt.threads, [&](std::size_t i) { samples[i] = verify_sample(s, i); });

  struct Check {
    const char* name;
    double VerifySample::*field;
    double tolerance;
  };
  const Check checks[] = {
      {"factorization", &VerifySample::factorization, s.tol.factorization},
      {"symbol_dual_path", &VerifySample::dual_path, s.tol.identity},
      {"quartic_form", &VerifySample::quartic, s.tol.factorization},
      {"HH_equals_2sigma2", &VerifySample::hh, s.tol.identity},
      {"HdH_zero", &VerifySample::hdh, s.tol.identity},
      {"cayley_hamilton", &VerifySample::cayley_hamilton, s.tol.identity},
      {"sigma3_sigma4_zero", &VerifySample::rank, s.tol.identity},
      {"U2_generic", &VerifySample::u2_generic, s.tol.determinant},
      {"U2_pullback", &VerifySample::u2_pullback, s.tol.determinant},
      {"detG1_zero", &VerifySample::detG1, s.tol.determinant},
      {"detG2_squared_factor", &VerifySample::detG2_squared, s.tol.determinant},
  };

  bool all_pass = true;
  Json identities;
  for (const auto& c : checks) {
    double worst = 0.0;
    for (const auto& smp : samples) worst = std::max(worst, smp.*(c.field));
    const bool pass = worst <= c.tolerance;
    all_pass = all_pass && pass;
    identities[c.name] = {{"max_residual", worst}, {"tolerance", c.tolerance}, {"pass", pass}};
  }
  double unsq = 0.0;
  std::size_t control = 0;
  for (const auto& smp : samples) {
    unsq = std::max(unsq, smp.detG2_unsquared);
    if (smp.control_nonsingular) ++control;
  }
  out.report["samples"] = n;
  out.report["identities"] = identities;
  out.report["detG2_closed_form"] = {
      {"formula", "det G2 = (1 + xi sigma2)^2 / det g"},
      {"max_residual_squared_factor", identities["detG2_squared_factor"]["max_residual"]},
      {"max_residual_unsquared_factor", unsq},
      {"note", "the unsquared factor (1 + xi sigma2) / det g does not match the determinant"}};
  out.report["negative_control"] = {
      {"description", "generic antisymmetric H with sigma2 := H.H/2: fraction with nonsingular G1"},
      {"nonsingular_fraction", static_cast<double>(control) / static_cast<double>(n)}};
  out.report["pass"] = all_pass;
  out.exit_code = all_pass ? 0 : 1;
}

inline void run_ray(const Scenario& s, ReportFiles& out) {
  const Medium medium = s.medium();
  const RaySpec& r = s.ray;
  Json ray;
  Vec4 k0;
  if (r.k) {
    k0 = *r.k;
    ray["initial_covector"] = "given";
  } else {
    try {
      const NullProjection np = null_project(medium, r.x, r.k_spatial, r.branch, r.root);
      k0 = np.k;
      ray["initial_covector"] = "null_projection";
      if (!np.note.empty()) ray["projection_note"] = np.note;
    } catch (const Error& e) {
      ray["initial_covector"] = "null_projection";
      ray["error"] = e.what();
      out.report["ray"] = ray;
      return;
    }
  }
  const RayTrace trace = integrate_ray(medium, r.branch, RayState{0.0, r.x, k0, 0.0}, r.options);
  ray["branch"] = static_cast<int>(trace.branch);
  ray["x0"] = json_vec(r.x);
  ray["k0"] = json_vec(k0);
  ray["steps"] = trace.states.empty() ? 0 : trace.states.size() - 1;
  ray["P0"] = trace.states.empty() ? std::numeric_limits<double>::quiet_NaN() : trace.states.front().P;
  ray["max_drift"] = trace.max_drift;
  ray["termination"] = to_string(trace.termination);
  if (!trace.note.empty()) ray["note"] = trace.note;
  if (!trace.states.empty()) {
    const auto& last = trace.states.back();
    ray["final"] = {{"lambda", last.lambda}, {"x", json_vec(last.x)}, {"k", json_vec(last.k)}, {"P", last.P}};
  }
  out.report["ray"] = ray;

  if (s.output.csv) {
    std::ostringstream csv;
    csv << "lambda,x0,x1,x2,x3,k0,k1,k2,k3,P\n";
    for (const auto& st : trace.states) {
      csv << format_double(st.lambda);
      for (int a = 0; a < 4; ++a) csv << "," << format_double(st.x[a]);
      for (int a = 0; a < 4; ++a) csv << "," << format_double(st.k[a]);
      csv << "," << format_double(st.P) << "\n";
    }
    out.files["ray.csv"] = csv.str();
  }
}

}  // namespace detail

/// Runs the analysis; the result does not depend on opt.threads.
inline ReportFiles run_scenario(const Scenario& s, const RunOptions& opt = {}) {
  ReportFiles out;
  out.report["tool"] = "charsym";
  out.report["version"] = version_string();
  out.report["scenario"] = scenario_to_json(s);
  out.report["mode"] = to_string(s.mode);
  switch (s.mode) {
    case Mode::point:
    case Mode::grid:
    case Mode::random: detail::run_sweep(s, opt, out); break;
    case Mode::verify: detail::run_verify(s, opt, out); break;
    case Mode::ray: detail::run_ray(s, out); break;
  }
  if (s.output.json) out.files["report.json"] = dump_json(out.report);
  return out;
}

inline void write_report(const ReportFiles& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : rep.files) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / name).string());
    f << text;
  }
}

}  // namespace charsym
