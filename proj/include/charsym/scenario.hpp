#pragma once

// Scenario files: YAML with fixed top-level sections. Only `background` is
// required; analysis defaults to point mode at the origin. Grammar (every key
// not listed is rejected with its dotted path and line number):
//
//   base_metric: minkowski
//   target:
//     geometry: flat | sphere_stereographic | poincare_disk | custom_diagonal
//     c: <real > 0>                      # custom_diagonal only
//   model:
//     preset: afz | strongly_coupled     # optional, sets c and q
//     c: <real != 0>
//     q: <real > 0>
//   background:
//     family: constant_map | linear_map | plane_wave | product_wave | quadratic_map
//     y0: [u, v]                         # constant_map, linear_map, quadratic_map
//     C: [[4 reals], [4 reals]]          # linear_map, quadratic_map
//     Q: [<4x4 symmetric>, <4x4 symmetric>]   # quadratic_map, rows as lists
//     A: <real>  B: <real>               # plane_wave, product_wave
//     kappa: [4 reals]                   # plane_wave, product_wave
//     mu: [4 reals]                      # product_wave
//   analysis:
//     mode: point | grid | random | ray | verify   # default point
//     seed: <uint64>
//     point: [4 reals]                   # default origin
//     grid: {min: [4], max: [4], count: [4 ints >= 1]}
//     random: {samples: <int >= 1>, min: [4], max: [4]}
//     verify: {samples: <int >= 1>}
//     ray: {x: [4], k_spatial: [3], k: [4], branch: 1|2, root: future|past,
//           span: <real>, step: <real>, adaptive: <bool>, drift_tol: <real>,
//           min_step: <real>, gradient: finite_difference|analytic}
//   tolerances: {rank, factorization, identity, determinant}   # all > 0
//   output: {dir: <path>, format: json | csv | both}

#include <yaml-cpp/yaml.h>

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "charsym/backgrounds.hpp"
#include "charsym/models.hpp"
#include "charsym/rays.hpp"

namespace charsym {

enum class Mode { point, grid, random, ray, verify };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::point: return "point";
    case Mode::grid: return "grid";
    case Mode::random: return "random";
    case Mode::ray: return "ray";
    case Mode::verify: return "verify";
  }
  return "unknown";
}

struct GridSpec {
  Vec4 min = Vec4::Zero();
  Vec4 max = Vec4::Zero();
  std::array<int, 4> count{1, 1, 1, 1};

  std::size_t size() const {
    std::size_t n = 1;
    for (int c : count) n *= static_cast<std::size_t>(c);
    return n;
  }
  /// Point `index` in row-major order, last axis fastest.
  Vec4 point(std::size_t index) const {
    Vec4 x;
    for (int a = 3; a >= 0; --a) {
      const int i = static_cast<int>(index % count[a]);
      index /= count[a];
      x[a] = count[a] == 1 ? min[a] : min[a] + (max[a] - min[a]) * i / (count[a] - 1);
    }
    return x;
  }
};

struct RandomSpec {
  std::uint64_t samples = 100;
  Vec4 min = Vec4::Constant(-1.0);
  Vec4 max = Vec4::Constant(1.0);
};

struct RaySpec {
  Vec4 x = Vec4::Zero();
  Vec3 k_spatial = Vec3(0.0, 0.0, 1.0);
  /// Full initial covector; when absent k0 comes from null projection.
  std::optional<Vec4> k;
  Branch branch = Branch::second;
  RootChoice root = RootChoice::future;
  RayOptions options;
};

struct Tolerances {
  double rank = kDefaultRankTolerance;
  double factorization = 1e-10;
  double identity = 1e-12;
  double determinant = 1e-10;
};

struct OutputSpec {
  std::string dir = "out";
  bool json = true;
  bool csv = true;
};

struct Scenario {
  std::string base_metric = "minkowski";
  TargetGeometry target = TargetGeometry::flat();
  PowerLagrangian model = PowerLagrangian::strongly_coupled();
  Background background = ConstantMap{};
  Mode mode = Mode::point;
  std::uint64_t seed = 42;
  Vec4 point = Vec4::Zero();
  GridSpec grid;
  RandomSpec random;
  std::uint64_t verify_samples = 10000;
  RaySpec ray;
  Tolerances tol;
  OutputSpec output;

  MetricSample base() const { return MetricSample::minkowski(); }
  Medium medium() const { return {background, target, base(), model}; }
};

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

inline std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

class SectionReader {
 public:
  SectionReader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) throw ConfigError(path_, line_of(node_), "expected a mapping");
  }

  /// Rejects keys outside `allowed`.
  void restrict_to(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!ok.count(key))
        throw ConfigError(join(path_, key), line_of(kv.first), "unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
  YAML::Node child(const std::string& key) const { return node_[key]; }
  std::string path(const std::string& key) const { return join(path_, key); }
  int line() const { return line_of(node_); }
  /// Line of `key` when present, otherwise of the section.
  int line(const std::string& key) const {
    const YAML::Node n = node_[key];
    return n ? line_of(n) : line();
  }

  template <typename T>
  T get(const std::string& key) const {
    const YAML::Node n = node_[key];
    if (!n) throw ConfigError(path(key), line(), "missing required key");
    return convert<T>(n, path(key));
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    const YAML::Node n = node_[key];
    return n ? convert<T>(n, path(key)) : fallback;
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vec(const std::string& key) const {
    const YAML::Node n = node_[key];
    if (!n) throw ConfigError(path(key), line(), "missing required key");
    return to_vec<N>(n, path(key));
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vec_or(const std::string& key, const Eigen::Matrix<double, N, 1>& fb) const {
    const YAML::Node n = node_[key];
    return n ? to_vec<N>(n, path(key)) : fb;
  }

  template <int N>
  static Eigen::Matrix<double, N, 1> to_vec(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence() || n.size() != static_cast<std::size_t>(N))
      throw ConfigError(path, line_of(n), "expected a list of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v[i] = convert<double>(n[i], path);
    return v;
  }

  template <typename T>
  static T convert(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, line_of(n), "expected a scalar value");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path, line_of(n), "invalid value '" + n.Scalar() + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
};

inline double positive(double v, const SectionReader& r, const std::string& key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(r.path(key), r.line(key), "must be a finite positive number");
  return v;
}

inline TargetGeometry parse_target(const SectionReader& r) {
  const auto kind = r.get<std::string>("geometry");
  if (kind == "custom_diagonal") {
    r.restrict_to({"geometry", "c"});
    return TargetGeometry::custom_diagonal(positive(r.get<double>("c"), r, "c"));
  }
  r.restrict_to({"geometry"});
  if (kind == "flat") return TargetGeometry::flat();
  if (kind == "sphere_stereographic") return TargetGeometry::sphere_stereographic();
  if (kind == "poincare_disk") return TargetGeometry::poincare_disk();
  throw ConfigError(r.path("geometry"), r.line("geometry"), "unknown target geometry '" + kind + "'");
}

inline PowerLagrangian parse_model(const SectionReader& r) {
  r.restrict_to({"preset", "c", "q"});
  PowerLagrangian m = PowerLagrangian::strongly_coupled();
  if (r.has("preset")) {
    const auto preset = r.get<std::string>("preset");
    if (preset == "afz")
      m = PowerLagrangian::afz();
    else if (preset == "strongly_coupled")
      m = PowerLagrangian::strongly_coupled();
    else
      throw ConfigError(r.path("preset"), r.line("preset"), "unknown model preset '" + preset + "'");
  }
  m.coefficient = r.get_or<double>("c", m.coefficient);
  m.exponent = positive(r.get_or<double>("q", m.exponent), r, "q");
  if (m.coefficient == 0.0 || !std::isfinite(m.coefficient))
    throw ConfigError(r.path("c"), r.line("c"), "coefficient must be finite and nonzero");
  return m;
}

template <int R, int C>
Eigen::Matrix<double, R, C> parse_rows(const SectionReader& r, const std::string& key) {
  const YAML::Node n = r.child(key);
  if (!n || !n.IsSequence() || n.size() != static_cast<std::size_t>(R))
    throw ConfigError(r.path(key), r.line(key),
                      "expected " + std::to_string(R) + " rows of " + std::to_string(C) + " numbers");
  Eigen::Matrix<double, R, C> m;
  for (int i = 0; i < R; ++i) m.row(i) = SectionReader::to_vec<C>(n[i], r.path(key)).transpose();
  return m;
}

inline Background parse_background(const SectionReader& r) {
  const auto family = r.get<std::string>("family");
  if (family == "constant_map") {
    r.restrict_to({"family", "y0"});
    return ConstantMap{r.vec_or<2>("y0", Vec2::Zero())};
  }
  if (family == "linear_map") {
    r.restrict_to({"family", "C", "y0"});
    LinearMap m;
    m.C = parse_rows<2, 4>(r, "C");
    m.y0 = r.vec_or<2>("y0", Vec2::Zero());
    return m;
  }
  if (family == "quadratic_map") {
    r.restrict_to({"family", "C", "Q", "y0"});
    QuadraticMap m;
    m.C = parse_rows<2, 4>(r, "C");
    const YAML::Node q = r.child("Q");
    if (!q || !q.IsSequence() || q.size() != 2)
      throw ConfigError(r.path("Q"), r.line("Q"), "expected two 4x4 matrices");
    for (int A = 0; A < 2; ++A) {
      const YAML::Node qa = q[A];
      if (!qa.IsSequence() || qa.size() != 4) throw ConfigError(r.path("Q"), line_of(qa), "expected a 4x4 matrix");
      for (int a = 0; a < 4; ++a) m.Q[A].row(a) = SectionReader::to_vec<4>(qa[a], r.path("Q")).transpose();
      if (m.Q[A] != m.Q[A].transpose()) throw ConfigError(r.path("Q"), line_of(qa), "Q matrices must be symmetric");
    }
    m.y0 = r.vec_or<2>("y0", Vec2::Zero());
    return m;
  }
  if (family == "plane_wave") {
    r.restrict_to({"family", "A", "B", "kappa"});
    return PlaneWave{r.get<double>("A"), r.get<double>("B"), r.vec<4>("kappa")};
  }
  if (family == "product_wave") {
    r.restrict_to({"family", "A", "B", "kappa", "mu"});
    ProductWave w{r.get<double>("A"), r.get<double>("B"), r.vec<4>("kappa"), r.vec<4>("mu")};
    if (w.kappa == w.mu) throw ConfigError(r.path("mu"), r.line("mu"), "product_wave needs kappa != mu");
    return w;
  }
  throw ConfigError(r.path("family"), r.line("family"), "unknown background family '" + family + "'");
}

inline std::uint64_t count_at_least_one(const SectionReader& r, const std::string& key,
                                        std::uint64_t fallback) {
  const auto v = r.get_or<long long>(key, static_cast<long long>(fallback));
  if (v < 1) throw ConfigError(r.path(key), r.line(key), "must be >= 1");
  return static_cast<std::uint64_t>(v);
}

inline RaySpec parse_ray(const SectionReader& r) {
  r.restrict_to({"x", "k_spatial", "k", "branch", "root", "span", "step", "adaptive", "drift_tol",
                 "min_step", "gradient"});
  RaySpec s;
  s.x = r.vec_or<4>("x", s.x);
  s.k_spatial = r.vec_or<3>("k_spatial", s.k_spatial);
  if (r.has("k")) s.k = r.vec<4>("k");
  const int branch = r.get_or<int>("branch", 2);
  if (branch != 1 && branch != 2) throw ConfigError(r.path("branch"), r.line("branch"), "branch must be 1 or 2");
  s.branch = branch == 1 ? Branch::first : Branch::second;
  const auto root = r.get_or<std::string>("root", "future");
  if (root == "future")
    s.root = RootChoice::future;
  else if (root == "past")
    s.root = RootChoice::past;
  else
    throw ConfigError(r.path("root"), r.line("root"), "root must be 'future' or 'past'");
  s.options.span = positive(r.get_or<double>("span", s.options.span), r, "span");
  s.options.step = positive(r.get_or<double>("step", s.options.step), r, "step");
  s.options.adaptive = r.get_or<bool>("adaptive", s.options.adaptive);
  s.options.drift_tol = positive(r.get_or<double>("drift_tol", s.options.drift_tol), r, "drift_tol");
  s.options.min_step = positive(r.get_or<double>("min_step", s.options.min_step), r, "min_step");
  const auto grad = r.get_or<std::string>("gradient", "finite_difference");
  if (grad == "finite_difference")
    s.options.gradient = GradientMode::finite_difference;
  else if (grad == "analytic")
    s.options.gradient = GradientMode::analytic;
  else
    throw ConfigError(r.path("gradient"), r.line("gradient"), "gradient must be 'finite_difference' or 'analytic'");
  return s;
}

}  // namespace detail

inline Scenario parse_scenario(const YAML::Node& root) {
  using detail::SectionReader;
  if (!root || root.IsNull()) throw ConfigError("", 0, "scenario is empty");
  SectionReader top(root, "");
  top.restrict_to({"base_metric", "target", "model", "background", "analysis", "tolerances", "output"});

  Scenario s;
  s.base_metric = top.get_or<std::string>("base_metric", "minkowski");
  if (s.base_metric != "minkowski")
    throw ConfigError("base_metric", top.line("base_metric"), "only 'minkowski' is supported");
  if (top.has("target")) s.target = detail::parse_target(SectionReader(top.child("target"), "target"));
  if (top.has("model")) s.model = detail::parse_model(SectionReader(top.child("model"), "model"));
  if (!top.has("background")) throw ConfigError("background", top.line(), "missing required section");
  s.background = detail::parse_background(SectionReader(top.child("background"), "background"));

  SectionReader an(top.has("analysis") ? top.child("analysis") : YAML::Node(YAML::NodeType::Map), "analysis");
  an.restrict_to({"mode", "seed", "point", "grid", "random", "verify", "ray"});
  const auto mode = an.get_or<std::string>("mode", "point");
  if (mode == "point")
    s.mode = Mode::point;
  else if (mode == "grid")
    s.mode = Mode::grid;
  else if (mode == "random")
    s.mode = Mode::random;
  else if (mode == "ray")
    s.mode = Mode::ray;
  else if (mode == "verify")
    s.mode = Mode::verify;
  else
    throw ConfigError("analysis.mode", detail::line_of(an.child("mode")), "unknown analysis mode '" + mode + "'");
  s.seed = an.get_or<std::uint64_t>("seed", s.seed);

  if (s.mode == Mode::point) s.point = an.vec_or<4>("point", s.point);
  if (an.has("grid")) {
    SectionReader g(an.child("grid"), "analysis.grid");
    g.restrict_to({"min", "max", "count"});
    s.grid.min = g.vec<4>("min");
    s.grid.max = g.vec<4>("max");
    const Vec4 c = g.vec<4>("count");
    for (int a = 0; a < 4; ++a) {
      if (c[a] < 1 || c[a] != std::floor(c[a]))
        throw ConfigError(g.path("count"), g.line("count"), "grid counts must be integers >= 1");
      s.grid.count[a] = static_cast<int>(c[a]);
    }
  } else if (s.mode == Mode::grid) {
    throw ConfigError("analysis.grid", an.line(), "grid mode needs a grid section");
  }
  if (an.has("random")) {
    SectionReader r(an.child("random"), "analysis.random");
    r.restrict_to({"samples", "min", "max"});
    s.random.samples = detail::count_at_least_one(r, "samples", s.random.samples);
    s.random.min = r.vec_or<4>("min", s.random.min);
    s.random.max = r.vec_or<4>("max", s.random.max);
  }
  if (an.has("verify")) {
    SectionReader r(an.child("verify"), "analysis.verify");
    r.restrict_to({"samples"});
    s.verify_samples = detail::count_at_least_one(r, "samples", s.verify_samples);
  }
  if (an.has("ray")) s.ray = detail::parse_ray(SectionReader(an.child("ray"), "analysis.ray"));

  if (top.has("tolerances")) {
    SectionReader t(top.child("tolerances"), "tolerances");
    t.restrict_to({"rank", "factorization", "identity", "determinant"});
    s.tol.rank = detail::positive(t.get_or<double>("rank", s.tol.rank), t, "rank");
    s.tol.factorization = detail::positive(t.get_or<double>("factorization", s.tol.factorization), t, "factorization");
    s.tol.identity = detail::positive(t.get_or<double>("identity", s.tol.identity), t, "identity");
    s.tol.determinant = detail::positive(t.get_or<double>("determinant", s.tol.determinant), t, "determinant");
  }
  if (top.has("output")) {
    SectionReader o(top.child("output"), "output");
    o.restrict_to({"dir", "format"});
    s.output.dir = o.get_or<std::string>("dir", s.output.dir);
    const auto fmt = o.get_or<std::string>("format", "both");
    if (fmt == "json")
      s.output = {s.output.dir, true, false};
    else if (fmt == "csv")
      s.output = {s.output.dir, false, true};
    else if (fmt == "both")
      s.output = {s.output.dir, true, true};
    else
      throw ConfigError("output.format", o.line("format"), "format must be json, csv or both");
  }
  return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  return parse_scenario(root);
}

inline Scenario load_scenario(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError("", 0, "cannot read scenario file '" + path + "'");
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  return parse_scenario(root);
}

}  // namespace charsym
