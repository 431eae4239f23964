#pragma once

// Scenario documents (JSON). Schema in README.md.

#include "conenav/smoothing.hpp"
#include "conenav/zermelo.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace conenav {

using json = nlohmann::json;

struct GeodesicBlock {
  Vec q0;
  Vec v0;
  double s_max = 1.0;
  int steps = 1000;
  bool null_projection = false;
};

struct CheckBlock {
  double t = 0.0;
  Vec x;
  int samples = 16;
  std::vector<Vec> vectors;  // extra vectors for check_lorentz_at
};

struct SmoothingBlock {
  double t = 0.0;
  Vec x;
  double eps = 1e-3;
  double D = 0.5;
  int grid = 201;
};

struct ScenarioFile {
  int dimension = 0;
  std::uint64_t seed = 0;
  std::optional<FinslerSpec> metric;
  std::optional<LorentzFinslerSpec> lorentz;
  std::optional<ConeTriple> triple;
  std::optional<ZermeloScenario> zermelo;
  NavigationConfig solver;
  std::optional<OracleConfig> oracle;
  std::optional<GeodesicBlock> geodesic;
  std::vector<double> isochrone_times;
  int isochrone_fan = 256;
  int isochrone_steps = 0;  // 0: solver.refine_steps
  std::optional<CheckBlock> check;
  std::optional<SmoothingBlock> smoothing;
};

namespace detail {

class SchemaReader {
 public:
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ValidationError("scenario: " + path + ": " + msg);
  }

  static const json& at(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    if (!j.contains(key)) fail(path, "missing field '" + key + "'");
    return j.at(key);
  }

  static double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  static int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
  }

  static Vec vec(const json& j, const std::string& path, std::optional<int> size = std::nullopt) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    if (size && static_cast<int>(j.size()) != *size) fail(path, "expected " + std::to_string(*size) + " entries");
    Vec out(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  static FieldExpr expr(const json& j, const std::string& path, int arity, int direction_arity = 0) {
    if (j.is_number()) return FieldExpr::constant(j.get<double>(), arity);
    if (!j.is_string()) fail(path, "expected a number or an expression string");
    try {
      return FieldExpr::parse(j.get<std::string>(), arity, direction_arity);
    } catch (const ParseError& e) {
      throw ParseError(e.kind(), e.offset(), "scenario: " + path + ": " + e.message());
    }
  }

  static VectorField vfield(const json& j, const std::string& path, int size, int arity) {
    if (!j.is_array() || static_cast<int>(j.size()) != size) {
      fail(path, "expected an array of " + std::to_string(size) + " expressions");
    }
    VectorField f;
    for (int i = 0; i < size; ++i) {
      f.components.push_back(expr(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]", arity));
    }
    return f;
  }

  static MatrixField mfield(const json& j, const std::string& path, int size, int arity) {
    if (!j.is_array() || static_cast<int>(j.size()) != size) {
      fail(path, "expected " + std::to_string(size) + " rows");
    }
    MatrixField f;
    f.dim = size;
    for (int i = 0; i < size; ++i) {
      const auto& row = j[static_cast<std::size_t>(i)];
      const std::string rp = path + "[" + std::to_string(i) + "]";
      if (!row.is_array() || static_cast<int>(row.size()) != size) {
        fail(rp, "expected " + std::to_string(size) + " entries");
      }
      for (int k = 0; k < size; ++k) {
        f.entries.push_back(expr(row[static_cast<std::size_t>(k)], rp + "[" + std::to_string(k) + "]", arity));
      }
    }
    return f;
  }

  static std::string tag(const json& j, const std::string& path) {
    const auto& t = at(j, "type", path);
    if (!t.is_string()) fail(path + ".type", "expected a string");
    return t.get<std::string>();
  }

  /// Finsler metric of dimension n whose fields depend on t, x1..x_arity.
  static FinslerSpec finsler(const json& j, const std::string& path, int n, int arity) {
    const std::string type = tag(j, path);
    if (type == "euclidean") return make_euclidean(n);
    if (type == "riemann") {
      return {finsler::RiemannQuad{mfield(at(j, "G", path), path + ".G", n, arity)}, n};
    }
    if (type == "randers") {
      const MatrixField a = j.contains("a") ? mfield(j.at("a"), path + ".a", n, arity)
                                            : MatrixField::constant(Mat::Identity(n, n));
      return {finsler::Randers{a, vfield(at(j, "b", path), path + ".b", n, arity)}, n};
    }
    if (type == "ppower") {
      const int r = integer(at(j, "r", path), path + ".r");
      const Vec w = j.contains("weights") ? vec(j.at("weights"), path + ".weights", n) : Vec::Ones(n);
      try {
        return make_ppower(r, w);
      } catch (const ValidationError& e) {
        fail(path, e.what());
      }
    }
    if (type == "kropina") {
      FinslerSpec F0 = finsler(at(j, "F0", path), path + ".F0", n, arity);
      return make_kropina(std::move(F0), vfield(at(j, "beta", path), path + ".beta", n, arity));
    }
    if (type == "zermelo") {
      const MatrixField g0 = j.contains("g0") ? mfield(j.at("g0"), path + ".g0", n, arity)
                                              : MatrixField::constant(Mat::Identity(n, n));
      return {finsler::ZermeloData{g0, vfield(at(j, "wind", path), path + ".wind", n, arity)}, n};
    }
    fail(path + ".type", "unknown Finsler metric type '" + type + "'");
  }

  /// Lorentz-Finsler metric on R x R^{N-1}; fields depend on t, x1..x_{N-1}.
  static LorentzFinslerSpec lorentz(const json& j, const std::string& path, int N) {
    const int arity = std::min(N - 1, 3);
    const std::string type = tag(j, path);
    if (type == "minkowski") return minkowski(N);
    if (type == "quad") {
      std::optional<Vec> seed;
      if (j.contains("seed")) seed = vec(j.at("seed"), path + ".seed", N);
      return make_quad_lorentz(mfield(at(j, "G", path), path + ".G", N, arity), seed);
    }
    if (type == "omega_minus_f") {
      return make_omega_minus_f(vfield(at(j, "omega", path), path + ".omega", N, arity),
                                finsler(at(j, "F", path), path + ".F", N, arity));
    }
    if (type == "riemann_minus_f") {
      return make_riemann_minus_f(mfield(at(j, "gR", path), path + ".gR", N, arity),
                                  finsler(at(j, "F", path), path + ".F", N, arity),
                                  vec(at(j, "seed", path), path + ".seed", N));
    }
    if (type == "sum_of_roots") {
      const auto& terms = at(j, "terms", path);
      if (!terms.is_array() || terms.empty()) fail(path + ".terms", "expected a nonempty array");
      std::vector<LorentzFinslerSpec> ts;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        ts.push_back(lorentz(terms[i], path + ".terms[" + std::to_string(i) + "]", N));
      }
      return make_sum_of_roots(ts);
    }
    if (type == "product_root") {
      return make_product_root(lorentz(at(j, "L1", path), path + ".L1", N),
                               lorentz(at(j, "L2", path), path + ".L2", N));
    }
    if (type == "bogoslovsky") {
      try {
        return make_bogoslovsky(lorentz(at(j, "L0", path), path + ".L0", N),
                                vfield(at(j, "beta", path), path + ".beta", N, arity),
                                number(at(j, "b", path), path + ".b"));
      } catch (const ValidationError& e) {
        fail(path, e.what());
      }
    }
    if (type == "triple") return make_triple_g(cone_triple(j, path, N));
    if (type == "scaled") {
      return make_scaled(expr(at(j, "mu", path), path + ".mu", arity, N), lorentz(at(j, "base", path), path + ".base", N));
    }
    fail(path + ".type", "unknown Lorentz-Finsler metric type '" + type + "'");
  }

  static ConeTriple cone_triple(const json& j, const std::string& path, int N) {
    const int arity = std::min(N - 1, 3);
    ConeTriple tr;
    tr.Omega = vfield(at(j, "omega", path), path + ".omega", N, arity);
    tr.T = vfield(at(j, "T", path), path + ".T", N, arity);
    tr.F = finsler(at(j, "F", path), path + ".F", N - 1, arity);
    return tr;
  }
};

}  // namespace detail

/// Parses and validates a scenario document. Dimension is the spatial
/// dimension n; spacetime blocks live on R x R^n.
inline ScenarioFile parse_scenario(const json& doc) {
  using R = detail::SchemaReader;
  ScenarioFile sf;
  if (!doc.is_object()) R::fail("$", "expected an object");
  static const std::vector<std::string> known = {"dimension", "seed",     "metric",    "lorentz",   "triple",
                                                 "zermelo",   "solver",   "oracle",    "geodesic",  "isochrone",
                                                 "check",     "smoothing", "description"};
  for (const auto& [k, _] : doc.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) R::fail("$", "unknown field '" + k + "'");
  }
  sf.dimension = R::integer(R::at(doc, "dimension", "$"), "dimension");
  const int n = sf.dimension;
  if (n < 1 || n > 3) R::fail("dimension", "must be 1, 2 or 3");
  const int N = n + 1;
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) R::fail("seed", "expected a non-negative integer");
    sf.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("metric")) sf.metric = R::finsler(doc.at("metric"), "metric", n, n);
  if (doc.contains("lorentz")) sf.lorentz = R::lorentz(doc.at("lorentz"), "lorentz", N);
  if (doc.contains("triple")) {
    sf.triple = R::cone_triple(doc.at("triple"), "triple", N);
    try {
      validate_triple(*sf.triple, {{0.0, Vec::Zero(n)}});
    } catch (const Error& e) {
      R::fail("triple", e.what());
    }
  }

  if (doc.contains("solver")) {
    const auto& s = doc.at("solver");
    if (!s.is_object()) R::fail("solver", "expected an object");
    if (s.contains("fan")) sf.solver.fan = R::integer(s.at("fan"), "solver.fan");
    if (s.contains("tol")) sf.solver.tol = R::number(s.at("tol"), "solver.tol");
    if (s.contains("max_iter")) sf.solver.max_iter = R::integer(s.at("max_iter"), "solver.max_iter");
    if (s.contains("fan_steps")) sf.solver.fan_steps = R::integer(s.at("fan_steps"), "solver.fan_steps");
    if (s.contains("refine_steps")) sf.solver.refine_steps = R::integer(s.at("refine_steps"), "solver.refine_steps");
    if (s.contains("conjugate")) {
      if (!s.at("conjugate").is_boolean()) R::fail("solver.conjugate", "expected a boolean");
      sf.solver.conjugate = s.at("conjugate").get<bool>();
    }
    if (sf.solver.fan < 4 || sf.solver.fan_steps < 10 || sf.solver.refine_steps < 10 || !(sf.solver.tol > 0.0)) {
      R::fail("solver", "fan >= 4, fan_steps >= 10, refine_steps >= 10 and tol > 0 required");
    }
  }

  if (doc.contains("zermelo")) {
    const auto& z = doc.at("zermelo");
    if (!sf.metric) R::fail("zermelo", "requires a 'metric' block");
    ZermeloScenario sc;
    sc.Z = *sf.metric;
    sc.t0 = z.contains("t0") ? R::number(z.at("t0"), "zermelo.t0") : 0.0;
    sc.x_start = R::vec(R::at(z, "start", "zermelo"), "zermelo.start", n);
    sc.target = R::vec(R::at(z, "target", "zermelo"), "zermelo.target", n);
    sc.horizon = R::number(R::at(z, "horizon", "zermelo"), "zermelo.horizon");
    try {
      validate_scenario(sc);
    } catch (const Error& e) {
      R::fail("zermelo", e.what());
    }
    sf.zermelo = sc;
  } else if (sf.metric) {
    try {
      validate_finsler(*sf.metric, {{0.0, Vec::Zero(n)}});
    } catch (const Error& e) {
      R::fail("metric", e.what());
    }
  }

  if (doc.contains("oracle")) {
    const auto& o = doc.at("oracle");
    OracleConfig oc;
    if (o.contains("dx")) oc.dx = R::number(o.at("dx"), "oracle.dx");
    if (o.contains("dt")) oc.dt = R::number(o.at("dt"), "oracle.dt");
    if (o.contains("m")) oc.m = R::integer(o.at("m"), "oracle.m");
    oc.box_lo = R::vec(R::at(o, "lo", "oracle"), "oracle.lo", n);
    oc.box_hi = R::vec(R::at(o, "hi", "oracle"), "oracle.hi", n);
    if (!(oc.dx > 0.0) || oc.m < 2 || !(oc.box_hi.array() > oc.box_lo.array()).all()) {
      R::fail("oracle", "dx > 0, m >= 2 and hi > lo required");
    }
    sf.oracle = oc;
  }

  if (doc.contains("geodesic")) {
    const auto& g = doc.at("geodesic");
    GeodesicBlock gb;
    gb.q0 = R::vec(R::at(g, "q0", "geodesic"), "geodesic.q0", N);
    gb.v0 = R::vec(R::at(g, "v0", "geodesic"), "geodesic.v0", N);
    gb.s_max = R::number(R::at(g, "s_max", "geodesic"), "geodesic.s_max");
    if (g.contains("steps")) gb.steps = R::integer(g.at("steps"), "geodesic.steps");
    if (g.contains("null_projection")) gb.null_projection = g.at("null_projection").get<bool>();
    if (!(gb.s_max > 0.0) || gb.steps < 1) R::fail("geodesic", "s_max > 0 and steps >= 1 required");
    sf.geodesic = gb;
  }

  if (doc.contains("isochrone")) {
    const auto& iso = doc.at("isochrone");
    const auto& ts = R::at(iso, "times", "isochrone");
    const Vec tv = R::vec(ts, "isochrone.times");
    sf.isochrone_times.assign(tv.data(), tv.data() + tv.size());
    if (iso.contains("fan")) sf.isochrone_fan = R::integer(iso.at("fan"), "isochrone.fan");
    if (iso.contains("steps")) sf.isochrone_steps = R::integer(iso.at("steps"), "isochrone.steps");
    if (sf.isochrone_fan < 3 || sf.isochrone_steps < 0) R::fail("isochrone", "fan >= 3 and steps >= 0 required");
  }

  if (doc.contains("check")) {
    const auto& c = doc.at("check");
    CheckBlock cb;
    cb.t = c.contains("t") ? R::number(c.at("t"), "check.t") : 0.0;
    cb.x = c.contains("x") ? R::vec(c.at("x"), "check.x", n) : Vec::Zero(n);
    if (c.contains("samples")) cb.samples = R::integer(c.at("samples"), "check.samples");
    if (c.contains("vectors")) {
      const auto& vs = c.at("vectors");
      if (!vs.is_array()) R::fail("check.vectors", "expected an array");
      for (std::size_t i = 0; i < vs.size(); ++i) {
        cb.vectors.push_back(R::vec(vs[i], "check.vectors[" + std::to_string(i) + "]", N));
      }
    }
    sf.check = cb;
  }

  if (doc.contains("smoothing")) {
    const auto& s = doc.at("smoothing");
    SmoothingBlock sb;
    sb.t = s.contains("t") ? R::number(s.at("t"), "smoothing.t") : 0.0;
    sb.x = s.contains("x") ? R::vec(s.at("x"), "smoothing.x", n) : Vec::Zero(n);
    if (s.contains("eps")) sb.eps = R::number(s.at("eps"), "smoothing.eps");
    if (s.contains("D")) sb.D = R::number(s.at("D"), "smoothing.D");
    if (s.contains("grid")) sb.grid = R::integer(s.at("grid"), "smoothing.grid");
    if (sb.grid < 3) R::fail("smoothing.grid", "must be >= 3");
    sf.smoothing = sb;
  }
  return sf;
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ValidationError("scenario '" + path + "': malformed JSON: " + e.what());
  }
  return parse_scenario(doc);
}

}  // namespace conenav
