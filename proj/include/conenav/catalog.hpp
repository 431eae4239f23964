#pragma once

// Reference Lorentz-Finsler specs on R x R^2 and random causal sampling, shared
// by the self-test and the test suites.

#include "conenav/spacetimes.hpp"

#include <random>
#include <string>

namespace conenav {

struct NamedSpec {
  std::string name;
  LorentzFinslerSpec spec;
  bool tensor_on_cone = true;  // closed-form tensor extends to the cone
  // p-power fibers lose strong convexity where a component vanishes; samples
  // with min |v_i| < hyperplane_gap |v| are redrawn.
  double hyperplane_gap = 0.0;
};

inline Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

/// mu(v) = 1 + 0.3 (Omega(v) / |v|)^2 with Omega = dt.
inline FieldExpr reference_mu(int N) {
  std::string norm2 = "v0^2";
  for (int i = 1; i < N; ++i) norm2 += " + v" + std::to_string(i) + "^2";
  return FieldExpr::parse("1 + 0.3*v0^2/(" + norm2 + ")", std::min(N - 1, 3), N);
}

inline std::vector<NamedSpec> reference_specs() {
  const int N = 3;
  std::vector<NamedSpec> out;
  const auto mink = minkowski(N);

  MatrixField G;
  G.dim = N;
  G.entries = {FieldExpr::parse("1 + 0.1*x1^2", 2), FieldExpr::constant(0.0, 2), FieldExpr::constant(0.1, 2),
               FieldExpr::constant(0.0, 2),         FieldExpr::constant(-1.0, 2), FieldExpr::constant(0.0, 2),
               FieldExpr::constant(0.1, 2),         FieldExpr::constant(0.0, 2),  FieldExpr::parse("-1 - 0.2*sin(t)^2", 2)};
  out.push_back({"quad_minkowski", mink});
  out.push_back({"quad_curved", make_quad_lorentz(G, vec3(1, 0, 0))});

  Mat a = Vec(vec3(1.0, 1.0, 1.5)).asDiagonal();
  out.push_back({"omega_minus_randers", make_omega_minus_f(vec3(2.0, 0.3, 0.0), make_randers(a, vec3(0.1, 0.2, 0.0)))});
  out.push_back({"omega_minus_ppower", make_omega_minus_f(vec3(2.0, 0.0, 0.1), make_ppower(4, vec3(1.0, 1.0, 2.0))), true,
                 0.05});

  Mat gR = Vec(vec3(2.0, 0.5, 0.5)).asDiagonal();
  Mat gh = Vec(vec3(1.0, 1.5, 1.5)).asDiagonal();
  out.push_back({"riemann_minus_f",
                 make_riemann_minus_f(MatrixField::constant(gR), make_randers(gh, vec3(0.0, 0.1, 0.0)), vec3(1, 0, 0))});

  const auto scaled_mink = make_scaled(reference_mu(N), mink);
  out.push_back({"sum_of_roots", make_sum_of_roots({mink, scaled_mink})});
  out.push_back({"product_root", make_product_root(mink, scaled_mink), false});
  out.push_back({"bogoslovsky", make_bogoslovsky(mink, vec3(1.0, 0.2, 0.0), -0.3), false});

  ConeTriple tilted;
  tilted.Omega = VectorField::constant(vec3(1.0, 0.0, 0.0));
  tilted.T = VectorField::constant(vec3(1.0, 0.2, 0.0));
  tilted.F = make_randers(Mat::Identity(2, 2), Vec(vec3(0.25, -0.1, 0).head(2)));
  out.push_back({"triple_randers", make_triple_g(tilted)});
  out.push_back({"triple_zermelo",
                 make_triple_g(static_triple(zermelo_from_data(MatrixField::constant(Mat::Identity(2, 2)),
                                                               VectorField{{FieldExpr::parse("0.5*cos(t)", 2),
                                                                            FieldExpr::parse("0.2*x1", 2)}},
                                                               {{0.0, Vec::Zero(2)}})))});
  out.push_back({"scaled_omega_minus_f", make_scaled(reference_mu(N), out[2].spec)});
  return out;
}

/// dt^2 - 4 (dx^2 + dy^2) / (1 + x^2 + y^2)^2: static round 2-sphere in a
/// stereographic chart.
inline LorentzFinslerSpec round_sphere_spacetime() {
  MatrixField G;
  G.dim = 3;
  const auto zero = FieldExpr::constant(0.0, 2);
  const auto conf = FieldExpr::parse("-4/(1 + x1^2 + x2^2)^2", 2);
  G.entries = {FieldExpr::constant(1.0, 2), zero, zero, zero, conf, zero, zero, zero, conf};
  return make_quad_lorentz(G, vec3(1, 0, 0));
}

namespace detail {

inline bool causal_at(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& v) {
  try {
    return lorentz_eval(spec, t, x, v) > 0.0;
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace detail

/// Largest s with seed + s w causal, by doubling then bisection to adjacent doubles.
inline double cone_crossing(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& seed, const Vec& w) {
  double lo = 0.0;
  double hi = seed.norm() / w.norm();
  for (int k = 0; k < 60 && detail::causal_at(spec, t, x, seed + hi * w); ++k) {
    lo = hi;
    hi *= 2.0;
  }
  if (detail::causal_at(spec, t, x, seed + hi * w)) throw NumericalError("cone_crossing: ray never leaves the cone");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (detail::causal_at(spec, t, x, seed + mid * w) ? lo : hi) = mid;
  }
  return lo;
}

struct CausalSampler {
  std::mt19937_64 rng;

  explicit CausalSampler(std::uint64_t seed) : rng(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

  Vec gaussian(Eigen::Index n) {
    std::normal_distribution<double> N01;
    return Vec::NullaryExpr(n, [&] { return N01(rng); });
  }

  /// Random future-causal vector: interior (depth in (0.02, 0.98) of the ray to
  /// the cone) or on the cone, with a random positive scale.
  Vec sample(const LorentzFinslerSpec& spec, double t, const Vec& x, bool on_cone) {
    const auto ref = cone_reference(spec, t, x);
    const Mat K = orthogonal_complement(ref.Omega);
    const Vec w = K * gaussian(K.cols());
    const double s = cone_crossing(spec, t, x, ref.seed, w);
    const double depth = on_cone ? 1.0 : uniform(0.02, 0.98);
    return uniform(0.5, 2.0) * (ref.seed + depth * s * w);
  }

  Vec sample(const NamedSpec& ns, double t, const Vec& x, bool on_cone) {
    for (int k = 0; k < 1000; ++k) {
      Vec v = sample(ns.spec, t, x, on_cone);
      if (v.cwiseAbs().minCoeff() >= ns.hyperplane_gap * v.norm()) return v;
    }
    throw NumericalError("CausalSampler: no admissible sample for " + ns.name);
  }

  Vec point(int n, double half_width = 0.5) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = uniform(-half_width, half_width);
    return x;
  }
};

}  // namespace conenav
