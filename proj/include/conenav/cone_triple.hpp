#pragma once

// Cone triples (Omega, T, F) and the causal classification they induce.
//
// Kernel vectors of Omega live in ambient coordinates. The fiber metric F acts
// on the spatial representative: drop component 0, which identifies ker Omega
// with R^{N-1} whenever Omega_0 != 0.

#include "conenav/norms.hpp"

namespace conenav {

struct ConeTriple {
  VectorField Omega;
  VectorField T;
  FinslerSpec F;

  int dim() const noexcept { return Omega.size(); }
};

enum class CausalClass { timelike, lightlike, noncausal };

inline const char* to_string(CausalClass c) {
  switch (c) {
    case CausalClass::timelike: return "timelike";
    case CausalClass::lightlike: return "lightlike";
    case CausalClass::noncausal: return "noncausal";
  }
  return "?";
}

/// The standard static triple (dt, d/dt, F) on R x R^n.
inline ConeTriple static_triple(const FinslerSpec& F) {
  const int N = F.dim + 1;
  return {VectorField::constant(Vec::Unit(N, 0)), VectorField::constant(Vec::Unit(N, 0)), F};
}

inline Vec spatial_rep(const Vec& w) { return w.tail(w.size() - 1); }

/// Kernel vector of Omega whose spatial representative is d.
inline Vec kernel_lift(const Vec& Omega, const Vec& d) {
  Vec w(d.size() + 1);
  w.tail(d.size()) = d;
  w(0) = -Omega.tail(d.size()).dot(d) / Omega(0);
  return w;
}

/// Fiber norm of a kernel vector (zero at the zero vector).
inline double fiber_norm(const ConeTriple& tr, double t, const Vec& x, const Vec& w) {
  const Vec d = spatial_rep(w);
  if (d.squaredNorm() == 0.0) return 0.0;
  return finsler_eval(tr.F, t, x, d);
}

inline void validate_triple(const ConeTriple& tr, const std::vector<SamplePoint>& points) {
  const int N = tr.dim();
  if (tr.T.size() != N || tr.F.dim != N - 1) throw ValidationError("cone triple dimensions disagree");
  for (const auto& pt : points) {
    const Vec Om = tr.Omega.eval(pt.t, pt.x);
    const Vec T = tr.T.eval(pt.t, pt.x);
    if (std::abs(Om.dot(T) - 1.0) > 1e-10) throw ValidationError("cone triple: Omega(T) != 1");
    if (std::abs(Om(0)) < 1e-12 * Om.norm()) {
      throw ValidationError("cone triple: Omega must have a nonzero time component");
    }
  }
  validate_finsler(tr.F, points);
}

struct Decomposition {
  double tau = 0.0;
  Vec w;
};

/// v = Omega(v) T + w with Omega(w) = 0.
inline Decomposition decompose(const ConeTriple& tr, double t, const Vec& x, const Vec& v) {
  const Vec Om = tr.Omega.eval(t, x);
  const Vec T = tr.T.eval(t, x);
  const double tau = Om.dot(v);
  return {tau, v - tau * T};
}

inline CausalClass classify(const ConeTriple& tr, double t, const Vec& x, const Vec& v, double tol = 1e-9) {
  const auto [tau, w] = decompose(tr, t, x, v);
  const double Fw = fiber_norm(tr, t, x, w);
  const double scale = v.norm();
  if (tau > Fw + tol * scale) return CausalClass::timelike;
  if (std::abs(tau - Fw) <= tol * scale && tau > 0.0) return CausalClass::lightlike;
  return CausalClass::noncausal;
}

/// Cone vector F(w) T + w over the kernel vector with spatial representative d.
inline Vec lightlike_over(const ConeTriple& tr, double t, const Vec& x, const Vec& d) {
  const Vec w = kernel_lift(tr.Omega.eval(t, x), d);
  return finsler_eval(tr.F, t, x, d) * tr.T.eval(t, x) + w;
}

/// Fan of lightlike vectors over unit spatial directions.
inline std::vector<Vec> lightlike_directions(const ConeTriple& tr, double t, const Vec& x, int count) {
  if (count < 1) throw ValidationError("lightlike_directions: count must be >= 1");
  std::vector<Vec> out;
  for (const auto& d : unit_directions(tr.dim() - 1, count)) out.push_back(lightlike_over(tr, t, x, d));
  return out;
}

}  // namespace conenav
