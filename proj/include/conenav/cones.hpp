#pragma once

#include "conenav/cone_triple.hpp"
#include "conenav/spacetimes.hpp"

namespace conenav {

/// The unique s > 0 with s T + w on the cone of L, for a kernel vector w of
/// Omega. Bisection on causality (a domain error counts as non-causal) down to
/// roundoff, so it applies to metrics undefined outside their cone.
inline double extract_fiber_norm(const LorentzFinslerSpec& L, const Vec& Omega, const Vec& T, double t,
                                 const Vec& x, const Vec& w) {
  if (w.squaredNorm() == 0.0) throw ValidationError("extract_fiber_norm: w must be nonzero");
  if (std::abs(Omega.dot(w)) > 1e-10 * Omega.norm() * w.norm()) {
    throw ValidationError("extract_fiber_norm: w is not in ker Omega");
  }
  auto causal = [&](double s) {
    try {
      return lorentz_eval(L, t, x, s * T + w) > 0.0;
    } catch (const DomainError&) {
      return false;
    }
  };
  double lo = 0.0;
  double hi = 1e3 * w.norm() / T.norm();
  if (!causal(hi)) {
    throw NumericalError("extract_fiber_norm: no cone crossing below s_hi; T not timelike or w not representable");
  }
  // Halve down to a bracket, then bisect to adjacent doubles.
  for (int it = 0; it < 1000 && causal(0.5 * hi); ++it) hi *= 0.5;
  lo = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (causal(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double extract_fiber_norm(const LorentzFinslerSpec& L, const VectorField& Omega, const VectorField& T,
                                 double t, const Vec& x, const Vec& w) {
  return extract_fiber_norm(L, Omega.eval(t, x), T.eval(t, x), t, x, w);
}

}  // namespace conenav
