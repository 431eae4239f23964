#pragma once

// Strongly convex smoothing of the graph t0(y) = sqrt(1 + F(y)^2) near y = 0
// by a smooth maximum with a paraboloid.

#include "conenav/norms.hpp"

#include <functional>
#include <limits>

namespace conenav {

/// (a + b + sqrt((a - b)^2 + eps^2)) / 2.
inline double smooth_max(double a, double b, double eps) {
  if (!(eps > 0.0)) throw ValidationError("smooth_max: eps must be positive");
  return 0.5 * (a + b + std::sqrt((a - b) * (a - b) + eps * eps));
}

/// Smooth maximum that equals max(a, b) exactly once |a - b| >= eps:
/// (a + b + theta(a - b)) / 2 with theta a C^4 convex even function, theta(s) = |s|
/// for |s| >= eps. Used by smooth_indicatrix, which needs exact equality away
/// from the modification disk.
inline double compact_smooth_max(double a, double b, double eps) {
  const double s = a - b;
  if (s >= eps) return a;
  if (s <= -eps) return b;
  const double u = s / eps;
  const double u2 = u * u;
  const double theta =
      eps * (35.0 / 16.0) * (u2 / 2.0 - u2 * u2 / 4.0 + u2 * u2 * u2 / 10.0 - u2 * u2 * u2 * u2 / 56.0) +
      35.0 * eps / 128.0;
  return 0.5 * (a + b + theta);
}

struct SmoothedGraph {
  std::function<double(const Vec&)> original;
  std::function<double(const Vec&)> smoothed;
  double eps = 0.0;
  double eps_tilde = 0.0;
  double D = 0.0;
  double delta = 0.0;
  Vec xi;
};

/// Smoothing of the graph of the fiber norm F at (t, x) on the disk of radius D.
/// delta is 0.9 times the smallest sampled Hessian eigenvalue of t0 over the
/// annulus D/4 <= |y| <= D, capped so that the paraboloid stays within eps of t0.
inline SmoothedGraph smooth_indicatrix(const FinslerSpec& F, double t, const Vec& x, double eps, double D) {
  if (!(eps > 0.0) || !(D > 0.0)) throw ValidationError("smooth_indicatrix: eps and D must be positive");
  const int n = F.dim;
  auto t0 = [F, t, x](const Vec& y) {
    if (y.squaredNorm() == 0.0) return 1.0;
    const double f = finsler_eval(F, t, x, y);
    return std::sqrt(1.0 + f * f);
  };

  const auto dirs16 = unit_directions(n, n == 1 ? 2 : 16);
  double delta_est = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    const double r = D / 4.0 + k * (D - D / 4.0) / 3.0;
    for (const auto& d : dirs16) {
      const Mat H = numeric_hessian(t0, Vec(r * d));
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
      delta_est = std::min(delta_est, es.eigenvalues().minCoeff());
    }
  }
  if (!(delta_est > 0.0)) throw ValidationError("smooth_indicatrix: t0 is not strongly convex on the annulus");

  Vec xi = Vec::Zero(n);
  const auto dirs8 = unit_directions(n, n == 1 ? 2 : 8);
  for (const auto& d : dirs8) xi += numeric_gradient(t0, Vec(1e-3 * D * d));
  xi /= static_cast<double>(dirs8.size());

  const double delta = std::min(0.9 * delta_est, 16.0 * eps / (D * D));
  const double eps_tilde = std::min(eps / 2.0, delta * D * D / 64.0);
  const double base = t0(Vec::Zero(n));
  auto paraboloid = [=](const Vec& y) {
    return base + xi.dot(y) + 0.25 * delta * y.squaredNorm() + delta * D * D / 32.0;
  };

  // The construction needs t0 - P >= eps_tilde off D/2.
  for (const double r : {0.5 * D, 0.75 * D, D, 1.5 * D, 2.0 * D}) {
    for (const auto& d : unit_directions(n, n == 1 ? 2 : 64)) {
      const Vec y = r * d;
      if (t0(y) - paraboloid(y) < eps_tilde) {
        throw NumericalError("smooth_indicatrix: paraboloid does not clear t0 outside D/2");
      }
    }
  }

  SmoothedGraph out;
  out.original = t0;
  out.smoothed = [=](const Vec& y) { return compact_smooth_max(t0(y), paraboloid(y), eps_tilde); };
  out.eps = eps;
  out.eps_tilde = eps_tilde;
  out.D = D;
  out.delta = delta;
  out.xi = xi;
  return out;
}

}  // namespace conenav
