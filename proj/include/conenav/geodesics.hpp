#pragma once

// Geodesics of a Lorentz-Finsler metric from the Euler-Lagrange equations of L,
// integrated by fixed-step RK4.

#include "conenav/spacetimes.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace conenav {

struct PhaseState {
  Vec q;
  Vec p;
  double s = 0.0;
};

enum class Termination { length_reached, left_domain, step_failure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::length_reached: return "length_reached";
    case Termination::left_domain: return "left_domain";
    case Termination::step_failure: return "step_failure";
  }
  return "?";
}

struct GeodesicSolution {
  std::vector<PhaseState> samples;
  std::vector<double> null_residuals;
  std::vector<double> energy;
  Termination termination = Termination::length_reached;
  std::string message;
};

struct GeodesicConfig {
  double h = 0.0;  // 0: 1e-3 * s_max
  bool null_projection = false;
  // Relative energy loss below which the velocity counts as having left the cone.
  double domain_tol = 1e-6;
  // Stop early once this returns true for the latest state.
  std::function<bool(const PhaseState&)> stop;
  DiffConfig diff;
};

namespace detail {

inline bool is_non_riemannian_triple(const LorentzFinslerSpec& spec) {
  const auto* tg = std::get_if<lorentz::TripleG>(&spec.data);
  return tg != nullptr && !std::holds_alternative<finsler::RiemannQuad>(tg->triple.F.data);
}

}  // namespace detail

/// Solves 2 g_p a = grad_q L - (d^2 L / dp dq) p.
inline Vec geodesic_accel(const LorentzFinslerSpec& spec, const PhaseState& st, const DiffConfig& cfg = {}) {
  const Vec& q = st.q;
  const Vec& p = st.p;
  const Eigen::Index N = q.size();
  auto split_t = [](const Vec& e) { return e(0); };
  auto split_x = [N](const Vec& e) -> Vec { return e.tail(N - 1); };

  if (detail::is_non_riemannian_triple(spec)) {
    const auto& tr = std::get<lorentz::TripleG>(spec.data).triple;
    const Vec T = tr.T.eval(split_t(q), split_x(q));
    if (line_angle(p, T) < 1e-3) throw NumericalError("velocity within 1e-3 rad of span(T)");
  }

  const Mat g = lf_tensor_matrix(spec, split_t(q), split_x(q), p, cfg);
  const ScalarFn Lq = [&](const Vec& e) { return lorentz_eval(spec, split_t(e), split_x(e), p); };
  const Vec grad_q = numeric_gradient(Lq, q, cfg);

  const double h = cfg.h1 * step_scale(q) / std::max(p.norm(), 1e-300);
  const Vec qp = q + h * p;
  const Vec qm = q - h * p;
  const Vec mixed = (2.0 * lf_tensor_matrix(spec, split_t(qp), split_x(qp), p, cfg) * p -
                     2.0 * lf_tensor_matrix(spec, split_t(qm), split_x(qm), p, cfg) * p) /
                    (2.0 * h);

  Eigen::PartialPivLU<Mat> lu(g);
  const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-300);
  if (std::abs(lu.determinant()) <= 1e-12 * std::pow(scale, static_cast<double>(N))) {
    throw NumericalError("singular fundamental tensor along the geodesic");
  }
  return lu.solve(grad_q - mixed) / 2.0;
}

/// Newton steps along grad_p L moving p onto the cone L(q, p) = 0.
inline Vec project_to_cone(const LorentzFinslerSpec& spec, const Vec& q, Vec p) {
  const Eigen::Index N = q.size();
  for (int it = 0; it < 3; ++it) {
    const double t = q(0);
    const Vec x = q.tail(N - 1);
    const double L = lorentz_eval(spec, t, x, p);
    if (std::abs(L) <= 1e-15 * p.squaredNorm()) break;
    const Vec grad = 2.0 * lf_tensor_matrix(spec, t, x, p) * p;
    p -= L / grad.squaredNorm() * grad;
  }
  return p;
}

inline GeodesicSolution integrate_geodesic(const LorentzFinslerSpec& spec, const PhaseState& init, double s_max,
                                           const GeodesicConfig& cfg = {}) {
  if (!(s_max > 0.0)) throw ValidationError("integrate_geodesic: s_max must be positive");
  if (init.q.size() != spec.dim || init.p.size() != spec.dim) {
    throw ValidationError("integrate_geodesic: state dimension does not match the metric");
  }
  const double h = cfg.h > 0.0 ? cfg.h : 1e-3 * s_max;
  const auto steps = static_cast<long>(std::ceil(s_max / h - 1e-9));
  const double hs = s_max / static_cast<double>(steps);

  GeodesicSolution sol;
  auto energy = [&](const PhaseState& st) { return lorentz_eval_at(spec, st.q, st.p); };
  auto record = [&](const PhaseState& st, double E) {
    sol.samples.push_back(st);
    sol.energy.push_back(E);
    sol.null_residuals.push_back(std::abs(E));
  };

  PhaseState st = init;
  double E0 = 0.0;
  try {
    if (cfg.null_projection) st.p = project_to_cone(spec, st.q, st.p);
    E0 = energy(st);
  } catch (const DomainError& e) {
    sol.termination = Termination::left_domain;
    sol.message = e.what();
    return sol;
  }
  record(st, E0);
  const double e_scale = std::max(std::abs(E0), init.p.squaredNorm());

  auto accel = [&](const Vec& q, const Vec& p) { return geodesic_accel(spec, {q, p, 0.0}, cfg.diff); };
  for (long k = 0; k < steps; ++k) {
    PhaseState next;
    double E = 0.0;
    try {
      const Vec& q = st.q;
      const Vec& p = st.p;
      const Vec k1q = p;
      const Vec k1p = accel(q, p);
      const Vec k2q = p + 0.5 * hs * k1p;
      const Vec k2p = accel(q + 0.5 * hs * k1q, k2q);
      const Vec k3q = p + 0.5 * hs * k2p;
      const Vec k3p = accel(q + 0.5 * hs * k2q, k3q);
      const Vec k4q = p + hs * k3p;
      const Vec k4p = accel(q + hs * k3q, k4q);
      next.q = q + hs / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
      next.p = p + hs / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
      next.s = init.s + static_cast<double>(k + 1) * hs;
      if (!next.q.allFinite() || !next.p.allFinite()) throw NumericalError("non-finite state");
      if (cfg.null_projection) next.p = project_to_cone(spec, next.q, next.p);
      E = energy(next);
    } catch (const DomainError& e) {
      sol.termination = Termination::left_domain;
      sol.message = e.what();
      return sol;
    } catch (const Error& e) {
      sol.termination = Termination::step_failure;
      sol.message = e.what();
      return sol;
    }
    if (E < E0 - cfg.domain_tol * e_scale && E < 0.0) {
      sol.termination = Termination::left_domain;
      sol.message = "velocity left the causal cone";
      return sol;
    }
    st = next;
    record(st, E);
    if (cfg.stop && cfg.stop(st)) break;
  }
  sol.termination = Termination::length_reached;
  return sol;
}

inline Vec shoot_exponential(const LorentzFinslerSpec& spec, const Vec& q0, const Vec& v0, double s,
                             const GeodesicConfig& cfg = {}) {
  const auto sol = integrate_geodesic(spec, {q0, v0, 0.0}, s, cfg);
  if (sol.termination != Termination::length_reached) {
    throw NumericalError(std::string("exponential map: integration stopped (") + to_string(sol.termination) +
                         "): " + sol.message);
  }
  return sol.samples.back().q;
}

// ---------------------------------------------------------------------------
// conjugate points

struct ConjugateReport {
  std::optional<double> first_conjugate_s;
  std::vector<std::pair<double, double>> det_trace;
};

struct ConjugateConfig {
  double eta = 1e-5;
  double h = 0.0;  // 0: 1e-3 * s_max
};

namespace detail {

/// Rotates the orthonormal columns of E to best match prev (orthogonal Procrustes).
inline Mat align_basis(const Mat& E, const Mat& prev) {
  if (prev.size() == 0) return E;
  Eigen::JacobiSVD<Mat> svd(E.transpose() * prev, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return E * (svd.matrixU() * svd.matrixV().transpose());
}

/// Orthonormal basis of ker(omega) intersected with the Euclidean complement of u.
inline Mat screen_basis(const Vec& omega, const Vec& u) {
  Mat c(u.size(), 2);
  c << omega, u;
  return orthogonal_complement(c);
}

}  // namespace detail

/// Determinant of the transverse differential of the exponential map along the
/// lightlike geodesic from (q0, v0), by forward differences of nearby lightlike
/// launches.
inline ConjugateReport conjugate_scan(const LorentzFinslerSpec& spec, const Vec& q0, const Vec& v0, double s_max,
                                      const ConjugateConfig& ccfg = {}) {
  const Eigen::Index N = q0.size();
  GeodesicConfig gcfg;
  gcfg.h = ccfg.h > 0.0 ? ccfg.h : 1e-3 * s_max;
  const auto base = integrate_geodesic(spec, {q0, v0, 0.0}, s_max, gcfg);
  if (base.termination != Termination::length_reached) {
    throw NumericalError(std::string("conjugate scan: base geodesic stopped: ") + base.message);
  }
  const Vec om0 = rough_hilbert_form(spec, q0(0), q0.tail(N - 1), v0);
  const Mat K = detail::screen_basis(om0, v0);
  const Eigen::Index m = K.cols();

  std::vector<GeodesicSolution> varied;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vec vj = project_to_cone(spec, q0, v0 + ccfg.eta * v0.norm() * K.col(j));
    varied.push_back(integrate_geodesic(spec, {q0, vj, 0.0}, s_max, gcfg));
    if (varied.back().termination != Termination::length_reached) {
      throw NumericalError("conjugate scan: varied geodesic stopped: " + varied.back().message);
    }
  }

  ConjugateReport rep;
  Mat E_prev;
  double det_prev = 0.0;
  for (std::size_t i = 1; i < base.samples.size(); ++i) {
    const auto& st = base.samples[i];
    const Vec om = rough_hilbert_form(spec, st.q(0), st.q.tail(N - 1), st.p);
    const Mat E = detail::align_basis(detail::screen_basis(om, st.p), E_prev);
    E_prev = E;
    Mat J(E.cols(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const Vec dq = (varied[static_cast<std::size_t>(j)].samples[i].q - st.q) / ccfg.eta;
      J.col(j) = E.transpose() * dq;
    }
    const double det = J.rows() == J.cols() ? J.determinant() : 0.0;
    rep.det_trace.emplace_back(st.s, det);
    if (i > 1 && !rep.first_conjugate_s && (det > 0.0) != (det_prev > 0.0)) {
      const double s_prev = base.samples[i - 1].s;
      rep.first_conjugate_s = s_prev + (st.s - s_prev) * det_prev / (det_prev - det);
    }
    det_prev = det;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// pregeodesics and lengths

/// Position at Euclidean arclength ell along a sampled curve (linear interpolation).
inline Vec point_at_length(const std::vector<Vec>& pts, const std::vector<double>& cum, double ell) {
  const auto it = std::lower_bound(cum.begin(), cum.end(), ell);
  if (it == cum.begin()) return pts.front();
  if (it == cum.end()) return pts.back();
  const auto i = static_cast<std::size_t>(it - cum.begin());
  const double w = (ell - cum[i - 1]) / std::max(cum[i] - cum[i - 1], 1e-300);
  return (1.0 - w) * pts[i - 1] + w * pts[i];
}

inline std::vector<double> cumulative_length(const std::vector<Vec>& pts) {
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  return cum;
}

/// Sup distance between the lightlike geodesic images of L1 and L2 from
/// (q0, v0), both parametrized by Euclidean arclength on [0, image_length].
inline double pregeodesic_distance(const LorentzFinslerSpec& L1, const LorentzFinslerSpec& L2, const Vec& q0,
                                   const Vec& v0, double s_max, double image_length = 1.0, int h_steps = 2000) {
  auto image = [&](const LorentzFinslerSpec& L) {
    GeodesicConfig cfg;
    cfg.h = s_max / h_steps;
    double travelled = 0.0;
    Vec last = q0;
    cfg.stop = [&](const PhaseState& st) {
      travelled += (st.q - last).norm();
      last = st.q;
      return travelled >= image_length * (1.0 + 1e-3);
    };
    const auto sol = integrate_geodesic(L, {q0, v0, 0.0}, s_max, cfg);
    if (sol.termination != Termination::length_reached) {
      throw NumericalError("pregeodesic_distance: integration stopped: " + sol.message);
    }
    std::vector<Vec> pts;
    for (const auto& st : sol.samples) pts.push_back(st.q);
    return pts;
  };
  const auto a = image(L1);
  const auto b = image(L2);
  const auto ca = cumulative_length(a);
  const auto cb = cumulative_length(b);
  if (ca.back() < image_length || cb.back() < image_length) {
    throw NumericalError("pregeodesic_distance: s_max too short for the requested image length");
  }
  double sup = 0.0;
  const int grid = 4 * h_steps;
  for (int k = 0; k <= grid; ++k) {
    const double ell = image_length * k / grid;
    sup = std::max(sup, (point_at_length(a, ca, ell) - point_at_length(b, cb, ell)).norm());
  }
  return sup;
}

/// F-length sum over segments of the polyline of the integral of sqrt(L), by
/// 5-point Gauss-Legendre per segment.
inline double causal_length(const LorentzFinslerSpec& spec, const std::vector<Vec>& polyline) {
  static constexpr std::array<double, 5> nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                 0.4786286704993665, 0.2369268850561891};
  double total = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Vec d = polyline[i] - polyline[i - 1];
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Vec q = polyline[i - 1] + 0.5 * (1.0 + nodes[k]) * d;
      const double L = lorentz_eval_at(spec, q, d);
      if (L < 0.0) throw DomainError("causal_length: segment is not causal");
      total += 0.5 * weights[k] * std::sqrt(L);
    }
  }
  return total;
}

}  // namespace conenav
