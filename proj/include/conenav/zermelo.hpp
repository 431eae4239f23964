#pragma once

// Time-dependent Zermelo navigation: arrival-time functional, lightlike lifts,
// the shooting solver on cone geodesics of the triple (dt, d/dt, Z), isochrones
// and a brute-force reachable-set oracle.

#include "conenav/cones.hpp"
#include "conenav/geodesics.hpp"
#include "conenav/parallel.hpp"

#include <cstdint>
#include <numeric>
#include <numbers>
#include <optional>
#include <queue>
#include <vector>

namespace conenav {

struct ZermeloScenario {
  FinslerSpec Z;
  double t0 = 0.0;
  Vec x_start;
  Vec target;
  double horizon = 10.0;

  int dim() const noexcept { return Z.dim; }
};

inline void validate_scenario(const ZermeloScenario& sc) {
  const int n = sc.dim();
  if (n < 1 || n > 3) throw ValidationError("scenario dimension must be 1, 2 or 3");
  if (sc.x_start.size() != n || sc.target.size() != n) throw ValidationError("start/target dimension mismatch");
  if (!(sc.horizon > 0.0)) throw ValidationError("horizon must be positive");
  std::vector<SamplePoint> pts;
  for (int k = 0; k <= 8; ++k) {
    const double t = sc.t0 + sc.horizon * k / 8.0;
    for (int j = 0; j <= 4; ++j) pts.push_back({t, sc.x_start + (sc.target - sc.x_start) * (j / 4.0)});
  }
  validate_finsler(sc.Z, pts);
}

// ---------------------------------------------------------------------------
// arrival time and lifts

namespace detail {

/// Times t_i at each sample of the path, integrating dt/dsigma = Z(t, beta, beta')
/// along chords with RK4.
inline std::vector<double> path_times(const FinslerSpec& Z, const std::vector<Vec>& path, double t0,
                                      int min_total_steps = 2000) {
  if (path.size() < 2) throw ValidationError("path needs at least two samples");
  const std::size_t segs = path.size() - 1;
  const int sub = std::max(1, static_cast<int>((min_total_steps + segs - 1) / segs));
  std::vector<double> times{t0};
  double t = t0;
  for (std::size_t i = 0; i < segs; ++i) {
    const Vec d = path[i + 1] - path[i];
    if (d.squaredNorm() == 0.0) {
      times.push_back(t);
      continue;
    }
    const double hs = 1.0 / sub;
    auto f = [&](double tt, double sigma) { return finsler_eval(Z, tt, Vec(path[i] + sigma * d), d); };
    for (int k = 0; k < sub; ++k) {
      const double s0 = k * hs;
      const double k1 = f(t, s0);
      const double k2 = f(t + 0.5 * hs * k1, s0 + 0.5 * hs);
      const double k3 = f(t + 0.5 * hs * k2, s0 + 0.5 * hs);
      const double k4 = f(t + hs * k3, s0 + hs);
      t += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    times.push_back(t);
  }
  return times;
}

}  // namespace detail

/// Travel time of the lightlike lift of a sampled spatial path (piecewise linear).
inline double arrival_time(const FinslerSpec& Z, const std::vector<Vec>& path, double t0) {
  return detail::path_times(Z, path, t0).back() - t0;
}

/// Events (t(s_i), beta(s_i)) of the lightlike lift.
inline std::vector<Vec> lift_to_lightlike(const FinslerSpec& Z, const std::vector<Vec>& path, double t0) {
  const auto times = detail::path_times(Z, path, t0);
  std::vector<Vec> out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    Vec e(path[i].size() + 1);
    e(0) = times[i];
    e.tail(path[i].size()) = path[i];
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// shooting

struct NavigationConfig {
  int fan = 64;
  double tol = 1e-8;
  int max_iter = 80;
  int fan_steps = 400;
  int refine_steps = 2000;
  bool conjugate = true;
};

struct Candidate {
  Vec heading;  // unit spatial launch direction
  double arrival = 0.0;
  double miss = 0.0;
};

struct NavigationResult {
  double arrival_time = 0.0;
  std::vector<double> times;
  std::vector<Vec> trajectory;
  std::vector<Vec> headings;
  std::vector<double> z_values;
  std::vector<double> null_residuals;
  double terminal_miss = 0.0;
  Vec launch;  // lightlike initial velocity of the winner
  ConjugateReport conjugate;
  std::vector<Candidate> candidates;
};

namespace detail {

struct Approach {
  double miss = 0.0;         // Euclidean distance at closest approach
  double signed_miss = 0.0;  // 2-D: side of the target relative to the path
  Vec residual;              // target - x at closest approach
  Vec tangent;
  double time = 0.0;  // event time at closest approach
  std::size_t index = 0;  // sample before the closest approach
  double sigma = 0.0;     // local parameter in [0, 1] on that step
};

inline double cross2(const Vec& a, const Vec& b) { return a(0) * b(1) - a(1) * b(0); }

/// Cubic Hermite interpolation of the event on step i at local parameter sigma.
inline Vec hermite_event(const GeodesicSolution& sol, std::size_t i, double sigma) {
  const auto& a = sol.samples[i];
  const auto& b = sol.samples[i + 1];
  const double h = b.s - a.s;
  const double s2 = sigma * sigma;
  const double s3 = s2 * sigma;
  return (2 * s3 - 3 * s2 + 1) * a.q + (s3 - 2 * s2 + sigma) * h * a.p + (-2 * s3 + 3 * s2) * b.q +
         (s3 - s2) * h * b.p;
}

inline Vec hermite_velocity(const GeodesicSolution& sol, std::size_t i, double sigma) {
  const auto& a = sol.samples[i];
  const auto& b = sol.samples[i + 1];
  const double h = b.s - a.s;
  const double s2 = sigma * sigma;
  return ((6 * s2 - 6 * sigma) * a.q + (3 * s2 - 4 * sigma + 1) * h * a.p + (-6 * s2 + 6 * sigma) * b.q +
          (3 * s2 - 2 * sigma) * h * b.p) /
         h;
}

inline Approach closest_approach(const GeodesicSolution& sol, const Vec& target) {
  const auto n = target.size();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sol.samples.size(); ++i) {
    const double d = (sol.samples[i].q.tail(n) - target).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  Approach ap;
  if (sol.samples.size() < 2) {
    ap.index = 0;
    ap.sigma = 0.0;
  } else {
    // Search the two steps adjacent to the best sample.
    const std::size_t lo = best == 0 ? 0 : best - 1;
    const std::size_t hi = std::min(best, sol.samples.size() - 2);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = lo; i <= hi; ++i) {
      auto dist = [&](double s) { return (hermite_event(sol, i, s).tail(n) - target).squaredNorm(); };
      const double s = golden_section_min(dist, 0.0, 1.0, 1e-14);
      const double d = dist(s);
      if (d < dmin) {
        dmin = d;
        ap.index = i;
        ap.sigma = s;
      }
    }
  }
  const Vec e = sol.samples.size() < 2 ? sol.samples[0].q : hermite_event(sol, ap.index, ap.sigma);
  const Vec v = sol.samples.size() < 2 ? sol.samples[0].p : hermite_velocity(sol, ap.index, ap.sigma);
  ap.time = e(0);
  ap.residual = target - e.tail(n);
  ap.miss = ap.residual.norm();
  ap.tangent = v.tail(n);
  ap.signed_miss = n == 2 ? (cross2(ap.tangent, ap.residual) >= 0.0 ? ap.miss : -ap.miss) : ap.miss;
  return ap;
}

}  // namespace detail

class NavigationSolver {
 public:
  NavigationSolver(const ZermeloScenario& sc, const NavigationConfig& cfg)
      : sc_(sc), cfg_(cfg), triple_(static_triple(sc.Z)), spec_(make_triple_g(triple_)) {
    q0_.resize(sc.dim() + 1);
    q0_(0) = sc.t0;
    q0_.tail(sc.dim()) = sc.x_start;
  }

  const LorentzFinslerSpec& spec() const { return spec_; }
  const Vec& q0() const { return q0_; }

  Vec launch(const Vec& heading) const { return lightlike_over(triple_, sc_.t0, sc_.x_start, heading); }

  /// Integrates the cone geodesic with the given unit heading up to t0 + horizon.
  /// A geodesic that leaves the domain (e.g. into strong wind) is kept up to
  /// its last valid sample.
  GeodesicSolution shoot(const Vec& heading, int steps) const {
    const Vec v = launch(heading);
    const double p0 = v(0);
    GeodesicConfig gc;
    gc.h = sc_.horizon / (steps * p0);
    const double t_end = sc_.t0 + sc_.horizon;
    gc.stop = [t_end](const PhaseState& st) { return st.q(0) >= t_end; };
    auto sol = integrate_geodesic(spec_, {q0_, v, 0.0}, 50.0 * sc_.horizon / p0, gc);
    if (sol.samples.size() < 2) throw NumericalError("navigation: cone geodesic stopped at launch: " + sol.message);
    return sol;
  }

  detail::Approach approach(const Vec& heading, int steps) const {
    return detail::closest_approach(shoot(heading, steps), sc_.target);
  }

  static Vec heading_2d(double th) {
    Vec d(2);
    d << std::cos(th), std::sin(th);
    return d;
  }

  static Vec heading_3d(double th, double ph) {
    Vec d(3);
    d << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
    return d;
  }

  NavigationResult solve() const {
    const int n = sc_.dim();
    const double scale = std::max(1.0, (sc_.target - sc_.x_start).norm());
    const double tol = cfg_.tol * scale;
    std::vector<Candidate> cands;

    if (n == 1) {
      for (double sgn : {1.0, -1.0}) {
        Vec d(1);
        d << sgn;
        const auto ap = approach(d, cfg_.refine_steps);
        if (ap.miss <= tol) cands.push_back({d, ap.time - sc_.t0, ap.miss});
      }
    } else if (n == 2) {
      cands = solve_2d(tol);
    } else {
      cands = solve_3d(tol);
    }
    if (cands.empty()) {
      throw UnreachableError("no fan member approaches the target within the capture radius by the horizon");
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.arrival < b.arrival;
    });
    // Deduplicate converged headings.
    std::vector<Candidate> unique;
    for (const auto& c : cands) {
      bool dup = false;
      for (const auto& u : unique) dup = dup || (c.heading - u.heading).norm() < 1e-6;
      if (!dup) unique.push_back(c);
    }
    return finish(unique);
  }

 private:
  std::vector<Candidate> solve_2d(double tol) const {
    const int m = cfg_.fan;
    const double pi = std::numbers::pi;
    std::vector<detail::Approach> fan(static_cast<std::size_t>(m));
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t k) {
      fan[k] = approach(heading_2d(2.0 * pi * static_cast<double>(k) / m), cfg_.fan_steps);
    });
    const double capture = 2.0 * (2.0 * pi / m) * sc_.horizon;
    std::vector<std::pair<double, double>> brackets;
    std::vector<Candidate> out;
    for (int k = 0; k < m; ++k) {
      const auto& a = fan[static_cast<std::size_t>(k)];
      const auto& b = fan[static_cast<std::size_t>((k + 1) % m)];
      if (a.time > sc_.t0 && a.miss <= tol) {
        // Fan member already on target; confirm at refinement resolution.
        const Vec d = heading_2d(2.0 * pi * k / m);
        const auto ap = approach(d, cfg_.refine_steps);
        if (ap.miss <= tol) out.push_back({d, ap.time - sc_.t0, ap.miss});
      }
      if (a.miss > capture || b.miss > capture) continue;
      // Headings pointing away from the target have their closest approach at the start.
      if (a.time <= sc_.t0 || b.time <= sc_.t0) continue;
      if ((a.signed_miss > 0.0) != (b.signed_miss > 0.0)) {
        brackets.emplace_back(2.0 * pi * k / m, 2.0 * pi * (k + 1) / m);
      }
    }
    std::vector<std::optional<Candidate>> found(brackets.size());
    parallel_for(brackets.size(), [&](std::size_t i) { found[i] = refine_2d(brackets[i].first, brackets[i].second, tol); });
    for (const auto& f : found) {
      if (f) out.push_back(*f);
    }
    return out;
  }

  /// Illinois regula falsi on the heading angle.
  std::optional<Candidate> refine_2d(double a, double b, double tol) const {
    auto eval = [&](double th) { return approach(heading_2d(th), cfg_.refine_steps); };
    auto fa_ap = eval(a);
    auto fb_ap = eval(b);
    double fa = fa_ap.signed_miss;
    double fb = fb_ap.signed_miss;
    if ((fa > 0.0) == (fb > 0.0)) return std::nullopt;
    int side = 0;
    for (int it = 0; it < cfg_.max_iter; ++it) {
      double c = (a * fb - b * fa) / (fb - fa);
      if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
      const auto ap = eval(c);
      if (ap.miss <= tol) return Candidate{heading_2d(c), ap.time - sc_.t0, ap.miss};
      if (std::abs(b - a) < 1e-15) break;
      const double fc = ap.signed_miss;
      if ((fc > 0.0) == (fb > 0.0)) {
        b = c;
        fb = fc;
        if (side == -1) fa *= 0.5;
        side = -1;
      } else {
        a = c;
        fa = fc;
        if (side == 1) fb *= 0.5;
        side = 1;
      }
    }
    return std::nullopt;
  }

  std::vector<Candidate> solve_3d(double tol) const {
    const auto dirs = unit_directions(3, cfg_.fan);
    std::vector<detail::Approach> fan(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t k) { fan[k] = approach(dirs[k], cfg_.fan_steps); });
    std::vector<std::size_t> order(dirs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      return fan[i].miss < fan[j].miss || (fan[i].miss == fan[j].miss && i < j);
    });
    const double capture = 2.0 * std::sqrt(4.0 * std::numbers::pi / cfg_.fan) * sc_.horizon;
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < order.size() && starts.size() < 3; ++i) {
      if (fan[order[i]].miss <= capture) starts.push_back(order[i]);
    }
    std::vector<std::optional<Candidate>> found(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) { found[i] = refine_3d(dirs[starts[i]], tol); });
    std::vector<Candidate> out;
    for (const auto& f : found) {
      if (f) out.push_back(*f);
    }
    return out;
  }

  /// Damped Newton on (theta, phi) with a finite-difference Jacobian of the
  /// miss vector projected orthogonally to the path tangent.
  std::optional<Candidate> refine_3d(const Vec& start, double tol) const {
    double th = std::acos(std::clamp(start(2), -1.0, 1.0));
    double ph = std::atan2(start(1), start(0));
    auto residual = [&](double a, double b, const Mat& E, detail::Approach* out) {
      const auto ap = approach(heading_3d(a, b), cfg_.refine_steps);
      if (out) *out = ap;
      return Vec(E.transpose() * ap.residual);
    };
    for (int it = 0; it < cfg_.max_iter; ++it) {
      detail::Approach ap = approach(heading_3d(th, ph), cfg_.refine_steps);
      if (ap.miss <= tol) return Candidate{heading_3d(th, ph), ap.time - sc_.t0, ap.miss};
      const Mat E = orthogonal_complement(ap.tangent);
      const Vec r = E.transpose() * ap.residual;
      const double hd = 1e-6;
      Mat J(2, 2);
      J.col(0) = (residual(th + hd, ph, E, nullptr) - residual(th - hd, ph, E, nullptr)) / (2 * hd);
      J.col(1) = (residual(th, ph + hd, E, nullptr) - residual(th, ph - hd, E, nullptr)) / (2 * hd);
      const Vec step = J.fullPivLu().solve(-r);
      if (!step.allFinite()) return std::nullopt;
      double lam = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls, lam *= 0.5) {
        detail::Approach trial;
        residual(th + lam * step(0), ph + lam * step(1), E, &trial);
        if (trial.miss < ap.miss) {
          th += lam * step(0);
          ph += lam * step(1);
          moved = true;
          break;
        }
      }
      if (!moved) return std::nullopt;
    }
    return std::nullopt;
  }

  NavigationResult finish(const std::vector<Candidate>& cands) const {
    const int n = sc_.dim();
    const auto& win = cands.front();
    const auto sol = shoot(win.heading, cfg_.refine_steps);
    const auto ap = detail::closest_approach(sol, sc_.target);

    NavigationResult res;
    res.candidates = cands;
    res.launch = launch(win.heading);
    res.arrival_time = ap.time - sc_.t0;
    res.terminal_miss = ap.miss;

    auto push = [&](const Vec& e, const Vec& vel) {
      const double t = e(0);
      const Vec x = e.tail(n);
      const Vec xdot = vel.tail(n);
      Vec heading = xdot;
      if (const auto* zd = std::get_if<finsler::ZermeloData>(&sc_.Z.data)) {
        heading = xdot / vel(0) - zd->W.eval(t, x);
      }
      res.times.push_back(t);
      res.trajectory.push_back(x);
      res.headings.push_back(heading / heading.norm());
      res.z_values.push_back(finsler_eval(sc_.Z, t, x, xdot));
      res.null_residuals.push_back(std::abs(lorentz_eval(spec_, t, x, vel)));
    };
    for (std::size_t i = 0; i <= ap.index && i < sol.samples.size(); ++i) {
      push(sol.samples[i].q, sol.samples[i].p);
    }
    if (sol.samples.size() >= 2 && ap.sigma > 0.0) {
      push(detail::hermite_event(sol, ap.index, ap.sigma), detail::hermite_velocity(sol, ap.index, ap.sigma));
    }
    if (cfg_.conjugate && n >= 2) {
      const double s_end = sol.samples[ap.index].s + ap.sigma * (sol.samples.size() >= 2
                                                                     ? sol.samples[ap.index + 1].s -
                                                                           sol.samples[ap.index].s
                                                                     : 0.0);
      ConjugateConfig cc;
      cc.h = s_end / cfg_.refine_steps;
      res.conjugate = conjugate_scan(spec_, q0_, res.launch, s_end, cc);
    }
    return res;
  }

  ZermeloScenario sc_;
  NavigationConfig cfg_;
  ConeTriple triple_;
  LorentzFinslerSpec spec_;
  Vec q0_;
};

inline NavigationResult solve_navigation(const ZermeloScenario& sc, const NavigationConfig& cfg = {}) {
  validate_scenario(sc);
  if ((sc.target - sc.x_start).norm() == 0.0) throw ValidationError("target equals the start point");
  return NavigationSolver(sc, cfg).solve();
}

// ---------------------------------------------------------------------------
// isochrones

/// Fronts at the requested times: positions of K fan geodesics, located by
/// Hermite inversion of the event time.
inline std::vector<std::vector<Vec>> isochrones(const ZermeloScenario& sc, const std::vector<double>& times,
                                                int K = 256, int steps = 2000) {
  validate_scenario(sc);
  if (times.empty()) return {};
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ValidationError("isochrone times must be increasing");
  }
  if (!(times.front() > 0.0) || times.back() > sc.horizon) {
    throw ValidationError("isochrone times must lie in (0, horizon]");
  }
  ZermeloScenario s2 = sc;
  s2.horizon = times.back() * (1.0 + 1e-6);
  const NavigationSolver solver(s2, {});
  const int n = sc.dim();
  std::vector<Vec> dirs = n == 2 ? std::vector<Vec>{} : unit_directions(n, n == 1 ? 2 : K);
  if (n == 2) {
    for (int k = 0; k < K; ++k) dirs.push_back(NavigationSolver::heading_2d(2.0 * std::numbers::pi * k / K));
  }
  std::vector<std::vector<Vec>> per_dir(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t k) {
    const auto sol = solver.shoot(dirs[k], steps);
    std::size_t i = 0;
    for (double tr : times) {
      const double target_t = sc.t0 + tr;
      while (i + 1 < sol.samples.size() && sol.samples[i + 1].q(0) < target_t) ++i;
      if (i + 1 >= sol.samples.size()) throw NumericalError("isochrone: geodesic ended before the requested time");
      auto f = [&](double s) { return detail::hermite_event(sol, i, s)(0) - target_t; };
      const double sigma = f(0.0) >= 0.0 ? 0.0 : bracketed_root(f, 0.0, 1.0);
      per_dir[k].push_back(detail::hermite_event(sol, i, sigma).tail(n));
    }
  });
  std::vector<std::vector<Vec>> fronts(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    for (const auto& pd : per_dir) fronts[j].push_back(pd[j]);
  }
  return fronts;
}

// ---------------------------------------------------------------------------
// brute-force oracle

struct OracleConfig {
  double dx = 0.02;
  double dt = 0.0;  // 0: dx / (max sampled speed)
  int m = 64;
  Vec box_lo;
  Vec box_hi;
};

/// Maximum ground speed 1 / Z(t, x, u) over sampled unit headings.
inline double max_speed(const FinslerSpec& Z, double t, const Vec& x, int m) {
  double best = 0.0;
  for (const auto& d : unit_directions(Z.dim, Z.dim == 1 ? 2 : m)) best = std::max(best, 1.0 / finsler_eval(Z, t, x, d));
  return best;
}

namespace detail {

/// Primitive integer offsets with max-norm <= r (gcd of the entries is 1).
inline std::vector<std::vector<long>> primitive_offsets(int n, long r) {
  std::vector<std::vector<long>> out;
  std::vector<long> c(static_cast<std::size_t>(n), -r);
  for (;;) {
    long g = 0;
    for (long v : c) g = std::gcd(g, std::abs(v));
    if (g == 1) out.push_back(c);
    int i = 0;
    while (i < n && c[static_cast<std::size_t>(i)] == r) c[static_cast<std::size_t>(i++)] = -r;
    if (i == n) break;
    ++c[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace detail

/// First arrival time at the target by reachable-set propagation on the grid
/// graph: nodes are grid points, moves follow a stencil of at least m
/// primitive lattice headings (straight segments of one or more cells), and
/// each move is timed by integrating dt/dsigma = Z along it from its departure
/// time in substeps of length <= vmax * dt. Label-setting in order of arrival,
/// so the first time a node is reached is exact over stencil paths. The start
/// and target connect to every node within the stencil radius.
inline double dp_oracle(const ZermeloScenario& sc, const OracleConfig& cfg) {
  validate_scenario(sc);
  const int n = sc.dim();
  if (cfg.box_lo.size() != n || cfg.box_hi.size() != n) throw ValidationError("oracle box dimension mismatch");
  if (!(cfg.dx > 0.0)) throw ValidationError("oracle dx must be positive");
  for (int i = 0; i < n; ++i) {
    for (const Vec* p : {&sc.x_start, &sc.target}) {
      if ((*p)(i) < cfg.box_lo(i) || (*p)(i) > cfg.box_hi(i)) {
        throw ValidationError("start and target must lie inside the oracle box");
      }
    }
  }

  // Speed bound over the box corners, centre and start, sampled over the horizon.
  double vmax = 0.0;
  for (int k = 0; k <= 16; ++k) {
    const double t = sc.t0 + sc.horizon * k / 16.0;
    vmax = std::max(vmax, max_speed(sc.Z, t, sc.x_start, 256));
    vmax = std::max(vmax, max_speed(sc.Z, t, 0.5 * (cfg.box_lo + cfg.box_hi), 256));
    vmax = std::max(vmax, max_speed(sc.Z, t, cfg.box_lo, 256));
    vmax = std::max(vmax, max_speed(sc.Z, t, cfg.box_hi, 256));
  }
  const double dt = cfg.dt > 0.0 ? cfg.dt : cfg.dx / vmax;
  if (dt > cfg.dx / vmax * (1.0 + 1e-12)) throw ValidationError("oracle time step violates dt <= dx / max speed");
  const double sub_len = vmax * dt;

  long r = 1;
  std::vector<std::vector<long>> stencil = n == 1 ? std::vector<std::vector<long>>{{-1}, {1}}
                                                  : detail::primitive_offsets(n, r);
  while (n > 1 && static_cast<int>(stencil.size()) < cfg.m) stencil = detail::primitive_offsets(n, ++r);
  const double radius = static_cast<double>(r) * cfg.dx * std::sqrt(static_cast<double>(n)) * (1.0 + 1e-12);

  std::vector<long> shape(static_cast<std::size_t>(n));
  long total = 1;
  for (int i = 0; i < n; ++i) {
    shape[static_cast<std::size_t>(i)] = static_cast<long>(std::floor((cfg.box_hi(i) - cfg.box_lo(i)) / cfg.dx)) + 1;
    total *= shape[static_cast<std::size_t>(i)];
  }
  auto coords_of = [&](long idx) {
    std::vector<long> c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      c[static_cast<std::size_t>(i)] = idx % shape[static_cast<std::size_t>(i)];
      idx /= shape[static_cast<std::size_t>(i)];
    }
    return c;
  };
  auto index_of = [&](const std::vector<long>& c) -> long {
    long idx = 0;
    for (int i = n - 1; i >= 0; --i) {
      const long ci = c[static_cast<std::size_t>(i)];
      if (ci < 0 || ci >= shape[static_cast<std::size_t>(i)]) return -1;
      idx = idx * shape[static_cast<std::size_t>(i)] + ci;
    }
    return idx;
  };
  auto position = [&](const std::vector<long>& c) {
    Vec y(n);
    for (int i = 0; i < n; ++i) y(i) = cfg.box_lo(i) + static_cast<double>(c[static_cast<std::size_t>(i)]) * cfg.dx;
    return y;
  };
  // Arrival time after the straight move y -> y + D departing at t.
  auto move = [&](double t, const Vec& y, const Vec& D) {
    const double len = D.norm();
    const int sub = std::max(1, static_cast<int>(std::ceil(len / sub_len - 1e-12)));
    const double hs = 1.0 / sub;
    auto f = [&](double tt, double sigma) { return finsler_eval(sc.Z, tt, Vec(y + sigma * D), D); };
    for (int k = 0; k < sub; ++k) {
      const double s0 = k * hs;
      const double k1 = f(t, s0);
      const double k2 = f(t + 0.5 * hs * k1, s0 + 0.5 * hs);
      const double k3 = f(t + 0.5 * hs * k2, s0 + 0.5 * hs);
      const double k4 = f(t + hs * k3, s0 + hs);
      t += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return t;
  };
  // Nodes within the stencil radius of a point.
  auto nodes_near = [&](const Vec& p) {
    std::vector<long> lo(static_cast<std::size_t>(n)), c(static_cast<std::size_t>(n));
    const long span = r + 1;
    for (int i = 0; i < n; ++i) {
      lo[static_cast<std::size_t>(i)] = static_cast<long>(std::floor((p(i) - cfg.box_lo(i)) / cfg.dx)) - span + 1;
    }
    std::vector<long> out;
    long count = 1;
    for (int i = 0; i < n; ++i) count *= 2 * span;
    for (long k = 0; k < count; ++k) {
      long kk = k;
      for (int i = 0; i < n; ++i) {
        c[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] + kk % (2 * span);
        kk /= 2 * span;
      }
      const long idx = index_of(c);
      if (idx >= 0 && (position(c) - p).norm() <= radius) out.push_back(idx);
    }
    return out;
  };

  const double t_end = sc.t0 + sc.horizon;
  const long target_id = total;  // pseudo-node
  std::vector<double> best(static_cast<std::size_t>(total + 1), std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> settled(static_cast<std::size_t>(total + 1), 0);
  using Item = std::pair<double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto relax = [&](long id, double t) {
    if (t < best[static_cast<std::size_t>(id)]) {
      best[static_cast<std::size_t>(id)] = t;
      heap.emplace(t, id);
    }
  };

  const Vec to_target = sc.target - sc.x_start;
  if (to_target.norm() == 0.0) return 0.0;
  if (to_target.norm() <= radius) relax(target_id, move(sc.t0, sc.x_start, to_target));
  for (long id : nodes_near(sc.x_start)) {
    const Vec y = position(coords_of(id));
    relax(id, (y - sc.x_start).norm() == 0.0 ? sc.t0 : move(sc.t0, sc.x_start, Vec(y - sc.x_start)));
  }
  std::vector<std::uint8_t> near_target(static_cast<std::size_t>(total), 0);
  for (long id : nodes_near(sc.target)) near_target[static_cast<std::size_t>(id)] = 1;

  std::vector<Vec> steps;
  for (const auto& o : stencil) {
    Vec D(n);
    for (int i = 0; i < n; ++i) D(i) = static_cast<double>(o[static_cast<std::size_t>(i)]) * cfg.dx;
    steps.push_back(D);
  }
  while (!heap.empty()) {
    const auto [t, id] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(id)]) continue;
    settled[static_cast<std::size_t>(id)] = 1;
    if (t > t_end) break;
    if (id == target_id) return t - sc.t0;
    const auto c = coords_of(id);
    const Vec y = position(c);
    if (near_target[static_cast<std::size_t>(id)]) {
      const Vec D = sc.target - y;
      relax(target_id, D.norm() == 0.0 ? t : move(t, y, D));
    }
    std::vector<long> c2(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < stencil.size(); ++k) {
      for (int i = 0; i < n; ++i) c2[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)] + stencil[k][static_cast<std::size_t>(i)];
      const long id2 = index_of(c2);
      if (id2 < 0 || settled[static_cast<std::size_t>(id2)]) continue;
      relax(id2, move(t, y, steps[k]));
    }
  }
  throw UnreachableError("oracle: target not reached within the horizon");
}

// ---------------------------------------------------------------------------
// bounds

inline ConditionReport bounds_check(const FinslerSpec& Z, const FinslerSpec& Z_lower, const FinslerSpec& Z_upper,
                                    const std::vector<double>& times, const std::vector<Vec>& points,
                                    int directions = 16) {
  if (Z.dim != Z_lower.dim || Z.dim != Z_upper.dim) throw ValidationError("bounds_check: dimension mismatch");
  ConditionReport rep;
  for (double t : times) {
    for (const auto& x : points) {
      for (const auto& d : unit_directions(Z.dim, Z.dim == 1 ? 2 : directions)) {
        const double z = finsler_eval(Z, t, x, d);
        const double lo = z - finsler_eval(Z_lower, t, x, d);
        const double hi = finsler_eval(Z_upper, t, x, d) - z;
        const double tol = 1e-12 * std::max(1.0, z);
        rep.add("lower_bound", t, x, d, lo >= -tol, lo);
        rep.add("upper_bound", t, x, d, hi >= -tol, hi);
      }
    }
  }
  return rep;
}

}  // namespace conenav
