#pragma once

// Property suites over the reference catalog. Shared by the CLI self-test
// (small sample counts) and the acceptance run (full counts). Every sample
// draws from its own seeded generator and results are reduced in index order,
// so outcomes do not depend on the thread count.

#include "conenav/catalog.hpp"
#include "conenav/cones.hpp"
#include "conenav/geodesics.hpp"
#include "conenav/parallel.hpp"
#include "conenav/smoothing.hpp"

#include <numbers>

namespace conenav {

struct SuiteResult {
  std::string name;
  bool pass = true;
  long samples = 0;
  double worst = 0.0;  // worst observed value of the suite's metric
  double bound = 0.0;  // acceptance bound for worst
  std::vector<std::pair<std::string, double>> values;
  std::string note;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t k) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + k);
}

inline const NamedSpec& find_spec(const std::vector<NamedSpec>& cat, const std::string& name) {
  for (const auto& ns : cat) {
    if (ns.name == name) return ns;
  }
  throw ValidationError("catalog has no spec named '" + name + "'");
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace detail

/// Closed-form tensors and angular metrics against the numeric Hessian oracle.
inline SuiteResult suite_tensor_oracle(std::uint64_t seed, int per_family) {
  const auto cat = reference_specs();
  const std::vector<std::string> families{"omega_minus_randers", "omega_minus_ppower", "sum_of_roots", "product_root",
                                          "bogoslovsky"};
  SuiteResult res{"tensor_oracle", true, 0, 0.0, 1e-6, {}, ""};
  for (std::size_t f = 0; f < families.size(); ++f) {
    const auto& ns = detail::find_spec(cat, families[f]);
    std::vector<double> err(static_cast<std::size_t>(per_family), 0.0);
    parallel_for(err.size(), [&](std::size_t k) {
      CausalSampler S(detail::sample_seed(seed, 100 + f, k));
      const bool cone = ns.tensor_on_cone && k % 3 == 0;
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec v = S.sample(ns, t, x, cone);
      DiffConfig cfg;
      cfg.richardson = true;
      const Mat g = lf_tensor_matrix(ns.spec, t, x, v);
      const Mat go = lf_tensor_oracle(ns.spec, t, x, v, cfg).matrix;
      double e = rel_frobenius(g, go);
      if (!cone) {
        const double L = lorentz_eval(ns.spec, t, x, v);
        const Mat h = angular_metric({g, t, x, v}, v, L).matrix;
        const Mat ho = angular_metric({go, t, x, v}, v, L).matrix;
        e = std::max(e, rel_frobenius(h, ho));
      }
      err[k] = e;
    });
    const double w = detail::max_of(err);
    res.values.emplace_back(families[f], w);
    res.worst = std::max(res.worst, w);
    res.samples += per_family;
  }
  res.pass = res.worst <= res.bound;
  return res;
}

/// Signature (1, N-1, 0) and the pointwise Lorentzian characterization at
/// interior and cone samples over the whole catalog.
inline SuiteResult suite_signature(std::uint64_t seed, int total) {
  const auto cat = reference_specs();
  const int per = (total + static_cast<int>(cat.size()) - 1) / static_cast<int>(cat.size());
  SuiteResult res{"signature", true, 0, 0.0, 0.0, {}, "worst = number of failing samples"};
  for (std::size_t s = 0; s < cat.size(); ++s) {
    const auto& ns = cat[s];
    std::vector<double> bad(static_cast<std::size_t>(per), 0.0);
    parallel_for(bad.size(), [&](std::size_t k) {
      CausalSampler S(detail::sample_seed(seed, 200 + s, k));
      const bool cone = ns.tensor_on_cone && k % 2 == 1;
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec v = S.sample(ns, t, x, cone);
      const bool ok = signature(lf_tensor_matrix(ns.spec, t, x, v)) == Signature{1, ns.spec.dim - 1, 0, 0} &&
                      check_lorentz_at(ns.spec, t, x, v).overall;
      bad[k] = ok ? 0.0 : 1.0;
    });
    double n_bad = 0.0;
    for (double b : bad) n_bad += b;
    res.values.emplace_back(ns.name, n_bad);
    res.worst += n_bad;
    res.samples += per;
  }
  res.pass = res.worst == 0.0;
  return res;
}

/// Reverse triangle and reverse Cauchy-Schwarz inequalities on random causal
/// pairs; worst is the largest violation relative to the pair scale.
inline SuiteResult suite_reverse_inequalities(std::uint64_t seed, int total) {
  const auto cat = reference_specs();
  const int per = (total + static_cast<int>(cat.size()) - 1) / static_cast<int>(cat.size());
  SuiteResult res{"reverse_inequalities", true, 0, 0.0, 1e-9, {}, ""};
  double near_equal_noncollinear = 0.0;
  double collinear_gap = 0.0;
  double collinear_cs = 0.0;  // g_v(v, v) = F(v)^2 holds to tensor accuracy (numeric tensors: 1e-6)
  for (std::size_t s = 0; s < cat.size(); ++s) {
    const auto& ns = cat[s];
    std::vector<double> viol(static_cast<std::size_t>(per), 0.0);
    std::vector<double> suspicious(static_cast<std::size_t>(per), 0.0);
    std::vector<double> equal_gap(static_cast<std::size_t>(per), 0.0);
    std::vector<double> equal_cs(static_cast<std::size_t>(per), 0.0);
    parallel_for(viol.size(), [&](std::size_t k) {
      CausalSampler S(detail::sample_seed(seed, 300 + s, k));
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec v = S.sample(ns, t, x, false);
      const Vec w = S.sample(ns, t, x, false);
      auto F = [&](const Vec& u) { return std::sqrt(lorentz_eval(ns.spec, t, x, u)); };
      const double Fv = F(v);
      const double Fw = F(w);
      const double scale = Fv * Fw + (v.norm() + w.norm()) * (v.norm() + w.norm());
      const double tri = (F(v + w) - Fv - Fw) / scale;
      const double cs = (v.dot(lf_tensor_matrix(ns.spec, t, x, v) * w) - Fv * Fw) / scale;
      viol[k] = std::max({0.0, -tri, -cs});
      const double cosang = v.dot(w) / (v.norm() * w.norm());
      if (std::min(tri, cs) <= 1e-9 && cosang < 1.0 - 1e-8) suspicious[k] = 1.0;
      // Equality along a ray.
      const Vec u = S.uniform(0.5, 3.0) * v;
      const double Fu = F(u);
      const double su = Fv * Fu + (v.norm() + u.norm()) * (v.norm() + u.norm());
      equal_gap[k] = std::abs(F(v + u) - Fv - Fu) / su;
      equal_cs[k] = std::abs(v.dot(lf_tensor_matrix(ns.spec, t, x, v) * u) - Fv * Fu) / (Fv * Fu);
    });
    const double w = detail::max_of(viol);
    res.values.emplace_back(ns.name, w);
    res.worst = std::max(res.worst, w);
    for (double q : suspicious) near_equal_noncollinear += q;
    collinear_gap = std::max(collinear_gap, detail::max_of(equal_gap));
    collinear_cs = std::max(collinear_cs, detail::max_of(equal_cs));
    res.samples += per;
  }
  res.values.emplace_back("near_equality_noncollinear", near_equal_noncollinear);
  res.values.emplace_back("collinear_triangle_gap", collinear_gap);
  res.values.emplace_back("collinear_cauchy_schwarz_gap", collinear_cs);
  res.pass = res.worst <= res.bound && near_equal_noncollinear == 0.0 && collinear_gap <= 1e-9 && collinear_cs <= 1e-6;
  return res;
}

/// Lightlike pregeodesics of L and mu L coincide; the anisotropic factor
/// recovers mu at interior and cone samples.
inline SuiteResult suite_anisotropic(std::uint64_t seed, int factor_samples) {
  SuiteResult res{"anisotropic_invariance", true, 0, 0.0, 1e-4, {}, "worst = pregeodesic distance"};
  const auto mu = reference_mu(3);
  const auto cat = reference_specs();
  const std::vector<std::pair<std::string, LorentzFinslerSpec>> bases{
      {"minkowski", minkowski(3)},
      {"round_sphere", round_sphere_spacetime()},
      {"omega_minus_randers", detail::find_spec(cat, "omega_minus_randers").spec}};
  const Vec q0 = vec3(0, -1, 0);
  const std::vector<double> angles{0.3, 1.9, 4.0};
  std::vector<double> dist(bases.size() * angles.size(), 0.0);
  parallel_for(dist.size(), [&](std::size_t i) {
    const auto& L = bases[i / angles.size()].second;
    const double a = angles[i % angles.size()];
    const auto ref = cone_reference(L, 0.0, q0.tail(2));
    const Vec w = kernel_lift(ref.Omega, Vec((Vec(2) << std::cos(a), std::sin(a)).finished()));
    Vec l = ref.seed + cone_crossing(L, 0.0, q0.tail(2), ref.seed, w) * w;
    l /= l.tail(2).norm();
    dist[i] = pregeodesic_distance(L, make_scaled(mu, L), q0, l, 4.0, 1.0);
  });
  for (std::size_t b = 0; b < bases.size(); ++b) {
    double m = 0.0;
    for (std::size_t j = 0; j < angles.size(); ++j) m = std::max(m, dist[b * angles.size() + j]);
    res.values.emplace_back("pregeodesic_" + bases[b].first, m);
    res.worst = std::max(res.worst, m);
  }
  res.samples += static_cast<long>(dist.size());

  double factor_err = 0.0;
  for (std::size_t b = 0; b < bases.size(); ++b) {
    const auto& L = bases[b].second;
    const auto scaled = make_scaled(mu, L);
    std::vector<double> err(static_cast<std::size_t>(factor_samples), 0.0);
    parallel_for(err.size(), [&](std::size_t k) {
      CausalSampler S(detail::sample_seed(seed, 400 + b, k));
      const bool cone = k % 2 == 0;
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec v = S.sample(L, t, x, cone);
      const double expect = mu.eval(t, x, v);
      err[k] = std::abs(anisotropic_factor(L, scaled, t, x, v) - expect) / expect;
    });
    factor_err = std::max(factor_err, detail::max_of(err));
    res.samples += factor_samples;
  }
  res.values.emplace_back("factor_rel_error", factor_err);
  res.pass = res.worst <= res.bound && factor_err <= 1e-5;
  return res;
}

/// extract_fiber_norm of a TripleG metric reproduces the fiber norm.
inline SuiteResult suite_round_trip(std::uint64_t seed, int total) {
  const auto cat = reference_specs();
  std::vector<const NamedSpec*> triples;
  for (const auto& ns : cat) {
    if (std::holds_alternative<lorentz::TripleG>(ns.spec.data)) triples.push_back(&ns);
  }
  const int per = (total + static_cast<int>(triples.size()) - 1) / static_cast<int>(triples.size());
  SuiteResult res{"round_trip", true, 0, 0.0, 1e-8, {}, ""};
  for (std::size_t s = 0; s < triples.size(); ++s) {
    const auto& tr = std::get<lorentz::TripleG>(triples[s]->spec.data).triple;
    std::vector<double> err(static_cast<std::size_t>(per), 0.0);
    parallel_for(err.size(), [&](std::size_t k) {
      CausalSampler S(detail::sample_seed(seed, 500 + s, k));
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec Om = tr.Omega.eval(t, x);
      const Vec T = tr.T.eval(t, x);
      const Vec w = kernel_lift(Om, S.gaussian(2));
      const double F = fiber_norm(tr, t, x, w);
      err[k] = std::abs(extract_fiber_norm(triples[s]->spec, Om, T, t, x, w) - F) / F;
    });
    const double w = detail::max_of(err);
    res.values.emplace_back(triples[s]->name, w);
    res.worst = std::max(res.worst, w);
    res.samples += per;
  }
  res.pass = res.worst <= res.bound;
  return res;
}

/// First conjugate point on the round sphere (antipode at arc length pi);
/// none on flat specs up to s = 10.
inline SuiteResult suite_conjugate() {
  SuiteResult res{"conjugate", true, 0, 0.0, 1e-2, {}, "worst = |s_conj - pi|"};
  const auto sphere = conjugate_scan(round_sphere_spacetime(), vec3(0, -1, 0), vec3(1, 1, 0), 4.0);
  res.samples = 1;
  if (sphere.first_conjugate_s) {
    res.values.emplace_back("round_sphere_s", *sphere.first_conjugate_s);
    res.worst = std::abs(*sphere.first_conjugate_s - std::numbers::pi);
  } else {
    res.worst = std::numeric_limits<double>::infinity();
  }
  const auto cat = reference_specs();
  const auto& omf = detail::find_spec(cat, "omega_minus_randers").spec;
  CausalSampler S(7);
  const std::vector<std::pair<std::string, std::pair<LorentzFinslerSpec, Vec>>> flats{
      {"minkowski", {minkowski(3), vec3(1, 0.6, 0.8)}},
      {"omega_minus_randers", {omf, S.sample(omf, 0.0, Vec::Zero(2), true)}}};
  bool flat_ok = true;
  for (const auto& [name, sv] : flats) {
    const auto rep = conjugate_scan(sv.first, Vec::Zero(3), sv.second, 10.0);
    res.values.emplace_back("flat_" + name + "_conjugate", rep.first_conjugate_s ? 1.0 : 0.0);
    flat_ok = flat_ok && !rep.first_conjugate_s;
    ++res.samples;
  }
  res.pass = res.worst <= res.bound && flat_ok;
  return res;
}

/// Smoothing of the Randers fiber b = (0.3, 0): exact outside D/2, sup error
/// below eps and a positive Hessian on a grid x grid lattice over [-D, D]^2.
inline SuiteResult suite_smoothing(int grid) {
  SuiteResult res{"smoothing", true, 0, 0.0, 1e-3, {}, "worst = sup |smoothed - original|"};
  const double eps = 1e-3;
  const double D = 0.5;
  const auto F = make_randers(Mat::Identity(2, 2), Vec((Vec(2) << 0.3, 0.0).finished()));
  const auto sg = smooth_indicatrix(F, 0.0, Vec::Zero(2), eps, D);
  const auto n = static_cast<std::size_t>(grid);
  std::vector<double> sup(n, 0.0), min_eig(n, 0.0), outside_diff(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double s = 0.0, me = std::numeric_limits<double>::infinity(), od = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      Vec y(2);
      y << -D + 2.0 * D * static_cast<double>(i) / (grid - 1), -D + 2.0 * D * static_cast<double>(j) / (grid - 1);
      const double a = sg.smoothed(y);
      const double b = sg.original(y);
      s = std::max(s, std::abs(a - b));
      if (y.norm() >= D / 2) od = std::max(od, std::abs(a - b));
      const ScalarFn f = sg.smoothed;
      const Mat H = numeric_hessian(f, y);
      me = std::min(me, Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (H + H.transpose())).eigenvalues().minCoeff());
    }
    sup[i] = s;
    min_eig[i] = me;
    outside_diff[i] = od;
  });
  res.samples = static_cast<long>(n * n);
  res.worst = detail::max_of(sup);
  const double me = *std::min_element(min_eig.begin(), min_eig.end());
  const double od = detail::max_of(outside_diff);
  res.values.emplace_back("min_hessian_eigenvalue", me);
  res.values.emplace_back("max_diff_outside_half_D", od);
  res.values.emplace_back("delta", sg.delta);
  res.pass = res.worst <= eps && me > 0.0 && od == 0.0;
  return res;
}

/// Same-endpoint causal perturbations of a straight timelike segment on flat
/// specs never exceed its F-length.
inline SuiteResult suite_maximality(std::uint64_t seed, int perturbations) {
  SuiteResult res{"maximality", true, 0, 0.0, 1e-8, {}, "worst = max(perturbed - geodesic length)"};
  const auto cat = reference_specs();
  const std::vector<std::pair<std::string, LorentzFinslerSpec>> specs{
      {"minkowski", minkowski(3)}, {"omega_minus_randers", detail::find_spec(cat, "omega_minus_randers").spec}};
  const Vec a = Vec::Zero(3);
  const Vec b = vec3(0.1, 0.03, -0.02);
  res.worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& L = specs[s].second;
    const double Lg = causal_length(L, {a, b});
    std::vector<double> excess(static_cast<std::size_t>(perturbations), -std::numeric_limits<double>::infinity());
    std::vector<double> used(excess.size(), 0.0);
    parallel_for(excess.size(), [&](std::size_t k) {
      CausalSampler S(detail::sample_seed(seed, 600 + s, k));
      std::vector<Vec> poly{a};
      const int m = 2 + static_cast<int>(k % 5);
      for (int j = 1; j < m; ++j) poly.push_back(a + (b - a) * (static_cast<double>(j) / m) + 0.003 * S.gaussian(3));
      poly.push_back(b);
      try {
        excess[k] = causal_length(L, poly) - Lg;
        used[k] = 1.0;
      } catch (const DomainError&) {
        // leaves the causal cone: outside the comparison class
      }
    });
    double n_used = 0.0;
    for (double u : used) n_used += u;
    double w = -std::numeric_limits<double>::infinity();
    for (double e : excess) w = std::max(w, e);
    res.values.emplace_back(specs[s].first + "_causal_perturbations", n_used);
    res.values.emplace_back(specs[s].first + "_max_excess", w);
    res.worst = std::max(res.worst, w);
    res.samples += static_cast<long>(n_used);
  }
  res.pass = res.worst <= res.bound && res.samples > 0;
  return res;
}

struct SuiteSizes {
  int tensor = 500;
  int signature = 10000;
  int reverse = 10000;
  int factor = 200;
  int round_trip = 1000;
  int smoothing_grid = 201;
  int maximality = 200;
};

inline std::vector<SuiteResult> run_invariant_suites(std::uint64_t seed, const SuiteSizes& sz) {
  return {suite_tensor_oracle(seed, sz.tensor),       suite_signature(seed, sz.signature),
          suite_reverse_inequalities(seed, sz.reverse), suite_anisotropic(seed, sz.factor),
          suite_round_trip(seed, sz.round_trip),      suite_conjugate(),
          suite_smoothing(sz.smoothing_grid),         suite_maximality(seed, sz.maximality)};
}

}  // namespace conenav
