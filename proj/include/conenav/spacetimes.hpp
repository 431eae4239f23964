#pragma once

// Lorentz-Finsler metrics built from Finsler data, their fundamental tensors
// and the pointwise Lorentzian checks.

#include "conenav/cone_triple.hpp"

#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace conenav {

struct LorentzFinslerSpec;
using LorentzPtr = std::shared_ptr<const LorentzFinslerSpec>;

namespace lorentz {

/// L(v) = G(v, v) with G of signature (+,-,...,-).
struct QuadLorentz {
  MatrixField G;
  Vec seed;
};

/// L(v) = omega(v)^2 - F(v)^2.
struct OmegaMinusF {
  VectorField omega;
  FinslerSpec F;
};

/// L(v) = gR(v, v) - F(v)^2.
struct RiemannMinusF {
  MatrixField gR;
  FinslerSpec F;
  Vec seed;
};

/// L = (sum_k sqrt(L_k))^2.
struct SumOfRoots {
  std::vector<LorentzPtr> terms;
};

/// L = sqrt(L1 L2).
struct ProductRoot {
  LorentzPtr L1;
  LorentzPtr L2;
};

/// L = L0^(1+b) / beta^(2b), -1 < b < 0.
struct Bogoslovsky {
  LorentzPtr L0;
  VectorField beta;
  double b = -0.5;
};

/// G(tau T + w) = tau^2 - F(w)^2.
struct TripleG {
  ConeTriple triple;
};

/// L = mu(v) L_base(v), mu positive and 0-homogeneous.
struct Scaled {
  FieldExpr mu;
  LorentzPtr base;
};

}  // namespace lorentz

struct LorentzFinslerSpec {
  std::variant<lorentz::QuadLorentz, lorentz::OmegaMinusF, lorentz::RiemannMinusF, lorentz::SumOfRoots,
               lorentz::ProductRoot, lorentz::Bogoslovsky, lorentz::TripleG, lorentz::Scaled>
      data;
  int dim = 0;
};

// ---------------------------------------------------------------------------
// constructors

inline LorentzPtr share(LorentzFinslerSpec s) { return std::make_shared<const LorentzFinslerSpec>(std::move(s)); }

inline LorentzFinslerSpec make_quad_lorentz(const MatrixField& G, std::optional<Vec> seed = std::nullopt) {
  const int N = G.dim;
  return {lorentz::QuadLorentz{G, seed ? *seed : Vec(Vec::Unit(N, 0))}, N};
}

inline LorentzFinslerSpec make_quad_lorentz(const Mat& G, std::optional<Vec> seed = std::nullopt) {
  return make_quad_lorentz(MatrixField::constant(G), std::move(seed));
}

inline LorentzFinslerSpec minkowski(int N) {
  Mat G = -Mat::Identity(N, N);
  G(0, 0) = 1.0;
  return make_quad_lorentz(G);
}

inline LorentzFinslerSpec make_omega_minus_f(const VectorField& omega, const FinslerSpec& F) {
  if (omega.size() != F.dim) throw ValidationError("omega and F dimensions disagree");
  return {lorentz::OmegaMinusF{omega, F}, F.dim};
}

inline LorentzFinslerSpec make_omega_minus_f(const Vec& omega, const FinslerSpec& F) {
  return make_omega_minus_f(VectorField::constant(omega), F);
}

inline LorentzFinslerSpec make_riemann_minus_f(const MatrixField& gR, const FinslerSpec& F, const Vec& seed) {
  if (gR.dim != F.dim || seed.size() != F.dim) throw ValidationError("gR, F and seed dimensions disagree");
  return {lorentz::RiemannMinusF{gR, F, seed}, F.dim};
}

inline LorentzFinslerSpec make_sum_of_roots(const std::vector<LorentzFinslerSpec>& terms) {
  if (terms.empty()) throw ValidationError("sum of roots needs at least one term");
  lorentz::SumOfRoots s;
  for (const auto& t : terms) {
    if (t.dim != terms.front().dim) throw ValidationError("sum of roots terms have different dimensions");
    s.terms.push_back(share(t));
  }
  return {s, terms.front().dim};
}

inline LorentzFinslerSpec make_product_root(const LorentzFinslerSpec& L1, const LorentzFinslerSpec& L2) {
  if (L1.dim != L2.dim) throw ValidationError("product root factors have different dimensions");
  return {lorentz::ProductRoot{share(L1), share(L2)}, L1.dim};
}

inline LorentzFinslerSpec make_bogoslovsky(const LorentzFinslerSpec& L0, const VectorField& beta, double b) {
  if (!(b > -1.0 && b < 0.0)) throw ValidationError("Bogoslovsky exponent b must lie in (-1, 0)");
  return {lorentz::Bogoslovsky{share(L0), beta, b}, L0.dim};
}

inline LorentzFinslerSpec make_bogoslovsky(const LorentzFinslerSpec& L0, const Vec& beta, double b) {
  return make_bogoslovsky(L0, VectorField::constant(beta), b);
}

inline LorentzFinslerSpec make_triple_g(const ConeTriple& tr) { return {lorentz::TripleG{tr}, tr.dim()}; }

inline LorentzFinslerSpec make_scaled(const FieldExpr& mu, const LorentzFinslerSpec& base) {
  return {lorentz::Scaled{mu, share(base)}, base.dim};
}

inline LorentzFinslerSpec make_scaled(double mu, const LorentzFinslerSpec& base) {
  return make_scaled(FieldExpr::constant(mu), base);
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

/// Tiny negative values of a component on the cone are roundoff.
inline double clamp_on_cone(double L, const Vec& v, const char* what) {
  if (L < -1e-11 * v.squaredNorm()) throw DomainError(std::string(what) + ": vector outside the cone domain");
  return std::max(L, 0.0);
}

inline double mu_eval(const lorentz::Scaled& s, double t, const Vec& x, const Vec& v) {
  const double mu = s.mu.eval(t, x, v);
  if (!(mu > 0.0)) throw DomainError("anisotropic factor mu must be positive");
  return mu;
}

/// Linear map u -> spatial representative of u - Omega(u) T.
inline Mat triple_projection(const Vec& Om, const Vec& T) {
  const Eigen::Index N = Om.size();
  const Mat full = Mat::Identity(N, N) - T * Om.transpose();
  return full.bottomRows(N - 1);
}

}  // namespace detail

inline double lorentz_eval(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& v) {
  detail::require_nonzero(v);
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, lorentz::QuadLorentz>) {
          return detail::quad(s.G.eval(t, x), v);
        } else if constexpr (std::is_same_v<S, lorentz::OmegaMinusF>) {
          const double w = s.omega.eval(t, x).dot(v);
          const double f = finsler_eval(s.F, t, x, v);
          return w * w - f * f;
        } else if constexpr (std::is_same_v<S, lorentz::RiemannMinusF>) {
          const double f = finsler_eval(s.F, t, x, v);
          return detail::quad(s.gR.eval(t, x), v) - f * f;
        } else if constexpr (std::is_same_v<S, lorentz::SumOfRoots>) {
          double root = 0.0;
          for (const auto& term : s.terms) {
            root += std::sqrt(detail::clamp_on_cone(lorentz_eval(*term, t, x, v), v, "sum of roots"));
          }
          return root * root;
        } else if constexpr (std::is_same_v<S, lorentz::ProductRoot>) {
          const double a = detail::clamp_on_cone(lorentz_eval(*s.L1, t, x, v), v, "product root");
          const double b = detail::clamp_on_cone(lorentz_eval(*s.L2, t, x, v), v, "product root");
          return std::sqrt(a * b);
        } else if constexpr (std::is_same_v<S, lorentz::Bogoslovsky>) {
          const double beta = s.beta.eval(t, x).dot(v);
          if (!(beta > 0.0)) throw DomainError("Bogoslovsky metric evaluated where beta(v) <= 0");
          const double L0 = detail::clamp_on_cone(lorentz_eval(*s.L0, t, x, v), v, "Bogoslovsky");
          return std::pow(L0, 1.0 + s.b) / std::pow(beta, 2.0 * s.b);
        } else if constexpr (std::is_same_v<S, lorentz::TripleG>) {
          const auto [tau, w] = decompose(s.triple, t, x, v);
          const double f = fiber_norm(s.triple, t, x, w);
          return tau * tau - f * f;
        } else {
          return detail::mu_eval(s, t, x, v) * lorentz_eval(*s.base, t, x, v);
        }
      },
      spec.data);
}

/// Event q = (t, x) split for field evaluation.
inline double lorentz_eval_at(const LorentzFinslerSpec& spec, const Vec& q, const Vec& v) {
  return lorentz_eval(spec, q(0), q.tail(q.size() - 1), v);
}

// ---------------------------------------------------------------------------
// reference cone data

/// Minimizer of F on the affine slice {omega = 1}, by damped Newton in a
/// kernel basis of omega.
inline std::pair<Vec, double> slice_minimizer(const FinslerSpec& F, double t, const Vec& x, const Vec& omega) {
  const Mat K = orthogonal_complement(omega);
  const Vec v0 = omega / omega.squaredNorm();
  auto value = [&](const Vec& z) {
    const double f = finsler_eval(F, t, x, v0 + K * z);
    return 0.5 * f * f;
  };
  Vec z = Vec::Zero(K.cols());
  if (K.cols() == 0) return {v0, finsler_eval(F, t, x, v0)};
  double fz = value(z);
  for (int it = 0; it < 100; ++it) {
    const Vec v = v0 + K * z;
    const Mat g = finsler_tensor_matrix(F, t, x, v);
    const Vec grad = K.transpose() * (g * v);
    if (grad.norm() <= 1e-15 * std::max(1.0, v.norm() * g.norm())) break;
    const Vec step = (K.transpose() * g * K).ldlt().solve(-grad);
    double lam = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, lam *= 0.5) {
      try {
        const Vec zn = z + lam * step;
        const double fn = value(zn);
        if (fn <= fz) {
          z = zn;
          fz = fn;
          moved = true;
          break;
        }
      } catch (const DomainError&) {
      }
    }
    if (!moved || (lam * step).norm() <= 1e-16 * std::max(1.0, z.norm())) break;
  }
  const Vec v = v0 + K * z;
  return {v, finsler_eval(F, t, x, v)};
}

/// Reference covector Omega (positive on the future cone) and a timelike seed.
struct ConeReference {
  Vec Omega;
  Vec seed;
};

inline ConeReference cone_reference(const LorentzFinslerSpec& spec, double t, const Vec& x) {
  return std::visit(
      [&](const auto& s) -> ConeReference {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, lorentz::QuadLorentz>) {
          return {s.G.eval(t, x) * s.seed, s.seed};
        } else if constexpr (std::is_same_v<S, lorentz::OmegaMinusF>) {
          const Vec om = s.omega.eval(t, x);
          return {om, slice_minimizer(s.F, t, x, om).first};
        } else if constexpr (std::is_same_v<S, lorentz::RiemannMinusF>) {
          return {s.gR.eval(t, x) * s.seed, s.seed};
        } else if constexpr (std::is_same_v<S, lorentz::SumOfRoots>) {
          return cone_reference(*s.terms.front(), t, x);
        } else if constexpr (std::is_same_v<S, lorentz::ProductRoot>) {
          return cone_reference(*s.L1, t, x);
        } else if constexpr (std::is_same_v<S, lorentz::Bogoslovsky>) {
          return cone_reference(*s.L0, t, x);
        } else if constexpr (std::is_same_v<S, lorentz::TripleG>) {
          return {s.triple.Omega.eval(t, x), s.triple.T.eval(t, x)};
        } else {
          return cone_reference(*s.base, t, x);
        }
      },
      spec.data);
}

// ---------------------------------------------------------------------------
// tensors

inline Mat lf_tensor_matrix(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& v,
                            const DiffConfig& cfg = {});

namespace detail {

inline ComposePart lorentz_part(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& v,
                                const DiffConfig& cfg) {
  const double L = lorentz_eval(spec, t, x, v);
  if (!(L > 0.0)) throw DomainError("tensor not extendable to the cone for this metric");
  return {std::sqrt(L), lf_tensor_matrix(spec, t, x, v, cfg)};
}

/// Smooth extension of the sum of roots across the common cone, used for the
/// tensor on the cone where the composition formula divides by zero.
inline double sum_of_roots_extension(const lorentz::SumOfRoots& s, double t, const Vec& x, const Vec& v) {
  std::vector<double> Ls;
  for (const auto& term : s.terms) Ls.push_back(lorentz_eval(*term, t, x, v));
  double total = 0.0;
  for (std::size_t k = 0; k < Ls.size(); ++k) {
    total += Ls[k];
    for (std::size_t l = k + 1; l < Ls.size(); ++l) {
      const double sgn = (Ls[k] + Ls[l]) >= 0.0 ? 1.0 : -1.0;
      total += 2.0 * sgn * std::sqrt(std::abs(Ls[k] * Ls[l]));
    }
  }
  return total;
}

}  // namespace detail

inline Mat lf_tensor_matrix(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& v,
                            const DiffConfig& cfg) {
  detail::require_nonzero(v);
  return std::visit(
      [&](const auto& s) -> Mat {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, lorentz::QuadLorentz>) {
          const Mat G = s.G.eval(t, x);
          return 0.5 * (G + G.transpose());
        } else if constexpr (std::is_same_v<S, lorentz::OmegaMinusF>) {
          const Vec om = s.omega.eval(t, x);
          return om * om.transpose() - finsler_tensor_matrix(s.F, t, x, v);
        } else if constexpr (std::is_same_v<S, lorentz::RiemannMinusF>) {
          const Mat gR = s.gR.eval(t, x);
          return 0.5 * (gR + gR.transpose()) - finsler_tensor_matrix(s.F, t, x, v);
        } else if constexpr (std::is_same_v<S, lorentz::SumOfRoots>) {
          std::vector<ComposePart> parts;
          bool on_cone = false;
          for (const auto& term : s.terms) {
            const double L = lorentz_eval(*term, t, x, v);
            if (L <= 1e-10 * v.squaredNorm()) {
              on_cone = true;
              break;
            }
            parts.push_back({std::sqrt(L), lf_tensor_matrix(*term, t, x, v, cfg)});
          }
          if (on_cone) {
            const ScalarFn ext = [&](const Vec& u) { return detail::sum_of_roots_extension(s, t, x, u); };
            return 0.5 * numeric_hessian(ext, v, cfg);
          }
          const auto K = static_cast<Eigen::Index>(parts.size());
          double sum = 0.0;
          for (const auto& p : parts) sum += p.F;
          const Vec dphi = Vec::Constant(K, 2.0 * sum);
          const Mat ddphi = Mat::Constant(K, K, 2.0);
          return compose_tensor(parts, {}, v, dphi, ddphi);
        } else if constexpr (std::is_same_v<S, lorentz::ProductRoot>) {
          const std::vector<ComposePart> parts{detail::lorentz_part(*s.L1, t, x, v, cfg),
                                               detail::lorentz_part(*s.L2, t, x, v, cfg)};
          Vec dphi(2);
          dphi << parts[1].F, parts[0].F;
          Mat ddphi(2, 2);
          ddphi << 0.0, 1.0, 1.0, 0.0;
          return compose_tensor(parts, {}, v, dphi, ddphi);
        } else if constexpr (std::is_same_v<S, lorentz::Bogoslovsky>) {
          const Vec beta = s.beta.eval(t, x);
          const double y = beta.dot(v);
          if (!(y > 0.0)) throw DomainError("Bogoslovsky metric evaluated where beta(v) <= 0");
          const std::vector<ComposePart> parts{detail::lorentz_part(*s.L0, t, x, v, cfg)};
          const double xv = parts[0].F;
          const double p = 2.0 * (1.0 + s.b);
          const double q = -2.0 * s.b;
          Vec dphi(2);
          dphi << p * std::pow(xv, p - 1.0) * std::pow(y, q), q * std::pow(xv, p) * std::pow(y, q - 1.0);
          Mat ddphi(2, 2);
          const double cross = p * q * std::pow(xv, p - 1.0) * std::pow(y, q - 1.0);
          ddphi << p * (p - 1.0) * std::pow(xv, p - 2.0) * std::pow(y, q), cross, cross,
              q * (q - 1.0) * std::pow(xv, p) * std::pow(y, q - 2.0);
          return compose_tensor(parts, {beta}, v, dphi, ddphi);
        } else if constexpr (std::is_same_v<S, lorentz::TripleG>) {
          const Vec Om = s.triple.Omega.eval(t, x);
          const Vec T = s.triple.T.eval(t, x);
          const Mat P = detail::triple_projection(Om, T);
          const Vec d = P * v;
          Mat gf;
          if (d.norm() <= 1e-12 * v.norm()) {
            const auto* rq = std::get_if<finsler::RiemannQuad>(&s.triple.F.data);
            if (rq == nullptr) throw DomainError("cone-triple metric not smooth along span(T)");
            gf = rq->G.eval(t, x);
          } else {
            gf = finsler_tensor_matrix(s.triple.F, t, x, d);
          }
          return Om * Om.transpose() - P.transpose() * gf * P;
        } else {
          const double mu = detail::mu_eval(s, t, x, v);
          const ScalarFn mu_fn = [&](const Vec& u) { return s.mu.eval(t, x, u); };
          const Mat g = lf_tensor_matrix(*s.base, t, x, v, cfg);
          const double L = lorentz_eval(*s.base, t, x, v);
          const Vec dL = 2.0 * g * v;
          const Vec dmu = numeric_gradient(mu_fn, v, cfg);
          Mat out = mu * g + 0.5 * (dmu * dL.transpose() + dL * dmu.transpose());
          if (L != 0.0 && !s.mu.is_constant()) out += 0.5 * L * numeric_hessian(mu_fn, v, cfg);
          return 0.5 * (out + out.transpose());
        }
      },
      spec.data);
}

inline BilinearForm lf_fundamental_tensor(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& v) {
  return {lf_tensor_matrix(spec, t, x, v), t, x, v};
}

/// Numeric Hessian oracle for L itself (smooth extension for sums of roots on
/// the cone).
inline BilinearForm lf_tensor_oracle(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& v,
                                     const DiffConfig& cfg = {}) {
  if (const auto* s = std::get_if<lorentz::SumOfRoots>(&spec.data)) {
    return numeric_hessian_oracle([&](const Vec& u) { return detail::sum_of_roots_extension(*s, t, x, u); }, v, cfg);
  }
  return numeric_hessian_oracle([&](const Vec& u) { return lorentz_eval(spec, t, x, u); }, v, cfg);
}

/// Relative Frobenius distance |A - B| / max(|B|, tiny).
inline double rel_frobenius(const Mat& A, const Mat& B) {
  return (A - B).norm() / std::max(B.norm(), 1e-300);
}

// ---------------------------------------------------------------------------
// condition reports

struct ConditionCheck {
  std::string name;
  double t = 0.0;
  Vec x;
  Vec v;
  bool pass = false;
  double margin = 0.0;
};

struct ConditionReport {
  std::vector<ConditionCheck> checks;
  bool overall = true;

  void add(std::string name, double t, const Vec& x, const Vec& v, bool pass, double margin) {
    checks.push_back({std::move(name), t, x, v, pass, margin});
    overall = overall && pass;
  }

  void merge(const ConditionReport& other) {
    for (const auto& c : other.checks) add(c.name, c.t, c.x, c.v, c.pass, c.margin);
  }
};

namespace detail {

/// Eigen-decomposition of a symmetric matrix restricted to span(K).
inline Eigen::SelfAdjointEigenSolver<Mat> restricted_eigen(const Mat& g, const Mat& K) {
  const Mat r = K.transpose() * g * K;
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (r + r.transpose()));
}

/// Checks that a symmetric form is negative semi-definite on span(K) with a
/// one-dimensional radical spanned by v.
inline void check_negative_with_radical(ConditionReport& rep, const std::string& prefix, const Mat& g,
                                        const Mat& K, const Vec& v, double t, const Vec& x, double tol) {
  const auto es = restricted_eigen(g, K);
  const Vec& ev = es.eigenvalues();
  const double thr = tol * std::max(g.norm(), 1e-300);
  Eigen::Index i0 = 0;
  ev.cwiseAbs().minCoeff(&i0);
  int zeros = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) <= thr) ++zeros;
    if (i != i0) worst = std::max(worst, ev(i));
  }
  const double max_other = ev.size() > 1 ? worst : -thr;
  rep.add(prefix + ".negative_semidefinite", t, x, v, max_other < -thr, -max_other / std::max(g.norm(), 1e-300));
  rep.add(prefix + ".one_dimensional_radical", t, x, v, zeros == 1, thr - std::abs(ev(i0)));
  const Vec radical = K * es.eigenvectors().col(i0);
  const double ang = line_angle(radical, v);
  rep.add(prefix + ".radical_spanned_by_v", t, x, v, ang <= 1e-4, 1e-4 - ang);
}

}  // namespace detail

/// Pointwise Lorentzian characterization: interior vectors through the angular
/// metric, cone vectors through g restricted to ker omega_v.
inline ConditionReport check_lorentz_at(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& v,
                                        double tol = 1e-6) {
  ConditionReport rep;
  const Eigen::Index N = v.size();
  const Mat g = lf_tensor_matrix(spec, t, x, v);
  const double L = lorentz_eval(spec, t, x, v);
  const double scale = std::max(g.norm() * v.squaredNorm(), 1e-300);
  if (std::abs(L) <= 1e-9 * scale) {
    const Vec om = g * v;
    const double om_n = om.norm() / std::max(g.norm() * v.norm(), 1e-300);
    rep.add("cone.omega_nonzero", t, x, v, om_n > tol, om_n - tol);
    if (om_n > tol) {
      detail::check_negative_with_radical(rep, "cone", g, orthogonal_complement(om), v, t, x, tol);
    }
    return rep;
  }
  if (L < 0.0) {
    rep.add("causal", t, x, v, false, L / scale);
    return rep;
  }
  const Signature sig = signature(g);
  rep.add("signature", t, x, v, sig.n_pos == 1 && sig.n_neg == N - 1 && sig.n_zero == 0,
          sig.n_pos == 1 && sig.n_neg == N - 1 ? 1.0 : -1.0);
  const Mat h = angular_metric({g, t, x, v}, v, L).matrix;
  detail::check_negative_with_radical(rep, "angular", h, Mat::Identity(N, N), v, t, x, tol);
  return rep;
}

/// Hypotheses of the two Finsler-difference constructions, sampled around the
/// reference cone at (t, x).
inline ConditionReport check_construction_hypotheses(const LorentzFinslerSpec& spec, double t, const Vec& x,
                                                     int sample_count = 16) {
  ConditionReport rep;
  const int N = spec.dim;
  const auto dirs = N >= 2 ? unit_directions(std::min(N - 1, 3), sample_count) : std::vector<Vec>{};

  auto grow_root = [](const std::function<double(double)>& f) -> std::optional<double> {
    double hi = 1.0;
    for (int k = 0; k < 40; ++k, hi *= 2.0) {
      try {
        if (f(hi) > 0.0) return bracketed_root(f, 0.0, hi);
      } catch (const DomainError&) {
        return std::nullopt;
      }
    }
    return std::nullopt;
  };

  if (const auto* s = std::get_if<lorentz::OmegaMinusF>(&spec.data)) {
    const Vec om = s->omega.eval(t, x);
    const auto [vmin, fmin] = slice_minimizer(s->F, t, x, om);
    const double tol = 1e-8;
    if (fmin > 1.0 + tol) throw ValidationError("empty cone: omega < F on every direction at this point");
    auto transverse = [&](const Vec& v) {
      const Vec gv = finsler_tensor_matrix(s->F, t, x, v) * v;
      const double ang = line_angle(gv, om);
      rep.add("transverse", t, x, v, ang > 1e-6, ang);
    };
    if (fmin >= 1.0 - tol) {
      transverse(vmin);
      return rep;
    }
    const Mat K = orthogonal_complement(om);
    for (const auto& d : dirs) {
      const Vec k = K * d.head(K.cols());
      const auto root = grow_root([&](double r) { return finsler_eval(s->F, t, x, vmin + r * k) - 1.0; });
      if (!root) continue;
      const Vec v = vmin + *root * k;
      const double resid = std::abs(om.dot(v) - finsler_eval(s->F, t, x, v));
      rep.add("lightlike_residual", t, x, v, resid <= 1e-9 * v.norm(), 1e-9 * v.norm() - resid);
      transverse(v);
    }
    return rep;
  }

  if (const auto* s = std::get_if<lorentz::RiemannMinusF>(&spec.data)) {
    const Mat gR = s->gR.eval(t, x);
    auto L = [&](const Vec& v) {
      const double f = finsler_eval(s->F, t, x, v);
      return detail::quad(gR, v) - f * f;
    };
    if (!(L(s->seed) > 0.0)) throw ValidationError("empty cone: seed vector is not in {gR > F^2}");
    auto interior = [&](const Vec& v) {
      const Mat gh = finsler_tensor_matrix(s->F, t, x, v);
      const Vec ghv = gh * v;
      const Mat M = gR - gh - ghv * ghv.transpose() / L(v);
      const auto es = detail::restricted_eigen(M, orthogonal_complement(gR * v));
      const double top = es.eigenvalues().maxCoeff() / std::max(M.norm(), 1e-300);
      rep.add("interior_negative", t, x, v, top < 0.0, -top);
    };
    auto cone = [&](const Vec& v) {
      const Mat gh = finsler_tensor_matrix(s->F, t, x, v);
      const Vec a = gR * v;
      const Vec c = gh * v;
      const double ang = line_angle(a, c);
      rep.add("transverse", t, x, v, ang > 1e-6, ang);
      Mat ac(v.size(), 2);
      ac << a, c;
      const Mat K2 = orthogonal_complement(ac);
      if (K2.cols() > 0) {
        const Mat M = gR - gh;
        const double top = detail::restricted_eigen(M, K2).eigenvalues().maxCoeff() / std::max(M.norm(), 1e-300);
        rep.add("cone_negative", t, x, v, top < 0.0, -top);
      }
    };
    interior(s->seed);
    const Mat K = orthogonal_complement(gR * s->seed);
    for (const auto& d : dirs) {
      const Vec k = K * d.head(K.cols());
      const auto root = grow_root([&](double r) { return -L(s->seed + r * k); });
      if (!root) {
        interior(s->seed + k);
        continue;
      }
      interior(s->seed + 0.5 * *root * k);
      cone(s->seed + *root * k);
    }
    return rep;
  }
  throw ValidationError("construction hypotheses apply to omega-minus-F and Riemann-minus-F metrics only");
}

// ---------------------------------------------------------------------------
// anisotropy, Hilbert form, static check

inline double anisotropic_factor(const LorentzFinslerSpec& L1, const LorentzFinslerSpec& L2, double t,
                                 const Vec& x, const Vec& v) {
  const Mat g1 = lf_tensor_matrix(L1, t, x, v);
  const double l1 = lorentz_eval(L1, t, x, v);
  const double scale = std::max(g1.norm() * v.squaredNorm(), 1e-300);
  if (l1 > 1e-9 * scale) return lorentz_eval(L2, t, x, v) / l1;
  if (l1 < -1e-9 * scale) throw DomainError("anisotropic factor needs a causal vector");
  const Vec a1 = g1 * v;
  const Vec a2 = lf_tensor_matrix(L2, t, x, v) * v;
  const double thr = 1e-9 * g1.norm() * v.norm();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(a1(i)) > thr) return a2(i) / a1(i);
  }
  throw NumericalError("anisotropic factor: g_v(v, e_i) vanishes for every coordinate direction");
}

/// omega_v = g_v(v, .).
inline Vec rough_hilbert_form(const LorentzFinslerSpec& spec, double t, const Vec& x, const Vec& v) {
  return lf_tensor_matrix(spec, t, x, v) * v;
}

inline bool static_check(const LorentzFinslerSpec& spec, const Vec& T, double t, const Vec& x, double tol = 1e-9) {
  if (!(lorentz_eval(spec, t, x, T) > 0.0)) throw ValidationError("static check: T is not timelike");
  const Mat g = lf_tensor_matrix(spec, t, x, T);
  const Vec gT = g * T;
  const double scale = g.norm() * T.norm();
  for (Eigen::Index i = 1; i < T.size(); ++i) {
    if (std::abs(gT(i)) > tol * scale) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Kostelecky-type metrics

enum class KosteleckyClass { index_n_minus_1, degenerate, undefined, indefinite };

inline const char* to_string(KosteleckyClass c) {
  switch (c) {
    case KosteleckyClass::index_n_minus_1: return "index_n_minus_1";
    case KosteleckyClass::degenerate: return "degenerate";
    case KosteleckyClass::undefined: return "undefined";
    case KosteleckyClass::indefinite: return "indefinite";
  }
  return "?";
}

/// F(v) = sqrt(-gt(v,v)) + gt(v,a) + eps sqrt(p(v,v)), p(u,w) = gt(u,b) gt(w,b) - gt(b,b) gt(u,w),
/// with gt of signature (-,+,...,+).
inline double kostelecky_F(const Mat& gt, const Vec& a, const Vec& b, int eps, const Vec& v) {
  const double vv = detail::quad(gt, v);
  const double vb = v.dot(gt * b);
  const double p = vb * vb - detail::quad(gt, b) * vv;
  return std::sqrt(std::max(-vv, 0.0)) + v.dot(gt * a) + eps * std::sqrt(std::max(p, 0.0));
}

inline KosteleckyClass kostelecky_classify(const Mat& gt, const Vec& a, const Vec& b, int eps, const Vec& v,
                                           double tol = 1e-12) {
  const double scale = std::max(gt.norm() * v.squaredNorm(), 1e-300);
  const double vv = detail::quad(gt, v);
  if (vv >= -tol * scale) return KosteleckyClass::undefined;
  const double F = kostelecky_F(gt, a, b, eps, v);
  if (std::abs(F) <= tol * std::sqrt(scale)) return KosteleckyClass::degenerate;
  const double vb = v.dot(gt * b);
  const double bb = detail::quad(gt, b);
  const double p = vb * vb - bb * vv;
  const bool kost = (-vv + eps * p > 0.0) && (eps * bb >= 0.0 || p + vv * bb * bb > 0.0);
  const bool kost2 = eps == -1 && (-vv - p < 0.0) && bb > 0.0 && (p + vv * bb * bb < 0.0);
  if (F > 0.0 && (kost || kost2)) return KosteleckyClass::index_n_minus_1;
  return KosteleckyClass::indefinite;
}

inline KosteleckyClass kostelecky_classify(const MatrixField& gt, const VectorField& a, const VectorField& b,
                                           int eps, double t, const Vec& x, const Vec& v) {
  return kostelecky_classify(gt.eval(t, x), a.eval(t, x), b.eval(t, x), eps, v);
}

}  // namespace conenav
