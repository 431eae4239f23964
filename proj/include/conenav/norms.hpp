#pragma once

// Finsler norm families, fundamental tensors, angular metrics and signatures.

#include "conenav/core.hpp"
#include "conenav/fields.hpp"

#include <memory>
#include <variant>

namespace conenav {

struct FinslerSpec;

namespace finsler {

struct RiemannQuad {
  MatrixField G;
};

/// F(v) = sqrt(a(v,v)) + b(v).
struct Randers {
  MatrixField a;
  VectorField b;
};

/// F(v) = (sum_i w_i v_i^r)^(1/r), r even.
struct PPower {
  int r = 4;
  Vec weights;
};

/// F(v) = F0(v)^2 / beta(v) on {beta > 0}.
struct Kropina {
  std::shared_ptr<const FinslerSpec> F0;
  VectorField beta;
};

/// Indicatrix = g0 unit sphere translated by W.
struct ZermeloData {
  MatrixField g0;
  VectorField W;
};

}  // namespace finsler

struct FinslerSpec {
  std::variant<finsler::RiemannQuad, finsler::Randers, finsler::PPower, finsler::Kropina,
               finsler::ZermeloData>
      data;
  int dim = 0;
};

struct SamplePoint {
  double t = 0.0;
  Vec x;
};

struct BilinearForm {
  Mat matrix;
  double t = 0.0;
  Vec x;
  Vec v;
};

struct Signature {
  int n_pos = 0;
  int n_neg = 0;
  int n_zero = 0;
  double tol = 0.0;

  bool operator==(const Signature& o) const {
    return n_pos == o.n_pos && n_neg == o.n_neg && n_zero == o.n_zero;
  }
};

// ---------------------------------------------------------------------------
// constructors

inline FinslerSpec make_riemann(const Mat& G) {
  return {finsler::RiemannQuad{MatrixField::constant(G)}, static_cast<int>(G.rows())};
}

inline FinslerSpec make_euclidean(int n) { return make_riemann(Mat::Identity(n, n)); }

inline FinslerSpec make_randers(const Mat& a, const Vec& b) {
  return {finsler::Randers{MatrixField::constant(a), VectorField::constant(b)}, static_cast<int>(a.rows())};
}

inline FinslerSpec make_ppower(int r, const Vec& weights) {
  if (r < 2 || r % 2 != 0) throw ValidationError("PPower exponent must be an even integer >= 2");
  if ((weights.array() <= 0.0).any()) throw ValidationError("PPower weights must be positive");
  return {finsler::PPower{r, weights}, static_cast<int>(weights.size())};
}

inline FinslerSpec make_kropina(FinslerSpec F0, const VectorField& beta) {
  const int n = F0.dim;
  return {finsler::Kropina{std::make_shared<const FinslerSpec>(std::move(F0)), beta}, n};
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

inline double quad(const Mat& G, const Vec& v) { return v.dot(G * v); }

inline void require_nonzero(const Vec& v) {
  if (v.size() == 0 || v.squaredNorm() == 0.0) throw DomainError("norm evaluated at the zero vector");
}

/// Randers data (a, b) equivalent to the Zermelo pair (g0, W).
inline std::pair<Mat, Vec> zermelo_to_randers(const Mat& g0, const Vec& W) {
  const Vec Wflat = g0 * W;
  const double lambda = 1.0 - W.dot(Wflat);
  if (!(lambda > 0.0)) throw ValidationError("strong wind: g0(W,W) >= 1");
  Mat a = g0 / lambda + Wflat * Wflat.transpose() / (lambda * lambda);
  Vec b = -Wflat / lambda;
  return {a, b};
}

/// Zermelo metric by root finding in u = 1/s on q(u) = g0(uv - W, uv - W) - 1.
inline double zermelo_root(const Mat& g0, const Vec& W, const Vec& v) {
  const double vv = quad(g0, v);
  const double vw = v.dot(g0 * W);
  const double ww = quad(g0, W);
  if (ww >= 1.0) throw ValidationError("strong wind: g0(W,W) >= 1");
  const double vn = std::sqrt(vv);
  auto q = [&](double u) { return u * u * vv - 2.0 * u * vw + ww - 1.0; };
  auto dq = [&](double u) { return 2.0 * u * vv - 2.0 * vw; };
  const double u_hi = 2.0 / ((1.0 - std::sqrt(ww)) * vn);
  const double u = bracketed_root(q, 0.0, u_hi, 1e-15, dq);
  return 1.0 / u;
}

}  // namespace detail

inline double finsler_eval(const FinslerSpec& spec, double t, const Vec& x, const Vec& v);

inline double kropina_beta(const finsler::Kropina& k, double t, const Vec& x, const Vec& v) {
  const double bv = k.beta.eval(t, x).dot(v);
  if (!(bv > 1e-9 * v.norm())) throw DomainError("Kropina metric evaluated outside {beta > 0}");
  return bv;
}

inline double finsler_eval(const FinslerSpec& spec, double t, const Vec& x, const Vec& v) {
  detail::require_nonzero(v);
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, finsler::RiemannQuad>) {
          return std::sqrt(detail::quad(s.G.eval(t, x), v));
        } else if constexpr (std::is_same_v<S, finsler::Randers>) {
          const double F = std::sqrt(detail::quad(s.a.eval(t, x), v)) + s.b.eval(t, x).dot(v);
          if (!(F > 0.0)) throw DomainError("Randers metric not positive: |b|_a >= 1 here");
          return F;
        } else if constexpr (std::is_same_v<S, finsler::PPower>) {
          double S_ = 0.0;
          for (Eigen::Index i = 0; i < v.size(); ++i) S_ += s.weights(i) * std::pow(v(i), s.r);
          return std::pow(S_, 1.0 / s.r);
        } else if constexpr (std::is_same_v<S, finsler::Kropina>) {
          const double f0 = finsler_eval(*s.F0, t, x, v);
          return f0 * f0 / kropina_beta(s, t, x, v);
        } else {
          return detail::zermelo_root(s.g0.eval(t, x), s.W.eval(t, x), v);
        }
      },
      spec.data);
}

/// Closed-form Zermelo metric through its Randers data; cross-check only.
inline double zermelo_closed_form(const Mat& g0, const Vec& W, const Vec& v) {
  const auto [a, b] = detail::zermelo_to_randers(g0, W);
  return std::sqrt(detail::quad(a, v)) + b.dot(v);
}

// ---------------------------------------------------------------------------
// tensors

/// One Finsler-like component of a composition: value F_k = sqrt(L_k) and its
/// fundamental tensor at v.
struct ComposePart {
  double F = 0.0;
  Mat g;
};

/// Fundamental tensor of L(v) = phi(F_1(v)..F_K(v), beta_1(v)..beta_M(v)) with
/// phi 2-homogeneous. phi derivatives are ordered (F_1..F_K, beta_1..beta_M).
inline Mat compose_tensor(const std::vector<ComposePart>& parts, const std::vector<Vec>& forms,
                          const Vec& v, const Vec& dphi, const Mat& ddphi) {
  const auto K = static_cast<Eigen::Index>(parts.size());
  const auto M = static_cast<Eigen::Index>(forms.size());
  const Eigen::Index n = v.size();
  std::vector<Vec> a(parts.size());
  Mat two_g = Mat::Zero(n, n);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& p = parts[static_cast<std::size_t>(k)];
    if (!(p.F > 0.0)) throw DomainError("composition component vanishes; tensor formula undefined");
    a[static_cast<std::size_t>(k)] = p.g * v;
    const Vec& ak = a[static_cast<std::size_t>(k)];
    two_g += (dphi(k) / p.F) * (p.g - ak * ak.transpose() / (p.F * p.F));
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    const Vec ak = a[static_cast<std::size_t>(k)] / parts[static_cast<std::size_t>(k)].F;
    for (Eigen::Index l = 0; l < K; ++l) {
      const Vec al = a[static_cast<std::size_t>(l)] / parts[static_cast<std::size_t>(l)].F;
      two_g += ddphi(k, l) * ak * al.transpose();
    }
    for (Eigen::Index m = 0; m < M; ++m) {
      const Vec& bm = forms[static_cast<std::size_t>(m)];
      two_g += ddphi(k, K + m) * (ak * bm.transpose() + bm * ak.transpose());
    }
  }
  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index l = 0; l < M; ++l) {
      two_g += ddphi(K + m, K + l) * forms[static_cast<std::size_t>(m)] *
               forms[static_cast<std::size_t>(l)].transpose();
    }
  }
  return 0.25 * (two_g + two_g.transpose());
}

inline Mat randers_tensor(const Mat& a, const Vec& b, const Vec& v) {
  const Vec av = a * v;
  const double alpha = std::sqrt(v.dot(av));
  const Vec ai = av / alpha;
  const double F = alpha + b.dot(v);
  const Vec ell = ai + b;
  return (F / alpha) * (a - ai * ai.transpose()) + ell * ell.transpose();
}

inline Mat finsler_tensor_matrix(const FinslerSpec& spec, double t, const Vec& x, const Vec& v) {
  detail::require_nonzero(v);
  return std::visit(
      [&](const auto& s) -> Mat {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, finsler::RiemannQuad>) {
          const Mat G = s.G.eval(t, x);
          return 0.5 * (G + G.transpose());
        } else if constexpr (std::is_same_v<S, finsler::Randers>) {
          const Mat a = s.a.eval(t, x);
          const Vec b = s.b.eval(t, x);
          if (!(std::sqrt(detail::quad(a, v)) + b.dot(v) > 0.0)) {
            throw DomainError("Randers metric not positive: |b|_a >= 1 here");
          }
          return randers_tensor(a, b, v);
        } else if constexpr (std::is_same_v<S, finsler::PPower>) {
          const Eigen::Index n = v.size();
          const int r = s.r;
          double S_ = 0.0;
          Vec d(n);
          Vec diag(n);
          for (Eigen::Index i = 0; i < n; ++i) {
            S_ += s.weights(i) * std::pow(v(i), r);
            d(i) = s.weights(i) * std::pow(v(i), r - 1);
            diag(i) = s.weights(i) * std::pow(v(i), r - 2);
          }
          const double e = 2.0 / r;
          Mat g = (2.0 - r) * std::pow(S_, e - 2.0) * d * d.transpose();
          g.diagonal() += (r - 1.0) * std::pow(S_, e - 1.0) * diag;
          return g;
        } else if constexpr (std::is_same_v<S, finsler::Kropina>) {
          // L = F0^4 / beta^2
          const double xv = finsler_eval(*s.F0, t, x, v);
          const Vec beta = s.beta.eval(t, x);
          const double y = kropina_beta(s, t, x, v);
          const std::vector<ComposePart> parts{{xv, finsler_tensor_matrix(*s.F0, t, x, v)}};
          Vec dphi(2);
          dphi << 4.0 * std::pow(xv, 3) / (y * y), -2.0 * std::pow(xv, 4) / std::pow(y, 3);
          Mat ddphi(2, 2);
          ddphi << 12.0 * xv * xv / (y * y), -8.0 * std::pow(xv, 3) / std::pow(y, 3),
              -8.0 * std::pow(xv, 3) / std::pow(y, 3), 6.0 * std::pow(xv, 4) / std::pow(y, 4);
          return compose_tensor(parts, {beta}, v, dphi, ddphi);
        } else {
          const auto [a, b] = detail::zermelo_to_randers(s.g0.eval(t, x), s.W.eval(t, x));
          return randers_tensor(a, b, v);
        }
      },
      spec.data);
}

inline BilinearForm fundamental_tensor(const FinslerSpec& spec, double t, const Vec& x, const Vec& v) {
  return {finsler_tensor_matrix(spec, t, x, v), t, x, v};
}

/// Half the numeric Hessian of L at v: direct discretization of
/// (1/2) d^2/dr ds L(v + r u + s w) along coordinate directions.
inline BilinearForm numeric_hessian_oracle(const ScalarFn& L, const Vec& v, const DiffConfig& cfg = {}) {
  cfg.validate();
  return {0.5 * numeric_hessian(L, v, cfg), 0.0, Vec(), v};
}

inline BilinearForm angular_metric(const BilinearForm& g, const Vec& v, double Lv) {
  const double scale = std::max(1e-300, g.matrix.norm() * v.squaredNorm());
  if (std::abs(Lv) <= 1e-14 * scale) throw DomainError("angular metric undefined where L(v) = 0");
  const Vec gv = g.matrix * v;
  return {g.matrix - gv * gv.transpose() / Lv, g.t, g.x, v};
}

inline Signature signature(const Mat& m, std::optional<double> tol = std::nullopt) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  const double thr = tol ? *tol : 1e-8 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Signature s;
  s.tol = thr;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) <= thr) {
      ++s.n_zero;
    } else if (ev(i) > 0.0) {
      ++s.n_pos;
    } else {
      ++s.n_neg;
    }
  }
  return s;
}

inline Signature signature(const BilinearForm& g, std::optional<double> tol = std::nullopt) {
  return signature(g.matrix, tol);
}

// ---------------------------------------------------------------------------
// validation

/// Sampled check of the declared invariants of a Finsler spec at the given
/// points: SPD data, |b|_a < 1, mild wind, positive definite fundamental tensors.
inline void validate_finsler(const FinslerSpec& spec, const std::vector<SamplePoint>& points,
                             int directions = 16) {
  const auto dirs = unit_directions(std::min(spec.dim, 3), directions);
  for (const auto& pt : points) {
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, finsler::RiemannQuad>) {
            const Mat G = s.G.eval(pt.t, pt.x);
            if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, G.norm())) {
              throw ValidationError("Riemannian matrix field not symmetric");
            }
            if (signature(G).n_pos != spec.dim) throw ValidationError("Riemannian matrix field not positive definite");
          } else if constexpr (std::is_same_v<S, finsler::Randers>) {
            const Mat a = s.a.eval(pt.t, pt.x);
            if (signature(a).n_pos != spec.dim) throw ValidationError("Randers a not positive definite");
            const Vec b = s.b.eval(pt.t, pt.x);
            if (!(b.dot(a.ldlt().solve(b)) < 1.0)) throw ValidationError("Randers one-form has a-norm >= 1");
          } else if constexpr (std::is_same_v<S, finsler::ZermeloData>) {
            const Mat g0 = s.g0.eval(pt.t, pt.x);
            if (signature(g0).n_pos != spec.dim) throw ValidationError("Zermelo g0 not positive definite");
            const Vec W = s.W.eval(pt.t, pt.x);
            if (!(detail::quad(g0, W) < 1.0)) {
              throw ValidationError("strong wind: g0(W,W) >= 1 at t=" + std::to_string(pt.t));
            }
          } else if constexpr (std::is_same_v<S, finsler::Kropina>) {
            validate_finsler(*s.F0, {pt}, directions);
          }
        },
        spec.data);
    if (spec.dim <= 3 && !std::holds_alternative<finsler::Kropina>(spec.data) &&
        !std::holds_alternative<finsler::PPower>(spec.data)) {
      for (const auto& d : dirs) {
        if (signature(finsler_tensor_matrix(spec, pt.t, pt.x, d)).n_pos != spec.dim) {
          throw ValidationError("fundamental tensor not positive definite at a sampled direction");
        }
      }
    }
  }
}

inline FinslerSpec zermelo_from_data(const MatrixField& g0, const VectorField& W,
                                     const std::vector<SamplePoint>& samples = {}) {
  FinslerSpec spec{finsler::ZermeloData{g0, W}, g0.dim};
  if (W.size() != g0.dim) throw ValidationError("wind dimension does not match g0");
  std::vector<SamplePoint> pts = samples;
  if (pts.empty()) pts.push_back({0.0, Vec::Zero(g0.dim)});
  validate_finsler(spec, pts);
  return spec;
}

}  // namespace conenav
