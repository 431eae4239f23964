#include "conenav/catalog.hpp"
#include "conenav/smoothing.hpp"

#include <gtest/gtest.h>

using namespace conenav;

namespace {

const Vec kX2 = Vec::Zero(2);
const Vec kX1 = Vec::Zero(1);

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(LorentzEval, Examples) {
  Mat G = Mat::Identity(3, 3);
  G(1, 1) = G(2, 2) = -1;
  EXPECT_DOUBLE_EQ(lorentz_eval(make_quad_lorentz(G), 0, kX2, vec3(2, 1, 0)), 3.0);
  const auto omf = make_omega_minus_f(v2(2, 0), make_euclidean(2));
  EXPECT_DOUBLE_EQ(lorentz_eval(omf, 0, kX1, v2(1, 0)), 3.0);
  const auto mink = minkowski(3);
  const auto bog0 = make_bogoslovsky(mink, vec3(1, 0, 0), -1e-300);
  EXPECT_NEAR(lorentz_eval(bog0, 0, kX2, vec3(2, 1, 0.5)), lorentz_eval(mink, 0, kX2, vec3(2, 1, 0.5)), 1e-12);
  EXPECT_THROW(make_bogoslovsky(mink, vec3(1, 0, 0), 0.2), ValidationError);
  EXPECT_THROW(lorentz_eval(make_bogoslovsky(mink, vec3(1, 0, 0), -0.3), 0, kX2, vec3(-2, 1, 0)), DomainError);
}

TEST(LorentzEval, Homogeneity) {
  CausalSampler S(101);
  for (const auto& ns : reference_specs()) {
    for (int k = 0; k < 40; ++k) {
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec v = S.sample(ns.spec, t, x, false);
      const double L = lorentz_eval(ns.spec, t, x, v);
      EXPECT_GT(L, 0.0) << ns.name;
      for (double lam : {0.5, 2.0, 10.0}) {
        EXPECT_NEAR(lorentz_eval(ns.spec, t, x, lam * v), lam * lam * L, 1e-10 * lam * lam * L) << ns.name;
      }
    }
  }
}

TEST(Tensor, ClosedFormExamples) {
  const auto omf = make_omega_minus_f(v2(2, 0), make_euclidean(2));
  Mat expect(2, 2);
  expect << 3, 0, 0, -1;
  for (const Vec& v : {v2(1, 0), v2(1, 0.5), v2(3, -1)}) {
    EXPECT_LT((lf_tensor_matrix(omf, 0, kX1, v) - expect).norm(), 1e-14);
  }
  const auto mink = minkowski(3);
  const Vec v = vec3(2, 0.5, -0.7);
  const Mat g1 = lf_tensor_matrix(mink, 0, kX2, v);
  EXPECT_LT(rel_frobenius(lf_tensor_matrix(make_sum_of_roots({mink, mink}), 0, kX2, v), 4.0 * g1), 1e-13);
  EXPECT_LT(rel_frobenius(lf_tensor_matrix(make_product_root(mink, mink), 0, kX2, v), g1), 1e-13);
}

TEST(Tensor, AgreesWithOracleInteriorAndCone) {
  CausalSampler S(202);
  for (const auto& ns : reference_specs()) {
    for (int k = 0; k < 60; ++k) {
      const bool cone = ns.tensor_on_cone && k % 3 == 0;
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec v = S.sample(ns.spec, t, x, cone);
      const Mat g = lf_tensor_matrix(ns.spec, t, x, v);
      if (cone && !std::holds_alternative<lorentz::SumOfRoots>(ns.spec.data)) {
        // The oracle straddles the cone; only metrics smooth across it qualify.
        if (!std::holds_alternative<lorentz::QuadLorentz>(ns.spec.data) &&
            !std::holds_alternative<lorentz::OmegaMinusF>(ns.spec.data) &&
            !std::holds_alternative<lorentz::RiemannMinusF>(ns.spec.data)) {
          continue;
        }
      }
      DiffConfig cfg;
      cfg.richardson = true;
      EXPECT_LT(rel_frobenius(g, lf_tensor_oracle(ns.spec, t, x, v, cfg).matrix), 1e-6) << ns.name << " cone=" << cone;
    }
  }
}

TEST(Tensor, NotExtendableToConeForProductAndBogoslovsky) {
  const auto mink = minkowski(3);
  const Vec l = vec3(1, 1, 0);
  EXPECT_THROW(lf_tensor_matrix(make_product_root(mink, mink), 0, kX2, l), DomainError);
  EXPECT_THROW(lf_tensor_matrix(make_bogoslovsky(mink, vec3(1, 0, 0), -0.3), 0, kX2, l), DomainError);
}

TEST(CheckLorentz, MinkowskiExamples) {
  const auto mink = minkowski(3);
  const auto rep = check_lorentz_at(mink, 0, kX2, vec3(2, 1, 0));
  EXPECT_TRUE(rep.overall);
  const auto cone = check_lorentz_at(mink, 0, kX2, vec3(1, 1, 0));
  EXPECT_TRUE(cone.overall);
  bool used_cone_branch = false;
  for (const auto& c : cone.checks) used_cone_branch = used_cone_branch || c.name.rfind("cone.", 0) == 0;
  EXPECT_TRUE(used_cone_branch);
  EXPECT_FALSE(check_lorentz_at(make_quad_lorentz(Mat::Identity(2, 2)), 0, kX1, v2(1, 0.3)).overall);
}

TEST(CheckLorentz, SignatureAndCharacterizationOnCatalog) {
  CausalSampler S(303);
  for (const auto& ns : reference_specs()) {
    for (int k = 0; k < 60; ++k) {
      const bool cone = ns.tensor_on_cone && k % 2 == 1;
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec v = S.sample(ns.spec, t, x, cone);
      EXPECT_EQ(signature(lf_tensor_matrix(ns.spec, t, x, v)), (Signature{1, 2, 0, 0})) << ns.name;
      EXPECT_TRUE(check_lorentz_at(ns.spec, t, x, v).overall) << ns.name << " cone=" << cone;
    }
  }
}

TEST(ReverseInequalities, OnCatalogPairs) {
  CausalSampler S(404);
  for (const auto& ns : reference_specs()) {
    for (int k = 0; k < 100; ++k) {
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec v = S.sample(ns.spec, t, x, false);
      const Vec w = S.sample(ns.spec, t, x, false);
      const double Fv = std::sqrt(lorentz_eval(ns.spec, t, x, v));
      const double Fw = std::sqrt(lorentz_eval(ns.spec, t, x, w));
      const double scale = Fv * Fw + (v.norm() + w.norm()) * (v.norm() + w.norm());
      EXPECT_GE(std::sqrt(lorentz_eval(ns.spec, t, x, v + w)) - Fv - Fw, -1e-9 * scale) << ns.name;
      EXPECT_GE(v.dot(lf_tensor_matrix(ns.spec, t, x, v) * w) - Fv * Fw, -1e-9 * scale) << ns.name;
    }
  }
}

TEST(Hypotheses, OmegaMinusFExamples) {
  const auto ok = make_omega_minus_f(v2(2, 0), make_euclidean(2));
  const auto rep = check_construction_hypotheses(ok, 0, kX1, 8);
  EXPECT_TRUE(rep.overall);
  EXPECT_FALSE(rep.checks.empty());
  const auto tangent = make_omega_minus_f(v2(1, 0), make_euclidean(2));
  EXPECT_FALSE(check_construction_hypotheses(tangent, 0, kX1, 8).overall);
  const auto empty = make_omega_minus_f(v2(0.5, 0), make_euclidean(2));
  EXPECT_THROW(check_construction_hypotheses(empty, 0, kX1, 8), ValidationError);
}

TEST(Hypotheses, OmegaMinusFLightlikeVector) {
  // v = (1, sqrt3): omega(v) = 2 = |v|; g_v(v, .) = (1, sqrt3) is not parallel to (2, 0).
  const Vec v = v2(1, std::sqrt(3.0));
  EXPECT_GT(line_angle(v, v2(2, 0)), 1.0);
}

TEST(Hypotheses, RiemannMinusFCounterexampleFails) {
  Mat gR = Vec(vec3(2, 2, 1)).asDiagonal();
  Mat gh = Vec(vec3(1, 1, 2)).asDiagonal();
  const auto L = make_riemann_minus_f(MatrixField::constant(gR), make_riemann(gh), vec3(1, 0, 0));
  const auto rep = check_construction_hypotheses(L, 0, kX2, 16);
  EXPECT_FALSE(rep.overall);
  int cone_checks = 0;
  for (const auto& c : rep.checks) {
    if (c.name == "interior_negative" || c.name == "cone_negative") {
      ++cone_checks;
      EXPECT_FALSE(c.pass) << c.name;
    }
  }
  EXPECT_GT(cone_checks, 0);
}

TEST(Hypotheses, RiemannMinusFCatalogPasses) {
  for (const auto& ns : reference_specs()) {
    if (ns.name == "riemann_minus_f") {
      EXPECT_TRUE(check_construction_hypotheses(ns.spec, 0, kX2, 16).overall);
    }
  }
}

TEST(Anisotropy, ScaledFactor) {
  const auto mink = minkowski(3);
  const auto two = make_scaled(2.0, mink);
  EXPECT_NEAR(anisotropic_factor(mink, two, 0, kX2, vec3(2, 1, 0)), 2.0, 1e-14);
  EXPECT_NEAR(anisotropic_factor(mink, two, 0, kX2, vec3(1, 1, 0)), 2.0, 1e-12);
  EXPECT_NEAR(anisotropic_factor(mink, mink, 0, kX2, vec3(1, 0, 1)), 1.0, 1e-14);
  const auto mu = reference_mu(3);
  const auto sc = make_scaled(mu, mink);
  CausalSampler S(505);
  for (int k = 0; k < 50; ++k) {
    const bool cone = k % 2 == 0;
    const Vec v = S.sample(mink, 0, kX2, cone);
    const double expect = mu.eval(0, kX2, v);
    EXPECT_NEAR(anisotropic_factor(mink, sc, 0, kX2, v), expect, (cone ? 1e-5 : 1e-8) * expect);
  }
}

TEST(HilbertForm, Examples) {
  const auto mink = minkowski(3);
  EXPECT_LT((rough_hilbert_form(mink, 0, kX2, vec3(1, 1, 0)) - vec3(1, -1, 0)).norm(), 1e-15);
  EXPECT_LT((rough_hilbert_form(mink, 0, kX2, vec3(1, 0, 0)) - vec3(1, 0, 0)).norm(), 1e-15);
  const auto sc = make_scaled(reference_mu(3), mink);
  const Vec l = vec3(1, 0.6, 0.8);
  const Vec a = rough_hilbert_form(mink, 0, kX2, l);
  const Vec b = rough_hilbert_form(sc, 0, kX2, l);
  EXPECT_LT((b - reference_mu(3).eval(0, kX2, l) * a).norm(), 1e-7);
}

TEST(HilbertForm, KernelIsConeTangent) {
  // Tangent space of the Minkowski cone at l: derivative of the curve of lightlike vectors.
  const auto mink = minkowski(3);
  for (double th : {0.1, 1.0, 2.5}) {
    const Vec l = vec3(1, std::cos(th), std::sin(th));
    const Vec tangent = vec3(0, -std::sin(th), std::cos(th));
    const Vec om = rough_hilbert_form(mink, 0, kX2, l);
    EXPECT_NEAR(om.dot(l), 0.0, 1e-14);
    EXPECT_NEAR(om.dot(tangent), 0.0, 1e-14);
  }
}

TEST(Static, Examples) {
  const auto euc = make_triple_g(static_triple(make_euclidean(2)));
  EXPECT_TRUE(static_check(euc, vec3(1, 0, 0), 0, kX2));
  // omega = 2 dt so that d/dt is timelike.
  Mat a = Mat::Identity(3, 3);
  const auto drift = make_omega_minus_f(vec3(2, 0, 0), make_randers(a, vec3(0, 0.3, 0)));
  EXPECT_FALSE(static_check(drift, vec3(1, 0, 0), 0, kX2));
  Mat G = Mat::Identity(3, 3);
  G(1, 1) = -2;
  G(2, 2) = -1;
  EXPECT_TRUE(static_check(make_quad_lorentz(G), vec3(1, 0, 0), 0, kX2));
  EXPECT_THROW(static_check(minkowski(3), vec3(0, 1, 0), 0, kX2), ValidationError);
}

TEST(SmoothMax, Examples) {
  EXPECT_DOUBLE_EQ(smooth_max(1, 1, 0.2), 1.1);
  EXPECT_NEAR(smooth_max(0, 1, 0.1), (1 + std::sqrt(1.01)) / 2, 1e-15);
  EXPECT_NEAR(smooth_max(0, 1, 1e-9), 1.0, 1e-9);
  EXPECT_THROW(smooth_max(0, 1, 0), ValidationError);
  for (double d : {-2.0, -0.5, 0.0, 0.3, 4.0}) {
    EXPECT_GE(smooth_max(d, 0, 0.5), std::max(d, 0.0));
    EXPECT_LE(smooth_max(d, 0, 0.5), std::max(d, 0.0) + 0.25);
    EXPECT_GE(compact_smooth_max(d, 0, 0.5), std::max(d, 0.0));
    EXPECT_LE(compact_smooth_max(d, 0, 0.5), std::max(d, 0.0) + 0.5);
  }
  EXPECT_EQ(compact_smooth_max(2.0, 1.0, 0.5), 2.0);
}

TEST(Smoothing, RandersFiber) {
  const auto F = make_randers(Mat::Identity(2, 2), v2(0.3, 0));
  const auto sg = smooth_indicatrix(F, 0, kX2, 1e-3, 0.5);
  EXPECT_GT(sg.delta, 0.0);
  double sup = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  const int n = 101;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec y = v2(-0.5 + i * 1.0 / (n - 1), -0.5 + j * 1.0 / (n - 1));
      const double a = sg.smoothed(y);
      const double b = sg.original(y);
      sup = std::max(sup, std::abs(a - b));
      if (y.norm() >= 0.25) {
        EXPECT_EQ(a, b);
      }
      if (y.norm() <= 0.5) {
        const ScalarFn f = sg.smoothed;
        const Mat H = numeric_hessian(f, y);
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Mat>(H).eigenvalues().minCoeff());
      }
    }
  }
  EXPECT_LE(sup, 1e-3);
  EXPECT_GT(min_eig, 0.0);
  EXPECT_EQ(sg.smoothed(0.6 * 0.5 * v2(0.6, 0.8)), sg.original(0.6 * 0.5 * v2(0.6, 0.8)));
}

TEST(Smoothing, EuclideanIsNearNoOp) {
  const auto sg = smooth_indicatrix(make_euclidean(2), 0, kX2, 1e-3, 0.5);
  for (double r : {0.0, 0.1, 0.2, 0.3, 0.6}) {
    const Vec y = r * v2(0.6, 0.8);
    EXPECT_LE(std::abs(sg.smoothed(y) - sg.original(y)), 1e-3);
    if (r >= 0.25) {
      EXPECT_EQ(sg.smoothed(y), sg.original(y));
    }
  }
}

TEST(Kostelecky, Classes) {
  Mat gt = Mat::Identity(3, 3);
  gt(0, 0) = -1;
  const Vec zero = Vec::Zero(3);
  EXPECT_EQ(kostelecky_classify(gt, zero, zero, 1, vec3(2, 1, 0)), KosteleckyClass::index_n_minus_1);
  EXPECT_EQ(kostelecky_classify(gt, zero, vec3(0.1, 0.2, 0), 1, vec3(1, 1, 0)), KosteleckyClass::undefined);
  // a with gt(v, a) = -sqrt(-gt(v,v)) - eps sqrt(p): F(v) = 0.
  const Vec b = vec3(0.0, 0.3, 0.0);
  const Vec v = vec3(2.0, 0.5, 0.0);
  const double vv = v.dot(gt * v);
  const double vb = v.dot(gt * b);
  const double p = vb * vb - b.dot(gt * b) * vv;
  const double target = -std::sqrt(-vv) - std::sqrt(p);
  // gt(v, a) = -v0 a0 + v1 a1 with a = (a0, 0, 0).
  const Vec a = vec3(-target / v(0), 0, 0);
  EXPECT_EQ(kostelecky_classify(gt, a, b, 1, v), KosteleckyClass::degenerate);
}
