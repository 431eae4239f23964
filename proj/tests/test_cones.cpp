#include "conenav/catalog.hpp"
#include "conenav/cones.hpp"

#include <gtest/gtest.h>

using namespace conenav;

namespace {

const Vec kX = Vec::Zero(2);

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ConeTriple euclid_triple() { return static_triple(make_euclidean(2)); }

}  // namespace

TEST(Decompose, Examples) {
  const auto tr = euclid_triple();
  auto d = decompose(tr, 0, kX, vec3(3, 1, 2));
  EXPECT_EQ(d.tau, 3.0);
  EXPECT_EQ(d.w, vec3(0, 1, 2));
  d = decompose(tr, 0, kX, vec3(1, 0, 0));
  EXPECT_EQ(d.tau, 1.0);
  EXPECT_EQ(d.w.norm(), 0.0);
  ConeTriple tilted = tr;
  tilted.Omega = VectorField::constant(vec3(1, 0.5, 0));
  d = decompose(tilted, 0, kX, vec3(0, 2, 0));
  EXPECT_DOUBLE_EQ(d.tau, 1.0);
  EXPECT_LT((d.w - vec3(-1, 2, 0)).norm(), 1e-15);
}

TEST(Decompose, Recompose) {
  ConeTriple tr = euclid_triple();
  tr.Omega = VectorField::constant(vec3(1, 0.3, -0.2));
  tr.T = VectorField::constant(vec3(1, 0, 0));
  CausalSampler S(9);
  for (int k = 0; k < 200; ++k) {
    const Vec v = S.gaussian(3);
    const auto [tau, w] = decompose(tr, 0, kX, v);
    EXPECT_LT((tau * vec3(1, 0, 0) + w - v).norm(), 1e-12 * std::max(1.0, v.norm()));
    EXPECT_LE(std::abs(vec3(1, 0.3, -0.2).dot(w)), 1e-10 * std::max(1.0, v.norm()));
  }
}

TEST(Classify, Examples) {
  const auto tr = euclid_triple();
  EXPECT_EQ(classify(tr, 0, kX, vec3(2, 1, 0)), CausalClass::timelike);
  EXPECT_EQ(classify(tr, 0, kX, vec3(1, 1, 0)), CausalClass::lightlike);
  EXPECT_EQ(classify(tr, 0, kX, vec3(0, 1, 0)), CausalClass::noncausal);
  EXPECT_EQ(classify(tr, 0, kX, vec3(-1, 1, 0)), CausalClass::noncausal);
  EXPECT_EQ(classify(tr, 0, kX, vec3(-1, 0, 0)), CausalClass::noncausal);
}

TEST(Classify, ScaleInvariant) {
  ConeTriple tr = static_triple(make_randers(Mat::Identity(2, 2), v2(0.3, 0.1)));
  CausalSampler S(10);
  for (int k = 0; k < 1000; ++k) {
    const Vec v = S.gaussian(3);
    const double lam = std::exp(S.uniform(-3, 3));
    EXPECT_EQ(classify(tr, 0, kX, v), classify(tr, 0, kX, lam * v));
  }
}

TEST(ExtractFiberNorm, Examples) {
  const Vec dt = vec3(1, 0, 0);
  EXPECT_NEAR(extract_fiber_norm(minkowski(3), dt, dt, 0, kX, vec3(0, 1, 0)), 1.0, 1e-14);
  Mat G = Vec(vec3(1, -4, -4)).asDiagonal();
  EXPECT_NEAR(extract_fiber_norm(make_quad_lorentz(G), dt, dt, 0, kX, vec3(0, 1, 0)), 2.0, 1e-14);
  // omega = dt, F spatial Randers (acting on all of R^3 through the spatial part).
  Mat a = Mat::Identity(3, 3);
  a(0, 0) = 1e-16;
  const auto omf = make_omega_minus_f(dt, make_randers(a, vec3(0, 0.3, 0)));
  EXPECT_NEAR(extract_fiber_norm(omf, dt, dt, 0, kX, vec3(0, 1, 0)), 1.3, 1e-12);
  EXPECT_THROW(extract_fiber_norm(minkowski(3), dt, dt, 0, kX, vec3(1, 1, 0)), ValidationError);
  EXPECT_THROW(extract_fiber_norm(minkowski(3), dt, vec3(0, 0, 1), 0, kX, vec3(0, 1, 0)), NumericalError);
}

TEST(ExtractFiberNorm, RoundTripTripleG) {
  CausalSampler S(12);
  for (const auto& ns : reference_specs()) {
    const auto* tg = std::get_if<lorentz::TripleG>(&ns.spec.data);
    if (tg == nullptr) continue;
    for (int k = 0; k < 100; ++k) {
      const double t = S.uniform(-0.5, 0.5);
      const Vec x = S.point(2);
      const Vec Om = tg->triple.Omega.eval(t, x);
      const Vec T = tg->triple.T.eval(t, x);
      const Vec w = kernel_lift(Om, S.gaussian(2));
      const double F = fiber_norm(tg->triple, t, x, w);
      EXPECT_NEAR(extract_fiber_norm(ns.spec, Om, T, t, x, w), F, 1e-8 * F) << ns.name;
    }
  }
}

TEST(ExtractFiberNorm, Homogeneous) {
  const auto L = reference_specs()[2].spec;  // omega minus Randers
  const Vec om = cone_reference(L, 0, kX).Omega;
  const Vec T = cone_reference(L, 0, kX).seed / om.dot(cone_reference(L, 0, kX).seed);
  const Vec w = kernel_lift(om, v2(0.3, -0.8));
  const double f1 = extract_fiber_norm(L, om, T, 0, kX, w);
  EXPECT_NEAR(extract_fiber_norm(L, om, T, 0, kX, 3.0 * w), 3.0 * f1, 1e-12 * f1);
  EXPECT_NEAR(lorentz_eval(L, 0, kX, f1 * T + w), 0.0, 1e-10 * (f1 * T + w).squaredNorm());
}

TEST(LightlikeDirections, EuclideanFan) {
  const auto fan = lightlike_directions(euclid_triple(), 0, kX, 4);
  ASSERT_EQ(fan.size(), 4u);
  const std::vector<Vec> expect = {vec3(1, 1, 0), vec3(1, 0, 1), vec3(1, -1, 0), vec3(1, 0, -1)};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LT((fan[i] - expect[i]).norm(), 1e-15);
}

TEST(LightlikeDirections, RandersAndSingle) {
  const auto tr = static_triple(make_randers(Mat::Identity(2, 2), v2(0.3, 0)));
  EXPECT_LT((lightlike_over(tr, 0, kX, v2(1, 0)) - vec3(1.3, 1, 0)).norm(), 1e-15);
  const auto one = lightlike_directions(tr, 0, kX, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(classify(tr, 0, kX, one[0]), CausalClass::lightlike);
  EXPECT_THROW(lightlike_directions(tr, 0, kX, 0), ValidationError);
}

TEST(LightlikeDirections, NullForCompatibleSpec) {
  const auto tr = static_triple(make_randers(Mat::Identity(2, 2), v2(0.3, -0.2)));
  const auto G = make_triple_g(tr);
  const auto scaled = make_scaled(reference_mu(3), G);
  for (const auto& v : lightlike_directions(tr, 0, kX, 64)) {
    EXPECT_EQ(classify(tr, 0, kX, v), CausalClass::lightlike);
    EXPECT_LE(std::abs(lorentz_eval(G, 0, kX, v)), 1e-8 * v.squaredNorm());
    EXPECT_LE(std::abs(lorentz_eval(scaled, 0, kX, v)), 1e-8 * v.squaredNorm());
  }
}

TEST(Triple, Validation) {
  ConeTriple bad = euclid_triple();
  bad.T = VectorField::constant(vec3(2, 0, 0));
  EXPECT_THROW(validate_triple(bad, {{0, kX}}), ValidationError);
  EXPECT_NO_THROW(validate_triple(euclid_triple(), {{0, kX}}));
}
