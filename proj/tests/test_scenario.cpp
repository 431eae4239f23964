#include "conenav/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace conenav;

namespace {

const std::string kDir = CONENAV_SCENARIO_DIR;

json minimal() {
  return json::parse(R"({
    "dimension": 2,
    "metric": {"type": "euclidean"},
    "zermelo": {"start": [0, 0], "target": [1, 0], "horizon": 2}
  })");
}

std::string error_of(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Load, MinimalNoWindIsEuclidean) {
  const auto sf = parse_scenario(minimal());
  ASSERT_TRUE(sf.metric.has_value());
  ASSERT_TRUE(sf.zermelo.has_value());
  EXPECT_TRUE(std::holds_alternative<finsler::RiemannQuad>(sf.metric->data));
  EXPECT_DOUBLE_EQ(finsler_eval(*sf.metric, 0.0, Vec::Zero(2), v2(3, 4)), 5.0);
  EXPECT_EQ(sf.zermelo->t0, 0.0);
  EXPECT_EQ(sf.zermelo->horizon, 2.0);
  EXPECT_EQ(sf.seed, 0u);
  EXPECT_EQ(sf.solver.fan, NavigationConfig{}.fan);
}

TEST(Load, StrongWindRejected) {
  json doc = minimal();
  doc["metric"] = json::parse(R"({"type": "zermelo", "wind": ["1.2", "0"]})");
  const std::string msg = error_of(doc);
  EXPECT_NE(msg.find("strong wind"), std::string::npos) << msg;
  EXPECT_NE(msg.find("scenario: zermelo"), std::string::npos) << msg;
  EXPECT_THROW(load_scenario(kDir + "/strong_wind.json"), ValidationError);
  // Without a zermelo block the metric itself is validated.
  doc.erase("zermelo");
  EXPECT_NE(error_of(doc).find("strong wind"), std::string::npos);
}

TEST(Load, BadExpressionNamesTheField) {
  json doc = minimal();
  doc["metric"] = json::parse(R"({"type": "zermelo", "wind": ["0.1", "x9"]})");
  try {
    parse_scenario(doc);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("metric.wind[1]"), std::string::npos) << e.what();
  }
}

TEST(Load, SchemaErrorsCarryPaths) {
  json doc = minimal();
  doc.erase("dimension");
  EXPECT_NE(error_of(doc).find("missing field 'dimension'"), std::string::npos);
  doc = minimal();
  doc["colour"] = 1;
  EXPECT_NE(error_of(doc).find("unknown field 'colour'"), std::string::npos);
  doc = minimal();
  doc["zermelo"]["target"] = json::array({1, 2, 3});
  EXPECT_NE(error_of(doc).find("zermelo.target"), std::string::npos);
  doc = minimal();
  doc["metric"]["type"] = "hyperbolic";
  EXPECT_NE(error_of(doc).find("metric.type"), std::string::npos);
  doc = minimal();
  doc["zermelo"]["horizon"] = "long";
  EXPECT_NE(error_of(doc).find("zermelo.horizon: expected a number"), std::string::npos);
  doc = minimal();
  doc["dimension"] = 4;
  EXPECT_NE(error_of(doc).find("dimension"), std::string::npos);
  EXPECT_THROW(load_scenario(kDir + "/does_not_exist.json"), ValidationError);
}

TEST(Load, LorentzBlocks) {
  const auto ce = load_scenario(kDir + "/counterexample_gr_minus_f.json");
  ASSERT_TRUE(ce.lorentz.has_value());
  EXPECT_TRUE(std::holds_alternative<lorentz::RiemannMinusF>(ce.lorentz->data));
  EXPECT_EQ(ce.lorentz->dim, 3);
  EXPECT_EQ(ce.seed, 4u);

  const auto rs = load_scenario(kDir + "/round_sphere.json");
  ASSERT_TRUE(rs.lorentz && rs.geodesic);
  Vec v(3);
  v << 1, 1, 0;
  // Conformal factor 4 / (1 + 1)^2 = 1 at x = (0, -1): lightlike.
  EXPECT_NEAR(lorentz_eval(*rs.lorentz, 0.0, v2(0, -1), v), 0.0, 1e-15);

  json doc = json::parse(R"js({
    "dimension": 1,
    "lorentz": {"type": "scaled", "mu": "1 + 0.3*v0^2/(v0^2 + v1^2)",
                "base": {"type": "bogoslovsky", "L0": {"type": "minkowski"}, "beta": [1, 0.2], "b": -0.3}}
  })js");
  const auto sf = parse_scenario(doc);
  ASSERT_TRUE(sf.lorentz.has_value());
  EXPECT_TRUE(std::holds_alternative<lorentz::Scaled>(sf.lorentz->data));
  doc["lorentz"]["base"]["b"] = 0.5;
  EXPECT_NE(error_of(doc).find("lorentz.base"), std::string::npos);
}

TEST(Load, BundledScenariosLoad) {
  int loaded = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    if (entry.path().extension() != ".json" || entry.path().stem() == "strong_wind") continue;
    EXPECT_NO_THROW(load_scenario(entry.path().string())) << entry.path();
    ++loaded;
  }
  EXPECT_GE(loaded, 8);
}
