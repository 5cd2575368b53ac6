#include <gtest/gtest.h>

#include "smalldev/config.hpp"

using namespace smalldev;

TEST(MeasureJson, RoundTrip) {
  const auto m = SpectralMeasure::fgn(0.7)
                     .with_flat(0.05)
                     .with_atoms({{0.4, 0.1}, {-0.4, 0.1}})
                     .with_zones({{1.0, 1.5}})
                     .with_ell(SlowlyVaryingFn::log_power(0.5))
                     .with_label("mixed");
  const Json j = to_json(m);
  EXPECT_EQ(to_json(measure_from_json(j)), j);
}

TEST(MeasureJson, RejectsUnknownKeys) {
  try {
    measure_from_json(Json::parse(R"({"H": 0.5, "hurst": 0.5})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown key 'hurst'"), std::string::npos);
  }
}

TEST(MeasureJson, RejectsNegativeAtomWeight) {
  EXPECT_THROW(measure_from_json(Json::parse(R"({"atoms": [[0.5, -1.0], [-0.5, -1.0]]})")), ConfigError);
  EXPECT_THROW(measure_from_json(Json::parse(R"({"atoms": [[0.5, 1.0]]})")), ConfigError);
  EXPECT_THROW(measure_from_json(Json::parse(R"({"label": "empty"})")), ConfigError);
}

TEST(BoundaryJson, RoundTripAndErrors) {
  for (const Boundary& b : {Boundary::constant(0.5), Boundary::power(2.0, 0.25), Boundary::table({1.0, 2.0})})
    EXPECT_EQ(to_json(boundary_from_json(to_json(b))), to_json(b));
  EXPECT_THROW(boundary_from_json(Json::parse(R"({"family": "cubic"})")), ConfigError);
  EXPECT_THROW(boundary_from_json(Json::parse(R"({"family": "constant", "f": -1})")), ConfigError);
}

TEST(ConfigJson, RoundTrip) {
  ExperimentConfig c;
  c.measure = SpectralMeasure::fgn(0.3);
  c.boundary = Boundary::power(1.0, 0.1);
  c.N = 48;
  c.seed = 1234567890123ull;
  c.engines.qmc.points = PointSet::pseudo;
  c.engines.mc.enabled = false;
  c.sample.format = SampleFormat::csv;
  c.output.prefix = "x";
  const Json j = to_json(c);
  EXPECT_EQ(to_json(config_from_json(j)), j);
  EXPECT_EQ(to_json(parse_config(j.dump())), j);
}

TEST(ConfigJson, SchemaErrors) {
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"N": 0})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"N": 1.5})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"engines": {"qmc": {"points": "sobol"}}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"extra": 1})"), ConfigError);
  EXPECT_NO_THROW(parse_config("{}"));
}

TEST(ResultJson, NonFiniteBecomesNull) {
  BandProbability b;
  b.method = "mc";
  const Json j = to_json(b);
  EXPECT_TRUE(j["log_p"].is_null());
}

TEST(PayloadHash, IgnoresWallTime) {
  BandProbability b;
  b.method = "qmc";
  b.log_p = -3.0;
  b.wall_time_ms = 5.0;
  Json doc{{"results", Json::array({to_json(b)})}};
  const auto h1 = payload_hash(doc);
  doc["results"][0]["wall_time_ms"] = 999.0;
  EXPECT_EQ(payload_hash(doc), h1);
  doc["results"][0]["log_p"] = -3.5;
  EXPECT_NE(payload_hash(doc), h1);
  EXPECT_EQ(h1.size(), 16u);
}
