#include <gtest/gtest.h>

#include <sstream>

#include "smalldev/experiments.hpp"

using namespace smalldev;

TEST(Ks, StatisticAndCritical) {
  EXPECT_EQ(detail::ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(detail::ks_statistic({1, 2}, {3, 4}), 1.0);
  EXPECT_NEAR(detail::ks_critical(0.05, 100, 100), 1.358 * std::sqrt(2.0 / 100.0), 1e-3);
}

TEST(Svg, EmbedsDataTable) {
  Plot p{"t", "x", "y", {{"s", {{1.0, 2.0, 0.1}, {2.0, 3.0, 0.0}}, false, "#000"}}, false};
  std::ostringstream os;
  write_svg(os, p);
  const std::string s = os.str();
  EXPECT_NE(s.find("<svg"), std::string::npos);
  EXPECT_NE(s.find("series,x,y,err\ns,1,2,0.10000000000000001"), std::string::npos);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
}

TEST(Experiments, CovarianceOracleSmall) {
  const auto r = covariance_oracle_experiment({0.3}, 8);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.plots.size(), 1u);
}

TEST(Experiments, PartialSumVarianceSmall) { EXPECT_TRUE(partial_sum_variance_experiment({0.6}, 64).pass()); }

TEST(Experiments, PropertySuitesOneSeed) {
  PropertyOptions po;
  po.samples = 2048;
  po.trials = 2;
  po.sampler_paths = 5000;
  for (const Check& c : {correlation_inequality_suite(11, po), anderson_suite(11, po), log_concavity_suite(11, po),
                         sampler_agreement_suite(11, po)})
    EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}

TEST(Experiments, UnknownPreset) { EXPECT_THROW(run_preset("nope", 1), ConfigError); }
