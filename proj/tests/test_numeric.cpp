#include <gtest/gtest.h>

#include <cmath>

#include "smalldev/detail/numeric.hpp"

using namespace smalldev;
using namespace smalldev::detail;

TEST(Normal, CdfKnownValues) {
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-14);
  EXPECT_NEAR(normal_cdf(-3.0), 0.0013498980316300946, 1e-16);
  EXPECT_NEAR(normal_ccdf(8.0), 6.220960574271785e-16, 1e-28);
}

TEST(Normal, QuantileInvertsCdf) {
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-10})
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-13 * std::max(1.0, p / (1.0 - p)) + 1e-15 * p);
}

TEST(Normal, IntervalMassIsStableInTheTail) {
  const double far = normal_interval_mass(9.0, 10.0);
  EXPECT_GT(far, 0.0);
  EXPECT_NEAR(far / (normal_ccdf(9.0) - normal_ccdf(10.0)), 1.0, 1e-12);
  EXPECT_NEAR(normal_interval_mass(-1.0, 1.0), 0.6826894921370859, 1e-14);
}

TEST(TruncatedNormal, DrawStaysInsideAndMatchesMass) {
  const auto d = truncated_normal_draw(-0.5, 2.0, 0.5);
  EXPECT_NEAR(d.mass, normal_cdf(2.0) - normal_cdf(-0.5), 1e-15);
  EXPECT_GE(d.z, -0.5);
  EXPECT_LE(d.z, 2.0);
  const auto tail = truncated_normal_draw(7.0, 9.0, 0.999);
  EXPECT_GE(tail.z, 7.0);
  EXPECT_LE(tail.z, 9.0);
}

TEST(LogSumExp, MatchesDirectSum) {
  LogSumExp acc;
  double direct = 0.0;
  for (int i = 1; i <= 10; ++i) {
    acc.add(std::log(static_cast<double>(i)));
    direct += i;
  }
  EXPECT_NEAR(acc.log_sum(), std::log(direct), 1e-14);
  EXPECT_NEAR(acc.log_mean(), std::log(direct / 10.0), 1e-14);
  LogSumExp tiny;
  tiny.add(-800.0);
  tiny.add(-800.0);
  EXPECT_NEAR(tiny.log_sum(), -800.0 + std::log(2.0), 1e-12);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto [nodes, weights] = gauss_legendre(6);
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * std::pow(nodes[i], 10);
  EXPECT_NEAR(s, 2.0 / 11.0, 1e-14);
}

TEST(Quadrature, AdaptiveMeetsTolerance) {
  const auto r = integrate([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  const auto s = integrate([](double x) { return 1.0 / (1.0 + 1e4 * x * x); }, -1.0, 1.0, 1e-10);
  EXPECT_NEAR(s.value, 2.0 * std::atan(100.0) / 100.0, 1e-10);
}

TEST(LeastSquares, RecoversLinearModel) {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 8; ++i) {
    rows.push_back({1.0, static_cast<double>(i)});
    y.push_back(3.0 - 0.5 * i);
  }
  const auto ls = least_squares(rows, y);
  EXPECT_NEAR(ls.coef[0], 3.0, 1e-12);
  EXPECT_NEAR(ls.coef[1], -0.5, 1e-12);
}

TEST(Primes, FirstFew) {
  const auto p = first_primes(6);
  EXPECT_EQ(p, (std::vector<std::uint32_t>{2, 3, 5, 7, 11, 13}));
}
