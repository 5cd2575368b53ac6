#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "smalldev/engines.hpp"

using namespace smalldev;
using detail::normal_cdf;

namespace {

QmcOptions qmc(std::uint64_t seed, std::size_t samples = 4096) {
  QmcOptions o;
  o.seed = seed;
  o.samples = samples;
  return o;
}

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

}  // namespace

TEST(Qmc, OneStepIsExact) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::white_noise(), 1);
  const auto b = band_probability_qmc(model, 1, 0.8, qmc(1));
  EXPECT_NEAR(b.p, 2.0 * normal_cdf(0.8) - 1.0, 1e-14);
}

TEST(Qmc, TwoIidStepsAgainstQuadrature) {
  const double f = 1.3;
  // P{|X| <= f, |X + Y| <= f} = int phi(x) [Phi(f - x) - Phi(-f - x)] dx over [-f, f].
  const double exact = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [f](double x) { return phi(x) * (normal_cdf(f - x) - normal_cdf(-f - x)); }, -f, f, 15, 1e-14);
  const auto model = CovarianceModel::from_measure(SpectralMeasure::white_noise(), 2);
  const auto b = band_probability_qmc(model, 2, f, qmc(3));
  EXPECT_NEAR(b.p, exact, 3.0 * b.err + 1e-9);
}

TEST(Qmc, IidAgainstTransferOperator) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::white_noise(), 16);
  const auto b = band_probability_qmc(model, 16, 1.0, qmc(5, 8192));
  const auto t = band_probability_transfer(1.0, 16, 200);
  EXPECT_NEAR(b.log_p, t.log_p, 3.0 * b.log_err + 1e-6);
}

TEST(Qmc, StepAndSumCoordinatesAgree) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.7), 8);
  const auto a = band_probability_qmc(model, 8, 1.5, qmc(7));
  const auto b = band_probability_qmc(partial_sum_covariance(model, 8), 1.5, qmc(8));
  EXPECT_NEAR(a.log_p, b.log_p, 3.0 * std::hypot(a.log_err, b.log_err));
}

TEST(Qmc, DeterministicUnderSeed) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.3), 12);
  EXPECT_EQ(band_probability_qmc(model, 12, 1.0, qmc(4)).log_p, band_probability_qmc(model, 12, 1.0, qmc(4)).log_p);
}

TEST(Qmc, PseudoPointsAgreeWithLattice) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.6), 24);
  auto o = qmc(9, 8192);
  const auto a = band_probability_qmc(model, 24, 1.2, o);
  o.points = PointSet::pseudo;
  const auto b = band_probability_qmc(model, 24, 1.2, o);
  EXPECT_NEAR(a.log_p, b.log_p, 3.0 * std::hypot(a.log_err, b.log_err));
}

TEST(Qmc, DegenerateCovarianceIsReported) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::atomic({{0.0, 1.0}}), 4);
  EXPECT_THROW(band_probability_qmc(model, 4, 1.0, qmc(1)), DegenerateCovariance);
}

TEST(MvnBox, IndependentCoordinatesFactor) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
  s(1, 1) = 4.0;
  const double inf = std::numeric_limits<double>::infinity();
  const auto b = mvn_box_qmc(s, {-1.0, -inf, 0.0}, {2.0, 1.0, inf}, qmc(2));
  const double exact = (normal_cdf(2.0) - normal_cdf(-1.0)) * normal_cdf(0.5) * 0.5;
  EXPECT_NEAR(b.p, exact, 1e-12);
}

TEST(Atomic, DeltaZeroRankOneExact) {
  const auto m = SpectralMeasure::atomic({{0.0, 1.0}});
  const auto b = band_probability_atomic(m, 10, 0.5);
  EXPECT_NEAR(b.p, 2.0 * normal_cdf(0.05) - 1.0, 1e-14);
}

TEST(Atomic, DeltaPiRankOneExact) {
  const auto m = SpectralMeasure::atomic({{-M_PI, 2.0}});
  const auto b = band_probability_atomic(m, 9, 0.7);
  EXPECT_NEAR(b.p, 2.0 * normal_cdf(0.7 / std::sqrt(2.0)) - 1.0, 1e-14);
}

TEST(Atomic, AgreesWithCountingMonteCarlo) {
  const auto m = SpectralMeasure::atomic({{-M_PI / 2, 1.0}, {M_PI / 2, 1.0}});
  const auto a = band_probability_atomic(m, 16, 0.5, qmc(3));
  const auto c = band_probability_mc(m, 16, 0.5, 200000, 3);
  EXPECT_NEAR(a.p, c.p, 3.0 * std::hypot(a.err, c.err));
}

TEST(Dispatcher, PicksAnalyticReduction) {
  EXPECT_EQ(band_probability(SpectralMeasure::atomic({{0.0, 1.0}}), 8, 1.0).method, "atomic");
  EXPECT_EQ(band_probability(SpectralMeasure::fgn(0.5), 8, 1.0).method, "qmc");
}

TEST(CountingMc, AgreesWithQmc) {
  const auto m = SpectralMeasure::fgn(0.7);
  const auto a = band_probability_mc(m, 16, 2.0, 100000, 8);
  const auto b = band_probability(m, 16, 2.0, qmc(8));
  EXPECT_NEAR(a.log_p, b.log_p, 3.0 * std::hypot(a.log_err, b.log_err));
}

TEST(CountingMc, ZeroHitsGiveUpperBound) {
  const auto b = band_probability_mc(SpectralMeasure::white_noise(), 32, 0.05, 1000, 1);
  EXPECT_TRUE(b.upper_bound_only);
  EXPECT_NEAR(b.p, -std::log(0.05) / 1000.0, 1e-15);
}

TEST(Transfer, OneStepAndMonotone) {
  EXPECT_NEAR(band_probability_transfer(1.1, 1).p, 2.0 * normal_cdf(1.1) - 1.0, 1e-12);
  const auto a = transfer_rate(1.0), b = transfer_rate(2.0);
  EXPECT_LT(a.c, b.c);
  EXPECT_LT(b.c, 0.0);
  EXPECT_LT(a.err, 1e-10);
  EXPECT_GT(a.lambda1, a.lambda2);
}

TEST(Transfer, RateMatchesLongRunProbability) {
  const auto t = transfer_rate(1.0);
  const double l200 = band_probability_transfer(1.0, 200).log_p, l100 = band_probability_transfer(1.0, 100).log_p;
  EXPECT_NEAR((l200 - l100) / 100.0, t.c, 1e-10);
}
