#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "smalldev/rates.hpp"

using namespace smalldev;
using detail::normal_cdf;

TEST(Szego, WhiteNoiseConstant) {
  // ln pi + (1/2) ln(1 / 2 pi) for the flat density 1 / 2 pi.
  const double expect = std::log(M_PI) - 0.5 * std::log(2.0 * M_PI);
  EXPECT_NEAR(szego_constant(SpectralMeasure::white_noise()), expect, 1e-9);
  EXPECT_NEAR(expect, 0.225791, 1e-6);
}

TEST(Szego, InnovationVarianceMatchesLevinson) {
  const auto m = SpectralMeasure::fgn(0.3);
  const auto model = CovarianceModel::from_measure(m, 1024);
  const auto lev = levinson(model, 1024, false);
  EXPECT_NEAR(innovation_variance(m), lev.v.back(), 2e-3 * lev.v.back());
}

TEST(Szego, IrregularMeasuresAreRejected) {
  EXPECT_THROW(log_density_integral(SpectralMeasure::atomic({{0.0, 1.0}})), NumericalError);
  EXPECT_THROW(log_density_integral(SpectralMeasure::fgn(0.5).with_zones({{0.2, 0.4}})), NumericalError);
}

TEST(Szego, RateFormula) {
  const auto p = szego_rate(SpectralMeasure::white_noise(), Boundary::constant(0.05), 10);
  EXPECT_NEAR(p.log_p, 10.0 * std::log(0.05) - 10.0 * 0.2257913526, 1e-8);
  EXPECT_THROW(szego_rate(SpectralMeasure::white_noise(), Boundary::constant(1.0), 10), DomainError);
}

TEST(Regime, Classification) {
  const auto one = SlowlyVaryingFn::one();
  EXPECT_EQ(classify(Boundary::constant(0.1), 0.5, one, 64), Regime::to_zero);
  EXPECT_EQ(classify(Boundary::constant(1.0), 0.5, one, 64), Regime::constant);
  EXPECT_EQ(classify(Boundary::power(1.0, 0.25), 0.5, one, 256), Regime::sub_scale);
  EXPECT_EQ(classify(Boundary::power(1.0, 0.7), 0.5, one, 256), Regime::out_of_theory);
}

TEST(FbmRate, HalfUsesKnownConstant) {
  const auto b = Boundary::power(1.0, 0.25);
  const auto p = fbm_rate(0.5, SlowlyVaryingFn::one(), b, 256);
  EXPECT_NEAR(p.log_p, -kKappaHalf * 256.0 / 16.0, 1e-12);
  EXPECT_THROW(fbm_rate(0.5, SlowlyVaryingFn::one(), Boundary::constant(1.0), 256), DomainError);
  EXPECT_THROW(fbm_rate(0.7, SlowlyVaryingFn::one(), Boundary::power(1.0, 0.3), 256), DomainError);
}

TEST(Bounds, OrderedAroundTruth) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::white_noise(), 10);
  const double exact = band_probability_transfer(0.05, 10).log_p;
  EXPECT_LE(regularized_lower_bound_best(model, 10, 0.05).value, exact);
  EXPECT_GE(volumetric_upper_bound(model, 10, 0.05), exact);
  EXPECT_LE(exact / 10.0, conditional_variance_bound(1.0, 0.05));
  EXPECT_NEAR(conditional_variance_bound(1.0, 1.0), std::log(2.0 * normal_cdf(1.0) - 1.0), 1e-14);
}

TEST(ConstantLimit, IidLadderApproachesTransferRate) {
  QmcOptions o;
  o.seed = 3;
  const auto lim = constant_rate_limit(SpectralMeasure::white_noise(), 1.0, {16, 32, 64}, o);
  EXPECT_FALSE(lim.partial);
  EXPECT_EQ(lim.gaps.size(), 2u);
  EXPECT_NEAR(lim.c_hat, transfer_rate(1.0).c, 0.02 * std::abs(transfer_rate(1.0).c));
}

TEST(Dirac, ExpectedExponents) {
  EXPECT_EQ(dirac_expected_exponents(DiracCase::delta0), std::make_pair(1.0, -1.0));
  EXPECT_EQ(dirac_expected_exponents(DiracCase::four_atoms), std::make_pair(4.0, -1.0));
  EXPECT_EQ(dirac_measure(DiracCase::four_atoms).atoms().size(), 4u);
}

TEST(Dirac, DeltaZeroSlopes) {
  const auto rep = dirac_example_check(DiracCase::delta0, {16, 32, 64}, {0.05, 0.1});
  EXPECT_TRUE(rep.pass) << rep.slope_f << " " << rep.slope_N;
}

TEST(Pmq, OneDimensionalOracle) {
  const double C = 0.2, a = 1.0 / (3.0 * C);
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  // P{|xi| + |eta| <= a} = int_{-a}^{a} phi(x) (2 Phi(a - |x|) - 1) dx.
  const double exact = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return phi(x) * (2.0 * normal_cdf(a - std::abs(x)) - 1.0); }, -a, a, 15, 1e-13);
  const auto est = perturbation_pmq(1.0, 1, C, 0.5, 400000, 5);
  EXPECT_NEAR(est.p, exact, 4.0 * est.err);
}

TEST(Pmq, DeterministicAndDecreasingInQ) {
  const auto a = perturbation_pmq(1.5, 1, 0.3, 0.5, 50000, 2);
  const auto b = perturbation_pmq(1.5, 1, 0.3, 0.5, 50000, 2);
  EXPECT_EQ(a.p, b.p);
  const auto c = perturbation_pmq(1.5, 8, 0.3, 0.5, 50000, 2);
  EXPECT_LT(c.p, a.p);
}

TEST(Pmq, ConstantIsPositive) {
  const auto sch = PerturbationSchedule::with_power_boundary(0.5, {{1.5, 2, 16}, {2.0, 4, 256}});
  EXPECT_GT(pmq_constant(sch, 0), 0.0);
  EXPECT_GT(pmq_constant(sch, 1), 0.0);
}

TEST(Kappa, SmallLadderRuns) {
  KappaConfig cfg;
  cfg.d_ladder = {4, 6, 9, 12};
  cfg.samples = 1024;
  cfg.replicates = 2;
  const auto k = estimate_kappa(0.5, cfg);
  EXPECT_GT(k.kappa, 0.0);
  EXPECT_LT(k.ci_lo, k.ci_hi);
  EXPECT_EQ(k.replicate_kappa.size(), 2u);
}

TEST(Report, CsvColumns) {
  std::ostringstream os;
  write_rate_report(os, {{"szego", 8, 0.05, -1.0, -1.1, 0.01, "PASS"}});
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "theorem,N,f,predicted,measured,err,verdict");
}
