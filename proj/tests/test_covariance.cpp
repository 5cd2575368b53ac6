#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "smalldev/covariance.hpp"

using namespace smalldev;
using detail::kPi;

TEST(Autocov, QuadratureMatchesClosedForm) {
  for (double H : {0.3, 0.7}) {
    const auto m = SpectralMeasure::fgn(H);
    for (std::size_t k : {0u, 1u, 5u, 17u})
      EXPECT_NEAR(autocovariance_quadrature(m, k), fgn_autocovariance(H, static_cast<long long>(k)), 1e-6);
  }
}

TEST(Autocov, AtomsAndFlat) {
  const auto m = SpectralMeasure::white_noise(1.5).with_atoms({{0.7, 0.2}, {-0.7, 0.2}});
  for (std::size_t k : {0u, 1u, 4u}) {
    const double expect = (k == 0 ? 1.5 : 0.0) + 0.4 * std::cos(0.7 * static_cast<double>(k));
    EXPECT_NEAR(autocovariance(m, k), expect, 1e-12);
    EXPECT_NEAR(autocovariance_quadrature(m, k), expect, 1e-8);
  }
}

TEST(Autocov, ZonesRemoveMass) {
  const auto m = SpectralMeasure::fgn(0.5).with_zones({{0.5, 1.0}});
  EXPECT_NEAR(autocovariance(m, 0), 1.0 - 1.0 / kPi * 0.5, 1e-10);
  EXPECT_NEAR(autocovariance(m, 2), autocovariance_quadrature(m, 2), 1e-8);
}

TEST(Model, ChecksAutocovariance) {
  EXPECT_THROW(CovarianceModel::from_autocov({0.0, 0.0}), DomainError);
  EXPECT_THROW(CovarianceModel::from_autocov({1.0, 1.5}), DomainError);
  const auto m = CovarianceModel::from_autocov({1.0, 0.5});
  EXPECT_THROW(m.require(5), DomainError);
}

TEST(PartialSums, VarianceRecursionAndSpectralAgree) {
  const auto measure = SpectralMeasure::fgn(0.3).with_atoms({{1.2, 0.1}, {-1.2, 0.1}});
  const auto model = CovarianceModel::from_measure(measure, 12);
  const auto S = partial_sum_covariance(model, 12);
  for (std::size_t n : {1u, 4u, 12u})
    for (std::size_t k : {1u, 7u})
      EXPECT_NEAR(S.sigma(n - 1, k - 1), partial_sum_covariance_spectral(measure, n, k), 1e-6);
}

TEST(PartialSums, FgnSelfSimilarVariance) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.7), 256);
  const auto V = partial_sum_variances(model, 256);
  for (std::size_t n : {1u, 10u, 256u}) EXPECT_NEAR(V[n], std::pow(static_cast<double>(n), 1.4), 1e-9);
}

TEST(Levinson, LogdetMatchesCholesky) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.8), 64);
  EXPECT_NEAR(toeplitz_logdet(model, 64, LogdetMethod::levinson), toeplitz_logdet(model, 64, LogdetMethod::cholesky),
              1e-9);
}

TEST(Levinson, WhiteNoiseIsTrivial) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::white_noise(2.0), 10);
  const auto lev = levinson(model, 10);
  for (double v : lev.v) EXPECT_NEAR(v, 2.0, 1e-14);
  EXPECT_NEAR(lev.logdet(), 10.0 * std::log(2.0), 1e-12);
}

TEST(Levinson, DegenerateAtomicThrows) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::atomic({{0.0, 1.0}}), 4);
  EXPECT_THROW(levinson(model, 4), DegenerateCovariance);
}

TEST(Toeplitz, PsdDetection) {
  EXPECT_TRUE(toeplitz_is_psd(CovarianceModel::from_measure(SpectralMeasure::fgn(0.3), 32), 32));
  // Eigenvalue 1 - 0.9 sqrt(2) < 0.
  EXPECT_FALSE(toeplitz_is_psd(CovarianceModel::from_autocov({1.0, 0.9, 0.0}), 3));
}

TEST(Diagnostics, VarianceRatioForFgn) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.6), 128);
  for (const auto& vr : variance_ratio_diagnostic(model, 0.6, SlowlyVaryingFn::one(), {8, 64, 128}))
    EXPECT_NEAR(vr.ratio, 1.0, 1e-8);
}

TEST(Export, AutocovCsvHeader) {
  std::ostringstream os;
  write_autocov_csv(os, CovarianceModel::from_autocov({1.0, 0.25}), 0.5);
  EXPECT_NE(os.str().find("\nk,r\n0,1\n1,0.25\n"), std::string::npos);
}
