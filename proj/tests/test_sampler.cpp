#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "smalldev/sampler.hpp"

using namespace smalldev;

namespace {

double empirical_variance(const PathBatch& b, std::size_t n) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < b.count; ++i) {
    s += b.S(i, n);
    s2 += b.S(i, n) * b.S(i, n);
  }
  const double c = static_cast<double>(b.count);
  return s2 / c - (s / c) * (s / c);
}

}  // namespace

TEST(Circulant, DeterministicUnderSeed) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.7), 32);
  const auto a = sample_circulant(model, 32, 7, 11);
  const auto b = sample_circulant(model, 32, 7, 11);
  const auto c = sample_circulant(model, 32, 7, 12);
  EXPECT_EQ(a.data, b.data);
  EXPECT_NE(a.data, c.data);
}

TEST(Circulant, FgnVarianceScaling) {
  constexpr std::size_t N = 64, paths = 20000;
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.7), N);
  const auto b = sample_circulant(model, N, paths, 5);
  for (std::size_t n : {1u, 16u, 64u})
    EXPECT_NEAR(empirical_variance(b, n) / std::pow(static_cast<double>(n), 1.4), 1.0, 0.04);
}

TEST(Cholesky, FgnVarianceScaling) {
  constexpr std::size_t N = 32, paths = 20000;
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.3), N);
  const auto b = sample_cholesky(model, N, paths, 9);
  for (std::size_t n : {1u, 32u}) EXPECT_NEAR(empirical_variance(b, n) / std::pow(static_cast<double>(n), 0.6), 1.0, 0.04);
}

TEST(Cholesky, RejectsHugeHorizon) {
  const auto model = CovarianceModel::from_measure(SpectralMeasure::white_noise(), 5000);
  EXPECT_THROW(PathGenerator::cholesky(model, 5000, 1), DomainError);
}

TEST(Atoms, DeltaZeroPathsAreLinear) {
  const auto b = sample_atoms(SpectralMeasure::atomic({{0.0, 1.0}}), 10, 5, 3);
  for (std::size_t i = 0; i < b.count; ++i)
    for (std::size_t n = 1; n <= 10; ++n) EXPECT_NEAR(b.S(i, n), static_cast<double>(n) * b.S(i, 1), 1e-12);
}

TEST(Atoms, RequiresPurelyAtomic) {
  EXPECT_THROW(PathGenerator::atoms(SpectralMeasure::fgn(0.5), 8, 1), DomainError);
}

TEST(Mixed, VarianceMatchesModel) {
  constexpr std::size_t N = 24, paths = 20000;
  const auto measure = SpectralMeasure::fgn(0.6).with_atoms({{0.9, 0.3}, {-0.9, 0.3}});
  const auto b = sample_paths(measure, N, paths, 21);
  EXPECT_EQ(b.generator, GeneratorKind::mixed);
  const auto V = partial_sum_variances(CovarianceModel::from_measure(measure, N), N);
  for (std::size_t n : {1u, 7u, 24u}) EXPECT_NEAR(empirical_variance(b, n) / V[n], 1.0, 0.05);
}

TEST(Sdlb1, RoundTrip) {
  // The embedding for N = 9 needs lags up to 16.
  const auto model = CovarianceModel::from_measure(SpectralMeasure::fgn(0.4), 16);
  const auto b = sample_circulant(model, 9, 4, 2);
  std::stringstream ss;
  write_sdlb1(ss, b);
  EXPECT_EQ(ss.str().substr(0, 5), "SDLB1");
  const auto back = read_sdlb1(ss);
  EXPECT_EQ(back.count, 4u);
  EXPECT_EQ(back.N, 9u);
  EXPECT_EQ(back.data, b.data);
}

TEST(Sdlb1, RejectsBadMagic) {
  std::stringstream ss("NOPE!xxxxxxxxxxxxxxxx");
  EXPECT_THROW(read_sdlb1(ss), Error);
}
