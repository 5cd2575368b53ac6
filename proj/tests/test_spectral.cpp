#include <gtest/gtest.h>

#include <cmath>

#include "smalldev/covariance.hpp"
#include "smalldev/spectral.hpp"

using namespace smalldev;
using detail::kPi;
using detail::kTwoPi;

TEST(Hurst, RejectsOutOfRange) {
  EXPECT_THROW(HurstParams(0.0), DomainError);
  EXPECT_THROW(HurstParams(1.0), DomainError);
  EXPECT_NEAR(HurstParams(0.5).m_H, 1.0 / kTwoPi, 1e-15);
}

TEST(FgnDensity, HalfIsFlat) {
  const HurstParams hp(0.5);
  for (double u : {0.01, 0.5, 1.7, 3.1, -2.0}) EXPECT_NEAR(fgn_spectral_density(hp, u), 1.0 / kTwoPi, 1e-9);
}

TEST(FgnDensity, SingularityAtZero) {
  EXPECT_THROW(fgn_spectral_density(HurstParams(0.7), 0.0), DomainError);
  EXPECT_EQ(fgn_spectral_density(HurstParams(0.3), 0.0), 0.0);
  // Near zero the density behaves like m_H |u|^{1-2H}.
  const HurstParams hp(0.7);
  const double u = 1e-4;
  EXPECT_NEAR(fgn_spectral_density(hp, u) / (hp.m_H * std::pow(u, 1.0 - 2.0 * hp.H)), 1.0, 1e-3);
}

TEST(FgnDensity, UnitTotalMass) {
  // Limited by the truncated periodization, not by the quadrature.
  for (double H : {0.2, 0.5, 0.8}) EXPECT_NEAR(2.0 * fgn_interval_mass(HurstParams(H), 0.0, kPi), 1.0, 1e-7);
}

TEST(FgnAutocov, ClosedFormValues) {
  EXPECT_EQ(fgn_autocovariance(0.5, 3), 0.0);
  EXPECT_NEAR(fgn_autocovariance(0.7, 1), 0.5 * (std::pow(2.0, 1.4) - 2.0), 1e-15);
  const double k = 40.0, H = 0.3;
  const double direct = 0.5 * (std::pow(k + 1, 2 * H) - 2 * std::pow(k, 2 * H) + std::pow(k - 1, 2 * H));
  EXPECT_NEAR(fgn_autocovariance(H, 40), direct, 1e-13);
}

TEST(Measure, AtomsMustBeMirrored) {
  EXPECT_THROW(SpectralMeasure::atomic({{0.5, 1.0}}), DomainError);
  EXPECT_NO_THROW(SpectralMeasure::atomic({{0.5, 1.0}, {-0.5, 1.0}}));
  EXPECT_THROW(SpectralMeasure::atomic({{0.5, 1.0}, {-0.5, 2.0}}), DomainError);
}

TEST(Measure, RejectsBadAtoms) {
  EXPECT_THROW(SpectralMeasure::atomic({{0.0, -1.0}}), DomainError);
  EXPECT_THROW(SpectralMeasure::atomic({{4.0, 1.0}, {-4.0, 1.0}}), DomainError);
  // pi and -pi are the same frequency.
  const auto m = SpectralMeasure::atomic({{kPi, 1.0}});
  ASSERT_EQ(m.atoms().size(), 1u);
  EXPECT_EQ(m.atoms()[0].u, -kPi);
}

TEST(Measure, RejectsOverlappingZones) {
  const auto m = SpectralMeasure::fgn(0.5);
  EXPECT_THROW(m.with_zones({{0.1, 0.5}, {0.4, 0.8}}), DomainError);
  EXPECT_THROW(m.with_zones({{0.5, 0.1}}), DomainError);
}

TEST(Measure, MassBookkeeping) {
  const auto m = SpectralMeasure::fgn(0.7).with_flat(0.1).with_atoms({{1.0, 0.25}, {-1.0, 0.25}});
  EXPECT_NEAR(m.atom_mass(), 0.5, 1e-15);
  EXPECT_NEAR(m.density_mass(), 1.0 + 0.1 * kTwoPi, 1e-8);
  const auto split = three_zone_split(m, 10.0, 2.0);
  EXPECT_NEAR(split.low.total_mass() + split.central.total_mass() + split.high.total_mass(), m.total_mass(), 1e-8);
}

TEST(Measure, WhiteNoiseLevel) {
  const auto w = SpectralMeasure::white_noise(2.0);
  EXPECT_TRUE(w.is_white_noise());
  EXPECT_NEAR(w.density(1.0), 2.0 / kTwoPi, 1e-15);
}

TEST(SlowlyVarying, Families) {
  EXPECT_EQ(SlowlyVaryingFn::one()(123.0), 1.0);
  EXPECT_NEAR(SlowlyVaryingFn::log_power(1.0)(std::exp(2.0)), 2.0, 1e-12);
  EXPECT_THROW(SlowlyVaryingFn::log_power(3.0), DomainError);
}

TEST(Adjoint, TrivialAndLogPower) {
  EXPECT_EQ(adjoint_slowly_varying(SlowlyVaryingFn::one(), 0.5, 10.0).L, 1.0);
  const auto ell = SlowlyVaryingFn::log_power(0.5);
  const auto res = adjoint_slowly_varying(ell, 0.5, 50.0);
  EXPECT_LT(res.residual, 1e-9);
  EXPECT_NEAR(res.L * ell.tilde(50.0 * res.L, 0.5), 1.0, 1e-9);
  EXPECT_THROW(adjoint_slowly_varying(ell, 0.5, 1.0), DomainError);
}

TEST(Perturbation, ScheduleValidation) {
  EXPECT_NO_THROW(PerturbationSchedule::with_power_boundary(0.5, {{1.5, 2, 16}, {2.0, 4, 256}}).validate());
  EXPECT_THROW(PerturbationSchedule::with_power_boundary(0.5, {{2.0, 2, 16}, {1.5, 4, 256}}).validate(), DomainError);
  EXPECT_THROW(PerturbationSchedule::with_power_boundary(0.5, {{1.5, 2, 16}, {2.0, 4, 17}}).validate(), DomainError);
}

TEST(Perturbation, PreservesIntervalMasses) {
  const auto sch = PerturbationSchedule::with_power_boundary(0.5, {{1.5, 2, 16}, {2.0, 4, 256}});
  const auto pm = perturbed_measure(sch);
  EXPECT_NEAR(pm.total_mass(), 1.0, 1e-8);
  for (std::size_t j = 0; j < sch.levels.size(); ++j) {
    const Zone z = sch.zone(j);
    const auto inside = pm.restricted(z.lo, z.hi);
    EXPECT_NEAR(inside.total_mass(), 2.0 * fgn_interval_mass(HurstParams(0.5), z.lo, z.hi), 1e-8);
  }
}
