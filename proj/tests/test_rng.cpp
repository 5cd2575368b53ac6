#include <gtest/gtest.h>

#include <cmath>

#include "smalldev/parallel.hpp"
#include "smalldev/rng.hpp"

using namespace smalldev;

TEST(CounterRng, SameCoordinatesSameStream) {
  CounterRng a(99, streams::kTests, 5), b(99, streams::kTests, 5);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(CounterRng, DifferentCoordinatesDiffer) {
  CounterRng a(99, streams::kTests, 5), b(99, streams::kTests, 6), c(99, streams::kCirculant, 5), d(98, streams::kTests, 5);
  const double x = a.uniform();
  EXPECT_NE(x, b.uniform());
  EXPECT_NE(x, c.uniform());
  EXPECT_NE(x, d.uniform());
}

TEST(CounterRng, UniformAndNormalMoments) {
  CounterRng r(1, streams::kTests, 0);
  constexpr int n = 200000;
  double su = 0.0, sz = 0.0, sz2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sz += z;
    sz2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.003);
  EXPECT_NEAR(sz / n, 0.0, 0.01);
  EXPECT_NEAR(sz2 / n, 1.0, 0.015);
}

TEST(DeriveSeed, SaltsSeparate) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(Parallel, ResultsIndependentOfThreadCap) {
  auto run = [](unsigned cap) {
    set_thread_cap(cap);
    std::vector<double> out(1000);
    parallel_for(out.size(), [&](std::size_t i) {
      CounterRng r(3, streams::kTests, i);
      out[i] = r.normal();
    });
    set_thread_cap(0);
    return out;
  };
  EXPECT_EQ(run(1), run(4));
}
