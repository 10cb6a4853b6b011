//
// Copyright 2026 The GSSD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "gssd/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gssd/rng.hpp"
#include "gssd/slicing.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace gssd {
namespace {

using Vec = std::vector<double>;

Vec normals(std::uint64_t index, std::size_t n, double mean = 0.0, double scale = 1.0) {
  RngStream s = derive_stream(RngRoot(99), "divergence-tests", index);
  Vec out(n);
  for (double& v : out) v = mean + scale * s.standard_normal();
  return out;
}

// --- Wasserstein -----------------------------------------------------------

TEST(WassersteinTest, IdenticalSetsGiveZero) {
  const Vec x = normals(1, 17);
  Vec shuffled = x;
  std::reverse(shuffled.begin(), shuffled.end());
  EXPECT_EQ(wasserstein_pp(x, shuffled, 2.0), 0.0);
  EXPECT_EQ(wasserstein_pp(x, x, 1.0), 0.0);
}

TEST(WassersteinTest, TranslationByHalf) {
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const double wpp = wasserstein_pp(Vec{0, 1}, Vec{0.5, 1.5}, p);
    EXPECT_NEAR(wpp, std::pow(0.5, p), 1e-15);
    EXPECT_NEAR(std::pow(wpp, 1.0 / p), 0.5, 1e-15);
  }
}

TEST(WassersteinTest, TwoPointBruteForce) {
  const Vec x = {0, 2}, y = {0, 1};
  EXPECT_DOUBLE_EQ(testing::brute_force_wpp(x, y, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(wasserstein_pp(x, y, 2.0), 0.5);
}

TEST(WassersteinTest, UnequalSizesHandExample) {
  // Quantile integral of |F_x^-1 - 0| over [0, 1] is 0 * 1/2 + 1 * 1/2.
  EXPECT_DOUBLE_EQ(testing::quantile_grid_wpp({0, 1}, {0}, 1.0, 1000), 0.5);
  EXPECT_DOUBLE_EQ(wasserstein_pp(Vec{0, 1}, Vec{0}, 1.0), 0.5);
}

TEST(WassersteinTest, UnequalSizesMatchQuantileGrid) {
  for (std::size_t n : {2u, 3u, 7u}) {
    for (std::size_t m : {1u, 4u, 5u}) {
      if (n == m) continue;
      const Vec x = normals(10 + n, n), y = normals(20 + m, m, 0.3, 2.0);
      for (double p : {1.0, 2.0, 2.5}) {
        // Cells aligned with every breakpoint make the midpoint rule exact.
        const int cells = static_cast<int>(n * m) * 64;
        EXPECT_NEAR(wasserstein_pp(x, y, p), testing::quantile_grid_wpp(x, y, p, cells), 1e-12)
            << "n=" << n << " m=" << m << " p=" << p;
      }
    }
  }
}

TEST(WassersteinTest, EqualsExhaustivePermutationMinimum) {
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = normals(100 + 10 * n + trial, n);
      const Vec y = normals(500 + 10 * n + trial, n, 0.5, 1.5);
      for (double p : {1.0, 2.0, 3.0}) {
        EXPECT_NEAR(wasserstein_pp(x, y, p), testing::brute_force_wpp(x, y, p), 1e-12);
      }
    }
  }
}

TEST(WassersteinTest, MetricAxiomsOnRandomTriples) {
  std::mt19937_64 gen(12345);
  std::uniform_int_distribution<int> size(1, 16);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x = normals(1000 + trial, static_cast<std::size_t>(size(gen)));
    const Vec y = normals(2000 + trial, static_cast<std::size_t>(size(gen)), 1.0);
    const Vec z = normals(3000 + trial, static_cast<std::size_t>(size(gen)), -0.5, 2.0);
    for (double p : {1.0, 2.0}) {
      auto w = [p](const Vec& a, const Vec& b) { return std::pow(wasserstein_pp(a, b, p), 1.0 / p); };
      EXPECT_EQ(wasserstein_pp(x, y, p), wasserstein_pp(y, x, p));
      EXPECT_LE(w(x, z), w(x, y) + w(y, z) + 1e-10);
    }
  }
}

TEST(WassersteinTest, TranslationInvarianceAndHomogeneity) {
  const Vec x = normals(7, 30), y = normals(8, 30, 1.0, 0.5);
  const double base = std::sqrt(wasserstein_pp(x, y, 2.0));
  Vec xs = x, ys = y, xa = x, ya = y;
  for (double& v : xs) v += 3.25;
  for (double& v : ys) v += 3.25;
  for (double& v : xa) v *= 2.5;
  for (double& v : ya) v *= 2.5;
  EXPECT_NEAR(std::sqrt(wasserstein_pp(xs, ys, 2.0)), base, 1e-12);
  EXPECT_NEAR(std::sqrt(wasserstein_pp(xa, ya, 2.0)), 2.5 * base, 1e-12);
}

TEST(WassersteinTest, GaussianClosedForm) {
  constexpr std::size_t kN = 100000;
  const double m1 = 0.0, s1 = 1.0, m2 = 1.0, s2 = 2.0;
  const Vec x = normals(31, kN, m1, s1), y = normals(32, kN, m2, s2);
  const double expected = std::sqrt((m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2));
  EXPECT_NEAR(std::sqrt(wasserstein_pp(x, y, 2.0)), expected, 0.02 * expected);
}

TEST(WassersteinTest, RejectsEmptyInput) {
  EXPECT_THROW(wasserstein_pp(Vec{}, Vec{1.0}, 2.0), std::invalid_argument);
}

// --- MMD -----------------------------------------------------------------

TEST(MmdTest, IdenticalSetsGiveZero) {
  const Vec x = normals(40, 50);
  EXPECT_NEAR(mmd_sq(x, x, 0.7), 0.0, 1e-12);
}

TEST(MmdTest, SinglePointsHandValue) {
  // k(0,0) + k(1,1) - 2 k(0,1) = 2 (1 - exp(-1/2)).
  EXPECT_NEAR(mmd_sq(Vec{0}, Vec{1}, 1.0), 2.0 * (1.0 - std::exp(-0.5)), 1e-12);
  EXPECT_NEAR(mmd_sq(Vec{0}, Vec{1}, 1.0), 0.786938680574733, 1e-12);
}

TEST(MmdTest, NonNegativeAndPermutationInvariant) {
  for (int trial = 0; trial < 50; ++trial) {
    const Vec x = normals(600 + trial, 12), y = normals(700 + trial, 9, 0.2);
    const double v = mmd_sq(x, y, 0.5 + 0.05 * trial);
    EXPECT_GE(v, -1e-12);
    Vec xr = x, yr = y;
    std::reverse(xr.begin(), xr.end());
    std::rotate(yr.begin(), yr.begin() + 4, yr.end());
    EXPECT_NEAR(mmd_sq(xr, yr, 0.5 + 0.05 * trial), v, 1e-13);
  }
}

TEST(MmdTest, NonPositiveBandwidthThrows) {
  EXPECT_THROW(mmd_sq(Vec{0}, Vec{1}, 0.0), std::invalid_argument);
}

TEST(BandwidthTest, SinglePair) { EXPECT_DOUBLE_EQ(bandwidth_mean_pairwise(Vec{0}, Vec{1}), 1.0); }

TEST(BandwidthTest, DegenerateFallback) {
  EXPECT_EQ(bandwidth_mean_pairwise(Vec{2.5, 2.5}, Vec{2.5}), 1.0);
}

TEST(BandwidthTest, MatchesNaivePairLoopAndIsHomogeneous) {
  const Vec x = normals(50, 23), y = normals(51, 31, 1.0, 3.0);
  const double h = bandwidth_mean_pairwise(x, y);
  EXPECT_NEAR(h, testing::naive_mean_pairwise(x, y), 1e-12);
  Vec xa = x, ya = y;
  for (double& v : xa) v *= 4.0;
  for (double& v : ya) v *= 4.0;
  EXPECT_NEAR(bandwidth_mean_pairwise(xa, ya), 4.0 * h, 1e-12);
}

TEST(BandwidthTest, TooFewPointsThrows) {
  EXPECT_THROW(bandwidth_mean_pairwise(Vec{1.0}, Vec{}), std::invalid_argument);
}

// --- Sinkhorn --------------------------------------------------------------

DivergenceSpec sinkhorn_spec(double eps, double p = 2.0) {
  DivergenceSpec spec;
  spec.kind = DivergenceKind::Sinkhorn;
  spec.epsilon = eps;
  spec.p = p;
  return spec;
}

TEST(SinkhornTest, IdenticalSetsGiveZero) {
  const Vec x = normals(60, 40);
  const auto r = sinkhorn_div(x, x, sinkhorn_spec(0.1));
  EXPECT_NEAR(r.value, 0.0, 1e-6);
}

TEST(SinkhornTest, SingleAtomsTransportEverything) {
  for (double eps : {0.01, 0.1, 1.0, 10.0}) {
    const auto r = sinkhorn_div(Vec{0}, Vec{1}, sinkhorn_spec(eps));
    EXPECT_NEAR(r.value, 1.0, 1e-12) << "eps=" << eps;
  }
}

TEST(SinkhornTest, MatchesDensePrimalScalingOracle) {
  const std::vector<std::pair<Vec, Vec>> cases = {
      {{0.0, 0.3, 1.1, 2.0}, {0.5, 0.6, 1.9, 2.4}},
      {{-1.0, 0.0, 0.2, 3.0}, {1.0, 1.5, -0.5, 0.0}},
      {normals(70, 4), normals(71, 4, 0.7)},
  };
  for (const auto& [x, y] : cases) {
    for (double eps : {0.1, 0.5, 1.0}) {
      for (double p : {1.0, 2.0}) {
        auto spec = sinkhorn_spec(eps, p);
        const auto r = sinkhorn_div(x, y, spec);
        EXPECT_NEAR(r.value, testing::dense_sinkhorn_divergence(x, y, p, eps), 1e-6)
            << "eps=" << eps << " p=" << p;
      }
    }
  }
}

TEST(SinkhornTest, ApproachesWassersteinAsEpsilonShrinks) {
  const Vec x = {0.0, 0.4, 1.3, 2.2, 2.9}, y = {0.8, 1.0, 1.7, 3.5, 4.1};
  const double w = wasserstein_pp(x, y, 2.0);
  double previous_gap = std::numeric_limits<double>::infinity();
  for (double eps : {1.0, 0.1, 0.01}) {
    const auto r = sinkhorn_div(x, y, sinkhorn_spec(eps));
    const double gap = std::abs(r.value - w);
    EXPECT_LE(gap, previous_gap + 1e-6) << "eps=" << eps;
    previous_gap = gap;
  }
  EXPECT_LT(previous_gap, 1e-2);
}

TEST(SinkhornTest, WellSeparatedScalesConverge) {
  const auto r = sinkhorn_div(Vec{0.0, 0.3, 1.1, 2.0}, Vec{0.5, 0.6, 1.9, 2.4}, sinkhorn_spec(1.0));
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.iterations, 1000);
}

TEST(SinkhornTest, NonConvergenceIsFlaggedNotThrown) {
  auto spec = sinkhorn_spec(0.01);
  spec.sinkhorn_max_iter = 2;
  const auto r = sinkhorn_div(normals(80, 30), normals(81, 30, 1.0), spec);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_LE(r.iterations, 2);
}

TEST(SinkhornTest, NonNegativeOnRandomInstances) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = sinkhorn_spec(0.1);
    const auto r = sinkhorn_div(normals(900 + trial, 25), normals(950 + trial, 20, 0.3), spec);
    EXPECT_GE(r.value, -spec.sinkhorn_tol);
  }
}

TEST(SinkhornTest, RejectsNonPositiveEpsilon) {
  EXPECT_THROW(sinkhorn_div(Vec{0}, Vec{1}, sinkhorn_spec(0.0)), std::invalid_argument);
}

// --- Mixture oracle ----------------------------------------------------------

TEST(SmoothedOracleTest, IdenticalMixturesGiveZero) {
  const Vec v = {-1.0, 0.5, 2.0};
  EXPECT_NEAR(smoothed_wasserstein_oracle(v, v, 0.8, 2.0, 1000), 0.0, 1e-12);
}

TEST(SmoothedOracleTest, TranslatedGaussians) {
  for (double p : {1.0, 2.0, 3.0}) {
    const double got = smoothed_wasserstein_oracle(Vec{0.3}, Vec{1.8}, 1.2, p, 1000);
    const double expected = std::pow(1.5, p);
    EXPECT_NEAR(got, expected, 1e-4 * expected) << "p=" << p;
  }
}

TEST(SmoothedOracleTest, AgreesWithDoubleSamplingMonteCarlo) {
  // Draw 1e5 points from each mixture and compare empirical W_2^2.
  constexpr std::size_t kN = 100000;
  const Vec vx = {0.0, 2.0}, vy = {1.0};
  RngStream s = derive_stream(RngRoot(5), "mixture-mc", 0);
  Vec tx(kN), ty(kN);
  for (std::size_t i = 0; i < kN; ++i) {
    tx[i] = vx[i % 2] + s.standard_normal();
    ty[i] = vy[0] + s.standard_normal();
  }
  const double mc = wasserstein_pp(tx, ty, 2.0);
  const double oracle = smoothed_wasserstein_oracle(vx, vy, 1.0, 2.0, 4000);
  EXPECT_NEAR(oracle, mc, 0.02 * oracle);
}

TEST(SmoothedOracleTest, ValidatesArguments) {
  EXPECT_THROW(smoothed_wasserstein_oracle(Vec{0}, Vec{1}, 1.0, 2.0, 999), std::invalid_argument);
  EXPECT_THROW(smoothed_wasserstein_oracle(Vec{0}, Vec{1}, 0.0, 2.0, 1000), std::invalid_argument);
}

TEST(EvaluateDivergenceTest, DispatchesOnKind) {
  const Vec x = normals(300, 10), y = normals(301, 10, 0.5);
  DivergenceSpec spec;
  spec.kind = DivergenceKind::Wasserstein;
  spec.p = 2.0;
  EXPECT_EQ(evaluate_divergence(x, y, spec).value, wasserstein_pp(x, y, 2.0));
  spec.kind = DivergenceKind::MmdSquared;
  EXPECT_EQ(evaluate_divergence(x, y, spec).value,
            mmd_sq(x, y, bandwidth_mean_pairwise(x, y)));
  spec.bandwidth_policy = BandwidthPolicy::Fixed;
  spec.bandwidth = 0.3;
  EXPECT_EQ(evaluate_divergence(x, y, spec).value, mmd_sq(x, y, 0.3));
}

TEST(DivergenceSpecTest, Validation) {
  DivergenceSpec spec;
  spec.p = 0.5;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.p = 2.0;
  spec.kind = DivergenceKind::Sinkhorn;
  spec.epsilon = 0.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  EXPECT_EQ(parse_divergence("skd"), DivergenceKind::Sinkhorn);
  EXPECT_THROW(parse_divergence("kl"), std::invalid_argument);
}

}  // namespace
}  // namespace gssd
