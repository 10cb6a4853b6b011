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

#include "gssd/estimator.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace gssd {
namespace {

SampleSet gaussian_set(std::size_t n, std::size_t d, std::uint64_t index, double mean = 0.0,
                       double scale = 1.0) {
  RngStream s = derive_stream(RngRoot(2024), "estimator-tests", index);
  return SampleSet::gaussian(n, d, s, mean, scale);
}

GssdConfig wasserstein_config(double sigma, int projections, double p = 2.0) {
  GssdConfig cfg;
  cfg.sigma = sigma;
  cfg.num_projections = projections;
  cfg.order = p;
  cfg.divergence.kind = DivergenceKind::Wasserstein;
  cfg.seed = RngRoot(7);
  return cfg;
}

TEST(EstimatorTest, IdenticalSetsWithoutNoiseGiveZero) {
  const SampleSet x = gaussian_set(40, 6, 1);
  const auto est = estimate(x, x, wasserstein_config(0.0, 30));
  EXPECT_EQ(est.mean_pow, 0.0);
  EXPECT_EQ(est.root, 0.0);
  EXPECT_EQ(est.per_projection.size(), 30u);
}

TEST(EstimatorTest, PointMassesWithoutNoiseMatchSphereMoment) {
  const SampleSet a(1, 3, {0.0, 0.0, 0.0});
  const SampleSet b(1, 3, {1.0, 2.0, -2.0});
  const double norm = 3.0;
  for (double p : {1.0, 2.0}) {
    const auto est = estimate(a, b, wasserstein_config(0.0, 10000, p));
    const double expected = std::pow(norm, p) * testing::sphere_abs_moment(3, p);
    EXPECT_NEAR(est.mean_pow, expected, 0.02 * expected) << "p=" << p;
  }
}

TEST(EstimatorTest, PointMassOracleModeMatchesClosedForm) {
  const SampleSet a(1, 3, {0.5, 0.5, 0.5});
  const SampleSet b(1, 3, {1.5, 0.5, 0.5});
  auto cfg = wasserstein_config(1.0, 10000, 1.0);
  cfg.mode = EstimatorMode::MixtureOracle;
  cfg.oracle_grid = 1000;
  const auto est = estimate(a, b, cfg);
  EXPECT_NEAR(est.mean_pow, 0.5, 0.01);
}

TEST(EstimatorTest, BitIdenticalAcrossWorkerCounts) {
  const SampleSet x = gaussian_set(60, 8, 2), y = gaussian_set(60, 8, 3, 0.5);
  for (DivergenceKind kind : {DivergenceKind::Wasserstein, DivergenceKind::MmdSquared,
                              DivergenceKind::Sinkhorn}) {
    auto cfg = wasserstein_config(1.0, 24);
    cfg.divergence.kind = kind;
    cfg.workers = 1;
    const auto serial = estimate(x, y, cfg);
    cfg.workers = 8;
    const auto parallel = estimate(x, y, cfg);
    EXPECT_EQ(serial.per_projection, parallel.per_projection);
    EXPECT_EQ(serial.mean_pow, parallel.mean_pow);
    EXPECT_EQ(serial.std_error, parallel.std_error);
  }
}

TEST(EstimatorTest, SweepMatchesSeparateCalls) {
  const SampleSet x = gaussian_set(50, 4, 4), y = gaussian_set(50, 4, 5, 0.3);
  const std::vector<double> sigmas = {0.0, 1.0, 1.0, 3.0};
  auto cfg = wasserstein_config(0.0, 20);
  const auto swept = sweep_sigma(x, y, sigmas, cfg);
  ASSERT_EQ(swept.size(), sigmas.size());
  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    cfg.sigma = sigmas[s];
    EXPECT_EQ(swept[s].per_projection, estimate(x, y, cfg).per_projection);
    EXPECT_EQ(swept[s].config.sigma, sigmas[s]);
  }
  EXPECT_EQ(swept[1].per_projection, swept[2].per_projection);
}

TEST(EstimatorTest, SameSeedReplaysDifferentSeedDiffers) {
  const SampleSet x = gaussian_set(30, 5, 6), y = gaussian_set(30, 5, 7);
  auto cfg = wasserstein_config(2.0, 10);
  const auto first = estimate(x, y, cfg);
  EXPECT_EQ(first.per_projection, estimate(x, y, cfg).per_projection);
  cfg.seed = RngRoot(8);
  EXPECT_NE(first.per_projection, estimate(x, y, cfg).per_projection);
}

TEST(EstimatorTest, NonIncreasingInSigmaWithCommonRandomNumbers) {
  const SampleSet x = gaussian_set(2000, 5, 9, 0.0, 1.0);
  const SampleSet y = gaussian_set(2000, 5, 10, 0.0, 2.0);
  const std::vector<double> sigmas = {0.0, 1.0, 3.0, 5.0};
  const auto est = sweep_sigma(x, y, sigmas, wasserstein_config(0.0, 200));
  for (std::size_t s = 1; s < est.size(); ++s) {
    EXPECT_LE(est[s].mean_pow,
              est[s - 1].mean_pow + 2.0 * (est[s].std_error + est[s - 1].std_error))
        << "sigma=" << sigmas[s];
  }
  EXPECT_LT(est.back().mean_pow, est.front().mean_pow);
}

TEST(EstimatorTest, ContinuousAtZeroNoise) {
  const SampleSet x = gaussian_set(200, 10, 11), y = gaussian_set(200, 10, 12, 0.2);
  const std::vector<double> sigmas = {0.0, 1e-3};
  const auto est = sweep_sigma(x, y, sigmas, wasserstein_config(0.0, 50));
  EXPECT_LE(std::abs(est[1].mean_pow - est[0].mean_pow), 3.0 * est[0].std_error + 1e-3);
}

TEST(EstimatorTest, SymmetricWithoutNoise) {
  const SampleSet x = gaussian_set(35, 4, 13), y = gaussian_set(45, 4, 14, 1.0);
  const auto cfg = wasserstein_config(0.0, 25);
  EXPECT_EQ(estimate(x, y, cfg).per_projection, estimate(y, x, cfg).per_projection);
}

TEST(EstimatorTest, TriangleInequalityWithCommonDirections) {
  const auto cfg = wasserstein_config(0.0, 40);
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const SampleSet x = gaussian_set(30, 3, 100 + trial);
    const SampleSet y = gaussian_set(30, 3, 200 + trial, 1.0);
    const SampleSet z = gaussian_set(30, 3, 300 + trial, -0.5, 2.0);
    EXPECT_LE(estimate(x, z, cfg).root,
              estimate(x, y, cfg).root + estimate(y, z, cfg).root + 1e-12);
  }
}

TEST(EstimatorTest, StandardErrorMatchesPlugInFormula) {
  const SampleSet x = gaussian_set(50, 6, 15), y = gaussian_set(50, 6, 16, 0.4);
  const auto est = estimate(x, y, wasserstein_config(1.0, 64));
  double mean = 0.0;
  for (double v : est.per_projection) mean += v;
  mean /= 64.0;
  double ss = 0.0;
  for (double v : est.per_projection) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(est.mean_pow, mean, 1e-12 * std::abs(mean));
  EXPECT_NEAR(est.std_error, std::sqrt(ss / 63.0) / 8.0, 1e-12);
  EXPECT_NEAR(est.root, std::sqrt(est.mean_pow), 1e-15);
}

TEST(EstimatorTest, MonteCarloErrorShrinksWithProjections) {
  const SampleSet x = gaussian_set(100, 20, 17), y = gaussian_set(100, 20, 18, 0.3);
  const auto small = estimate(x, y, wasserstein_config(1.0, 25));
  const auto large = estimate(x, y, wasserstein_config(1.0, 400));
  // std_error ~ sd / sqrt(L): a 16x increase in L should cut it by about 4.
  const double ratio = small.std_error / large.std_error;
  EXPECT_GT(ratio, 2.5);
  EXPECT_LT(ratio, 6.0);
}

TEST(EstimatorTest, DoubleSamplingAgreesWithMixtureOracle) {
  const SampleSet x = gaussian_set(3000, 3, 19, 0.0);
  const SampleSet y = gaussian_set(3000, 3, 20, 1.0);
  auto cfg = wasserstein_config(1.0, 40);
  const auto sampled = estimate(x, y, cfg);
  cfg.mode = EstimatorMode::MixtureOracle;
  const auto oracle = estimate(x, y, cfg);
  EXPECT_NEAR(sampled.mean_pow, oracle.mean_pow, 0.05 * oracle.mean_pow);
}

TEST(EstimatorTest, UnconvergedSinkhornProjectionsAreCounted) {
  const SampleSet x = gaussian_set(30, 3, 21), y = gaussian_set(30, 3, 22, 1.0);
  auto cfg = wasserstein_config(0.5, 6);
  cfg.divergence.kind = DivergenceKind::Sinkhorn;
  cfg.divergence.epsilon = 0.01;
  cfg.divergence.sinkhorn_max_iter = 2;
  const auto est = estimate(x, y, cfg);
  EXPECT_EQ(est.unconverged, 6);
  EXPECT_TRUE(std::isfinite(est.mean_pow));
}

TEST(EstimatorTest, RejectsInvalidConfigurations) {
  const SampleSet x = gaussian_set(10, 3, 23), y = gaussian_set(10, 4, 24);
  const SampleSet z = gaussian_set(10, 3, 25);
  EXPECT_THROW(estimate(x, y, wasserstein_config(1.0, 5)), std::invalid_argument);
  EXPECT_THROW(estimate(x, z, wasserstein_config(-1.0, 5)), std::invalid_argument);
  EXPECT_THROW(estimate(x, z, wasserstein_config(1.0, 0)), std::invalid_argument);
  EXPECT_THROW(estimate(x, z, wasserstein_config(1.0, 5, 0.5)), std::invalid_argument);
  auto cfg = wasserstein_config(1.0, 5);
  cfg.workers = 0;
  EXPECT_THROW(estimate(x, z, cfg), std::invalid_argument);
  cfg = wasserstein_config(0.0, 5);
  cfg.mode = EstimatorMode::MixtureOracle;
  EXPECT_THROW(estimate(x, z, cfg), std::invalid_argument);
  cfg = wasserstein_config(1.0, 5);
  cfg.mode = EstimatorMode::MixtureOracle;
  cfg.divergence.kind = DivergenceKind::MmdSquared;
  EXPECT_THROW(estimate(x, z, cfg), std::invalid_argument);
}

TEST(TwoSigmaTest, GapTermClosedForm) {
  EXPECT_NEAR(two_sigma_gap_term(1.0, 0.0, 1.0), 5.656854249492381, 1e-12);
  EXPECT_NEAR(two_sigma_gap_term(2.0, 1.0, 2.0), 32.0 * 9.0, 1e-9);
  EXPECT_EQ(two_sigma_gap_term(2.0, 1.5, 1.5), 0.0);
}

TEST(TwoSigmaTest, HoldsOnGaussianInstances) {
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const SampleSet x = gaussian_set(80, 5, 400 + trial, 0.0);
    const SampleSet y = gaussian_set(80, 5, 500 + trial, 0.5 * trial, 1.0 + 0.2 * trial);
    const auto r = two_sigma_check(x, y, 0.5, 1.0, wasserstein_config(0.0, 30));
    EXPECT_TRUE(r.holds) << "trial " << trial;
    EXPECT_NEAR(r.gap, r.rhs - r.lhs, 1e-12);
  }
}

TEST(TwoSigmaTest, EqualNoiseLevelsReduceToFactor) {
  const SampleSet x = gaussian_set(50, 3, 26), y = gaussian_set(50, 3, 27, 1.0);
  const auto r = two_sigma_check(x, y, 1.0, 1.0, wasserstein_config(0.0, 20));
  EXPECT_NEAR(r.rhs, 2.0 * r.lhs, 1e-12 * r.rhs);
}

TEST(TwoSigmaTest, RejectsBadArguments) {
  const SampleSet x = gaussian_set(10, 3, 28), y = gaussian_set(10, 3, 29);
  const auto cfg = wasserstein_config(0.0, 4);
  EXPECT_THROW(two_sigma_check(x, y, 2.0, 1.0, cfg), std::invalid_argument);
  auto mmd = cfg;
  mmd.divergence.kind = DivergenceKind::MmdSquared;
  EXPECT_THROW(two_sigma_check(x, y, 0.0, 1.0, mmd), std::invalid_argument);
}

}  // namespace
}  // namespace gssd
