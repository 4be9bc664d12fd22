#include <gtest/gtest.h>

#include <cmath>

#include "rcmi/grid_model.hpp"

using namespace rcmi;

TEST(GridModel, EdgeCountMatchesLattice) {
  EXPECT_EQ(grid_edges({3, 4}).size(), std::size_t(3 * 3 + 2 * 4));
  EXPECT_EQ(grid_edges({1, 1}).size(), 0u);
}

TEST(GridModel, EnumerationSumsToOneAndIsUniformAtZeroCoupling) {
  const auto p = enumerate_exact({2, 3}, {0.0});
  ASSERT_EQ(p.size(), 64u);
  for (double v : p) EXPECT_NEAR(v, 1.0 / 64, 1e-15);
}

TEST(GridModel, TwoSitesCorrelationIsTanh) {
  for (double theta : {0.1, 0.4, 1.3}) {
    const auto p = enumerate_exact({1, 2}, {theta});
    double corr = 0.0;
    for (std::uint64_t x = 0; x < 4; ++x) corr += p[x] * (((x ^ (x >> 1)) & 1u) ? -1.0 : 1.0);
    EXPECT_NEAR(corr, std::tanh(theta), 1e-14);
  }
}

TEST(GridModel, EnumerationRatiosFollowEnergy) {
  const ImageDims dims{2, 2};
  const IsingParams params{0.7};
  const auto p = enumerate_exact(dims, params);
  for (std::uint64_t x = 1; x < p.size(); ++x) {
    const auto a = image_from_index(dims, 0), b = image_from_index(dims, x);
    EXPECT_NEAR(std::log(p[x] / p[0]), log_unnormalized_prob(b, params) - log_unnormalized_prob(a, params), 1e-12);
  }
}

TEST(GridModel, EnumerationRejectsLargeGrids) {
  try {
    enumerate_exact({5, 5}, {0.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "dims_too_large");
  }
}

TEST(GridModel, GibbsIsDeterministicPerSeed) {
  GibbsSettings s;
  s.burn_in_sweeps = 20;
  s.sweeps_between_samples = 3;
  s.rng_seed = 42;
  const auto a = gibbs_sample({16, 16}, {0.4}, s, 3);
  const auto b = gibbs_sample({16, 16}, {0.4}, s, 3);
  EXPECT_EQ(a, b);
  s.rng_seed = 43;
  EXPECT_NE(gibbs_sample({16, 16}, {0.4}, s, 3), a);
}

TEST(GridModel, GibbsAtZeroCouplingIsBalanced) {
  GibbsSettings s;
  s.burn_in_sweeps = 1;
  s.sweeps_between_samples = 1;
  const auto imgs = gibbs_sample({64, 64}, {0.0}, s, 4);
  double plus = 0, n = 0;
  for (const auto& img : imgs)
    for (Spin v : img.pixels()) {
      plus += v > 0;
      ++n;
    }
  EXPECT_NEAR(plus / n, 0.5, 0.02);
}

// Small torus-free grid: Gibbs edge moment against the enumerated expectation.
TEST(GridModel, GibbsMatchesEnumeratedMoment) {
  const ImageDims dims{3, 3};
  const IsingParams params{0.4};
  const auto p = enumerate_exact(dims, params);
  double exact = 0.0;
  for (std::uint64_t x = 0; x < p.size(); ++x) exact += p[x] * double(edge_agreement(image_from_index(dims, x)));

  GibbsSettings s;
  s.burn_in_sweeps = 100;
  s.sweeps_between_samples = 2;
  s.rng_seed = 7;
  const auto imgs = gibbs_sample(dims, params, s, 20000);
  double mean = 0.0;
  for (const auto& img : imgs) mean += double(edge_agreement(img));
  mean /= double(imgs.size());
  EXPECT_NEAR(mean, exact, 0.1);
}

TEST(GridModel, ImageValidatesSpins) {
  EXPECT_THROW(BinaryImage({1, 2}, std::vector<Spin>{1, 0}), Error);
  EXPECT_THROW(BinaryImage({0, 2}), Error);
}
