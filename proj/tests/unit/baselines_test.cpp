#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "cdt/baselines.hpp"
#include "cdt/errors.hpp"
#include "support/checks.hpp"
#include "support/oracles.hpp"
#include "support/planted.hpp"

namespace cdt {
namespace {

TEST(Cbt, ExactExpansionHasZeroLoss) {
  const DenseMatrix c(2, 2, std::vector<double>{1, 4, 3, 2});
  const std::vector<std::uint32_t> u{1, 0, 0, 1, 1}, v{0, 1, 1};
  std::vector<Rating> e;
  for (std::uint32_t i = 0; i < 5; ++i) {
    for (std::uint32_t j = 0; j < 3; ++j) {
      if ((i + j) % 2 == 0 || j == 1) e.push_back({i, j, static_cast<int>(c(u[i], v[j]))});
    }
  }
  const CbtFit fit = cbt_fit_detailed(RatingMatrix(5, 3, e), c, CbtConfig{});
  EXPECT_EQ(fit.loss, 0.0);
}

TEST(Cbt, SingleClusterIsForced) {
  std::mt19937_64 rng(1);
  const RatingMatrix obs = testing::random_ratings(4, 5, 0.5, 5, rng);
  const CbtModel m = cbt_fit_detailed(obs, DenseMatrix(1, 1, 3.0), CbtConfig{}).model;
  for (auto a : m.user_assign) EXPECT_EQ(a, 0u);
  for (auto a : m.item_assign) EXPECT_EQ(a, 0u);
}

TEST(Cbt, MatchesBruteForceOnFourByFour) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const RatingMatrix obs = testing::random_ratings(4, 4, 0.7, 5, rng);
    const DenseMatrix c = testing::random_matrix(2, 2, 1, 5, rng);
    CbtConfig cfg;
    cfg.restarts = 20;
    cfg.seed = seed;
    const CbtFit fit = cbt_fit_detailed(obs, c, cfg);
    EXPECT_LE(fit.loss, testing::brute_force_cbt(obs, c) + 1e-9) << "seed " << seed;
    EXPECT_NEAR(fit.loss, cbt_loss(obs, fit.model, c), 1e-12);
  }
}

TEST(Cbt, LossNonIncreasingPerHalfStep) {
  std::mt19937_64 rng(3);
  const RatingMatrix obs = testing::random_ratings(30, 25, 0.2, 5, rng);
  const DenseMatrix c = testing::random_matrix(4, 3, 1, 5, rng);
  const CbtFit fit = cbt_fit_detailed(obs, c, CbtConfig{});
  EXPECT_TRUE(testing::non_increasing(fit.trace));
}

TEST(Cbt, DeterministicAndEmptyLinesGoToClusterZero) {
  const RatingMatrix obs(4, 4, {{0, 0, 5}, {1, 1, 1}, {0, 1, 2}});
  const DenseMatrix c(2, 2, std::vector<double>{1, 5, 5, 2});
  CbtConfig cfg;
  cfg.seed = 3;
  const CbtModel a = cbt_fit_detailed(obs, c, cfg).model;
  const CbtModel b = cbt_fit_detailed(obs, c, cfg).model;
  EXPECT_EQ(a.user_assign, b.user_assign);
  EXPECT_EQ(a.item_assign, b.item_assign);
  EXPECT_EQ(a.user_assign[2], 0u);
  EXPECT_EQ(a.user_assign[3], 0u);
  EXPECT_EQ(a.item_assign[2], 0u);
  EXPECT_EQ(a.item_assign[3], 0u);
}

TEST(Cbt, PlantedHeldOutRecoveredExactly) {
  const testing::PlantedProblem p = testing::make_planted(0);
  Codebook cb{p.codebook, std::vector<std::size_t>(6, 1)};
  const CbtModel m = cbt_fit(p.target, cb, 100, 0);
  EXPECT_EQ(cbt_loss(p.target, m, p.codebook), 0.0);
  const DenseMatrix pred = cbt_predict(p.target, m, p.codebook);
  EXPECT_EQ(pred, p.target_truth);
}

TEST(CbtPredict, FillRules) {
  const RatingMatrix obs(2, 2, {{0, 0, 5}, {1, 1, 1}});
  const CbtModel m{{0, 0}, {0, 0}};
  const DenseMatrix c(1, 1, 3.0);
  const DenseMatrix pred = cbt_predict(obs, m, c);
  EXPECT_EQ(pred(0, 0), 5.0);
  EXPECT_EQ(pred(1, 1), 1.0);
  EXPECT_EQ(pred(0, 1), 3.0);
  const RatingMatrix full(1, 2, {{0, 0, 2}, {0, 1, 4}});
  EXPECT_EQ(cbt_predict(full, CbtModel{{0}, {0, 0}}, c), DenseMatrix(1, 2, std::vector<double>{2, 4}));
}

TEST(CbtPredict, RoundingHalvesUpWithinScale) {
  const DenseMatrix m(1, 5, std::vector<double>{2.5, 2.49, 0.2, 7.0, 3.5});
  EXPECT_EQ(round_ratings(m, 5), DenseMatrix(1, 5, std::vector<double>{3, 2, 1, 5, 4}));
}

TEST(Cbt, RejectsBadInput) {
  EXPECT_THROW(cbt_fit_detailed(RatingMatrix(2, 2, {}), DenseMatrix(1, 1, 3.0), CbtConfig{}), DataError);
  EXPECT_THROW(cbt_predict(RatingMatrix(2, 2, {}), CbtModel{{0}, {0, 0}}, DenseMatrix(1, 1, 3.0)),
               DataError);
}

}  // namespace
}  // namespace cdt
