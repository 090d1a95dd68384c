#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cdt/errors.hpp"
#include "cdt/losses.hpp"
#include "cdt/mmmf.hpp"
#include "support/checks.hpp"
#include "support/oracles.hpp"

namespace cdt {
namespace {

TEST(SmoothHinge, Branches) {
  EXPECT_EQ(smooth_hinge(2.0), 0.0);
  EXPECT_EQ(smooth_hinge(0.5), 0.125);
  EXPECT_EQ(smooth_hinge(-1.0), 1.5);
  EXPECT_EQ(smooth_hinge_grad(2.0), 0.0);
  EXPECT_EQ(smooth_hinge_grad(0.5), -0.5);
  EXPECT_EQ(smooth_hinge_grad(-3.0), -1.0);
}

TEST(SmoothHinge, ContinuousAndOnceDifferentiableAtJoins) {
  for (double f : {0.0, 1.0}) {
    const double d = 1e-12;
    EXPECT_NEAR(smooth_hinge(f - d), smooth_hinge(f + d), 1e-9);
    EXPECT_NEAR(smooth_hinge_grad(f - d), smooth_hinge_grad(f + d), 1e-9);
  }
}

TEST(SmoothHinge, GradientMatchesCentralDifference) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int checked = 0;
  while (checked < 100) {
    const double f = u(rng);
    if (std::abs(f) < 1e-3 || std::abs(f - 1.0) < 1e-3) continue;
    const double h = 1e-6;
    const double num = (smooth_hinge(f + h) - smooth_hinge(f - h)) / (2 * h);
    EXPECT_NEAR(smooth_hinge_grad(f), num, 1e-6) << "f = " << f;
    ++checked;
  }
}

TEST(SmoothHinge, NonNegativeAndNonIncreasing) {
  double prev = smooth_hinge(-10.0);
  for (double f = -10.0; f <= 10.0; f += 0.01) {
    const double v = smooth_hinge(f);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(OrdinalSign, Examples) {
  EXPECT_EQ(ordinal_sign(1, 3), -1.0);
  EXPECT_EQ(ordinal_sign(3, 3), 1.0);
  EXPECT_EQ(ordinal_sign(4, 5), -1.0);
}

TEST(DecodeRating, Examples) {
  const std::vector<double> t{1, 2, 3, 4};
  EXPECT_EQ(decode_rating(2.5, t), 3);
  EXPECT_EQ(decode_rating(0.0, t), 1);
  EXPECT_EQ(decode_rating(100.0, t), 5);
}

TEST(DecodeRating, RangeAndMonotoneForUnsortedThresholds) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t(4);
    for (double& v : t) v = u(rng);
    int prev = 1;
    for (double s = -6.0; s <= 6.0; s += 0.05) {
      const int r = decode_rating(s, t);
      EXPECT_GE(r, 1);
      EXPECT_LE(r, 5);
      EXPECT_GE(r, prev);
      prev = r;
    }
  }
}

TEST(DecodeRating, InvariantUnderPositiveAffineMap) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-4.0, 4.0), scale(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t(4);
    for (double& v : t) v = u(rng);
    const double s = u(rng), a = scale(rng), b = u(rng);
    std::vector<double> mapped;
    for (double v : t) mapped.push_back(a * v + b);
    EXPECT_EQ(decode_rating(s, t), decode_rating(a * s + b, mapped));
  }
}

TEST(MmmfObjective, EmptyObservationsLeaveOnlyRegularizer) {
  std::mt19937_64 rng(1);
  MmmfModel m{testing::random_matrix(3, 2, -1, 1, rng), testing::random_matrix(4, 2, -1, 1, rng),
              DenseMatrix(3, 4, 1.0)};
  const double expected = 0.3 * (m.U.squared_norm() + m.V.squared_norm());
  EXPECT_EQ(mmmf_objective(RatingMatrix(3, 4, {}), m, 0.3), expected);
}

TEST(MmmfObjective, WideMarginsGiveZeroLoss) {
  // U = V = 0 so every score is 0; thresholds below the rating sit at -1 and
  // the rest at +1, so every margin is exactly 1.
  const RatingMatrix obs(1, 2, {{0, 0, 3}, {0, 1, 3}});
  MmmfModel m{DenseMatrix(1, 2), DenseMatrix(2, 2), DenseMatrix(1, 4, std::vector<double>{-1, -1, 1, 1})};
  EXPECT_EQ(mmmf_objective(obs, m, 0.0), 0.0);
}

TEST(MmmfObjective, MatchesStraightLoopOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const RatingMatrix obs = testing::random_ratings(4, 4, 0.6, 5, rng);
    MmmfModel m{testing::random_matrix(4, 3, -1, 1, rng), testing::random_matrix(4, 3, -1, 1, rng),
                testing::random_thresholds(4, 5, rng)};
    EXPECT_NEAR(mmmf_objective(obs, m, 0.2),
                testing::ref_mmmf_objective(obs, m.U, m.V, m.Theta, 0.2), 1e-10);
  }
}

TEST(MmmfGradient, MatchesCentralDifferences) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const testing::GradCheck g = testing::check_mmmf_gradient(testing::random_mmmf_instance(seed));
    EXPECT_LE(g.worst, 1e-4) << "seed " << seed;
    checked += g.checked;
  }
  EXPECT_GT(checked, 200u);
}

TEST(MmmfGradient, SerialAndParallelAgree) {
  const testing::MmmfInstance t = testing::random_mmmf_instance(3);
  const MmmfGradient a = mmmf_gradient(t.obs, t.model, t.lambda, kernels::Backend::serial);
  const MmmfGradient b = mmmf_gradient(t.obs, t.model, t.lambda, kernels::Backend::parallel);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(a.V, b.V);
  EXPECT_EQ(a.Theta, b.Theta);
}

TEST(MmmfInit, RangesAndThresholds) {
  const MmmfModel m = mmmf_init(5, 4, 5, 3, 9);
  for (double v : m.U.values()) EXPECT_LE(std::abs(v), 0.01);
  for (double v : m.V.values()) EXPECT_LE(std::abs(v), 0.01);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t q = 0; q < 4; ++q) EXPECT_EQ(m.Theta(i, q), static_cast<double>(q + 1));
  }
  EXPECT_EQ(m.scale(), 5);
  EXPECT_EQ(m.latent_dim(), 3u);
}

TEST(MmmfFit, ConstantToyReachesZeroHingeLoss) {
  std::vector<Rating> e;
  for (std::uint32_t i = 0; i < 3; ++i) {
    for (std::uint32_t j = 0; j < 3; ++j) e.push_back({i, j, 3});
  }
  const RatingMatrix obs(3, 3, e);
  SolverConfig cfg;
  cfg.latent_dim = 1;
  cfg.step_size = 0.1;
  cfg.max_iters = 3000;
  cfg.tol = 1e-12;
  const MmmfFit fit = mmmf_fit_detailed(obs, cfg);
  const double reg = cfg.lambda * (fit.model.U.squared_norm() + fit.model.V.squared_norm());
  EXPECT_LT(fit.trace.objective.back() - reg, 1e-3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(mmmf_predict_cell(fit.model, i, j), 3);
  }
}

TEST(MmmfFit, MonotoneAndDeterministic) {
  std::mt19937_64 rng(4);
  const RatingMatrix obs = testing::random_ratings(10, 8, 0.4, 5, rng);
  SolverConfig cfg;
  cfg.latent_dim = 3;
  cfg.step_size = 0.5;
  cfg.max_iters = 200;
  cfg.seed = 17;
  const MmmfFit a = mmmf_fit_detailed(obs, cfg);
  const MmmfFit b = mmmf_fit_detailed(obs, cfg);
  EXPECT_TRUE(testing::non_increasing(a.trace.objective));
  EXPECT_LE(a.trace.objective.back(), a.trace.objective.front());
  EXPECT_EQ(a.model.U, b.model.U);
  EXPECT_EQ(a.model.Theta, b.model.Theta);
}

TEST(MmmfFit, PlainStepsDivergeWithHugeStep) {
  std::mt19937_64 rng(4);
  const RatingMatrix obs = testing::random_ratings(10, 8, 0.5, 5, rng);
  SolverConfig cfg;
  cfg.latent_dim = 3;
  cfg.step_size = 1e150;
  cfg.max_iters = 50;
  cfg.halve_on_increase = false;
  EXPECT_THROW(mmmf_fit(obs, cfg), DivergenceError);
}

TEST(MmmfFit, RejectsBadInput) {
  SolverConfig cfg;
  EXPECT_THROW(mmmf_fit(RatingMatrix(2, 2, {}), cfg), DataError);
  cfg.step_size = 0.0;
  EXPECT_THROW(mmmf_fit(RatingMatrix(2, 2, {{0, 0, 1}}), cfg), DataError);
}

TEST(MmmfPredict, ObservedCellsKept) {
  const RatingMatrix obs(2, 2, {{0, 0, 5}, {1, 1, 1}});
  const MmmfModel m = mmmf_init(2, 2, 5, 2, 1);
  const DenseMatrix p = mmmf_predict(obs, m);
  EXPECT_EQ(p(0, 0), 5.0);
  EXPECT_EQ(p(1, 1), 1.0);
  // Scores near zero sit below every threshold.
  EXPECT_EQ(p(0, 1), 1.0);
}

}  // namespace
}  // namespace cdt
