#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cdt/descent.hpp"
#include "cdt/errors.hpp"
#include "cdt/losses.hpp"
#include "cdt/transfer.hpp"
#include "support/checks.hpp"
#include "support/oracles.hpp"

namespace cdt {
namespace {

// Two user and two item clusters with scores +-2 and thresholds -3, -1, 1, 3,
// so cluster pairs decode to 4 or 2 with every margin at least 1.
MmmfModel wide_margin_codebook() {
  return MmmfModel{DenseMatrix(2, 1, std::vector<double>{1, -1}),
                   DenseMatrix(2, 1, std::vector<double>{2, -2}),
                   DenseMatrix(2, 4, std::vector<double>{-3, -1, 1, 3, -3, -1, 1, 3})};
}

DenseMatrix one_hot(const std::vector<std::uint32_t>& labels, std::size_t k) {
  DenseMatrix m(labels.size(), k);
  for (std::size_t i = 0; i < labels.size(); ++i) m(i, labels[i]) = 1.0;
  return m;
}

TEST(Penalties, RowSumExamples) {
  EXPECT_EQ(row_sum_penalty(1.0), 0.0);
  EXPECT_DOUBLE_EQ(row_sum_penalty(0.3), 0.7);
  EXPECT_DOUBLE_EQ(row_sum_penalty(2.5), 1.5);
  EXPECT_EQ(row_sum_penalty_grad(0.5), -1.0);
  EXPECT_EQ(row_sum_penalty_grad(1.5), 1.0);
}

TEST(Penalties, NegativityExamples) {
  EXPECT_EQ(negativity_penalty(-0.5), -0.5);
  EXPECT_EQ(negativity_penalty(0.0), 0.0);
  EXPECT_EQ(negativity_penalty(3.0), 0.0);
  EXPECT_EQ(negativity_penalty_grad(-2.0), 1.0);
  EXPECT_EQ(negativity_penalty_grad(2.0), 0.0);
}

TEST(Penalties, GradientsMatchCentralDifferences) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double h = 1e-6;
  for (int k = 0; k < 200; ++k) {
    const double d = u(rng);
    if (std::abs(d - 1.0) > 1e-3) {
      EXPECT_NEAR(row_sum_penalty_grad(d), (row_sum_penalty(d + h) - row_sum_penalty(d - h)) / (2 * h), 1e-6);
    }
    if (std::abs(d) > 1e-3) {
      EXPECT_NEAR(negativity_penalty_grad(d),
                  (negativity_penalty(d + h) - negativity_penalty(d - h)) / (2 * h), 1e-6);
    }
  }
}

TEST(TransferObjective, EmptyObservationsOnSimplexIsZero) {
  TransferModel tm{DenseMatrix(3, 2, std::vector<double>{0.5, 0.5, 1, 0, 0.25, 0.75}),
                   DenseMatrix(2, 2, std::vector<double>{0, 1, 0.5, 0.5})};
  EXPECT_EQ(transfer_objective(RatingMatrix(3, 2, {}), tm, wide_margin_codebook(), TransferConfig{}), 0.0);
}

TEST(TransferObjective, OneHotOnDecodedRatingsHasZeroHinge) {
  const MmmfModel cb = wide_margin_codebook();
  const std::vector<std::uint32_t> users{0, 1, 1, 0}, items{1, 0, 0};
  std::vector<Rating> e;
  for (std::uint32_t i = 0; i < users.size(); ++i) {
    for (std::uint32_t j = 0; j < items.size(); ++j) {
      const double s = cb.U(users[i], 0) * cb.V(items[j], 0);
      e.push_back({i, j, decode_rating(s, cb.Theta.row(users[i]))});
    }
  }
  const RatingMatrix obs(4, 3, e);
  const TransferModel tm{one_hot(users, 2), one_hot(items, 2)};
  EXPECT_EQ(testing::ref_transfer_hinge(obs, tm.alpha, tm.beta, cb.U, cb.V, cb.Theta), 0.0);
  EXPECT_EQ(transfer_objective(obs, tm, cb, TransferConfig{}), 0.0);
}

TEST(TransferObjective, MatchesStraightLoopOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    testing::TransferInstance t;
    t.obs = testing::random_ratings(4, 3, 0.7, 5, rng);
    t.tm = {testing::random_matrix(4, 2, -0.3, 0.9, rng), testing::random_matrix(3, 2, -0.3, 0.9, rng)};
    t.cb = {testing::random_matrix(2, 2, -1, 1, rng), testing::random_matrix(2, 2, -1, 1, rng),
            testing::random_thresholds(2, 5, rng)};
    t.cfg.lambda1 = 0.7;
    t.cfg.lambda2 = 1.3;
    EXPECT_NEAR(transfer_objective(t.obs, t.tm, t.cb, t.cfg), testing::ref_transfer_objective(t), 1e-10);
    t.cfg.negativity = NegativityTerm::as_printed;
    EXPECT_NEAR(transfer_objective(t.obs, t.tm, t.cb, t.cfg), testing::ref_transfer_objective(t), 1e-10);
  }
}

TEST(TransferGradient, ZeroWithoutTerms) {
  std::mt19937_64 rng(2);
  const TransferModel tm{testing::random_matrix(3, 2, -1, 1, rng), testing::random_matrix(4, 2, -1, 1, rng)};
  TransferConfig cfg;
  cfg.lambda1 = cfg.lambda2 = 0.0;
  const RatingMatrix none(3, 4, {});
  const DenseMatrix ga = grad_alpha(none, tm, wide_margin_codebook(), cfg);
  const DenseMatrix gb = grad_beta(none, tm, wide_margin_codebook(), cfg);
  for (double v : ga.values()) EXPECT_EQ(v, 0.0);
  for (double v : gb.values()) EXPECT_EQ(v, 0.0);
}

TEST(TransferGradient, PenaltyOnlyRowSumBranch) {
  const TransferModel tm{DenseMatrix(2, 2, 0.2), DenseMatrix(2, 2, 0.2)};
  const DenseMatrix g = grad_alpha(RatingMatrix(2, 2, {}), tm, wide_margin_codebook(), TransferConfig{});
  for (double v : g.values()) EXPECT_EQ(v, -1.0);
}

TEST(TransferGradient, MatchesCentralDifferences) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const testing::GradCheck g = testing::check_transfer_gradient(testing::random_transfer_instance(seed));
    EXPECT_LE(g.worst, 1e-4) << "seed " << seed;
    checked += g.checked;
  }
  EXPECT_GT(checked, 100u);
}

TEST(TransferGradient, LiteralNegativityTermAlsoMatches) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    testing::TransferInstance t = testing::random_transfer_instance(seed);
    t.cfg.negativity = NegativityTerm::as_printed;
    EXPECT_LE(testing::check_transfer_gradient(t).worst, 1e-4) << "seed " << seed;
  }
}

TEST(TransferGradient, PrintedAlphaFormIsNotTheDerivative) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    testing::TransferInstance t = testing::random_transfer_instance(seed);
    if (t.cb.U.rows() < 2) continue;
    t.cfg.printed_alpha_gradient = true;
    worst = std::max(worst, testing::check_transfer_gradient(t).worst);
  }
  EXPECT_GT(worst, 1e-2);
}

TEST(TransferGradient, SerialAndParallelAgree) {
  testing::TransferInstance t = testing::random_transfer_instance(4);
  t.cfg.backend = kernels::Backend::serial;
  const TransferGradient a = transfer_gradient(t.obs, t.tm, t.cb, t.cfg);
  t.cfg.backend = kernels::Backend::parallel;
  const TransferGradient b = transfer_gradient(t.obs, t.tm, t.cb, t.cfg);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.beta, b.beta);
}

TEST(TransferObjective, LiteralNegativityTermIsUnboundedBelow) {
  // Rows (t, 1 - t) keep the row-sum term at zero while the literal term
  // rewards the growing negative entry.
  TransferConfig cfg;
  cfg.negativity = NegativityTerm::as_printed;
  const RatingMatrix none(1, 1, {});
  double prev = 0.0;
  for (double t = 2.0; t <= 2e6; t *= 10.0) {
    const TransferModel tm{DenseMatrix(1, 2, std::vector<double>{t, 1 - t}),
                           DenseMatrix(1, 2, std::vector<double>{0.5, 0.5})};
    const double j = transfer_objective(none, tm, wide_margin_codebook(), cfg);
    EXPECT_LT(j, prev);
    prev = j;
  }
  EXPECT_LT(prev, -1e5);
}

TEST(TransferFit, LargePenaltiesDriveRowsOntoSimplex) {
  // No observations: only the penalties act, starting from the solver's own
  // initialization.
  const MmmfModel cb{DenseMatrix(3, 2, 0.5), DenseMatrix(2, 2, 0.5), DenseMatrix(3, 4, 1.0)};
  TransferConfig cfg;
  cfg.lambda1 = cfg.lambda2 = 100.0;
  const RatingMatrix none(6, 5, {});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TransferModel init = transfer_init(6, 5, 3, 2, seed);
    std::vector<DenseMatrix> x{init.alpha, init.beta};
    DescentOptions opts;
    opts.step = 1e-3;
    opts.max_iters = 5000;
    opts.tol = 1e-12;
    gradient_descent(
        x, [&](const std::vector<DenseMatrix>& p) { return transfer_objective(none, {p[0], p[1]}, cb, cfg); },
        [&](const std::vector<DenseMatrix>& p, std::vector<DenseMatrix>& g) {
          const TransferGradient tg = transfer_gradient(none, {p[0], p[1]}, cb, cfg);
          g[0] = tg.alpha;
          g[1] = tg.beta;
        },
        opts, "penalty");
    for (const DenseMatrix& w : x) {
      for (std::size_t i = 0; i < w.rows(); ++i) {
        double sum = 0.0;
        for (double v : w.row(i)) {
          sum += v;
          EXPECT_GE(v, -0.05);
        }
        EXPECT_NEAR(sum, 1.0, 0.05);
      }
    }
  }
}

struct TwoByTwoPlanted {
  RatingMatrix obs;
  DenseMatrix truth;
  MmmfModel cb;
  std::vector<std::uint32_t> users, items;
};

// Target drawn exactly from the wide-margin codebook with one-hot memberships;
// every user sees both item clusters and every item both user clusters.
TwoByTwoPlanted two_by_two_planted(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TwoByTwoPlanted p;
  p.cb = wide_margin_codebook();
  const std::size_t m = 30, n = 20;
  for (std::size_t i = 0; i < m; ++i) p.users.push_back(static_cast<std::uint32_t>(i % 2));
  for (std::size_t j = 0; j < n; ++j) p.items.push_back(static_cast<std::uint32_t>(j % 2));
  std::shuffle(p.users.begin(), p.users.end(), rng);
  std::shuffle(p.items.begin(), p.items.end(), rng);
  p.truth = DenseMatrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      p.truth(i, j) = decode_rating(p.cb.U(p.users[i], 0) * p.cb.V(p.items[j], 0), p.cb.Theta.row(p.users[i]));
    }
  }
  std::bernoulli_distribution keep(0.2);
  std::vector<Rating> e;
  for (std::uint32_t i = 0; i < m; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      const bool cover = (j == 2 * (i % 10) || j == 2 * (i % 10) + 1);
      if (cover || keep(rng)) e.push_back({i, j, static_cast<int>(p.truth(i, j))});
    }
  }
  p.obs = RatingMatrix(m, n, e);
  return p;
}

TEST(TransferFit, PlantedTwoByTwoReachesNearZeroHinge) {
  const TwoByTwoPlanted p = two_by_two_planted(1);
  TransferConfig cfg;
  cfg.lambda1 = cfg.lambda2 = 0.1;
  cfg.restarts = 10;
  cfg.max_iters = 5000;
  cfg.tol = 1e-10;
  const TransferFit fit = fit_transfer_detailed(p.obs, p.cb, cfg);
  const double hinge =
      testing::ref_transfer_hinge(p.obs, fit.model.alpha, fit.model.beta, p.cb.U, p.cb.V, p.cb.Theta);
  EXPECT_LT(hinge, 1e-2);
  // The known memberships have zero objective, so nothing can beat them.
  EXPECT_EQ(transfer_objective(p.obs, {one_hot(p.users, 2), one_hot(p.items, 2)}, p.cb, cfg), 0.0);

  const DenseMatrix pred = predict(p.obs, fit.model, p.cb);
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    for (std::size_t j = 0; j < pred.cols(); ++j) EXPECT_EQ(pred(i, j), p.truth(i, j));
  }
}

TEST(TransferFit, MonotoneDeterministicAndRestartsNeverWorse) {
  const TwoByTwoPlanted p = two_by_two_planted(2);
  TransferConfig cfg;
  cfg.seed = 5;
  const TransferFit a = fit_transfer_detailed(p.obs, p.cb, cfg);
  const TransferFit b = fit_transfer_detailed(p.obs, p.cb, cfg);
  EXPECT_TRUE(testing::non_increasing(a.trace.objective));
  EXPECT_EQ(a.model.alpha, b.model.alpha);
  EXPECT_EQ(a.model.beta, b.model.beta);
  cfg.restarts = 4;
  const TransferFit c = fit_transfer_detailed(p.obs, p.cb, cfg);
  EXPECT_LE(c.trace.objective.back(), a.trace.objective.back());
}

TEST(TransferFit, InitRowSumsNearOne) {
  const TransferModel tm = transfer_init(50, 40, 3, 2, 1);
  for (double v : tm.alpha.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 2.0 / 3.0);
  }
  for (double v : tm.beta.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(TransferFit, RejectsBadInput) {
  const MmmfModel cb = wide_margin_codebook();
  EXPECT_THROW(fit_transfer(RatingMatrix(2, 2, {}), cb, TransferConfig{}), DataError);
  TransferConfig bad;
  bad.step_size = -1.0;
  EXPECT_THROW(fit_transfer(RatingMatrix(2, 2, {{0, 0, 1}}), cb, bad), DataError);
  const TransferModel wrong{DenseMatrix(2, 3), DenseMatrix(2, 2)};
  EXPECT_THROW(transfer_objective(RatingMatrix(2, 2, {}), wrong, cb, TransferConfig{}), DataError);
}

TEST(TransferPredict, FullyObservedTargetUnchanged) {
  const TwoByTwoPlanted p = two_by_two_planted(3);
  std::vector<Rating> all;
  for (std::uint32_t i = 0; i < p.truth.rows(); ++i) {
    for (std::uint32_t j = 0; j < p.truth.cols(); ++j) all.push_back({i, j, static_cast<int>(p.truth(i, j))});
  }
  const RatingMatrix full(p.truth.rows(), p.truth.cols(), all);
  std::mt19937_64 rng(1);
  const TransferModel tm{testing::random_matrix(30, 2, -5, 5, rng), testing::random_matrix(20, 2, -5, 5, rng)};
  EXPECT_EQ(predict(full, tm, p.cb), p.truth);
}

TEST(TransferPredict, OutputsAreRatingsAndObservedCellsKept) {
  const TwoByTwoPlanted p = two_by_two_planted(4);
  std::mt19937_64 rng(2);
  const TransferModel tm{testing::random_matrix(30, 2, -50, 50, rng), testing::random_matrix(20, 2, -50, 50, rng)};
  const DenseMatrix pred = predict(p.obs, tm, p.cb);
  for (double v : pred.values()) {
    EXPECT_EQ(v, std::round(v));
    EXPECT_GE(v, 1.0);
    EXPECT_LE(v, 5.0);
  }
  for (const Rating& e : p.obs.entries()) EXPECT_EQ(pred(e.user, e.item), e.value);
}

}  // namespace
}  // namespace cdt
