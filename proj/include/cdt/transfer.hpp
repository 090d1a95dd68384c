#pragma once

#include <cstdint>

#include "cdt/dense_matrix.hpp"
#include "cdt/descent.hpp"
#include "cdt/kernels.hpp"
#include "cdt/losses.hpp"
#include "cdt/mmmf.hpp"
#include "cdt/ratings.hpp"

namespace cdt {

/// Target-domain membership weights: alpha maps users onto the codebook's
/// row clusters (m x k1), beta maps items onto its column clusters (n x k2).
struct TransferModel {
  DenseMatrix alpha;
  DenseMatrix beta;
};

/// How the negativity term enters the objective.
enum class NegativityTerm {
  // -lambda2 * sum l2(w): grows as weights go negative.
  penalize,
  // +lambda2 * sum l2(w): the sign as printed, which rewards negative weights
  // and leaves the objective unbounded below.
  as_printed,
};

struct TransferConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double step_size = 0.01;
  std::size_t max_iters = 300;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  // Independent initializations; the lowest final objective wins.
  std::size_t restarts = 1;
  bool halve_on_increase = true;
  NegativityTerm negativity = NegativityTerm::penalize;
  // Contract U_c with an all-ones row in the alpha gradient instead of using
  // row k of U_c. This is not the derivative of the objective; kept for
  // comparison runs only.
  bool printed_alpha_gradient = false;
  kernels::Backend backend = kernels::Backend::parallel;
};

struct TransferGradient {
  double objective = 0.0;
  DenseMatrix alpha;
  DenseMatrix beta;
};

struct TransferFit {
  TransferModel model;
  DescentTrace trace;
};

/// Ordinal hinge of the transferred scores over observed target ratings,
/// plus the row-sum and negativity terms on alpha and beta.
double transfer_objective(const RatingMatrix& obs, const TransferModel& tm,
                          const MmmfModel& codebook, const TransferConfig& cfg);

/// Analytic gradient of transfer_objective.
TransferGradient transfer_gradient(const RatingMatrix& obs, const TransferModel& tm,
                                   const MmmfModel& codebook, const TransferConfig& cfg);

DenseMatrix grad_alpha(const RatingMatrix& obs, const TransferModel& tm, const MmmfModel& codebook,
                       const TransferConfig& cfg);
DenseMatrix grad_beta(const RatingMatrix& obs, const TransferModel& tm, const MmmfModel& codebook,
                      const TransferConfig& cfg);

/// Uniform random weights in [0, 2/k] so initial row sums sit near one.
TransferModel transfer_init(std::size_t n_users, std::size_t n_items, std::size_t k1,
                            std::size_t k2, std::uint64_t seed);

/// Simultaneous gradient steps on alpha and beta with step halving. Restart r
/// starts from transfer_init with a seed derived from (seed, r); restart 0
/// uses `seed` itself.
TransferFit fit_transfer_detailed(const RatingMatrix& obs, const MmmfModel& codebook,
                                  const TransferConfig& cfg);

inline TransferModel fit_transfer(const RatingMatrix& obs, const MmmfModel& codebook,
                                  const TransferConfig& cfg) {
  return fit_transfer_detailed(obs, codebook, cfg).model;
}

/// Per-user scores and thresholds of the transferred model.
struct TransferScores {
  DenseMatrix user_factors;  // alpha * U_c
  DenseMatrix item_factors;  // beta * V_c
  DenseMatrix thresholds;    // alpha * Theta_c

  double score(std::size_t i, std::size_t j) const {
    return dot(user_factors.row(i), item_factors.row(j));
  }
  int rating(std::size_t i, std::size_t j) const {
    return decode_rating(score(i, j), thresholds.row(i));
  }
};

TransferScores transfer_scores(const TransferModel& tm, const MmmfModel& codebook);

/// Observed cells keep their ratings; every other cell gets the decoded
/// transferred score.
DenseMatrix predict(const RatingMatrix& target, const TransferModel& tm, const MmmfModel& codebook);

}  // namespace cdt
