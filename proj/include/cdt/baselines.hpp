#pragma once

#include <cstdint>
#include <vector>

#include "cdt/coclustering.hpp"
#include "cdt/dense_matrix.hpp"
#include "cdt/ratings.hpp"

namespace cdt {

/// Hard target-domain assignments onto codebook rows and columns.
struct CbtModel {
  std::vector<std::uint32_t> user_assign;
  std::vector<std::uint32_t> item_assign;
};

struct CbtConfig {
  std::size_t max_iters = 100;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
};

struct CbtFit {
  CbtModel model;
  double loss = 0.0;
  // Loss after every half-step of the winning restart.
  std::vector<double> trace;
};

/// Squared reconstruction error of the expanded codebook on observed cells.
double cbt_loss(const RatingMatrix& obs, const CbtModel& model, const DenseMatrix& codebook);

/// Alternating greedy assignment from random item starts; ties go to the
/// lowest cluster index and lines without observations to cluster 0.
CbtFit cbt_fit_detailed(const RatingMatrix& obs, const DenseMatrix& codebook, const CbtConfig& cfg);

inline CbtModel cbt_fit(const RatingMatrix& obs, const Codebook& cb, std::size_t max_iters,
                        std::uint64_t seed) {
  return cbt_fit_detailed(obs, cb.values, CbtConfig{max_iters, 10, seed}).model;
}

/// Observed cells kept; missing cells take their co-cluster's codebook value
/// (unrounded).
DenseMatrix cbt_predict(const RatingMatrix& target, const CbtModel& model,
                        const DenseMatrix& codebook);

/// Nearest integer rating in [1, scale], halves rounding up.
DenseMatrix round_ratings(const DenseMatrix& m, int scale);

}  // namespace cdt
