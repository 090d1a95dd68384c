#pragma once

#include <cstdint>
#include <vector>

#include "cdt/dense_matrix.hpp"
#include "cdt/kernels.hpp"
#include "cdt/ratings.hpp"

namespace cdt {

/// Hard assignment of every row to one of k1 clusters and every column to one
/// of k2 clusters.
struct Memberships {
  std::vector<std::uint32_t> user_assign;
  std::vector<std::uint32_t> item_assign;

  bool operator==(const Memberships&) const = default;
};

/// Co-cluster mean ratings with the number of cells behind each mean.
struct Codebook {
  DenseMatrix values;
  std::vector<std::size_t> counts;  // row-major k1 x k2

  std::size_t k1() const { return values.rows(); }
  std::size_t k2() const { return values.cols(); }
  std::size_t count(std::size_t k, std::size_t l) const { return counts[k * k2() + l]; }
};

/// Codebook with unreliable cells zeroed out.
struct PartialCodebook {
  DenseMatrix values;
  std::vector<bool> retained;  // row-major k1 x k2

  std::size_t k1() const { return values.rows(); }
  std::size_t k2() const { return values.cols(); }
  bool is_retained(std::size_t k, std::size_t l) const { return retained[k * k2() + l]; }
  std::size_t retained_count() const;
};

struct CoclusterConfig {
  std::size_t k1 = 1;
  std::size_t k2 = 1;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  kernels::Backend backend = kernels::Backend::parallel;
};

struct CoclusterResult {
  Memberships memberships;
  double objective = 0.0;
  // Block error after initialization and after every half-step of the best restart.
  std::vector<double> trace;
};

/// Alternating hard co-clustering minimizing sum_ij (Y_ij - C(row, col))^2.
/// Each restart seeds clusters from D^2-sampled prototype rows and columns;
/// the best final objective wins (lowest restart index on ties).
CoclusterResult cocluster_detailed(const DenseMatrix& filled, const CoclusterConfig& cfg);

inline Memberships cocluster(const DenseMatrix& filled, const CoclusterConfig& cfg) {
  return cocluster_detailed(filled, cfg).memberships;
}

/// Co-cluster means; empty co-clusters take the global mean of `filled`.
Codebook build_codebook(const DenseMatrix& filled, const Memberships& mem, std::size_t k1,
                        std::size_t k2);

/// Retains cell (k, l) iff strictly more than th percent of its cells lie
/// within eps of the mean. Empty co-clusters are always dropped.
PartialCodebook prune_codebook(const Codebook& cb, const DenseMatrix& filled,
                               const Memberships& mem, double th, double eps);

/// Retained cells rounded half-up to integer ratings clamped to [1, scale].
RatingMatrix partial_codebook_ratings(const PartialCodebook& pcb, int scale);

PartialCodebook retain_all(const Codebook& cb);

}  // namespace cdt
