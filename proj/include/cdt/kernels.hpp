#pragma once

// Data-parallel inner loops shared by the solvers. Every kernel has a serial
// reference version and an OpenMP version. The OpenMP versions partition work
// by row or column ownership so results do not depend on the thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "cdt/dense_matrix.hpp"
#include "cdt/ratings.hpp"

namespace cdt::kernels {

enum class Backend { serial, parallel };

// ---- ordinal hinge over observed entries ------------------------------------
//
// For each observed (i, j) with rating x and score s_ij = dot(rows_i, cols_j),
// accumulates sum_q h(T_q(x) * (thresholds(i, q) - s_ij)).

/// Hinge loss only.
double ordinal_hinge_loss(const RatingMatrix& obs, const RatingIndex& index,
                          const DenseMatrix& rows, const DenseMatrix& cols,
                          const DenseMatrix& thresholds, Backend backend);

/// Hinge loss plus partial derivatives:
///   grad_thresholds(i, q) = sum_j T h'
///   grad_rows(i, :)       = sum_j c_ij * cols_j
///   grad_cols(j, :)       = sum_i c_ij * rows_i
/// where c_ij = -sum_q T h' is the derivative with respect to s_ij.
/// Output matrices are resized and overwritten.
double ordinal_hinge_grad(const RatingMatrix& obs, const RatingIndex& index,
                          const DenseMatrix& rows, const DenseMatrix& cols,
                          const DenseMatrix& thresholds, DenseMatrix& grad_rows,
                          DenseMatrix& grad_cols, DenseMatrix& grad_thresholds, Backend backend);

// ---- block sums for co-clustering -------------------------------------------

/// out(i, l) = sum of Y(i, j) over columns with col_assign[j] == l.
DenseMatrix row_block_sums(const DenseMatrix& y, std::span<const std::uint32_t> col_assign,
                           std::size_t n_col_clusters, Backend backend);

/// out(j, k) = sum of Y(i, j) over rows with row_assign[i] == k.
DenseMatrix col_block_sums(const DenseMatrix& y, std::span<const std::uint32_t> row_assign,
                           std::size_t n_row_clusters, Backend backend);

/// Assigns each line (row of `sums`) to the cluster c minimizing
///   sum_l counts[l] * C(c, l)^2 - 2 C(c, l) sums(line, l),
/// i.e. the squared block error up to a per-line constant. Keeps the current
/// assignment on ties. Returns the number of changed assignments.
std::size_t reassign(const DenseMatrix& codebook, std::span<const std::size_t> counts,
                     const DenseMatrix& sums, std::span<std::uint32_t> assign, Backend backend);

/// Assigns every row of Y to the nearest of the rows listed in `prototypes`
/// (squared Euclidean distance, lowest prototype index on ties).
std::vector<std::uint32_t> nearest_row_prototypes(const DenseMatrix& y,
                                                  std::span<const std::size_t> prototypes,
                                                  Backend backend);

/// Squared Euclidean distance from every row of Y to row r.
std::vector<double> row_distances(const DenseMatrix& y, std::size_t r, Backend backend);

/// Squared Euclidean distance from every column of Y to column c.
std::vector<double> col_distances(const DenseMatrix& y, std::size_t c, Backend backend);

/// Column analogue of nearest_row_prototypes.
std::vector<std::uint32_t> nearest_col_prototypes(const DenseMatrix& y,
                                                  std::span<const std::size_t> prototypes,
                                                  Backend backend);

/// sum_ij (Y(i, j) - C(row_assign[i], col_assign[j]))^2
double block_error(const DenseMatrix& y, const DenseMatrix& codebook,
                   std::span<const std::uint32_t> row_assign,
                   std::span<const std::uint32_t> col_assign, Backend backend);

}  // namespace cdt::kernels
