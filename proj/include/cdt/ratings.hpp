#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cdt/dense_matrix.hpp"

namespace cdt {

struct Rating {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  int value = 0;

  bool operator==(const Rating&) const = default;
};

/// Sparse user x item matrix of ordinal ratings in [1, scale].
///
/// Entries are kept sorted by (user, item) and are unique per cell. A cell
/// with no entry is unobserved; 0 is never stored as a rating.
class RatingMatrix {
 public:
  static constexpr int kDefaultScale = 5;

  RatingMatrix() = default;
  /// Validates and sorts `entries`. Throws DataError on out-of-range indices,
  /// ratings outside [1, scale], or duplicate cells.
  RatingMatrix(std::size_t n_users, std::size_t n_items, std::vector<Rating> entries,
               int scale = kDefaultScale);

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  int scale() const { return scale_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const Rating> entries() const { return entries_; }

  /// Fraction of observed cells.
  double density() const;

  bool operator==(const RatingMatrix&) const = default;

 private:
  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  int scale_ = kDefaultScale;
  std::vector<Rating> entries_;
};

struct SplitPair {
  RatingMatrix train;
  RatingMatrix test;
  std::uint64_t seed = 0;
};

/// Reads `UserID::MovieID::Rating::Timestamp` lines (1-based ids).
RatingMatrix load_movielens(const std::filesystem::path& path);

/// Reads a `user_id,book_id,rating` file with header, keeping ids within
/// the given bounds. Dimensions are (max_users, max_items).
RatingMatrix load_goodbooks(const std::filesystem::path& path, std::size_t max_users,
                            std::size_t max_items);

/// Dispatches on the first line: `::`-delimited input goes to
/// load_movielens, anything else to load_goodbooks.
RatingMatrix load_ratings(const std::filesystem::path& path, std::size_t max_users,
                          std::size_t max_items);

/// Same dispatch without truncation; Goodbooks dimensions are the largest ids.
RatingMatrix load_ratings(const std::filesystem::path& path);

/// Uniform entry-level split; |train| = round(train_fraction * nnz).
SplitPair split_train_test(const RatingMatrix& m, double train_fraction, std::uint64_t seed);

/// Dense copy of `m` with each missing cell set to its row mean. Rows with no
/// observations take the global mean.
DenseMatrix mean_fill_rows(const RatingMatrix& m);

/// Offsets into entries() for each user (size n_users + 1) and an item-major
/// permutation of entry indices with its own offsets (size n_items + 1).
struct RatingIndex {
  std::vector<std::size_t> row_begin;
  std::vector<std::size_t> col_begin;
  std::vector<std::size_t> col_entries;

  explicit RatingIndex(const RatingMatrix& m);
};

}  // namespace cdt
