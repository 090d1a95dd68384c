#include "cdt/kernels.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "cdt/errors.hpp"
#include "cdt/losses.hpp"

namespace cdt::kernels {

namespace {

constexpr std::size_t kColumnTile = 64;

void check_hinge_shapes(const RatingMatrix& obs, const DenseMatrix& rows, const DenseMatrix& cols,
                        const DenseMatrix& thresholds) {
  if (rows.rows() != obs.n_users() || cols.rows() != obs.n_items() ||
      rows.cols() != cols.cols() || thresholds.rows() != obs.n_users() ||
      thresholds.cols() + 1 != static_cast<std::size_t>(obs.scale())) {
    throw DataError("ordinal hinge: factor shapes (" + std::to_string(rows.rows()) + "x" +
                    std::to_string(rows.cols()) + ", " + std::to_string(cols.rows()) + "x" +
                    std::to_string(cols.cols()) + ", thresholds " +
                    std::to_string(thresholds.rows()) + "x" + std::to_string(thresholds.cols()) +
                    ") do not match " + std::to_string(obs.n_users()) + "x" +
                    std::to_string(obs.n_items()) + " ratings on scale " +
                    std::to_string(obs.scale()));
  }
}

// Hinge loss of one entry; adds T h' per threshold into `grad_thr` when given
// and returns -sum_q T h' through `coef`.
inline double entry_hinge(double score, int rating, std::span<const double> thr,
                          double* grad_thr, double* coef) {
  double loss = 0.0;
  double c = 0.0;
  for (std::size_t q = 0; q < thr.size(); ++q) {
    const double t = ordinal_sign(static_cast<int>(q) + 1, rating);
    const double f = t * (thr[q] - score);
    loss += smooth_hinge(f);
    if (grad_thr != nullptr) {
      const double g = t * smooth_hinge_grad(f);
      grad_thr[q] += g;
      c -= g;
    }
  }
  if (coef != nullptr) *coef = c;
  return loss;
}

inline void add_scaled(std::span<double> out, double a, std::span<const double> x) {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += a * x[k];
}

}  // namespace

double ordinal_hinge_loss(const RatingMatrix& obs, const RatingIndex& index,
                          const DenseMatrix& rows, const DenseMatrix& cols,
                          const DenseMatrix& thresholds, Backend backend) {
  check_hinge_shapes(obs, rows, cols, thresholds);
  const auto entries = obs.entries();

  // Both backends add per-user partial sums in user order.
  if (backend == Backend::serial) {
    double loss = 0.0;
    for (std::size_t i = 0; i < obs.n_users(); ++i) {
      double acc = 0.0;
      for (std::size_t k = index.row_begin[i]; k < index.row_begin[i + 1]; ++k) {
        const Rating& e = entries[k];
        acc += entry_hinge(dot(rows.row(i), cols.row(e.item)), e.value, thresholds.row(i),
                           nullptr, nullptr);
      }
      loss += acc;
    }
    return loss;
  }

  const auto n_users = static_cast<std::ptrdiff_t>(obs.n_users());
  std::vector<double> row_loss(obs.n_users(), 0.0);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n_users; ++i) {
    double acc = 0.0;
    for (std::size_t k = index.row_begin[i]; k < index.row_begin[i + 1]; ++k) {
      const Rating& e = entries[k];
      acc += entry_hinge(dot(rows.row(e.user), cols.row(e.item)), e.value,
                         thresholds.row(e.user), nullptr, nullptr);
    }
    row_loss[i] = acc;
  }
  return std::accumulate(row_loss.begin(), row_loss.end(), 0.0);
}

double ordinal_hinge_grad(const RatingMatrix& obs, const RatingIndex& index,
                          const DenseMatrix& rows, const DenseMatrix& cols,
                          const DenseMatrix& thresholds, DenseMatrix& grad_rows,
                          DenseMatrix& grad_cols, DenseMatrix& grad_thresholds, Backend backend) {
  check_hinge_shapes(obs, rows, cols, thresholds);
  const auto entries = obs.entries();
  grad_rows = DenseMatrix(rows.rows(), rows.cols());
  grad_cols = DenseMatrix(cols.rows(), cols.cols());
  grad_thresholds = DenseMatrix(thresholds.rows(), thresholds.cols());

  if (backend == Backend::serial) {
    double loss = 0.0;
    for (std::size_t i = 0; i < obs.n_users(); ++i) {
      double acc = 0.0;
      for (std::size_t k = index.row_begin[i]; k < index.row_begin[i + 1]; ++k) {
        const Rating& e = entries[k];
        double c = 0.0;
        acc += entry_hinge(dot(rows.row(i), cols.row(e.item)), e.value, thresholds.row(i),
                           grad_thresholds.row(i).data(), &c);
        add_scaled(grad_rows.row(i), c, cols.row(e.item));
        add_scaled(grad_cols.row(e.item), c, rows.row(i));
      }
      loss += acc;
    }
    return loss;
  }

  // Pass 1: each user owns its entries, its threshold row and its factor row.
  std::vector<double> coef(entries.size());
  std::vector<double> row_loss(obs.n_users(), 0.0);
  const auto n_users = static_cast<std::ptrdiff_t>(obs.n_users());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n_users; ++i) {
    double acc = 0.0;
    double* g_thr = grad_thresholds.row(i).data();
    auto g_row = grad_rows.row(i);
    for (std::size_t k = index.row_begin[i]; k < index.row_begin[i + 1]; ++k) {
      const Rating& e = entries[k];
      acc += entry_hinge(dot(rows.row(i), cols.row(e.item)), e.value, thresholds.row(i), g_thr,
                         &coef[k]);
      add_scaled(g_row, coef[k], cols.row(e.item));
    }
    row_loss[i] = acc;
  }

  // Pass 2: each item gathers its column in ascending user order.
  const auto n_items = static_cast<std::ptrdiff_t>(obs.n_items());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t j = 0; j < n_items; ++j) {
    auto g_col = grad_cols.row(j);
    for (std::size_t p = index.col_begin[j]; p < index.col_begin[j + 1]; ++p) {
      const std::size_t k = index.col_entries[p];
      add_scaled(g_col, coef[k], rows.row(entries[k].user));
    }
  }
  return std::accumulate(row_loss.begin(), row_loss.end(), 0.0);
}

DenseMatrix row_block_sums(const DenseMatrix& y, std::span<const std::uint32_t> col_assign,
                           std::size_t n_col_clusters, Backend backend) {
  if (col_assign.size() != y.cols()) throw DataError("row_block_sums: assignment size mismatch");
  DenseMatrix out(y.rows(), n_col_clusters);
  const auto n_rows = static_cast<std::ptrdiff_t>(y.rows());
  if (backend == Backend::serial) {
    for (std::ptrdiff_t i = 0; i < n_rows; ++i) {
      const auto yr = y.row(i);
      auto o = out.row(i);
      for (std::size_t j = 0; j < yr.size(); ++j) o[col_assign[j]] += yr[j];
    }
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_rows; ++i) {
    const auto yr = y.row(i);
    auto o = out.row(i);
    for (std::size_t j = 0; j < yr.size(); ++j) o[col_assign[j]] += yr[j];
  }
  return out;
}

DenseMatrix col_block_sums(const DenseMatrix& y, std::span<const std::uint32_t> row_assign,
                           std::size_t n_row_clusters, Backend backend) {
  if (row_assign.size() != y.rows()) throw DataError("col_block_sums: assignment size mismatch");
  DenseMatrix out(y.cols(), n_row_clusters);
  if (backend == Backend::serial) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const auto yr = y.row(i);
      const std::uint32_t k = row_assign[i];
      for (std::size_t j = 0; j < yr.size(); ++j) out(j, k) += yr[j];
    }
    return out;
  }
  // Column tiles keep each row segment contiguous and give every output row a
  // single owner, so sums are accumulated in ascending row order.
  const auto n_tiles = static_cast<std::ptrdiff_t>((y.cols() + kColumnTile - 1) / kColumnTile);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < n_tiles; ++t) {
    const std::size_t j0 = static_cast<std::size_t>(t) * kColumnTile;
    const std::size_t j1 = std::min(y.cols(), j0 + kColumnTile);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const auto yr = y.row(i);
      const std::uint32_t k = row_assign[i];
      for (std::size_t j = j0; j < j1; ++j) out(j, k) += yr[j];
    }
  }
  return out;
}

namespace {

inline bool reassign_line(const DenseMatrix& codebook, std::span<const std::size_t> counts,
                          std::span<const double> line_sums, std::uint32_t& current) {
  auto cost = [&](std::size_t c) {
    double v = 0.0;
    for (std::size_t l = 0; l < counts.size(); ++l) {
      const double m = codebook(c, l);
      v += static_cast<double>(counts[l]) * m * m - 2.0 * m * line_sums[l];
    }
    return v;
  };
  std::uint32_t best = current;
  double best_cost = cost(current);
  for (std::size_t c = 0; c < codebook.rows(); ++c) {
    if (c == current) continue;
    const double v = cost(c);
    if (v < best_cost) {
      best_cost = v;
      best = static_cast<std::uint32_t>(c);
    }
  }
  const bool changed = best != current;
  current = best;
  return changed;
}

}  // namespace

std::size_t reassign(const DenseMatrix& codebook, std::span<const std::size_t> counts,
                     const DenseMatrix& sums, std::span<std::uint32_t> assign, Backend backend) {
  if (codebook.cols() != counts.size() || sums.cols() != counts.size() ||
      sums.rows() != assign.size()) {
    throw DataError("reassign: shape mismatch");
  }
  const auto n = static_cast<std::ptrdiff_t>(assign.size());
  std::size_t changed = 0;
  if (backend == Backend::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      changed += reassign_line(codebook, counts, sums.row(i), assign[i]) ? 1 : 0;
    }
    return changed;
  }
#pragma omp parallel for schedule(static) reduction(+ : changed)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    changed += reassign_line(codebook, counts, sums.row(i), assign[i]) ? 1 : 0;
  }
  return changed;
}

std::vector<std::uint32_t> nearest_row_prototypes(const DenseMatrix& y,
                                                  std::span<const std::size_t> prototypes,
                                                  Backend backend) {
  std::vector<std::uint32_t> assign(y.rows(), 0);
  auto nearest = [&](std::size_t i) {
    const auto yr = y.row(i);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_c = 0;
    for (std::size_t c = 0; c < prototypes.size(); ++c) {
      const auto pr = y.row(prototypes[c]);
      double d = 0.0;
      for (std::size_t j = 0; j < yr.size(); ++j) d += (yr[j] - pr[j]) * (yr[j] - pr[j]);
      if (d < best) {
        best = d;
        best_c = static_cast<std::uint32_t>(c);
      }
    }
    return best_c;
  };
  const auto n_rows = static_cast<std::ptrdiff_t>(y.rows());
  if (backend == Backend::serial) {
    for (std::ptrdiff_t i = 0; i < n_rows; ++i) assign[i] = nearest(static_cast<std::size_t>(i));
    return assign;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_rows; ++i) assign[i] = nearest(static_cast<std::size_t>(i));
  return assign;
}

std::vector<std::uint32_t> nearest_col_prototypes(const DenseMatrix& y,
                                                  std::span<const std::size_t> prototypes,
                                                  Backend backend) {
  const std::size_t n_protos = prototypes.size();
  // dist(j, c) accumulated row by row in ascending order.
  DenseMatrix dist(y.cols(), n_protos);
  auto accumulate_tile = [&](std::size_t j0, std::size_t j1) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const auto yr = y.row(i);
      for (std::size_t j = j0; j < j1; ++j) {
        auto dr = dist.row(j);
        for (std::size_t c = 0; c < n_protos; ++c) {
          const double d = yr[j] - yr[prototypes[c]];
          dr[c] += d * d;
        }
      }
    }
  };
  if (backend == Backend::serial) {
    accumulate_tile(0, y.cols());
  } else {
    const auto n_tiles = static_cast<std::ptrdiff_t>((y.cols() + kColumnTile - 1) / kColumnTile);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < n_tiles; ++t) {
      const std::size_t j0 = static_cast<std::size_t>(t) * kColumnTile;
      accumulate_tile(j0, std::min(y.cols(), j0 + kColumnTile));
    }
  }
  std::vector<std::uint32_t> assign(y.cols(), 0);
  for (std::size_t j = 0; j < y.cols(); ++j) {
    const auto dr = dist.row(j);
    assign[j] = static_cast<std::uint32_t>(std::min_element(dr.begin(), dr.end()) - dr.begin());
  }
  return assign;
}

std::vector<double> row_distances(const DenseMatrix& y, std::size_t r, Backend backend) {
  std::vector<double> out(y.rows(), 0.0);
  const auto pr = y.row(r);
  auto dist = [&](std::size_t i) {
    const auto yr = y.row(i);
    double d = 0.0;
    for (std::size_t j = 0; j < yr.size(); ++j) d += (yr[j] - pr[j]) * (yr[j] - pr[j]);
    return d;
  };
  const auto n_rows = static_cast<std::ptrdiff_t>(y.rows());
  if (backend == Backend::serial) {
    for (std::ptrdiff_t i = 0; i < n_rows; ++i) out[i] = dist(static_cast<std::size_t>(i));
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_rows; ++i) out[i] = dist(static_cast<std::size_t>(i));
  return out;
}

std::vector<double> col_distances(const DenseMatrix& y, std::size_t c, Backend backend) {
  std::vector<double> out(y.cols(), 0.0);
  auto accumulate_tile = [&](std::size_t j0, std::size_t j1) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const auto yr = y.row(i);
      for (std::size_t j = j0; j < j1; ++j) {
        const double d = yr[j] - yr[c];
        out[j] += d * d;
      }
    }
  };
  if (backend == Backend::serial) {
    accumulate_tile(0, y.cols());
    return out;
  }
  const auto n_tiles = static_cast<std::ptrdiff_t>((y.cols() + kColumnTile - 1) / kColumnTile);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < n_tiles; ++t) {
    const std::size_t j0 = static_cast<std::size_t>(t) * kColumnTile;
    accumulate_tile(j0, std::min(y.cols(), j0 + kColumnTile));
  }
  return out;
}

double block_error(const DenseMatrix& y, const DenseMatrix& codebook,
                   std::span<const std::uint32_t> row_assign,
                   std::span<const std::uint32_t> col_assign, Backend backend) {
  if (row_assign.size() != y.rows() || col_assign.size() != y.cols()) {
    throw DataError("block_error: assignment size mismatch");
  }
  auto row_error = [&](std::size_t i) {
    const auto yr = y.row(i);
    const auto cr = codebook.row(row_assign[i]);
    double acc = 0.0;
    for (std::size_t j = 0; j < yr.size(); ++j) {
      const double d = yr[j] - cr[col_assign[j]];
      acc += d * d;
    }
    return acc;
  };
  if (backend == Backend::serial) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.rows(); ++i) total += row_error(i);
    return total;
  }
  std::vector<double> per_row(y.rows());
  const auto n_rows = static_cast<std::ptrdiff_t>(y.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_rows; ++i) per_row[i] = row_error(static_cast<std::size_t>(i));
  return std::accumulate(per_row.begin(), per_row.end(), 0.0);
}

}  // namespace cdt::kernels
