#include "cdt/coclustering.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cdt/errors.hpp"

namespace cdt {

std::size_t PartialCodebook::retained_count() const {
  return static_cast<std::size_t>(std::count(retained.begin(), retained.end(), true));
}

namespace {

double global_mean(const DenseMatrix& y) {
  const auto v = y.values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<std::size_t> cluster_sizes(std::span<const std::uint32_t> assign, std::size_t k) {
  std::vector<std::size_t> sizes(k, 0);
  for (std::uint32_t a : assign) ++sizes[a];
  return sizes;
}

// k distinct prototypes picked by D^2 sampling: the first uniformly, each
// later one with probability proportional to its squared distance from the
// nearest prototype so far. `dist(p)` returns distances of all lines to p.
template <typename Dist>
std::vector<std::size_t> spread_prototypes(std::size_t n, std::size_t k, std::mt19937_64& rng,
                                           Dist dist) {
  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::vector<bool> used(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t next = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  while (true) {
    picked.push_back(next);
    used[next] = true;
    if (picked.size() == k) break;
    const std::vector<double> d = dist(next);
    std::vector<double> weights(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], d[i]);
      if (!used[i]) weights[i] = nearest[i];
      total += weights[i];
    }
    if (total > 0.0) {
      next = std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng);
    } else {
      // Every remaining line duplicates a prototype.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (!used[i]) rest.push_back(i);
      }
      next = rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
    }
  }
  return picked;
}

// Means from per-row sums over column clusters: sums is n_rows x k2.
DenseMatrix means_from_row_sums(const DenseMatrix& row_sums, std::span<const std::uint32_t> row_assign,
                                std::span<const std::size_t> row_sizes,
                                std::span<const std::size_t> col_sizes, std::size_t k1,
                                double fallback) {
  const std::size_t k2 = col_sizes.size();
  DenseMatrix totals(k1, k2);
  for (std::size_t i = 0; i < row_sums.rows(); ++i) {
    auto t = totals.row(row_assign[i]);
    const auto s = row_sums.row(i);
    for (std::size_t l = 0; l < k2; ++l) t[l] += s[l];
  }
  for (std::size_t k = 0; k < k1; ++k) {
    for (std::size_t l = 0; l < k2; ++l) {
      const double cells = static_cast<double>(row_sizes[k]) * static_cast<double>(col_sizes[l]);
      totals(k, l) = cells > 0.0 ? totals(k, l) / cells : fallback;
    }
  }
  return totals;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  }
  return t;
}

CoclusterResult run_restart(const DenseMatrix& y, const CoclusterConfig& cfg, std::size_t restart,
                            double fallback) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);

  // Spread-out rows and columns seed the clusters; everything else joins its
  // nearest seed.
  const auto row_protos = spread_prototypes(y.rows(), cfg.k1, rng, [&](std::size_t r) {
    return kernels::row_distances(y, r, cfg.backend);
  });
  const auto col_protos = spread_prototypes(y.cols(), cfg.k2, rng, [&](std::size_t c) {
    return kernels::col_distances(y, c, cfg.backend);
  });
  Memberships mem;
  mem.user_assign = kernels::nearest_row_prototypes(y, row_protos, cfg.backend);
  mem.item_assign = kernels::nearest_col_prototypes(y, col_protos, cfg.backend);

  auto row_sizes = cluster_sizes(mem.user_assign, cfg.k1);
  auto col_sizes = cluster_sizes(mem.item_assign, cfg.k2);
  DenseMatrix row_sums = kernels::row_block_sums(y, mem.item_assign, cfg.k2, cfg.backend);
  DenseMatrix means =
      means_from_row_sums(row_sums, mem.user_assign, row_sizes, col_sizes, cfg.k1, fallback);

  CoclusterResult result;
  result.trace.push_back(
      kernels::block_error(y, means, mem.user_assign, mem.item_assign, cfg.backend));

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    // Rows, with column clusters fixed.
    std::size_t changed =
        kernels::reassign(means, col_sizes, row_sums, mem.user_assign, cfg.backend);
    row_sizes = cluster_sizes(mem.user_assign, cfg.k1);
    means = means_from_row_sums(row_sums, mem.user_assign, row_sizes, col_sizes, cfg.k1, fallback);
    result.trace.push_back(
        kernels::block_error(y, means, mem.user_assign, mem.item_assign, cfg.backend));

    // Columns, with row clusters fixed.
    const DenseMatrix col_sums = kernels::col_block_sums(y, mem.user_assign, cfg.k1, cfg.backend);
    const DenseMatrix means_t = transpose(means);
    changed += kernels::reassign(means_t, row_sizes, col_sums, mem.item_assign, cfg.backend);
    col_sizes = cluster_sizes(mem.item_assign, cfg.k2);
    means = transpose(
        means_from_row_sums(col_sums, mem.item_assign, col_sizes, row_sizes, cfg.k2, fallback));
    result.trace.push_back(
        kernels::block_error(y, means, mem.user_assign, mem.item_assign, cfg.backend));

    if (changed == 0) break;
    row_sums = kernels::row_block_sums(y, mem.item_assign, cfg.k2, cfg.backend);
  }
  result.objective = result.trace.back();
  result.memberships = std::move(mem);
  return result;
}

void check_memberships(const DenseMatrix& y, const Memberships& mem, std::size_t k1,
                       std::size_t k2) {
  if (mem.user_assign.size() != y.rows() || mem.item_assign.size() != y.cols()) {
    throw DataError("memberships do not match a " + std::to_string(y.rows()) + "x" +
                    std::to_string(y.cols()) + " matrix");
  }
  for (auto a : mem.user_assign) {
    if (a >= k1) throw DataError("user cluster index out of range");
  }
  for (auto a : mem.item_assign) {
    if (a >= k2) throw DataError("item cluster index out of range");
  }
}

}  // namespace

CoclusterResult cocluster_detailed(const DenseMatrix& filled, const CoclusterConfig& cfg) {
  if (filled.size() == 0) throw DataError("cocluster: empty matrix");
  if (!filled.all_finite()) throw DataError("cocluster: matrix has non-finite values");
  if (cfg.k1 == 0 || cfg.k1 > filled.rows()) {
    throw DataError("cocluster: k1 = " + std::to_string(cfg.k1) + " must lie in [1, " +
                    std::to_string(filled.rows()) + "]");
  }
  if (cfg.k2 == 0 || cfg.k2 > filled.cols()) {
    throw DataError("cocluster: k2 = " + std::to_string(cfg.k2) + " must lie in [1, " +
                    std::to_string(filled.cols()) + "]");
  }
  const double fallback = global_mean(filled);
  const std::size_t restarts = std::max<std::size_t>(1, cfg.restarts);

  CoclusterResult best;
  for (std::size_t r = 0; r < restarts; ++r) {
    CoclusterResult candidate = run_restart(filled, cfg, r, fallback);
    if (r == 0 || candidate.objective < best.objective) best = std::move(candidate);
  }
  return best;
}

Codebook build_codebook(const DenseMatrix& filled, const Memberships& mem, std::size_t k1,
                        std::size_t k2) {
  if (filled.size() == 0) throw DataError("build_codebook: empty matrix");
  check_memberships(filled, mem, k1, k2);
  Codebook cb{DenseMatrix(k1, k2), std::vector<std::size_t>(k1 * k2, 0)};
  for (std::size_t i = 0; i < filled.rows(); ++i) {
    const std::size_t k = mem.user_assign[i];
    const auto yr = filled.row(i);
    for (std::size_t j = 0; j < yr.size(); ++j) {
      const std::size_t l = mem.item_assign[j];
      cb.values(k, l) += yr[j];
      ++cb.counts[k * k2 + l];
    }
  }
  const double fallback = global_mean(filled);
  for (std::size_t k = 0; k < k1; ++k) {
    for (std::size_t l = 0; l < k2; ++l) {
      const std::size_t n = cb.counts[k * k2 + l];
      cb.values(k, l) = n > 0 ? cb.values(k, l) / static_cast<double>(n) : fallback;
    }
  }
  return cb;
}

PartialCodebook prune_codebook(const Codebook& cb, const DenseMatrix& filled,
                               const Memberships& mem, double th, double eps) {
  if (!(th > 0.0 && th <= 100.0)) throw DataError("prune: th must lie in (0, 100]");
  if (!(eps >= 0.0)) throw DataError("prune: eps must be non-negative");
  check_memberships(filled, mem, cb.k1(), cb.k2());

  const std::size_t k2 = cb.k2();
  std::vector<std::size_t> close(cb.k1() * k2, 0);
  for (std::size_t i = 0; i < filled.rows(); ++i) {
    const std::size_t k = mem.user_assign[i];
    const auto yr = filled.row(i);
    for (std::size_t j = 0; j < yr.size(); ++j) {
      const std::size_t l = mem.item_assign[j];
      if (std::abs(yr[j] - cb.values(k, l)) <= eps) ++close[k * k2 + l];
    }
  }

  PartialCodebook out{DenseMatrix(cb.k1(), k2), std::vector<bool>(cb.k1() * k2, false)};
  for (std::size_t k = 0; k < cb.k1(); ++k) {
    for (std::size_t l = 0; l < k2; ++l) {
      const std::size_t cell = k * k2 + l;
      const std::size_t n = cb.counts[cell];
      if (n == 0) continue;
      // close / n > th / 100, kept in integer-friendly form.
      if (100.0 * static_cast<double>(close[cell]) > th * static_cast<double>(n)) {
        out.retained[cell] = true;
        out.values(k, l) = cb.values(k, l);
      }
    }
  }
  return out;
}

RatingMatrix partial_codebook_ratings(const PartialCodebook& pcb, int scale) {
  std::vector<Rating> entries;
  for (std::size_t k = 0; k < pcb.k1(); ++k) {
    for (std::size_t l = 0; l < pcb.k2(); ++l) {
      if (!pcb.is_retained(k, l)) continue;
      const double rounded = std::floor(pcb.values(k, l) + 0.5);
      const int value = static_cast<int>(std::clamp(rounded, 1.0, static_cast<double>(scale)));
      entries.push_back(
          Rating{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(l), value});
    }
  }
  return RatingMatrix(pcb.k1(), pcb.k2(), std::move(entries), scale);
}

PartialCodebook retain_all(const Codebook& cb) {
  PartialCodebook out{cb.values, std::vector<bool>(cb.k1() * cb.k2(), false)};
  for (std::size_t c = 0; c < out.retained.size(); ++c) {
    out.retained[c] = cb.counts[c] > 0;
    if (!out.retained[c]) out.values.values()[c] = 0.0;
  }
  return out;
}

}  // namespace cdt
