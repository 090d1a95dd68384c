#include "cdt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "cdt/errors.hpp"

namespace cdt {

namespace {

void check_model(const RatingMatrix& obs, const CbtModel& model, const DenseMatrix& codebook) {
  if (model.user_assign.size() != obs.n_users() || model.item_assign.size() != obs.n_items()) {
    throw DataError("cbt: assignments do not match target dimensions");
  }
  for (auto a : model.user_assign) {
    if (a >= codebook.rows()) throw DataError("cbt: user cluster out of range");
  }
  for (auto a : model.item_assign) {
    if (a >= codebook.cols()) throw DataError("cbt: item cluster out of range");
  }
}

// Picks, for every line, the cluster with the lowest squared error over the
// line's observed cells. `value_at(cluster, entry)` returns the codebook value
// the entry would be compared with.
template <class Cells, class ValueAt>
void assign_lines(std::size_t n_lines, std::size_t n_clusters, Cells&& cells, ValueAt&& value_at,
                  std::vector<std::uint32_t>& assign) {
  for (std::size_t line = 0; line < n_lines; ++line) {
    const auto [begin, end] = cells(line);
    if (begin == end) {
      assign[line] = 0;
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_k = 0;
    for (std::size_t k = 0; k < n_clusters; ++k) {
      double err = 0.0;
      for (std::size_t p = begin; p < end; ++p) {
        const auto [value, predicted] = value_at(k, p);
        err += (value - predicted) * (value - predicted);
      }
      if (err < best) {
        best = err;
        best_k = static_cast<std::uint32_t>(k);
      }
    }
    assign[line] = best_k;
  }
}

}  // namespace

double cbt_loss(const RatingMatrix& obs, const CbtModel& model, const DenseMatrix& codebook) {
  check_model(obs, model, codebook);
  double loss = 0.0;
  for (const Rating& e : obs.entries()) {
    const double d = e.value - codebook(model.user_assign[e.user], model.item_assign[e.item]);
    loss += d * d;
  }
  return loss;
}

CbtFit cbt_fit_detailed(const RatingMatrix& obs, const DenseMatrix& codebook, const CbtConfig& cfg) {
  if (obs.empty()) throw DataError("cbt: no observed target ratings");
  if (codebook.size() == 0 || !codebook.all_finite()) throw DataError("cbt: invalid codebook");

  const RatingIndex index(obs);
  const auto entries = obs.entries();
  const std::size_t k1 = codebook.rows();
  const std::size_t k2 = codebook.cols();

  auto user_cells = [&](std::size_t i) {
    return std::pair{index.row_begin[i], index.row_begin[i + 1]};
  };
  auto item_cells = [&](std::size_t j) {
    return std::pair{index.col_begin[j], index.col_begin[j + 1]};
  };

  CbtFit best;
  const std::size_t restarts = std::max<std::size_t>(1, cfg.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                      static_cast<std::uint32_t>(cfg.seed >> 32), static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(k2 - 1));

    CbtModel model{std::vector<std::uint32_t>(obs.n_users(), 0),
                   std::vector<std::uint32_t>(obs.n_items(), 0)};
    for (auto& a : model.item_assign) a = pick(rng);

    CbtFit fit;
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
      const auto prev_users = model.user_assign;
      const auto prev_items = model.item_assign;

      assign_lines(
          obs.n_users(), k1, user_cells,
          [&](std::size_t k, std::size_t p) {
            const Rating& e = entries[p];
            return std::pair{static_cast<double>(e.value), codebook(k, model.item_assign[e.item])};
          },
          model.user_assign);
      fit.trace.push_back(cbt_loss(obs, model, codebook));

      assign_lines(
          obs.n_items(), k2, item_cells,
          [&](std::size_t l, std::size_t p) {
            const Rating& e = entries[index.col_entries[p]];
            return std::pair{static_cast<double>(e.value), codebook(model.user_assign[e.user], l)};
          },
          model.item_assign);
      fit.trace.push_back(cbt_loss(obs, model, codebook));

      if (model.user_assign == prev_users && model.item_assign == prev_items) break;
    }
    fit.loss = fit.trace.empty() ? cbt_loss(obs, model, codebook) : fit.trace.back();
    fit.model = std::move(model);
    if (r == 0 || fit.loss < best.loss) best = std::move(fit);
  }
  return best;
}

DenseMatrix cbt_predict(const RatingMatrix& target, const CbtModel& model,
                        const DenseMatrix& codebook) {
  check_model(target, model, codebook);
  DenseMatrix out(target.n_users(), target.n_items());
  for (std::size_t i = 0; i < target.n_users(); ++i) {
    const auto cr = codebook.row(model.user_assign[i]);
    auto o = out.row(i);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] = cr[model.item_assign[j]];
  }
  for (const Rating& e : target.entries()) out(e.user, e.item) = e.value;
  return out;
}

DenseMatrix round_ratings(const DenseMatrix& m, int scale) {
  DenseMatrix out = m;
  for (double& v : out.values()) v = std::clamp(std::floor(v + 0.5), 1.0, static_cast<double>(scale));
  return out;
}

}  // namespace cdt
