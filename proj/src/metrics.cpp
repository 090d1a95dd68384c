#include "cdt/metrics.hpp"

#include <cmath>

#include "cdt/errors.hpp"

namespace cdt {

namespace {

void check(std::span<const double> truth, std::span<const double> pred) {
  if (truth.empty()) throw DataError("metrics: no ratings to score");
  if (truth.size() != pred.size()) throw DataError("metrics: truth and prediction lengths differ");
}

}  // namespace

double rmse(std::span<const double> truth, std::span<const double> pred) {
  check(truth, pred);
  double sq = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double d = truth[k] - pred[k];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(truth.size()));
}

double mae(std::span<const double> truth, std::span<const double> pred) {
  check(truth, pred);
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) abs_sum += std::abs(truth[k] - pred[k]);
  return abs_sum / static_cast<double>(truth.size());
}

}  // namespace cdt
