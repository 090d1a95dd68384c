#pragma once

#include <span>

namespace cdt {

/// Root-mean-square error. Throws DataError on empty or mismatched inputs.
double rmse(std::span<const double> truth, std::span<const double> pred);

/// Mean absolute error. Throws DataError on empty or mismatched inputs.
double mae(std::span<const double> truth, std::span<const double> pred);

}  // namespace cdt
