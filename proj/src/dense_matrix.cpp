#include "cdt/dense_matrix.hpp"

#include <cmath>

#include "cdt/errors.hpp"

namespace cdt {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw DataError("DenseMatrix: expected " + std::to_string(rows_ * cols_) +
                    " values, got " + std::to_string(values_.size()));
  }
}

bool DenseMatrix::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double DenseMatrix::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

DenseMatrix multiply(const DenseMatrix& lhs, const DenseMatrix& rhs) {
  if (lhs.cols() != rhs.rows()) throw DataError("multiply: inner dimensions differ");
  DenseMatrix out(lhs.rows(), rhs.cols());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    for (std::size_t k = 0; k < lhs.cols(); ++k) {
      const double a = lhs(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

DenseMatrix multiply_transposed(const DenseMatrix& lhs, const DenseMatrix& rhs) {
  if (lhs.cols() != rhs.cols()) throw DataError("multiply_transposed: inner dimensions differ");
  DenseMatrix out(lhs.rows(), rhs.rows());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    for (std::size_t j = 0; j < rhs.rows(); ++j) out(i, j) = dot(lhs.row(i), rhs.row(j));
  }
  return out;
}

}  // namespace cdt
