#pragma once

#include <cstdint>

#include "cdt/dense_matrix.hpp"
#include "cdt/descent.hpp"
#include "cdt/kernels.hpp"
#include "cdt/losses.hpp"
#include "cdt/ratings.hpp"

namespace cdt {

/// Row factors U, column factors V and per-row ordinal thresholds Theta
/// (rows x (scale - 1)).
struct MmmfModel {
  DenseMatrix U;
  DenseMatrix V;
  DenseMatrix Theta;

  std::size_t latent_dim() const { return U.cols(); }
  int scale() const { return static_cast<int>(Theta.cols()) + 1; }
};

struct SolverConfig {
  std::size_t latent_dim = 20;
  double lambda = 0.1;
  double step_size = 0.01;
  std::size_t max_iters = 500;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  bool halve_on_increase = true;
  kernels::Backend backend = kernels::Backend::parallel;
};

struct MmmfFit {
  MmmfModel model;
  DescentTrace trace;
};

/// Ordinal smooth-hinge loss over observed entries plus
/// lambda * (||U||_F^2 + ||V||_F^2).
double mmmf_objective(const RatingMatrix& obs, const MmmfModel& model, double lambda,
                      kernels::Backend backend = kernels::Backend::parallel);

/// Objective together with its gradient with respect to U, V and Theta.
struct MmmfGradient {
  double objective = 0.0;
  DenseMatrix U;
  DenseMatrix V;
  DenseMatrix Theta;
};
MmmfGradient mmmf_gradient(const RatingMatrix& obs, const MmmfModel& model, double lambda,
                           kernels::Backend backend = kernels::Backend::parallel);

/// Small random U, V in [-0.01, 0.01]; thresholds 1, 2, ..., scale - 1.
MmmfModel mmmf_init(std::size_t rows, std::size_t cols, int scale, std::size_t latent_dim,
                    std::uint64_t seed);

/// Full-batch gradient descent with step halving. Throws DivergenceError on a
/// non-finite objective.
MmmfFit mmmf_fit_detailed(const RatingMatrix& obs, const SolverConfig& cfg);

inline MmmfModel mmmf_fit(const RatingMatrix& obs, const SolverConfig& cfg) {
  return mmmf_fit_detailed(obs, cfg).model;
}

/// Decoded rating for cell (i, j) using row i's thresholds.
int mmmf_predict_cell(const MmmfModel& model, std::size_t i, std::size_t j);

/// Observed cells keep their ratings; every other cell gets the decoded rating.
DenseMatrix mmmf_predict(const RatingMatrix& obs, const MmmfModel& model);

}  // namespace cdt
