#include "cdt/mmmf.hpp"

#include <random>
#include <string>

#include "cdt/errors.hpp"

namespace cdt {

namespace {

void check_model(const RatingMatrix& obs, const MmmfModel& model) {
  if (model.U.rows() != obs.n_users() || model.V.rows() != obs.n_items() ||
      model.U.cols() != model.V.cols() || model.U.cols() == 0 ||
      model.Theta.rows() != obs.n_users() || model.scale() != obs.scale()) {
    throw DataError("mmmf: model of shape U " + std::to_string(model.U.rows()) + "x" +
                    std::to_string(model.U.cols()) + ", V " + std::to_string(model.V.rows()) +
                    "x" + std::to_string(model.V.cols()) + " does not match " +
                    std::to_string(obs.n_users()) + "x" + std::to_string(obs.n_items()) +
                    " ratings");
  }
}

void add_ridge(DenseMatrix& grad, const DenseMatrix& x, double lambda) {
  auto g = grad.values();
  auto v = x.values();
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += 2.0 * lambda * v[k];
}

}  // namespace

double mmmf_objective(const RatingMatrix& obs, const MmmfModel& model, double lambda,
                      kernels::Backend backend) {
  check_model(obs, model);
  const RatingIndex index(obs);
  return kernels::ordinal_hinge_loss(obs, index, model.U, model.V, model.Theta, backend) +
         lambda * (model.U.squared_norm() + model.V.squared_norm());
}

MmmfGradient mmmf_gradient(const RatingMatrix& obs, const MmmfModel& model, double lambda,
                           kernels::Backend backend) {
  check_model(obs, model);
  const RatingIndex index(obs);
  MmmfGradient g;
  g.objective = kernels::ordinal_hinge_grad(obs, index, model.U, model.V, model.Theta, g.U, g.V,
                                            g.Theta, backend) +
                lambda * (model.U.squared_norm() + model.V.squared_norm());
  add_ridge(g.U, model.U, lambda);
  add_ridge(g.V, model.V, lambda);
  return g;
}

MmmfModel mmmf_init(std::size_t rows, std::size_t cols, int scale, std::size_t latent_dim,
                    std::uint64_t seed) {
  if (latent_dim == 0) throw DataError("mmmf: latent dimension must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> small(-0.01, 0.01);
  MmmfModel m{DenseMatrix(rows, latent_dim), DenseMatrix(cols, latent_dim),
              DenseMatrix(rows, static_cast<std::size_t>(scale - 1))};
  for (double& v : m.U.values()) v = small(rng);
  for (double& v : m.V.values()) v = small(rng);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t q = 0; q < m.Theta.cols(); ++q) m.Theta(i, q) = static_cast<double>(q + 1);
  }
  return m;
}

MmmfFit mmmf_fit_detailed(const RatingMatrix& obs, const SolverConfig& cfg) {
  if (obs.empty()) throw DataError("mmmf: no observed ratings");
  if (!(cfg.step_size > 0.0)) throw DataError("mmmf: step size must be positive");
  if (!(cfg.lambda >= 0.0)) throw DataError("mmmf: lambda must be non-negative");

  const RatingIndex index(obs);
  MmmfModel init = mmmf_init(obs.n_users(), obs.n_items(), obs.scale(), cfg.latent_dim, cfg.seed);
  std::vector<DenseMatrix> x{std::move(init.U), std::move(init.V), std::move(init.Theta)};

  auto objective = [&](const std::vector<DenseMatrix>& p) {
    return kernels::ordinal_hinge_loss(obs, index, p[0], p[1], p[2], cfg.backend) +
           cfg.lambda * (p[0].squared_norm() + p[1].squared_norm());
  };
  auto gradient = [&](const std::vector<DenseMatrix>& p, std::vector<DenseMatrix>& g) {
    kernels::ordinal_hinge_grad(obs, index, p[0], p[1], p[2], g[0], g[1], g[2], cfg.backend);
    add_ridge(g[0], p[0], cfg.lambda);
    add_ridge(g[1], p[1], cfg.lambda);
  };

  DescentOptions opts;
  opts.step = cfg.step_size;
  opts.max_iters = cfg.max_iters;
  opts.tol = cfg.tol;
  opts.halve_on_increase = cfg.halve_on_increase;
  DescentTrace trace = gradient_descent(x, objective, gradient, opts, "mmmf");
  return MmmfFit{MmmfModel{std::move(x[0]), std::move(x[1]), std::move(x[2])}, std::move(trace)};
}

int mmmf_predict_cell(const MmmfModel& model, std::size_t i, std::size_t j) {
  return decode_rating(dot(model.U.row(i), model.V.row(j)), model.Theta.row(i));
}

DenseMatrix mmmf_predict(const RatingMatrix& obs, const MmmfModel& model) {
  check_model(obs, model);
  DenseMatrix out(obs.n_users(), obs.n_items());
  const auto n_users = static_cast<std::ptrdiff_t>(obs.n_users());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_users; ++i) {
    for (std::size_t j = 0; j < obs.n_items(); ++j) {
      out(i, j) = mmmf_predict_cell(model, static_cast<std::size_t>(i), j);
    }
  }
  for (const Rating& e : obs.entries()) out(e.user, e.item) = e.value;
  return out;
}

}  // namespace cdt
