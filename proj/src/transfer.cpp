#include "cdt/transfer.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "cdt/errors.hpp"

namespace cdt {

namespace {

std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart) {
  if (restart == 0) return seed;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  return rng();
}

void check_shapes(const RatingMatrix& obs, const TransferModel& tm, const MmmfModel& cb) {
  const std::size_t k1 = cb.U.rows();
  const std::size_t k2 = cb.V.rows();
  if (tm.alpha.rows() != obs.n_users() || tm.alpha.cols() != k1 ||
      tm.beta.rows() != obs.n_items() || tm.beta.cols() != k2 || cb.Theta.rows() != k1 ||
      cb.U.cols() != cb.V.cols() || cb.scale() != obs.scale()) {
    throw DataError("transfer: alpha " + std::to_string(tm.alpha.rows()) + "x" +
                    std::to_string(tm.alpha.cols()) + ", beta " + std::to_string(tm.beta.rows()) +
                    "x" + std::to_string(tm.beta.cols()) + " incompatible with " +
                    std::to_string(obs.n_users()) + "x" + std::to_string(obs.n_items()) +
                    " target and " + std::to_string(k1) + "x" + std::to_string(k2) + " codebook");
  }
}

double negativity_sign(const TransferConfig& cfg) {
  return cfg.negativity == NegativityTerm::penalize ? -1.0 : 1.0;
}

double penalties(const DenseMatrix& w, const TransferConfig& cfg) {
  const double sign = negativity_sign(cfg);
  double total = 0.0;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double sum = 0.0;
    double neg = 0.0;
    for (double v : w.row(r)) {
      sum += v;
      neg += negativity_penalty(v);
    }
    total += cfg.lambda1 * row_sum_penalty(sum) + sign * cfg.lambda2 * neg;
  }
  return total;
}

void add_penalty_grad(DenseMatrix& grad, const DenseMatrix& w, const TransferConfig& cfg) {
  const double sign = negativity_sign(cfg);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto wr = w.row(r);
    double sum = 0.0;
    for (double v : wr) sum += v;
    const double row_term = cfg.lambda1 * row_sum_penalty_grad(sum);
    auto gr = grad.row(r);
    for (std::size_t k = 0; k < wr.size(); ++k) {
      gr[k] += row_term + sign * cfg.lambda2 * negativity_penalty_grad(wr[k]);
    }
  }
}

struct Evaluator {
  const RatingMatrix& obs;
  const MmmfModel& cb;
  const TransferConfig& cfg;
  RatingIndex index;
  DenseMatrix ones_u;  // every row equals the column sums of U_c

  Evaluator(const RatingMatrix& o, const MmmfModel& c, const TransferConfig& f)
      : obs(o), cb(c), cfg(f), index(o), ones_u(c.U.rows(), c.U.cols()) {
    for (std::size_t l = 0; l < cb.U.cols(); ++l) {
      double col_sum = 0.0;
      for (std::size_t k = 0; k < cb.U.rows(); ++k) col_sum += cb.U(k, l);
      for (std::size_t k = 0; k < cb.U.rows(); ++k) ones_u(k, l) = col_sum;
    }
  }

  double objective(const DenseMatrix& alpha, const DenseMatrix& beta) const {
    const DenseMatrix a = multiply(alpha, cb.U);
    const DenseMatrix b = multiply(beta, cb.V);
    const DenseMatrix t = multiply(alpha, cb.Theta);
    return kernels::ordinal_hinge_loss(obs, index, a, b, t, cfg.backend) + penalties(alpha, cfg) +
           penalties(beta, cfg);
  }

  double gradient(const DenseMatrix& alpha, const DenseMatrix& beta, DenseMatrix& g_alpha,
                  DenseMatrix& g_beta) const {
    const DenseMatrix a = multiply(alpha, cb.U);
    const DenseMatrix b = multiply(beta, cb.V);
    const DenseMatrix t = multiply(alpha, cb.Theta);
    DenseMatrix g_a, g_b, g_t;
    const double loss =
        kernels::ordinal_hinge_grad(obs, index, a, b, t, g_a, g_b, g_t, cfg.backend);
    // d/d alpha_ik = sum_q Theta_kq g_t(i, q) + U_k . g_a(i)
    g_alpha = multiply_transposed(g_t, cb.Theta);
    const DenseMatrix via_scores =
        multiply_transposed(g_a, cfg.printed_alpha_gradient ? ones_u : cb.U);
    auto ga = g_alpha.values();
    auto vs = via_scores.values();
    for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += vs[k];
    // d/d beta_jk = V_k . g_b(j)
    g_beta = multiply_transposed(g_b, cb.V);
    add_penalty_grad(g_alpha, alpha, cfg);
    add_penalty_grad(g_beta, beta, cfg);
    return loss + penalties(alpha, cfg) + penalties(beta, cfg);
  }
};

}  // namespace

double transfer_objective(const RatingMatrix& obs, const TransferModel& tm,
                          const MmmfModel& codebook, const TransferConfig& cfg) {
  check_shapes(obs, tm, codebook);
  return Evaluator(obs, codebook, cfg).objective(tm.alpha, tm.beta);
}

TransferGradient transfer_gradient(const RatingMatrix& obs, const TransferModel& tm,
                                   const MmmfModel& codebook, const TransferConfig& cfg) {
  check_shapes(obs, tm, codebook);
  TransferGradient g;
  g.objective = Evaluator(obs, codebook, cfg).gradient(tm.alpha, tm.beta, g.alpha, g.beta);
  return g;
}

DenseMatrix grad_alpha(const RatingMatrix& obs, const TransferModel& tm, const MmmfModel& codebook,
                       const TransferConfig& cfg) {
  return transfer_gradient(obs, tm, codebook, cfg).alpha;
}

DenseMatrix grad_beta(const RatingMatrix& obs, const TransferModel& tm, const MmmfModel& codebook,
                      const TransferConfig& cfg) {
  return transfer_gradient(obs, tm, codebook, cfg).beta;
}

TransferModel transfer_init(std::size_t n_users, std::size_t n_items, std::size_t k1,
                            std::size_t k2, std::uint64_t seed) {
  if (k1 == 0 || k2 == 0) throw DataError("transfer: codebook must be non-empty");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> a(0.0, 2.0 / static_cast<double>(k1));
  std::uniform_real_distribution<double> b(0.0, 2.0 / static_cast<double>(k2));
  TransferModel tm{DenseMatrix(n_users, k1), DenseMatrix(n_items, k2)};
  for (double& v : tm.alpha.values()) v = a(rng);
  for (double& v : tm.beta.values()) v = b(rng);
  return tm;
}

TransferFit fit_transfer_detailed(const RatingMatrix& obs, const MmmfModel& codebook,
                                  const TransferConfig& cfg) {
  if (obs.empty()) throw DataError("transfer: no observed target ratings");
  if (!(cfg.step_size > 0.0)) throw DataError("transfer: step size must be positive");
  if (!(cfg.lambda1 >= 0.0 && cfg.lambda2 >= 0.0)) {
    throw DataError("transfer: lambda1 and lambda2 must be non-negative");
  }
  if (!codebook.U.all_finite() || !codebook.V.all_finite() || !codebook.Theta.all_finite()) {
    throw DataError("transfer: codebook factors are not finite");
  }
  const Evaluator eval(obs, codebook, cfg);
  auto objective = [&](const std::vector<DenseMatrix>& p) { return eval.objective(p[0], p[1]); };
  auto gradient = [&](const std::vector<DenseMatrix>& p, std::vector<DenseMatrix>& g) {
    eval.gradient(p[0], p[1], g[0], g[1]);
  };
  DescentOptions opts;
  opts.step = cfg.step_size;
  opts.max_iters = cfg.max_iters;
  opts.tol = cfg.tol;
  opts.halve_on_increase = cfg.halve_on_increase;

  TransferFit best;
  const std::size_t restarts = std::max<std::size_t>(1, cfg.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    TransferModel init = transfer_init(obs.n_users(), obs.n_items(), codebook.U.rows(),
                                       codebook.V.rows(), restart_seed(cfg.seed, r));
    check_shapes(obs, init, codebook);
    std::vector<DenseMatrix> x{std::move(init.alpha), std::move(init.beta)};
    DescentTrace trace = gradient_descent(x, objective, gradient, opts, "transfer");
    if (r == 0 || trace.objective.back() < best.trace.objective.back()) {
      best = TransferFit{TransferModel{std::move(x[0]), std::move(x[1])}, std::move(trace)};
    }
  }
  return best;
}

TransferScores transfer_scores(const TransferModel& tm, const MmmfModel& codebook) {
  return TransferScores{multiply(tm.alpha, codebook.U), multiply(tm.beta, codebook.V),
                        multiply(tm.alpha, codebook.Theta)};
}

DenseMatrix predict(const RatingMatrix& target, const TransferModel& tm,
                    const MmmfModel& codebook) {
  check_shapes(target, tm, codebook);
  const TransferScores s = transfer_scores(tm, codebook);
  DenseMatrix out(target.n_users(), target.n_items());
  const auto n_users = static_cast<std::ptrdiff_t>(target.n_users());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_users; ++i) {
    for (std::size_t j = 0; j < target.n_items(); ++j) {
      out(i, j) = s.rating(static_cast<std::size_t>(i), j);
    }
  }
  for (const Rating& e : target.entries()) out(e.user, e.item) = e.value;
  return out;
}

}  // namespace cdt
