#include "cdt/experiment.hpp"

#include <chrono>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "cdt/baselines.hpp"
#include "cdt/coclustering.hpp"
#include "cdt/errors.hpp"
#include "cdt/io.hpp"
#include "cdt/metrics.hpp"
#include "cdt/mmmf.hpp"
#include "cdt/transfer.hpp"

namespace cdt {

Method parse_method(const std::string& name) {
  if (name == "proposed") return Method::proposed;
  if (name == "mmmf") return Method::mmmf;
  if (name == "cbt") return Method::cbt;
  throw DataError("unknown method '" + name + "' (expected proposed, mmmf or cbt)");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::mmmf: return "mmmf";
    case Method::cbt: return "cbt";
  }
  return "?";
}

namespace {

// Runs `fn`, prefixing any library error with the stage name.
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  }
}

SolverConfig mmmf_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  SolverConfig s;
  s.latent_dim = cfg.latent_dim;
  s.lambda = cfg.lambda;
  s.step_size = cfg.step_size;
  s.max_iters = cfg.mmmf_iters;
  s.tol = cfg.tol;
  s.seed = seed;
  s.halve_on_increase = cfg.halve_on_increase;
  return s;
}

// Predictions for the test cells of one run.
std::vector<double> predict_run(const RatingMatrix& source, const SplitPair& split,
                                const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto test = split.test.entries();
  std::vector<double> pred;
  pred.reserve(test.size());

  switch (cfg.method) {
    case Method::proposed: {
      const ProposedFit fit = fit_proposed(source, split.train, cfg, seed);
      const TransferScores scores = transfer_scores(fit.transfer, fit.codebook_model);
      for (const Rating& e : test) {
        pred.push_back(cfg.raw_scores ? scores.score(e.user, e.item)
                                      : static_cast<double>(scores.rating(e.user, e.item)));
      }
      break;
    }
    case Method::mmmf: {
      const MmmfModel m =
          stage("mmmf", [&] { return mmmf_fit(split.train, mmmf_config(cfg, seed)); });
      for (const Rating& e : test) {
        pred.push_back(cfg.raw_scores ? dot(m.U.row(e.user), m.V.row(e.item))
                                      : static_cast<double>(mmmf_predict_cell(m, e.user, e.item)));
      }
      break;
    }
    case Method::cbt: {
      const ProposedFit src = learn_codebook(source, cfg, seed);
      CbtConfig cc;
      cc.max_iters = cfg.cbt_iters;
      cc.restarts = cfg.cbt_restarts;
      cc.seed = seed;
      const CbtModel m =
          stage("cbt", [&] { return cbt_fit_detailed(split.train, src.codebook.values, cc).model; });
      for (const Rating& e : test) {
        pred.push_back(src.codebook.values(m.user_assign[e.user], m.item_assign[e.item]));
      }
      break;
    }
  }
  return pred;
}

void write_row_prefix(std::ostream& out, const ExperimentReport& r) {
  out << method_name(r.config.method);
}

void write_row_suffix(std::ostream& out, const ExperimentConfig& c, double seconds) {
  out << ',' << c.k1 << ',' << c.k2 << ',' << format_double(c.th) << ',' << format_double(c.eps)
      << ',' << format_double(c.lambda1) << ',' << format_double(c.lambda2) << ','
      << format_double(seconds) << '\n';
}

void write_mean_row(std::ostream& out, const std::string& prefix, const ExperimentReport& r,
                    ReportOptions opts) {
  double total = 0.0;
  for (const RunResult& run : r.runs) total += run.seconds;
  out << prefix;
  write_row_prefix(out, r);
  out << ",mean," << format_double(r.mean_rmse) << ',' << format_double(r.mean_mae);
  write_row_suffix(out, r.config, opts.timing ? total : 0.0);
}

void write_report_rows(std::ostream& out, const ExperimentReport& r, ReportOptions opts) {
  for (const RunResult& run : r.runs) {
    write_row_prefix(out, r);
    out << ',' << run.run << ',' << format_double(run.rmse) << ',' << format_double(run.mae);
    write_row_suffix(out, r.config, opts.timing ? run.seconds : 0.0);
  }
  write_mean_row(out, "", r, opts);
}

constexpr const char* kReportHeader = "method,run,rmse,mae,k1,k2,th,eps,lambda1,lambda2,seconds";

}  // namespace

ProposedFit learn_codebook(const RatingMatrix& source, const ExperimentConfig& cfg,
                           std::uint64_t seed) {
  const DenseMatrix filled = stage("mean-fill", [&] { return mean_fill_rows(source); });
  CoclusterConfig cc;
  cc.k1 = cfg.k1;
  cc.k2 = cfg.k2;
  cc.max_iters = cfg.cocluster_iters;
  cc.restarts = cfg.cocluster_restarts;
  cc.seed = seed;
  ProposedFit fit;
  fit.memberships = stage("cocluster", [&] { return cocluster(filled, cc); });
  fit.codebook =
      stage("codebook", [&] { return build_codebook(filled, fit.memberships, cfg.k1, cfg.k2); });
  fit.partial = stage("prune", [&] {
    return prune_codebook(fit.codebook, filled, fit.memberships, cfg.th, cfg.eps);
  });
  return fit;
}

ProposedFit fit_proposed(const RatingMatrix& source, const RatingMatrix& train,
                         const ExperimentConfig& cfg, std::uint64_t seed) {
  ProposedFit fit = learn_codebook(source, cfg, seed);
  const RatingMatrix cells = stage("codebook-ratings", [&] {
    return partial_codebook_ratings(fit.partial, source.scale());
  });
  if (cells.empty()) throw DataError("prune: no codebook cell retained; lower th or raise eps");
  fit.codebook_model =
      stage("codebook-mmmf", [&] { return mmmf_fit(cells, mmmf_config(cfg, seed)); });
  TransferConfig tc;
  tc.lambda1 = cfg.lambda1;
  tc.lambda2 = cfg.lambda2;
  tc.step_size = cfg.transfer_step_size;
  tc.max_iters = cfg.transfer_iters;
  tc.restarts = cfg.transfer_restarts;
  tc.tol = cfg.tol;
  tc.seed = seed;
  tc.halve_on_increase = cfg.halve_on_increase;
  fit.transfer = stage("transfer", [&] { return fit_transfer(train, fit.codebook_model, tc); });
  return fit;
}

ExperimentReport run_experiment(const RatingMatrix& source, const RatingMatrix& target,
                                const ExperimentConfig& cfg, const EvaluateHook& hook) {
  if (cfg.runs == 0) throw DataError("runs must be positive");
  if (source.scale() != target.scale()) throw DataError("source and target rating scales differ");

  ExperimentReport report;
  report.config = cfg;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = cfg.seed + r;
    const SplitPair split =
        stage("split", [&] { return split_train_test(target, cfg.train_fraction, seed); });
    const std::vector<double> pred = predict_run(source, split, cfg, seed);

    std::vector<double> truth;
    truth.reserve(split.test.nnz());
    for (const Rating& e : split.test.entries()) truth.push_back(e.value);
    if (hook) hook(r, split, split.test.entries(), pred);

    RunResult rr;
    rr.run = r;
    rr.rmse = stage("evaluate", [&] { return rmse(truth, pred); });
    rr.mae = mae(truth, pred);
    rr.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.runs.push_back(rr);
  }
  for (const RunResult& rr : report.runs) {
    report.mean_rmse += rr.rmse;
    report.mean_mae += rr.mae;
  }
  report.mean_rmse /= static_cast<double>(report.runs.size());
  report.mean_mae /= static_cast<double>(report.runs.size());
  return report;
}

ExperimentReport run_pipeline(const ExperimentConfig& cfg, const EvaluateHook& hook) {
  const RatingMatrix source = stage("load-source", [&] {
    return load_ratings(cfg.source_path);
  });
  const RatingMatrix target =
      stage("load-target", [&] { return load_ratings(cfg.target_path, cfg.max_users, cfg.max_items); });
  return run_experiment(source, target, cfg, hook);
}

void apply_parameter(ExperimentConfig& cfg, const std::string& param, const std::string& value) {
  std::size_t used = 0;
  try {
    if (param == "k1" || param == "k2") {
      const long long v = std::stoll(value, &used);
      if (v < 1) throw DataError(param + " must be positive");
      (param == "k1" ? cfg.k1 : cfg.k2) = static_cast<std::size_t>(v);
    } else if (param == "th") {
      cfg.th = std::stod(value, &used);
    } else if (param == "eps") {
      cfg.eps = std::stod(value, &used);
    } else {
      throw DataError("unknown sweep parameter '" + param + "' (expected k1, k2, th or eps)");
    }
  } catch (const std::logic_error&) {
    throw DataError("invalid value '" + value + "' for " + param);
  }
  if (used != value.size()) throw DataError("invalid value '" + value + "' for " + param);
}

std::vector<SweepPoint> sweep(const RatingMatrix& source, const RatingMatrix& target,
                              const ExperimentConfig& cfg, const std::string& param,
                              const std::vector<std::string>& values) {
  // Validate every value before spending time on any run.
  std::vector<ExperimentConfig> configs;
  for (const std::string& v : values) {
    ExperimentConfig c = cfg;
    apply_parameter(c, param, v);
    configs.push_back(std::move(c));
  }
  std::vector<SweepPoint> points;
  for (std::size_t k = 0; k < values.size(); ++k) {
    points.push_back(SweepPoint{values[k], run_experiment(source, target, configs[k])});
  }
  return points;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& cfg, const std::string& param,
                              const std::vector<std::string>& values) {
  for (const std::string& v : values) {
    ExperimentConfig probe = cfg;
    apply_parameter(probe, param, v);
  }
  const RatingMatrix source = stage("load-source", [&] {
    return load_ratings(cfg.source_path);
  });
  const RatingMatrix target =
      stage("load-target", [&] { return load_ratings(cfg.target_path, cfg.max_users, cfg.max_items); });
  return sweep(source, target, cfg, param, values);
}

void write_report_csv(std::ostream& out, const ExperimentReport& report, ReportOptions opts) {
  out << kReportHeader << '\n';
  write_report_rows(out, report, opts);
}

void write_sweep_csv(std::ostream& out, const std::string& param,
                     const std::vector<SweepPoint>& points, ReportOptions opts) {
  out << "param,value," << kReportHeader << '\n';
  for (const SweepPoint& p : points) write_mean_row(out, param + "," + p.value + ",", p.report, opts);
}

}  // namespace cdt
