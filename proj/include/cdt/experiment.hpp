#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cdt/coclustering.hpp"
#include "cdt/mmmf.hpp"
#include "cdt/ratings.hpp"
#include "cdt/transfer.hpp"

namespace cdt {

enum class Method { proposed, mmmf, cbt };

Method parse_method(const std::string& name);
const char* method_name(Method m);

struct ExperimentConfig {
  std::filesystem::path source_path;
  std::filesystem::path target_path;
  Method method = Method::proposed;

  std::size_t k1 = 150;
  std::size_t k2 = 100;
  double th = 80.0;
  double eps = 0.3;

  std::size_t latent_dim = 20;
  double lambda = 0.1;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double step_size = 0.01;
  double transfer_step_size = 0.01;

  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::size_t runs = 5;

  // Goodbooks-style inputs keep ids up to these bounds.
  std::size_t max_users = 5000;
  std::size_t max_items = 3000;

  std::size_t cocluster_iters = 100;
  std::size_t cocluster_restarts = 10;
  std::size_t mmmf_iters = 500;
  std::size_t transfer_iters = 300;
  std::size_t transfer_restarts = 1;
  double tol = 1e-6;
  // When false the solvers take plain fixed steps and may diverge.
  bool halve_on_increase = true;
  std::size_t cbt_iters = 100;
  std::size_t cbt_restarts = 10;

  // Score the raw model output instead of the decoded integer ratings.
  bool raw_scores = false;
};

/// Everything the proposed method learns for one target training set.
struct ProposedFit {
  Memberships memberships;
  Codebook codebook;
  PartialCodebook partial;
  MmmfModel codebook_model;
  TransferModel transfer;
};

/// Co-clusters the source, prunes the codebook, factorizes it and fits the
/// target membership weights, all seeded with `seed`.
ProposedFit fit_proposed(const RatingMatrix& source, const RatingMatrix& train,
                         const ExperimentConfig& cfg, std::uint64_t seed);

/// Source-side half of fit_proposed: memberships, codebook and partial codebook.
ProposedFit learn_codebook(const RatingMatrix& source, const ExperimentConfig& cfg,
                           std::uint64_t seed);

struct RunResult {
  std::size_t run = 0;
  double rmse = 0.0;
  double mae = 0.0;
  double seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunResult> runs;
  double mean_rmse = 0.0;
  double mean_mae = 0.0;
};

/// Called once per run with the split, the evaluated cells and their predictions.
using EvaluateHook = std::function<void(std::size_t run, const SplitPair& split,
                                        std::span<const Rating> evaluated,
                                        std::span<const double> predicted)>;

/// Runs `cfg.runs` experiments on in-memory matrices. Run r re-splits the
/// target and reseeds every solver with cfg.seed + r. Errors are rethrown
/// with the failing stage in the message.
ExperimentReport run_experiment(const RatingMatrix& source, const RatingMatrix& target,
                                const ExperimentConfig& cfg, const EvaluateHook& hook = {});

/// Loads cfg.source_path and cfg.target_path, then calls run_experiment.
ExperimentReport run_pipeline(const ExperimentConfig& cfg, const EvaluateHook& hook = {});

struct SweepPoint {
  std::string value;
  ExperimentReport report;
};

/// Sets `param` (k1, k2, th or eps) to each value in turn.
void apply_parameter(ExperimentConfig& cfg, const std::string& param, const std::string& value);

std::vector<SweepPoint> sweep(const RatingMatrix& source, const RatingMatrix& target,
                              const ExperimentConfig& cfg, const std::string& param,
                              const std::vector<std::string>& values);
std::vector<SweepPoint> sweep(const ExperimentConfig& cfg, const std::string& param,
                              const std::vector<std::string>& values);

struct ReportOptions {
  // When false the seconds column is written as 0 so identical runs give
  // byte-identical files.
  bool timing = true;
};

/// Columns: method,run,rmse,mae,k1,k2,th,eps,lambda1,lambda2,seconds. One row
/// per run, then a row with run = mean.
void write_report_csv(std::ostream& out, const ExperimentReport& report, ReportOptions opts = {});

/// One row per swept value holding the mean over runs, with the report
/// columns prefixed by param,value.
void write_sweep_csv(std::ostream& out, const std::string& param,
                     const std::vector<SweepPoint>& points, ReportOptions opts = {});

}  // namespace cdt
