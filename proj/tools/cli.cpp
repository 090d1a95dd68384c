#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cdt/errors.hpp"
#include "cdt/experiment.hpp"
#include "cdt/io.hpp"

namespace cdt::cli {

namespace {

struct Options {
  ExperimentConfig cfg;
  std::string method = "proposed";
  std::string out;
  std::string predictions;
  bool no_timing = false;
  bool no_halving = false;
  std::string param;
  std::vector<std::string> values;
};

void add_common(CLI::App& app, Options& o) {
  ExperimentConfig& c = o.cfg;
  app.add_option("--source", c.source_path, "Source rating file (MovieLens or Goodbooks format)");
  app.add_option("--target", c.target_path, "Target rating file");
  app.add_option("--method", o.method, "proposed, mmmf or cbt")
      ->check(CLI::IsMember({"proposed", "mmmf", "cbt"}))
      ->capture_default_str();
  app.add_option("--k1", c.k1, "User clusters")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--k2", c.k2, "Item clusters")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--th", c.th, "Pruning threshold in percent")->capture_default_str();
  app.add_option("--eps", c.eps, "Pruning margin")->capture_default_str();
  app.add_option("--latent-dim", c.latent_dim, "Codebook latent dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--lambda", c.lambda, "MMMF regularization")->capture_default_str();
  app.add_option("--lambda1", c.lambda1, "Row-sum penalty weight")->capture_default_str();
  app.add_option("--lambda2", c.lambda2, "Negativity penalty weight")->capture_default_str();
  app.add_option("--step", c.step_size, "MMMF step size")->capture_default_str();
  app.add_option("--transfer-step", c.transfer_step_size, "Transfer step size")->capture_default_str();
  app.add_option("--runs", c.runs, "Repetitions with re-split target")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", c.seed, "Base seed; run r uses seed + r")->capture_default_str();
  app.add_option("--train-fraction", c.train_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app.add_option("--max-users", c.max_users, "Goodbooks target user bound")->capture_default_str();
  app.add_option("--max-items", c.max_items, "Goodbooks target item bound")->capture_default_str();
  app.add_option("--mmmf-iters", c.mmmf_iters)->capture_default_str();
  app.add_option("--transfer-iters", c.transfer_iters)->capture_default_str();
  app.add_option("--transfer-restarts", c.transfer_restarts)->capture_default_str();
  app.add_option("--cocluster-restarts", c.cocluster_restarts)->capture_default_str();
  app.add_option("--cbt-restarts", c.cbt_restarts)->capture_default_str();
  app.add_option("--tol", c.tol, "Relative stopping tolerance")->capture_default_str();
  app.add_flag("--no-halving", o.no_halving, "Fixed steps; a non-finite objective aborts with exit 3");
  app.add_flag("--raw-scores", c.raw_scores, "Score raw model outputs instead of decoded ratings");
  app.add_flag("--no-timing", o.no_timing, "Write 0 in the seconds column");
  app.add_option("--out", o.out, "Output file (run, sweep) or directory (codebook)");
}

void require_paths(const ExperimentConfig& c, bool target) {
  if (c.source_path.empty()) throw CLI::RequiredError("--source");
  if (target && c.target_path.empty()) throw CLI::RequiredError("--target");
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw DataError("cannot write " + p.string());
  return f;
}

// Writes through `fn` to the --out file if set, otherwise to `out`.
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty()) {
    fn(out);
    return;
  }
  std::ofstream f = open_out(path);
  fn(f);
}

void do_run(const Options& o, std::ostream& out) {
  require_paths(o.cfg, true);
  std::ostringstream pred;
  EvaluateHook hook;
  if (!o.predictions.empty()) {
    hook = [&](std::size_t run, const SplitPair&, std::span<const Rating> cells,
               std::span<const double> values) {
      if (run == 0) write_triplets(pred, cells, values);
    };
  }
  const ExperimentReport r = run_pipeline(o.cfg, hook);
  emit(o.out, out, [&](std::ostream& s) { write_report_csv(s, r, {!o.no_timing}); });
  if (!o.predictions.empty()) open_out(o.predictions) << pred.str();
}

void do_sweep(const Options& o, std::ostream& out) {
  require_paths(o.cfg, true);
  const auto points = sweep(o.cfg, o.param, o.values);
  emit(o.out, out, [&](std::ostream& s) { write_sweep_csv(s, o.param, points, {!o.no_timing}); });
}

void do_codebook(const Options& o, std::ostream& out) {
  require_paths(o.cfg, false);
  const ProposedFit fit = learn_codebook(load_ratings(o.cfg.source_path), o.cfg, o.cfg.seed);
  if (o.out.empty()) {
    out << "# codebook\n";
    write_codebook_csv(out, fit.codebook);
    out << "# partial codebook\n";
    write_partial_codebook_csv(out, fit.partial);
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec) throw DataError("cannot create " + o.out + ": " + ec.message());
  const std::filesystem::path dir(o.out);
  std::ofstream full = open_out(dir / "codebook.csv");
  write_codebook_csv(full, fit.codebook);
  std::ofstream partial = open_out(dir / "partial_codebook.csv");
  write_partial_codebook_csv(partial, fit.partial);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app("Cross-domain codebook transfer with maximum-margin matrix factorization",
               "cdtransfer");
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  add_common(app, o);

  CLI::App* run_cmd = app.add_subcommand("run", "Train and evaluate one configuration")->fallthrough();
  run_cmd->add_option("--predictions", o.predictions,
                      "Write the first run's held-out predictions as user,item,rating");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Repeat run over values of one parameter")->fallthrough();
  sweep_cmd->add_option("--param", o.param, "k1, k2, th or eps")
      ->required()
      ->check(CLI::IsMember({"k1", "k2", "th", "eps"}));
  sweep_cmd->add_option("--values", o.values, "Values to try")->required()->delimiter(',');
  CLI::App* codebook_cmd =
      app.add_subcommand("codebook", "Write the source codebook and partial codebook")->fallthrough();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
    o.cfg.method = parse_method(o.method);
    o.cfg.halve_on_increase = !o.no_halving;
    if (*run_cmd) do_run(o, out);
    if (*sweep_cmd) do_sweep(o, out);
    if (*codebook_cmd) do_codebook(o, out);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return ExitCode::usage;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::divergence;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::data;
  }
  return ExitCode::ok;
}

}  // namespace cdt::cli
