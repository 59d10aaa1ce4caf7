#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "randnet/baseline_mlp.hpp"
#include "randnet/benchmark.hpp"
#include "randnet/errors.hpp"
#include "randnet/estimator.hpp"
#include "randnet/gd_trainer.hpp"
#include "randnet/report.hpp"
#include "randnet/rf_lsq.hpp"

#ifndef RANDNET_VERSION_STRING
#define RANDNET_VERSION_STRING "randnet-0.1.0"
#endif

namespace randnet::cli {

enum class Scale { desk, paper };

enum ExitCode : int { kSuccess = 0, kUsage = 2, kNumerical = 3, kPartial = 4 };

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"calibrate", "fit-gd", "fit-lsq", "fit-mlp", "simulate",
                                                 "reproduce-tables"};
  return names;
}

/// Fully resolved settings of one invocation.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  Scale scale = Scale::desk;
  unsigned threads = 0;
  M1Divisor m1_divisor = M1Divisor::griewank;
  LambdaSource lambda_source = LambdaSource::published;

  // data selection (simulate, calibrate, fit-*)
  std::vector<int> targets;
  Eigen::Index n = 200;
  double noise = 0.05;
  std::string data_path;

  // simulation
  std::vector<std::string> estimators = all_estimator_ids();
  int reps = 10;
  Eigen::Index eval_n = 10000;

  // calibration
  int calibration_repeats = 100;
  Eigen::Index calibration_draws = 100000;

  // gradient descent
  ScheduleConstants constants;
  std::optional<std::uint64_t> step_cap = 100000;
  std::optional<double> radius;
  std::optional<double> smoothness;
  OuterInit init = OuterInit::zeros;
  std::string trace_path;

  // least squares
  std::optional<Eigen::Index> hidden;
  std::optional<double> basis_radius;
  bool projected = false;
  std::optional<double> ridge;
  std::optional<double> truncation;

  // adam baselines
  std::vector<Eigen::Index> widths = {32};
  Activation activation = Activation::relu;
  std::int64_t epochs = 1000;
  double lr = 0.01;

  // outputs
  std::string out_path;
  std::string json_path;
  std::string out_dir = "tables";
  bool pretty = false;

  [[nodiscard]] BenchmarkOptions benchmark_options() const {
    BenchmarkOptions o;
    o.m1_divisor = m1_divisor;
    o.lambda_source = lambda_source;
    o.threads = threads;
    o.adam.epochs = epochs;
    o.adam.adam.lr = lr;
    return o;
  }
};

inline std::string target_name(int t) { return "m" + std::to_string(t); }

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["scale"] = c.scale == Scale::desk ? "desk" : "paper";
  j["threads"] = c.threads;
  j["m1_divisor"] = c.m1_divisor == M1Divisor::griewank ? "griewank" : "paper";
  j["lambda_source"] = c.lambda_source == LambdaSource::published ? "published" : "calibrated";
  std::vector<std::string> targets;
  for (int t : c.targets) targets.push_back(target_name(t));
  j["targets"] = targets;
  j["n"] = c.n;
  j["noise"] = c.noise;
  j["data"] = c.data_path;
  j["estimators"] = c.estimators;
  j["reps"] = c.reps;
  j["eval_n"] = c.eval_n;
  j["calibration_repeats"] = c.calibration_repeats;
  j["calibration_draws"] = c.calibration_draws;
  j["constants"] = {{"c2", c.constants.c2}, {"c3", c.constants.c3}, {"c4", c.constants.c4},
                    {"c5", c.constants.c5}, {"c7", c.constants.c7}, {"c8", c.constants.c8}};
  j["step_cap"] = c.step_cap ? nlohmann::json(*c.step_cap) : nlohmann::json(nullptr);
  j["radius"] = c.radius ? nlohmann::json(*c.radius) : nlohmann::json(nullptr);
  j["smoothness"] = c.smoothness ? nlohmann::json(*c.smoothness) : nlohmann::json(nullptr);
  j["init"] = c.init == OuterInit::zeros ? "zeros" : "uniform-small";
  j["hidden"] = c.hidden ? nlohmann::json(*c.hidden) : nlohmann::json(nullptr);
  j["basis_radius"] = c.basis_radius ? nlohmann::json(*c.basis_radius) : nlohmann::json(nullptr);
  j["projected"] = c.projected;
  j["widths"] = c.widths;
  j["activation"] = std::string(to_string(c.activation));
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["out"] = c.out_path;
  j["json"] = c.json_path;
  j["out_dir"] = c.out_dir;
  return j;
}

namespace detail {

inline int parse_target(const std::string& text) {
  std::string digits = text;
  if (!digits.empty() && (digits[0] == 'm' || digits[0] == 'M')) digits.erase(0, 1);
  int value = 0;
  try {
    std::size_t used = 0;
    value = std::stoi(digits, &used);
    if (used != digits.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw UsageError("--target: '" + text + "' is not one of m1..m6");
  }
  if (value < 1 || value > 6) throw UsageError("--target: '" + text + "' is not one of m1..m6");
  return value;
}

inline std::string usage_summary() {
  std::string s = "usage: randnet <command> [options]\ncommands:";
  for (const auto& c : command_names()) s += " " + c;
  return s;
}

}  // namespace detail

/// Result of parsing: either a configuration or a help text to print.
struct ParsedArgs {
  std::optional<RunConfig> config;
  std::string help;
};

/// Parses the command line (and an optional --config key-value file whose
/// values the flags override). Throws UsageError naming the offending flag.
inline ParsedArgs parse_config(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Random-feature network regression toolkit", "randnet"};
  app.set_config("--config", "", "Key-value configuration file (TOML/INI)");
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string scale = "desk";
  std::string divisor = "griewank";
  std::string lambda_source = "published";
  app.add_option("--seed", cfg.seed, "Master seed (default 0)")->envname("RANDNET_SEED");
  auto* scale_opt = app.add_option("--scale", scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  bool paper_scale = false;
  app.add_flag("--paper-scale", paper_scale, "Same as --scale paper")->excludes(scale_opt);
  app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  app.add_option("--m1-divisor", divisor, "griewank (sqrt i) or paper (sqrt(i-1))")
      ->check(CLI::IsMember({"griewank", "paper"}));
  app.add_option("--lambda-source", lambda_source, "published or calibrated noise scales")
      ->check(CLI::IsMember({"published", "calibrated"}));

  std::vector<std::string> target_texts;
  auto add_data_options = [&](CLI::App* sub) {
    sub->add_option("--target", target_texts, "Target m1..m6")->expected(1);
    sub->add_option("--n", cfg.n, "Sample size");
    sub->add_option("--noise", cfg.noise, "Noise level sigma (e.g. 0.05)");
  };

  auto* calibrate = app.add_subcommand("calibrate", "Noise-scale calibration by IQR of m_i(X)");
  calibrate->add_option("--target,--targets", target_texts, "Targets m1..m6")->delimiter(',');
  calibrate->add_option("--repeats", cfg.calibration_repeats, "Repetitions whose median is taken");
  calibrate->add_option("--draws", cfg.calibration_draws, "Draws per repetition");
  calibrate->add_option("--out", cfg.out_path, "CSV output path");

  std::string init = "zeros";
  auto* fit_gd = app.add_subcommand("fit-gd", "Gradient-descent shallow network");
  add_data_options(fit_gd);
  fit_gd->add_option("--data", cfg.data_path, "CSV with columns x1..xd,y");
  fit_gd->add_option("--c2", cfg.constants.c2);
  fit_gd->add_option("--c3", cfg.constants.c3);
  fit_gd->add_option("--c4", cfg.constants.c4);
  fit_gd->add_option("--c5", cfg.constants.c5);
  fit_gd->add_option("--c7", cfg.constants.c7);
  fit_gd->add_option("--c8", cfg.constants.c8);
  std::uint64_t step_cap = *cfg.step_cap;
  auto* step_cap_opt = fit_gd->add_option("--step-cap", step_cap, "Maximum gradient steps (0 = t_n)");
  double radius = 0.0;
  auto* radius_opt = fit_gd->add_option("--radius", radius, "Override of the inner-weight radius B_n");
  double smoothness = 0.0;
  auto* smooth_opt = fit_gd->add_option("--smoothness", smoothness, "Override of L_n (step size 1/L_n)");
  fit_gd->add_option("--init", init, "zeros or uniform-small")->check(CLI::IsMember({"zeros", "uniform-small"}));
  fit_gd->add_option("--trace", cfg.trace_path, "CSV path for the per-step risk");
  fit_gd->add_option("--out", cfg.out_path, "Model JSON path");

  auto* fit_lsq = app.add_subcommand("fit-lsq", "Random-feature linear least squares");
  add_data_options(fit_lsq);
  fit_lsq->add_option("--data", cfg.data_path, "CSV with columns x1..xd,y");
  Eigen::Index hidden = 0;
  auto* hidden_opt = fit_lsq->add_option("--K", hidden, "Number of random features (omit to select by splitting)");
  double basis_radius = 0.0;
  auto* basis_radius_opt = fit_lsq->add_option("--B", basis_radius, "Inner-weight radius / projected scale");
  fit_lsq->add_flag("--projected", cfg.projected, "Use the periodized feature map");
  double ridge = 0.0;
  auto* ridge_opt = fit_lsq->add_option("--ridge", ridge, "Ridge penalty on the outer weights (default 0)");
  double truncation = 0.0;
  auto* trunc_opt = fit_lsq->add_option("--beta-n", truncation, "Truncation level (default c5 log n)");
  fit_lsq->add_option("--c5", cfg.constants.c5);
  fit_lsq->add_option("--out", cfg.out_path, "Model JSON path");

  std::string activation = "relu";
  auto* fit_mlp = app.add_subcommand("fit-mlp", "Fully connected baseline trained by adam");
  add_data_options(fit_mlp);
  fit_mlp->add_option("--data", cfg.data_path, "CSV with columns x1..xd,y");
  fit_mlp->add_option("--widths", cfg.widths, "Hidden widths, e.g. 32,32,32")->delimiter(',');
  fit_mlp->add_option("--activation", activation, "relu or sigmoid")->check(CLI::IsMember({"relu", "sigmoid"}));
  fit_mlp->add_option("--epochs", cfg.epochs, "Full-batch epochs");
  fit_mlp->add_option("--lr", cfg.lr, "Adam learning rate");
  fit_mlp->add_option("--out", cfg.out_path, "Model JSON path");

  int reps = 0;
  Eigen::Index eval_n = 0;
  auto* simulate = app.add_subcommand("simulate", "One (target, n, noise) simulation cell");
  add_data_options(simulate);
  simulate->add_option("--estimators", cfg.estimators, "Estimator ids")->delimiter(',');
  auto* sim_reps = simulate->add_option("--reps", reps, "Repetitions");
  auto* sim_eval = simulate->add_option("--eval-n", eval_n, "Fresh evaluation points");
  simulate->add_option("--epochs", cfg.epochs, "Adam epochs for baselines");
  simulate->add_option("--out", cfg.out_path, "CSV report path (stdout if omitted)");
  simulate->add_option("--json", cfg.json_path, "JSON report path with per-repetition values");

  auto* reproduce = app.add_subcommand("reproduce-tables", "All cells of the comparison tables");
  reproduce->add_option("--target,--targets", target_texts, "Targets m1..m6 (default all)")->delimiter(',');
  auto* rep_reps = reproduce->add_option("--reps", reps, "Repetitions");
  auto* rep_eval = reproduce->add_option("--eval-n", eval_n, "Fresh evaluation points");
  reproduce->add_option("--epochs", cfg.epochs, "Adam epochs for baselines");
  reproduce->add_option("--out-dir", cfg.out_dir, "Directory for table CSVs and the manifest");
  reproduce->add_flag("--pretty", cfg.pretty, "Print the tables to stdout");

  for (auto* sub : {calibrate, fit_gd, fit_lsq, fit_mlp, simulate, reproduce}) sub->configurable();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return {std::nullopt, app.help()};
  } catch (const CLI::CallForAllHelp&) {
    return {std::nullopt, app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + detail::usage_summary());
  }

  const auto chosen = app.get_subcommands();
  if (chosen.empty()) throw UsageError("no command given\n" + detail::usage_summary());
  cfg.command = chosen.front()->get_name();

  cfg.scale = scale == "paper" || paper_scale ? Scale::paper : Scale::desk;
  cfg.m1_divisor = divisor == "paper" ? M1Divisor::paper : M1Divisor::griewank;
  cfg.lambda_source = lambda_source == "calibrated" ? LambdaSource::calibrated : LambdaSource::published;
  cfg.init = init == "zeros" ? OuterInit::zeros : OuterInit::uniform_small;
  cfg.activation = activation == "relu" ? Activation::relu : Activation::sigmoid;
  for (const auto& t : target_texts) cfg.targets.push_back(detail::parse_target(t));

  if (step_cap_opt->count() > 0) cfg.step_cap = step_cap == 0 ? std::nullopt : std::optional(step_cap);
  if (radius_opt->count() > 0) cfg.radius = radius;
  if (smooth_opt->count() > 0) cfg.smoothness = smoothness;
  if (hidden_opt->count() > 0) cfg.hidden = hidden;
  if (basis_radius_opt->count() > 0) cfg.basis_radius = basis_radius;
  if (ridge_opt->count() > 0) cfg.ridge = ridge;
  if (trunc_opt->count() > 0) cfg.truncation = truncation;

  const bool reps_given = sim_reps->count() > 0 || rep_reps->count() > 0;
  const bool eval_given = sim_eval->count() > 0 || rep_eval->count() > 0;
  if (cfg.scale == Scale::paper) {
    if (reps_given && reps != 50) throw UsageError("--reps: paper scale pins repetitions to 50");
    if (eval_given && eval_n != 100000) throw UsageError("--eval-n: paper scale pins evaluation points to 100000");
    cfg.reps = 50;
    cfg.eval_n = 100000;
  } else {
    cfg.reps = reps_given ? reps : 10;
    cfg.eval_n = eval_given ? eval_n : 10000;
  }
  if (cfg.reps < 1) throw UsageError("--reps: must be >= 1");
  if (cfg.eval_n < 1000) throw UsageError("--eval-n: must be >= 1000");

  if (cfg.command == "simulate" && cfg.targets.size() != 1) throw UsageError("--target: simulate needs exactly one target");
  if (cfg.command.rfind("fit-", 0) == 0 && cfg.data_path.empty() && cfg.targets.size() != 1)
    throw UsageError("--data: give a data file or a --target to simulate from");
  if (cfg.command == "calibrate" || cfg.command == "reproduce-tables")
    if (cfg.targets.empty()) cfg.targets = {1, 2, 3, 4, 5, 6};
  if (cfg.n < 10) throw UsageError("--n: must be >= 10");
  if (!(cfg.noise >= 0.0)) throw UsageError("--noise: must be nonnegative");
  for (const auto& id : cfg.estimators) {
    try {
      estimator_code(id);
    } catch (const DomainError&) {
      throw UsageError("--estimators: unknown estimator '" + id + "'");
    }
  }
  if (cfg.hidden && *cfg.hidden < 1) throw UsageError("--K: must be >= 1");
  if (cfg.hidden.has_value() != cfg.basis_radius.has_value())
    throw UsageError(cfg.hidden ? "--B: required together with --K" : "--K: required together with --B");
  if (cfg.widths.empty()) throw UsageError("--widths: at least one hidden layer");
  if (cfg.epochs < 1) throw UsageError("--epochs: must be >= 1");
  return {cfg, ""};
}

inline ParsedArgs parse_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_config(args);
}

/// Key-value text that reproduces `cfg` when passed back through --config.
inline std::string config_file_text(const RunConfig& c) {
  std::ostringstream out;
  auto quote = [](const std::string& s) { return "\"" + s + "\""; };
  out << "# " << RANDNET_VERSION_STRING << "\n";
  out << "seed=" << c.seed << "\n";
  out << "scale=" << quote(c.scale == Scale::desk ? "desk" : "paper") << "\n";
  out << "threads=" << c.threads << "\n";
  out << "m1-divisor=" << quote(c.m1_divisor == M1Divisor::griewank ? "griewank" : "paper") << "\n";
  out << "lambda-source=" << quote(c.lambda_source == LambdaSource::published ? "published" : "calibrated") << "\n";
  out << "[" << c.command << "]\n";
  std::string targets;
  for (int t : c.targets) targets += (targets.empty() ? "" : ",") + target_name(t);
  auto list = [&](const auto& values) {
    std::string s = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ",";
      if constexpr (std::is_same_v<std::decay_t<decltype(values[i])>, std::string>) s += quote(values[i]);
      else s += std::to_string(values[i]);
    }
    return s + "]";
  };
  if (c.command == "simulate" || c.command == "reproduce-tables") {
    if (c.command == "simulate") {
      out << "target=" << quote(targets) << "\nn=" << c.n << "\nnoise=" << format_number(c.noise) << "\n";
      out << "estimators=" << list(c.estimators) << "\n";
      if (!c.out_path.empty()) out << "out=" << quote(c.out_path) << "\n";
      if (!c.json_path.empty()) out << "json=" << quote(c.json_path) << "\n";
    } else {
      out << "targets=" << quote(targets) << "\nout-dir=" << quote(c.out_dir) << "\n";
    }
    if (c.scale == Scale::desk) out << "reps=" << c.reps << "\neval-n=" << c.eval_n << "\n";
    out << "epochs=" << c.epochs << "\n";
  } else if (c.command == "calibrate") {
    out << "targets=" << quote(targets) << "\nrepeats=" << c.calibration_repeats << "\ndraws=" << c.calibration_draws << "\n";
    if (!c.out_path.empty()) out << "out=" << quote(c.out_path) << "\n";
  } else {
    if (!c.data_path.empty()) out << "data=" << quote(c.data_path) << "\n";
    else out << "target=" << quote(targets) << "\nn=" << c.n << "\nnoise=" << format_number(c.noise) << "\n";
    if (!c.out_path.empty()) out << "out=" << quote(c.out_path) << "\n";
  }
  return out.str();
}

namespace detail {

inline SimulationSpec make_spec(const RunConfig& c, int target, Eigen::Index n, double noise) {
  SimulationSpec s;
  s.target = target;
  s.n = n;
  s.noise_sigma = noise;
  s.estimator_ids = c.estimators;
  s.repetitions = c.reps;
  s.eval_N = c.eval_n;
  s.master_seed = c.seed;
  s.options = c.benchmark_options();
  return s;
}

inline LabeledDataset load_data(const RunConfig& c) {
  if (!c.data_path.empty()) return read_dataset_csv(c.data_path);
  return generate_dataset(make_spec(c, c.targets.front(), c.n, c.noise), 0);
}

inline void emit(const RunConfig& c, const std::string& content, std::ostream& out) {
  if (c.out_path.empty()) out << content;
  else write_file_atomic(c.out_path, content);
}

inline void write_manifest(const std::filesystem::path& path, const RunConfig& c) {
  write_file_atomic(path, config_file_text(c));
}

inline std::filesystem::path manifest_for(const std::string& output) { return output + ".manifest.toml"; }

inline int run_calibrate(const RunConfig& c, std::ostream& out) {
  std::ostringstream csv;
  csv << "target,lambda,published\n";
  for (int t : c.targets) {
    RngStream rng = RngStream(c.seed).substream({stream_tag::calibration, static_cast<std::uint64_t>(t)});
    const double lambda = calibrate_lambda(t, rng, c.calibration_repeats, c.calibration_draws, c.m1_divisor);
    csv << target_name(t) << ',' << format_number(lambda) << ',' << format_number(published_lambda(t)) << '\n';
  }
  emit(c, csv.str(), out);
  if (!c.out_path.empty()) write_manifest(manifest_for(c.out_path), c);
  return kSuccess;
}

inline int finish_fit(const RunConfig& c, const TrainedEstimator& est, const LabeledDataset& data, std::ostream& out,
                      std::ostream& err) {
  err << "training risk " << format_number(empirical_risk(est, data)) << "\n";
  emit(c, to_json(est).dump(2) + "\n", out);
  if (!c.out_path.empty()) write_manifest(manifest_for(c.out_path), c);
  return kSuccess;
}

inline int run_fit_gd(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const LabeledDataset data = load_data(c);
  TheoreticalSchedule s = schedule_from_n(data.size(), data.dimension(), c.constants);
  if (c.radius) s.B_n = *c.radius;
  if (c.smoothness) s.set_smoothness(*c.smoothness);
  std::optional<std::uint64_t> cap = c.step_cap;
  if (cap && *cap > s.t_n) cap = s.t_n;
  err << "schedule K_n=" << s.K_n << " B_n=" << format_number(s.B_n) << " L_n=" << format_number(s.L_n)
      << " t_n=" << s.t_n << " steps=" << (cap ? *cap : s.t_n) << " beta_n=" << format_number(s.beta_n) << "\n";
  RngStream rng = RngStream(c.seed).substream(1);
  const TrainedEstimator est = train_gd(data, s, cap, rng, {c.init, !c.trace_path.empty()});
  if (!c.trace_path.empty()) write_file_atomic(c.trace_path, trace_csv(est.trace));
  return finish_fit(c, est, data, out, err);
}

inline int run_fit_lsq(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const LabeledDataset data = load_data(c);
  const double level = c.truncation ? *c.truncation : c.constants.c5 * std::log(static_cast<double>(data.size()));
  RngStream rng = RngStream(c.seed).substream(2);
  TrainedEstimator est;
  if (c.hidden) {
    const RandomFeatureBasis basis = c.projected ? sample_projected_basis(*c.hidden, *c.basis_radius, data.dimension(), rng)
                                                 : sample_basis(*c.hidden, *c.basis_radius, data.dimension(), rng);
    est = fit_lsq(basis, data, level, c.ridge.value_or(0.0));
  } else {
    if (c.projected) throw UsageError("--projected: needs explicit --K and --B");
    const Selection sel = select_lsq_model(data, rng);
    err << "selected " << sel.best.detail << " test risk " << format_number(sel.best.test_risk) << "\n";
    est = sel.best.estimator;
    est.truncation = level;
  }
  return finish_fit(c, est, data, out, err);
}

inline int run_fit_mlp(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const LabeledDataset data = load_data(c);
  RngStream rng = RngStream(c.seed).substream(3);
  AdamTrainOptions opts;
  opts.epochs = c.epochs;
  opts.adam.lr = c.lr;
  const TrainedEstimator est = train_adam(data, c.widths, c.activation, opts, rng);
  return finish_fit(c, est, data, out, err);
}

inline int run_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const BenchmarkReport report = run_experiment(make_spec(c, c.targets.front(), c.n, c.noise));
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  emit(c, simulate_csv(report), out);
  if (!c.json_path.empty()) write_file_atomic(c.json_path, report_json(report).dump(2) + "\n");
  if (!c.out_path.empty()) write_manifest(manifest_for(c.out_path), c);
  if (report.superset_violations > 0) {
    err << "comb-new exceeded min(comb-classic, lsq-est) in " << report.superset_violations << " repetitions\n";
    return kNumerical;
  }
  return report.failed_repetitions > 0 ? kPartial : kSuccess;
}

inline int run_reproduce(const RunConfig& c, std::ostream& out, std::ostream& err) {
  RunConfig cfg = c;
  cfg.estimators = all_estimator_ids();
  const std::filesystem::path dir = cfg.out_dir;
  int status = kSuccess;
  for (int table = 1; table <= 2; ++table) {
    const auto path = dir / ("table" + std::to_string(table) + ".csv");
    std::vector<TargetTable> tables;
    for (int t : cfg.targets) {
      if ((t <= 3 ? 1 : 2) != table) continue;
      tables.push_back({t, {}});
      for (const auto& cell : table_cells()) {
        err << "running " << target_name(t) << " n=" << cell.n << " noise=" << format_number(cell.noise) << "\n";
        auto& cells = tables.back().cells;
        try {
          BenchmarkReport report = run_experiment(make_spec(cfg, t, cell.n, cell.noise));
          for (const auto& w : report.warnings) err << "warning: " << w << "\n";
          if (report.failed_repetitions > 0 && status == kSuccess) status = kPartial;
          if (report.superset_violations > 0) status = kNumerical;
          cells.emplace_back(std::move(report));
        } catch (const Error& e) {
          err << "cell failed: " << e.what() << "\n";
          cells.emplace_back(std::nullopt);
          status = kNumerical;
        }
        // partial results stay readable if a later cell never finishes
        write_file_atomic(path, table_csv(tables, cfg.estimators) + "FAILED,incomplete\n");
      }
    }
    if (tables.empty()) continue;
    write_file_atomic(path, table_csv(tables, cfg.estimators));
    if (cfg.pretty) out << pretty_table(tables, cfg.estimators);
  }
  write_manifest(dir / "manifest.toml", cfg);
  return status;
}

}  // namespace detail

/// Executes a parsed configuration; returns the process exit code.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  err << "config " << to_json(c).dump() << "\n";
  try {
    if (c.command == "calibrate") return detail::run_calibrate(c, out);
    if (c.command == "fit-gd") return detail::run_fit_gd(c, out, err);
    if (c.command == "fit-lsq") return detail::run_fit_lsq(c, out, err);
    if (c.command == "fit-mlp") return detail::run_fit_mlp(c, out, err);
    if (c.command == "simulate") return detail::run_simulate(c, out, err);
    if (c.command == "reproduce-tables") return detail::run_reproduce(c, out, err);
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kNumerical;
  }
  err << "unknown command '" << c.command << "'\n";
  return kUsage;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  ParsedArgs parsed;
  try {
    parsed = parse_config(argc, argv);
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return kUsage;
  }
  if (!parsed.config) {
    out << parsed.help;
    return kSuccess;
  }
  return run(*parsed.config, out, err);
}

}  // namespace randnet::cli
