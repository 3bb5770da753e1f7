#include "tokalloc/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tokalloc/ao_solver.hpp"
#include "tokalloc/baselines.hpp"
#include "tokalloc/config_io.hpp"
#include "tokalloc/errors.hpp"
#include "tokalloc/link_sim.hpp"
#include "tokalloc/perf_model.hpp"
#include "tokalloc/scenario.hpp"

namespace tokalloc::cli {

using nlohmann::json;

namespace {

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write output file: " + path);
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct SolveArgs {
  std::string config, out, method = "proposed";
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const auto problem = parse_problem(read_json_file(a.config));
  json result;
  if (a.method == "era") {
    const auto alloc = era_allocation(problem.devices, problem.cfg);
    result = solution_json("era", alloc, total_cost(alloc, problem.devices, problem.cfg));
  } else if (a.method == "pbwf") {
    const auto alloc = pbwf_allocation(problem.devices, problem.cfg);
    result = solution_json("pbwf", alloc, total_cost(alloc, problem.devices, problem.cfg));
  } else {
    const auto trace = solve_multistart(problem.devices, problem.cfg);
    result = solution_json("proposed", trace.final, trace.final_cost, &trace);
  }
  emit(dump(result), a.out, out);
  return kOk;
}

struct SweepArgs {
  std::string scenario, out, summary;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  auto j = read_json_file(a.scenario);
  if (a.seed) j["seed"] = *a.seed;
  if (!j.is_object() || !j.contains("seed"))
    throw ConfigError("seed", "scenario needs an explicit \"seed\" (or pass --seed)");
  auto sc = parse_scenario(j);
  if (a.threads) sc.threads = *a.threads;
  const auto records = run_sweep(sc);
  emit(sweep_csv(sc, records), a.out, out);
  std::string summary_path = a.summary;
  if (summary_path.empty() && !a.out.empty()) summary_path = a.out + ".summary.json";
  if (!summary_path.empty()) emit(dump(sweep_summary(sc, records)), summary_path, out);
  return kOk;
}

struct FitArgs {
  std::string data, out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  std::vector<FitPoint> pts;
  try {
    pts = read_fit_csv(a.data);
  } catch (const std::runtime_error& e) {
    throw ConfigError(a.data, e.what());
  }
  FitResult res;
  try {
    res = fit(pts);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(a.data, e.what());
  }
  emit(dump(to_json(res)), a.out, out);
  return kOk;
}

struct OracleArgs {
  std::string config, out;
  int grid = 64;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  const auto problem = parse_problem(read_json_file(a.config));
  const OracleGrid grid{a.grid, a.grid};
  const auto alloc = oracle_solve(problem.devices, problem.cfg, grid);
  auto result = solution_json("oracle", alloc, total_cost(alloc, problem.devices, problem.cfg));
  result["grid"] = a.grid;
  emit(dump(result), a.out, out);
  return kOk;
}

struct LinkArgs {
  link::LinkExperimentConfig cfg;
  std::string out;
};

int cmd_link(const LinkArgs& a, std::ostream& out) {
  const auto r = link::run_link_experiment(a.cfg);
  const json j{{"snr_db", r.snr_db},
               {"trials", r.trials},
               {"empirical_mse", r.empirical_mse},
               {"theoretical_mse", r.theoretical_mse},
               {"relative_error", r.relative_error}};
  emit(dump(j), a.out, out);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint bandwidth, power and token-length allocation for multimodal token uplinks"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve one problem instance");
  solve->add_option("--config", solve_args.config, "Problem JSON")->required();
  solve->add_option("--out", solve_args.out, "Output JSON path (default: stdout)");
  solve->add_option("--method", solve_args.method, "proposed | era | pbwf")
      ->check(CLI::IsMember({"proposed", "era", "pbwf"}));

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run a Monte Carlo budget or lambda sweep");
  sweep->add_option("--scenario", sweep_args.scenario, "Scenario JSON")->required();
  sweep->add_option("--out", sweep_args.out, "Output CSV path (default: stdout)");
  sweep->add_option("--summary", sweep_args.summary,
                    "Summary JSON path (default: <out>.summary.json when --out is given)");
  sweep->add_option("--seed", sweep_args.seed, "Override the scenario seed");
  sweep->add_option("--threads", sweep_args.threads, "Worker threads (0: all cores)");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the token-length loss model to a CSV");
  fit_cmd->add_option("--data", fit_args.data, "CSV with header and columns tokens,loss")->required();
  fit_cmd->add_option("--out", fit_args.out, "Output JSON path (default: stdout)");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Brute-force grid search (at most 3 devices)");
  oracle->add_option("--config", oracle_args.config, "Problem JSON")->required();
  oracle->add_option("--grid", oracle_args.grid, "Grid points per axis (>= 8)");
  oracle->add_option("--out", oracle_args.out, "Output JSON path (default: stdout)");

  LinkArgs link_args;
  auto* link_cmd = app.add_subcommand("link", "Monte Carlo of the pooled token link");
  link_cmd->add_option("--snr-db", link_args.cfg.snr_db, "SNR in dB")->required();
  link_cmd->add_option("--trials", link_args.cfg.trials, "Monte Carlo trials")
      ->check(CLI::PositiveNumber);
  link_cmd->add_option("--rows", link_args.cfg.rows, "Token sequence length")->check(CLI::PositiveNumber);
  link_cmd->add_option("--cols", link_args.cfg.cols, "Token dimension")->check(CLI::PositiveNumber);
  link_cmd->add_option("--window", link_args.cfg.window, "Pooling window")->check(CLI::PositiveNumber);
  link_cmd->add_option("--seed", link_args.cfg.seed, "RNG seed")->required();
  link_cmd->add_option("--out", link_args.out, "Output JSON path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (*solve) return cmd_solve(solve_args, out);
    if (*sweep) return cmd_sweep(sweep_args, out);
    if (*fit_cmd) return cmd_fit(fit_args, out);
    if (*oracle) return cmd_oracle(oracle_args, out);
    if (*link_cmd) return cmd_link(link_args, out);
  } catch (const ConfigError& e) {
    err << "config error (" << e.field() << "): " << e.what() << "\n";
    return kConfigError;
  } catch (const OracleSizeError& e) {
    err << "oracle refused: " << e.what() << "\n";
    return kOracleRefused;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace tokalloc::cli
