#include "dshrink/config.hpp"
#include "dshrink/csv.hpp"
#include "dshrink/report_io.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

using namespace dshrink;

constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;

void emit_error(const std::string& kind, const std::string& message) {
  ordered_json err = ordered_json::object();
  err["error"] = kind;
  err["message"] = message;
  std::cerr << err.dump() << "\n";
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  ~Timer() {
    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    std::fprintf(stderr, "elapsed %.1f s\n", elapsed);
  }
};

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  bool workers_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_workers) {
  cmd->add_option("--config", flags.config_path, "Config file (INI)");
  cmd->add_option("--out", flags.out_dir, "Output directory");
  cmd->add_option("--seed", flags.seed, "Seed override")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  if (with_workers) {
    cmd->add_option("--workers", flags.workers, "Worker threads (0 = all cores)")
        ->envname("DOUBLE_SHRINK_WORKERS")
        ->each([&flags](const std::string&) { flags.workers_set = true; });
  }
}

IniConfig load_ini(const CommonFlags& flags) {
  if (flags.config_path.empty()) return IniConfig::parse_string("", "<defaults>");
  return IniConfig::parse_file(flags.config_path);
}

void prepare_out(const std::string& dir) { fs::create_directories(dir); }

std::string out_path(const CommonFlags& flags, const std::string& name) {
  return (fs::path(flags.out_dir) / name).string();
}

int cmd_simulate(const CommonFlags& flags) {
  const IniConfig ini = load_ini(flags);
  SimulationConfig cfg = load_simulation_config(ini);
  ini.require_consumed();
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.workers_set) cfg.workers = flags.workers;

  Timer timer;
  const SimulationReport report = run_grid(cfg);

  prepare_out(flags.out_dir);
  write_text_file(out_path(flags, "config-echo.ini"), render_simulation_echo(cfg));
  write_text_file(out_path(flags, "rmse.csv"), simulation_rmse_csv(report));
  write_text_file(out_path(flags, "tpfp.csv"), simulation_tpfp_csv(report));
  write_text_file(out_path(flags, "selection.csv"),
                  simulation_selection_csv(report));
  write_text_file(out_path(flags, "report.json"),
                  simulation_report_json(report).dump(2) + "\n");
  std::cout << simulation_summary(report);
  return 0;
}

int cmd_evaluate(const std::string& data_path, const std::string& response,
                 bool fast_set, const CommonFlags& flags) {
  const IniConfig ini = load_ini(flags);
  BootstrapConfig cfg = load_bootstrap_config(ini);
  ini.require_consumed();
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.workers_set) cfg.workers = flags.workers;
  if (fast_set) cfg.fast = true;

  const Dataset data = load_csv(data_path, response);
  std::cout << "loaded " << data.n() << " rows, " << data.p()
            << " predictors\n";

  Timer timer;
  const BootstrapReport report = bootstrap_rpe(data, cfg);

  prepare_out(flags.out_dir);
  write_text_file(out_path(flags, "config-echo.ini"), render_bootstrap_echo(cfg));
  write_text_file(out_path(flags, "report.json"),
                  bootstrap_report_json(report, cfg).dump(2) + "\n");
  if (cfg.retain_draws) {
    write_text_file(out_path(flags, "pe_draws.csv"), bootstrap_draws_csv(report));
  }
  std::cout << bootstrap_summary(report);
  return 0;
}

int cmd_theory_check(const CommonFlags& flags) {
  const IniConfig ini = load_ini(flags);
  TheoryConfig cfg = load_theory_config(ini);
  ini.require_consumed();
  if (flags.seed_set) cfg.seed = flags.seed;

  Timer timer;
  const TheoryReport report = run_theory_checks(cfg);

  prepare_out(flags.out_dir);
  write_text_file(out_path(flags, "config-echo.ini"), render_theory_echo(cfg));
  write_text_file(out_path(flags, "report.json"),
                  theory_report_json(report, cfg).dump(2) + "\n");
  std::cout << theory_summary(report);
  return report.pass ? 0 : kExitRun;
}

struct FitFlags {
  std::string method = "FS1";
  std::string response = "y";
  double lambda = -1.0;
  bool lambda_set = false;
  double gamma = 1.0;
  int folds = 5;
  bool standardize = false;
  bool no_intercept = false;
};

int cmd_fit(const std::string& data_path, const FitFlags& fit,
            const CommonFlags& flags) {
  static const std::map<std::string, std::string> kMethods = {
      {"lasso", "LASSO"}, {"alasso", "ALASSO"}, {"ridge", "ridge"},
      {"S", "S"},         {"PS", "PS"},         {"FS1", "FS1"},
      {"FS2", "FS2"},     {"FS3", "FS3"}};
  const auto method_it = kMethods.find(fit.method);
  if (method_it == kMethods.end()) {
    throw ConfigError("unknown method '" + fit.method +
                      "' (expected lasso, alasso, ridge, S, PS, FS1, FS2, FS3)");
  }

  const Dataset data = load_csv(data_path, fit.response);
  std::cout << "loaded " << data.n() << " rows, " << data.p()
            << " predictors\n";
  const std::uint64_t seed = flags.seed_set ? flags.seed : 1;

  Timer timer;
  ordered_json report;
  std::string echo;
  if (method_it->second == "ridge") {
    if (!fit.lambda_set) {
      throw ConfigError("method ridge requires --lambda");
    }
    SolverOptions opts;
    opts.intercept = !fit.no_intercept;
    opts.standardize = fit.standardize;
    const FitResult res = fit_ridge(data, fit.lambda, opts);
    report = ridge_report_json(res, data, fit.lambda);
    echo = "[fit]\nmethod = ridge\nlambda = " + format_double(fit.lambda) + "\n";
    std::cout << "ridge kkt_violation=" << format_double(res.kkt_violation)
              << "\n";
  } else {
    PipelineOptions opts;
    opts.solver.intercept = !fit.no_intercept;
    opts.solver.standardize = fit.standardize;
    opts.cv_folds = fit.folds;
    opts.gamma = fit.gamma;
    const PipelineResult result = run_pipeline(data, opts, seed);
    report = fit_report_json(result, method_it->second, data);
    echo = "[fit]\nmethod = " + fit.method + "\nfolds = " +
           std::to_string(fit.folds) + "\ngamma = " + format_double(fit.gamma) +
           "\nseed = " + std::to_string(seed) + "\n";
    const auto view = result.estimate(method_it->second);
    std::cout << method_it->second << " active=" << view.active.size()
              << " wn=" << format_double(result.wn) << "\n";
  }
  echo += "intercept = " + std::string(fit.no_intercept ? "false" : "true") +
          "\nstandardize = " + std::string(fit.standardize ? "true" : "false") +
          "\n";

  prepare_out(flags.out_dir);
  write_text_file(out_path(flags, "config-echo.ini"), echo);
  write_text_file(out_path(flags, "fit.json"), report.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-shrinkage sparse regression toolkit"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  CLI::App* sim = app.add_subcommand("simulate", "Run a Monte Carlo grid");
  add_common(sim, sim_flags, true);

  CommonFlags eval_flags;
  std::string eval_data;
  std::string eval_response = "y";
  bool eval_fast = false;
  CLI::App* eval = app.add_subcommand("evaluate", "Bootstrap prediction error");
  eval->add_option("data", eval_data, "CSV dataset")->required();
  eval->add_option("--response-column", eval_response, "Response column name");
  eval->add_flag("--fast", eval_fast, "Fit once per draw instead of per fold");
  add_common(eval, eval_flags, true);

  CommonFlags fit_common;
  FitFlags fit_flags;
  std::string fit_data;
  CLI::App* fit = app.add_subcommand("fit", "Fit one dataset");
  fit->add_option("data", fit_data, "CSV dataset")->required();
  fit->add_option("--method", fit_flags.method,
                  "lasso, alasso, ridge, S, PS, FS1, FS2, FS3");
  fit->add_option("--response-column", fit_flags.response, "Response column name");
  fit->add_option("--lambda", fit_flags.lambda, "Ridge penalty")
      ->each([&fit_flags](const std::string&) { fit_flags.lambda_set = true; });
  fit->add_option("--gamma", fit_flags.gamma, "Adaptive weight exponent");
  fit->add_option("--folds", fit_flags.folds, "CV folds");
  fit->add_flag("--standardize", fit_flags.standardize, "Standardize columns");
  fit->add_flag("--no-intercept", fit_flags.no_intercept, "Fit without intercept");
  add_common(fit, fit_common, false);

  CommonFlags theory_flags;
  CLI::App* theory = app.add_subcommand("theory-check", "Run conformance checks");
  add_common(theory, theory_flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error("config", e.what());
    return kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_flags);
    if (eval->parsed()) {
      return cmd_evaluate(eval_data, eval_response, eval_fast, eval_flags);
    }
    if (fit->parsed()) return cmd_fit(fit_data, fit_flags, fit_common);
    if (theory->parsed()) return cmd_theory_check(theory_flags);
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    emit_error("config", e.what());
    return kExitConfig;
  } catch (const RunError& e) {
    emit_error("run", e.what());
    return kExitRun;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return kExitRun;
  }
  return 0;
}
