#include "dshrink/report_io.hpp"

#include "dshrink/csv.hpp"

#include <cstdio>
#include <fstream>

namespace dshrink {

namespace {

std::string round3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

ordered_json map_json(const std::map<std::string, double>& values,
                      const std::vector<std::string>& order) {
  ordered_json out = ordered_json::object();
  for (const auto& name : order) {
    const auto it = values.find(name);
    if (it != values.end()) out[name] = it->second;
  }
  return out;
}

ordered_json solver_json(const SolverOptions& opts) {
  ordered_json out = ordered_json::object();
  out["tolerance"] = opts.tolerance;
  out["max_sweeps"] = opts.max_sweeps;
  out["kkt_tol"] = opts.kkt_tol;
  out["intercept"] = opts.intercept;
  out["standardize"] = opts.standardize;
  out["path_length"] = opts.path_length;
  out["path_ratio"] = opts.path_ratio;
  return out;
}

ordered_json cv_json(const PipelineOptions& opts) {
  ordered_json out = ordered_json::object();
  out["folds"] = opts.cv_folds;
  out["rule"] = opts.cv_rule == CvRule::kOneSe ? "1se" : "min";
  out["gamma"] = opts.gamma;
  out["pilot"] = opts.pilot == PilotKind::kRidge ? "ridge" : "cv-lasso";
  out["ridge_pilot_lambda"] = opts.ridge_pilot_lambda;
  return out;
}

std::vector<std::string> names_at(const Dataset& data,
                                  const std::vector<int>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (int j : idx) out.push_back(data.names.at(j));
  return out;
}

ordered_json estimate_json(const EstimateView& view, const Dataset& data) {
  ordered_json out = ordered_json::object();
  out["intercept"] = view.intercept;
  out["active_count"] = view.active.size();
  out["active"] = names_at(data, view.active);
  ordered_json coef = ordered_json::object();
  for (int j : view.active) coef[data.names.at(j)] = view.coefficients[j];
  out["coefficients"] = coef;
  return out;
}

}  // namespace

std::string simulation_rmse_csv(const SimulationReport& report) {
  std::string out = "delta,estimator,mse,rmse\n";
  for (const auto& cell : report.cells) {
    for (const auto& est : report.estimators) {
      out += csv_row({format_double(cell.delta), est,
                      format_double(cell.mse.at(est)),
                      format_double(cell.rmse.at(est))});
    }
  }
  return out;
}

std::string simulation_tpfp_csv(const SimulationReport& report) {
  std::string out = "delta,estimator,tp_mean,fp_mean,tp_pct,fp_pct\n";
  for (const auto& cell : report.cells) {
    for (const auto& est : report.estimators) {
      out += csv_row({format_double(cell.delta), est,
                      format_double(cell.tp_mean.at(est)),
                      format_double(cell.fp_mean.at(est)),
                      format_double(cell.tp_pct.at(est)),
                      format_double(cell.fp_pct.at(est))});
    }
  }
  return out;
}

std::string simulation_selection_csv(const SimulationReport& report) {
  std::string out = "predictor_index,method,delta,frequency\n";
  for (const auto& cell : report.cells) {
    for (const auto& est : report.estimators) {
      const auto& freq = cell.selection_freq.at(est);
      for (std::size_t j = 0; j < freq.size(); ++j) {
        out += csv_row({std::to_string(j), est, format_double(cell.delta),
                        format_double(freq[j])});
      }
    }
  }
  return out;
}

std::string bootstrap_draws_csv(const BootstrapReport& report) {
  std::string out = "draw,method,pe\n";
  for (const auto& est : report.estimators) {
    const auto it = report.draw_pe.find(est);
    if (it == report.draw_pe.end()) continue;
    for (std::size_t d = 0; d < it->second.size(); ++d) {
      out += csv_row({std::to_string(d), est, format_double(it->second[d])});
    }
  }
  return out;
}

ordered_json simulation_report_json(const SimulationReport& report) {
  ordered_json out = ordered_json::object();
  out["command"] = "simulate";
  ordered_json cfg = ordered_json::object();
  cfg["n"] = report.config.n;
  cfg["p1"] = report.config.p1;
  cfg["p2"] = report.config.p2;
  cfg["p3"] = report.config.p3;
  cfg["strong"] = report.config.strong;
  cfg["delta_grid"] = report.config.delta_grid;
  cfg["replications"] = report.config.replications;
  cfg["seed"] = report.config.seed;
  cfg["solver"] = solver_json(report.config.pipeline.solver);
  cfg["cv"] = cv_json(report.config.pipeline);
  out["config"] = cfg;
  out["estimators"] = report.estimators;

  ordered_json cells = ordered_json::array();
  for (const auto& cell : report.cells) {
    ordered_json c = ordered_json::object();
    c["delta"] = cell.delta;
    c["attempted"] = cell.attempted;
    c["failed"] = cell.failed;
    c["max_kkt_converged"] = cell.max_kkt_converged;
    c["mse"] = map_json(cell.mse, report.estimators);
    c["rmse"] = map_json(cell.rmse, report.estimators);
    c["tp_mean"] = map_json(cell.tp_mean, report.estimators);
    c["fp_mean"] = map_json(cell.fp_mean, report.estimators);
    c["tp_pct"] = map_json(cell.tp_pct, report.estimators);
    c["fp_pct"] = map_json(cell.fp_pct, report.estimators);
    ordered_json fb = ordered_json::object();
    for (ShrinkVariant v : kAllVariants) {
      const std::string name = variant_name(v);
      const auto it = cell.fallbacks.find(name);
      fb[name] = it != cell.fallbacks.end() ? it->second : 0;
    }
    c["fallbacks"] = fb;
    c["failure_messages"] = cell.failure_messages;
    cells.push_back(std::move(c));
  }
  out["cells"] = cells;
  return out;
}

ordered_json bootstrap_report_json(const BootstrapReport& report,
                                   const BootstrapConfig& config) {
  ordered_json out = ordered_json::object();
  out["command"] = "evaluate";
  ordered_json cfg = ordered_json::object();
  cfg["draws"] = config.draws;
  cfg["folds"] = config.folds;
  cfg["seed"] = config.seed;
  cfg["fast"] = config.fast;
  cfg["retain_draws"] = config.retain_draws;
  cfg["solver"] = solver_json(config.pipeline.solver);
  cfg["cv"] = cv_json(config.pipeline);
  out["config"] = cfg;
  out["estimators"] = report.estimators;
  out["attempted"] = report.attempted;
  out["failed"] = report.failed;
  out["mean_pe"] = map_json(report.mean_pe, report.estimators);
  out["rpe"] = map_json(report.rpe, report.estimators);
  ordered_json sel = ordered_json::object();
  for (const auto& est : report.estimators) {
    const auto it = report.selected_counts.find(est);
    if (it != report.selected_counts.end()) sel[est] = it->second;
  }
  out["selected_counts"] = sel;
  out["notes"] = report.notes;
  return out;
}

ordered_json theory_report_json(const TheoryReport& report,
                                const TheoryConfig& config) {
  ordered_json out = ordered_json::object();
  out["command"] = "theory-check";
  out["pass"] = report.pass;
  out["seed"] = config.seed;

  ordered_json oracle = ordered_json::object();
  oracle["instances"] = report.oracle_instances;
  oracle["max_gap"] = report.oracle_max_gap;
  oracle["pass"] = report.oracle_pass;
  out["oracle"] = oracle;

  ordered_json bound = ordered_json::object();
  bound["instances"] = report.bound_instances;
  bound["lambdas"] = report.bound_lambdas;
  bound["checked"] = report.bound_checked;
  bound["skipped"] = report.bound_skipped;
  bound["identity_violations"] = report.identity_violations;
  bound["bound_violations"] = report.bound_violations;
  bound["max_identity_gap"] = report.max_identity_gap;
  out["difference_bound"] = bound;

  ordered_json dom = ordered_json::object();
  for (ShrinkVariant v : kAllVariants) {
    const std::string name = variant_name(v);
    const auto it = report.dominance.find(name);
    if (it == report.dominance.end()) continue;
    ordered_json d = ordered_json::object();
    d["checked"] = it->second.checked;
    d["skipped"] = it->second.skipped;
    d["holds"] = it->second.holds;
    d["frequency"] = it->second.frequency;
    dom[name] = d;
  }
  out["dominance"] = dom;
  out["sign_sum_negative_fraction"] = report.sign_sum_negative_fraction;

  ordered_json ratio = ordered_json::object();
  ratio["grid_points"] = report.ratio_grid_points;
  ratio["fs1_violations"] = report.fs1_ratio_violations;
  ratio["fs3_violations"] = report.fs3_ratio_violations;
  out["ratio_monotonicity"] = ratio;

  ordered_json trend = ordered_json::object();
  ordered_json points = ordered_json::array();
  for (const auto& pt : report.alpha_trend) {
    ordered_json p = ordered_json::object();
    p["n"] = pt.n;
    p["mean_abs_dev"] = pt.mean_abs_dev;
    points.push_back(std::move(p));
  }
  trend["points"] = points;
  trend["decreasing"] = report.alpha_trend_decreasing;
  out["alpha_trend"] = trend;

  ordered_json risk = ordered_json::object();
  for (ShrinkVariant v : kAllVariants) {
    const std::string name = variant_name(v);
    const auto it = report.risk.find(name);
    if (it == report.risk.end()) continue;
    ordered_json r = ordered_json::object();
    r["mean_diff"] = it->second.mean_diff;
    r["se"] = it->second.se;
    r["negative"] = it->second.negative;
    risk[name] = r;
  }
  out["risk"] = risk;
  return out;
}

ordered_json fit_report_json(const PipelineResult& result,
                             const std::string& method, const Dataset& data) {
  ordered_json out = ordered_json::object();
  out["command"] = "fit";
  out["method"] = method;
  out["n"] = data.n();
  out["p"] = data.p();

  ordered_json lasso = ordered_json::object();
  lasso["lambda"] = result.lasso.lambda;
  lasso["active_count"] = result.lasso.active_set.size();
  lasso["active"] = names_at(data, result.lasso.active_set);
  out["lasso"] = lasso;

  ordered_json alasso = ordered_json::object();
  alasso["lambda"] = result.alasso.lambda;
  if (result.alasso.gamma) alasso["gamma"] = *result.alasso.gamma;
  alasso["active_count"] = result.alasso.active_set.size();
  alasso["active"] = names_at(data, result.alasso.active_set);
  out["alasso"] = alasso;

  ordered_json part = ordered_json::object();
  part["s1"] = names_at(data, result.partition.s1);
  part["s2"] = names_at(data, result.partition.s2);
  part["s3_count"] = result.partition.p3();
  out["partition"] = part;
  out["sigma2"] = result.sigma2;
  out["wn"] = result.wn;

  ordered_json est = estimate_json(result.estimate(method), data);
  const auto shrink_it = result.shrinks.find(method);
  if (shrink_it != result.shrinks.end()) {
    est["factor"] = shrink_it->second.factor;
    est["fallback"] = shrink_it->second.fallback;
  }
  out["estimate"] = est;

  std::vector<std::string> warnings = result.notes;
  for (const auto& w : result.partition.warnings) warnings.push_back(w);
  if (shrink_it != result.shrinks.end()) {
    for (const auto& w : shrink_it->second.warnings) warnings.push_back(w);
  }
  out["warnings"] = warnings;
  return out;
}

ordered_json ridge_report_json(const FitResult& fit, const Dataset& data,
                               double lambda) {
  ordered_json out = ordered_json::object();
  out["command"] = "fit";
  out["method"] = "ridge";
  out["n"] = data.n();
  out["p"] = data.p();
  out["lambda"] = lambda;
  out["intercept"] = fit.intercept;
  out["kkt_violation"] = fit.kkt_violation;
  ordered_json coef = ordered_json::object();
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    coef[data.names.at(j)] = fit.coefficients[j];
  }
  out["coefficients"] = coef;
  out["warnings"] = fit.warnings;
  return out;
}

std::string simulation_summary(const SimulationReport& report) {
  std::string out;
  for (const auto& cell : report.cells) {
    out += "delta=" + round3(cell.delta) + " attempted=" +
           std::to_string(cell.attempted) + " failed=" +
           std::to_string(cell.failed) + "\n";
    for (const auto& est : report.estimators) {
      out += "  " + est + " rmse=" + round3(cell.rmse.at(est)) + " tp=" +
             round3(cell.tp_mean.at(est)) + " fp=" +
             round3(cell.fp_mean.at(est)) + "\n";
    }
  }
  return out;
}

std::string bootstrap_summary(const BootstrapReport& report) {
  std::string out = "draws=" + std::to_string(report.attempted) + " failed=" +
                    std::to_string(report.failed) + "\n";
  for (const auto& est : report.estimators) {
    out += "  " + est + " mean_pe=" + round3(report.mean_pe.at(est)) +
           " rpe=" + round3(report.rpe.at(est)) + "\n";
  }
  return out;
}

std::string theory_summary(const TheoryReport& report) {
  std::string out;
  out += std::string("oracle max gap ") + format_double(report.oracle_max_gap) +
         (report.oracle_pass ? " (pass)\n" : " (FAIL)\n");
  out += "difference bound: " + std::to_string(report.bound_checked) +
         " checked, " + std::to_string(report.bound_violations) +
         " violations, " + std::to_string(report.identity_violations) +
         " identity violations\n";
  out += "ratio monotonicity violations: fs1=" +
         std::to_string(report.fs1_ratio_violations) +
         " fs3=" + std::to_string(report.fs3_ratio_violations) + "\n";
  out += "alpha trend:";
  for (const auto& pt : report.alpha_trend) {
    out += " n=" + std::to_string(pt.n) + ":" + round3(pt.mean_abs_dev);
  }
  out += report.alpha_trend_decreasing ? " (decreasing)\n" : " (NOT decreasing)\n";
  for (const auto& [name, sum] : report.risk) {
    out += "risk " + name + ": mean_diff=" + round3(sum.mean_diff) + " se=" +
           round3(sum.se) + (sum.negative ? " (negative)\n" : "\n");
  }
  out += std::string("overall: ") + (report.pass ? "pass" : "FAIL") + "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot open output file: " + path);
  out << content;
  if (!out) throw RunError("failed writing output file: " + path);
}

}  // namespace dshrink
