#include "dshrink/simulation.hpp"

#include "dshrink/csv.hpp"
#include "dshrink/parallel.hpp"
#include "dshrink/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace dshrink {

namespace {

constexpr std::uint64_t kStreamDesign = 0x44657369676eull;
constexpr std::uint64_t kStreamNoise = 0x4e6f697365ull;
constexpr std::uint64_t kStreamPipeline = 0x50697065ull;
constexpr std::uint64_t kStreamSubmodel = 0x5375626d6f64ull;

std::uint64_t delta_bits(double delta) { return std::bit_cast<std::uint64_t>(delta); }

struct RepOutcome {
  bool ok = false;
  std::string error;
  std::map<std::string, double> sqerr;
  std::map<std::string, int> tp, fp;
  std::map<std::string, std::vector<int>> active;
  std::map<std::string, bool> fallback;
  double max_kkt_converged = 0.0;
};

Dataset strong_block_data(const Dataset& data, int p1) {
  Dataset out;
  out.X = data.X.leftCols(p1);
  out.y = data.y;
  return out;
}

// Scored estimators follow the generating layout: the permissive fit runs on
// every column, the aggressive fit on the strong block alone, and the weight
// statistic on the weak block. The free-running full-column fits feed the
// TP/FP and selection-frequency accounting.
RepOutcome run_replication(const SimulationConfig& cfg, int rep, double delta) {
  RepOutcome out;
  auto [data, beta_true] = gen_dataset(cfg, rep, delta);
  const std::uint64_t fit_seed = derive_stream(
      derive_stream(cfg.seed, kStreamPipeline), std::uint64_t(rep),
      delta_bits(delta));
  const PipelineOptions& po = cfg.pipeline;
  try {
    const CvFit of = cv_fit(data, Method::kLasso, po.cv_folds, po.lasso_rule,
                            po.solver, fit_seed);
    const FitResult sel_pilot =
        po.lasso_rule == po.cv_rule
            ? of.fit
            : fit_lasso(data, of.selection.selected(po.cv_rule), po.solver);
    const CvFit free_alasso = cv_fit(data, po.cv_folds, po.cv_rule, po.solver,
                                     fit_seed, po.gamma, sel_pilot);

    const Dataset strong = strong_block_data(data, cfg.p1);
    const std::uint64_t sub_seed = derive_stream(fit_seed, kStreamSubmodel);
    CvFit uf;
    if (po.pilot == PilotKind::kCvLasso) {
      uf = cv_fit(strong, Method::kAlasso, po.cv_folds, po.cv_rule, po.solver,
                  sub_seed, po.gamma);
    } else {
      const FitResult ridge_pilot =
          fit_ridge(strong, po.ridge_pilot_lambda, po.solver);
      uf = cv_fit(strong, po.cv_folds, po.cv_rule, po.solver, sub_seed,
                  po.gamma, ridge_pilot);
    }

    SupportPartition part;
    for (int j = 0; j < cfg.p1; ++j) part.s1.push_back(j);
    for (int j = 0; j < cfg.p2; ++j) part.s2.push_back(cfg.p1 + j);
    for (int j = cfg.p1 + cfg.p2; j < cfg.p(); ++j) part.s3.push_back(j);

    const Eigen::VectorXd beta1_uf = uf.fit.coefficients;
    Eigen::VectorXd beta1_of(cfg.p1);
    for (int k = 0; k < cfg.p1; ++k) beta1_of[k] = of.fit.coefficients[k];

    // Noise variance from the permissive fit, the largest model in play;
    // the aggressive submodel residual absorbs the weak-block signal and
    // would deflate the weight statistic under strong weak signals.
    Eigen::VectorXd of_resid = data.y - data.X * of.fit.coefficients;
    of_resid.array() -= of.fit.intercept;
    const double sigma2 = of_resid.squaredNorm() / double(data.n() - 1);
    ShrinkageInputs in;
    in.beta1_uf = beta1_uf;
    in.beta1_of = beta1_of;
    in.sigma2_hat = sigma2;
    if (cfg.p2 > 0) {
      const WeightStatistic ws =
          compute_wn(data, part, sigma2, po.solver.intercept);
      in.wn = ws.wn;
      in.beta2_lse = ws.beta2_lse;
    }

    Eigen::VectorXd uf_full = Eigen::VectorXd::Zero(cfg.p());
    uf_full.head(cfg.p1) = beta1_uf;
    std::map<std::string, Eigen::VectorXd> scored;
    scored["LASSO"] = of.fit.coefficients;
    scored["ALASSO"] = uf_full;
    for (const ShrinkVariant v : kAllVariants) {
      const std::string name = variant_name(v);
      try {
        scored[name] = shrink(in, v, cfg.p2, part, cfg.p()).full_beta;
        out.fallback[name] = false;
      } catch (const RunError&) {
        scored[name] = uf_full;
        out.fallback[name] = true;
      }
    }

    for (const char* name : kEstimatorNames) {
      out.sqerr[name] =
          estimator_mse_against_truth(scored.at(name), cfg.p1, beta_true);
      const std::vector<int>& active = std::string(name) == "ALASSO"
                                           ? free_alasso.fit.active_set
                                           : of.fit.active_set;
      int tp = 0, fp = 0;
      for (const int j : active) {
        if (j < cfg.p1) {
          ++tp;
        } else if (beta_true[j] == 0.0) {
          ++fp;
        }
      }
      out.tp[name] = tp;
      out.fp[name] = fp;
      out.active[name] = active;
    }

    for (const FitResult* fr : std::initializer_list<const FitResult*>{
             &of.fit, &sel_pilot, &free_alasso.fit, &uf.fit})
      if (fr->converged)
        out.max_kkt_converged =
            std::max(out.max_kkt_converged, fr->kkt_violation);
    out.ok = true;
  } catch (const RunError& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

void SimulationConfig::validate() const {
  if (n < 2) throw ConfigError("n must be >= 2");
  if (p1 < 1 || p2 < 0 || p3 < 0) throw ConfigError("block sizes invalid");
  if (p1 + p2 > n) throw ConfigError("p1 + p2 must not exceed n");
  if (!(strong > 0)) throw ConfigError("strong magnitude must be > 0");
  if (replications < 2) throw ConfigError("replications must be >= 2");
  if (delta_grid.empty()) throw ConfigError("delta grid must be nonempty");
  for (const double d : delta_grid)
    if (!(d >= 0)) throw ConfigError("delta values must be >= 0");
  if (!std::is_sorted(delta_grid.begin(), delta_grid.end()))
    throw ConfigError("delta grid must be sorted ascending");
  if (pipeline.cv_folds < 2 || pipeline.cv_folds > n)
    throw ConfigError("cv folds must be in [2, n]");
}

std::pair<Dataset, Eigen::VectorXd> gen_dataset(const SimulationConfig& cfg,
                                                int replication, double delta) {
  const int p = cfg.p();
  Dataset data;
  data.X.resize(cfg.n, p);
  data.y.resize(cfg.n);

  CounterRng xr(cfg.seed, derive_stream(kStreamDesign, std::uint64_t(replication),
                                        delta_bits(delta)));
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < cfg.n; ++i) {
      const double chi = xr.normal();
      data.X(i, j) = chi * chi + xr.normal();
    }
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta.head(cfg.p1).setConstant(cfg.strong);
  beta.segment(cfg.p1, cfg.p2).setConstant(delta);

  CounterRng er(cfg.seed, derive_stream(kStreamNoise, std::uint64_t(replication),
                                        delta_bits(delta)));
  data.y = data.X * beta;
  for (int i = 0; i < cfg.n; ++i) data.y[i] += er.normal();
  return {std::move(data), std::move(beta)};
}

double estimator_mse_against_truth(const Eigen::VectorXd& estimate, int p1_true,
                                   const Eigen::VectorXd& beta_true) {
  if (estimate.size() != beta_true.size())
    throw std::invalid_argument("estimate length does not match beta_true");
  if (p1_true < 1 || Eigen::Index(p1_true) > beta_true.size())
    throw std::invalid_argument("p1_true out of range");
  return (estimate.head(p1_true) - beta_true.head(p1_true)).squaredNorm();
}

SimulationReport run_grid(const SimulationConfig& cfg) {
  cfg.validate();
  SimulationReport report;
  report.config = cfg;
  report.estimators.assign(kEstimatorNames.begin(), kEstimatorNames.end());

  for (const double delta : cfg.delta_grid) {
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.replications));
    parallel_for(cfg.replications, cfg.workers,
                 [&](int r) { outcomes[size_t(r)] = run_replication(cfg, r, delta); });

    DeltaCell cell;
    cell.delta = delta;
    cell.attempted = cfg.replications;
    const int truth_zero = cfg.p() - cfg.p1 - (delta > 0 ? cfg.p2 : 0);

    std::map<std::string, std::vector<int>> sel_counts;
    for (const char* name : kEstimatorNames) {
      cell.sqerr[name] = {};
      sel_counts[name].assign(size_t(cfg.p()), 0);
    }
    for (const ShrinkVariant v : kAllVariants) cell.fallbacks[variant_name(v)] = 0;

    // Sequential reduction in replication order keeps aggregates independent
    // of worker scheduling.
    for (const RepOutcome& oc : outcomes) {
      if (!oc.ok) {
        ++cell.failed;
        if (cell.failure_messages.size() < 5)
          cell.failure_messages.push_back(oc.error);
        continue;
      }
      for (const char* name : kEstimatorNames) {
        cell.sqerr[name].push_back(oc.sqerr.at(name));
        cell.tp_mean[name] += oc.tp.at(name);
        cell.fp_mean[name] += oc.fp.at(name);
        for (const int j : oc.active.at(name)) sel_counts[name][size_t(j)] += 1;
      }
      for (const ShrinkVariant v : kAllVariants) {
        const std::string name = variant_name(v);
        if (oc.fallback.at(name)) ++cell.fallbacks[name];
      }
      cell.max_kkt_converged =
          std::max(cell.max_kkt_converged, oc.max_kkt_converged);
    }

    if (cell.failed * 10 > cell.attempted) {
      std::string detail = cell.failure_messages.empty()
                               ? std::string("no diagnostics")
                               : cell.failure_messages.front();
      throw RunError("delta " + format_double(delta) + ": " +
                     std::to_string(cell.failed) + " of " +
                     std::to_string(cell.attempted) +
                     " replications failed (" + detail + ")");
    }
    const int ok = cell.attempted - cell.failed;
    for (const char* name : kEstimatorNames) {
      double sum = 0.0;
      for (const double v : cell.sqerr[name]) sum += v;
      cell.mse[name] = sum / double(ok);
      cell.tp_mean[name] /= double(ok);
      cell.fp_mean[name] /= double(ok);
      cell.tp_pct[name] = 100.0 * cell.tp_mean[name] / cfg.p1;
      cell.fp_pct[name] =
          truth_zero > 0 ? 100.0 * cell.fp_mean[name] / truth_zero : 0.0;
      cell.selection_freq[name].resize(size_t(cfg.p()));
      for (int j = 0; j < cfg.p(); ++j)
        cell.selection_freq[name][size_t(j)] =
            double(sel_counts[name][size_t(j)]) / double(ok);
    }
    const double base = cell.mse.at("LASSO");
    for (const char* name : kEstimatorNames)
      cell.rmse[name] = base / cell.mse.at(name);
    cell.rmse["LASSO"] = 1.0;
    report.cells.push_back(std::move(cell));
  }
  return report;
}

}  // namespace dshrink
