#include "dshrink/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dshrink {

EstimateView PipelineResult::estimate(const std::string& name) const {
  EstimateView ev;
  if (name == "LASSO") {
    ev.coefficients = lasso.coefficients;
    ev.intercept = lasso.intercept;
    ev.active = lasso.active_set;
    return ev;
  }
  if (name == "ALASSO") {
    ev.coefficients = alasso.coefficients;
    ev.intercept = alasso.intercept;
    ev.active = alasso.active_set;
    return ev;
  }
  const ShrinkageFit& sf = shrinks.at(name);
  ev.coefficients = sf.full_beta;
  // The intercepts combine with the same factor as the slopes, so the variant
  // converges to the OF prediction rule as the factor approaches 1.
  ev.intercept = sf.fallback
                     ? alasso.intercept
                     : alasso.intercept +
                           sf.factor * (lasso.intercept - alasso.intercept);
  ev.active.reserve(partition.s1.size() + partition.s2.size());
  ev.active = partition.s1;
  ev.active.insert(ev.active.end(), partition.s2.begin(), partition.s2.end());
  std::sort(ev.active.begin(), ev.active.end());
  return ev;
}

PipelineResult run_pipeline(const Dataset& data, const PipelineOptions& opts,
                            std::uint64_t seed) {
  data.validate();
  if (opts.cv_folds < 2) throw std::invalid_argument("need at least two folds");

  PipelineResult pr;
  const CvFit of = cv_fit(data, Method::kLasso, opts.cv_folds, opts.lasso_rule,
                          opts.solver, seed);
  pr.lasso = of.fit;

  FitResult pilot;
  if (opts.pilot == PilotKind::kCvLasso) {
    pilot = opts.lasso_rule == opts.cv_rule
                ? of.fit
                : fit_lasso(data, of.selection.selected(opts.cv_rule),
                            opts.solver);
  } else {
    pilot = fit_ridge(data, opts.ridge_pilot_lambda, opts.solver);
    pr.notes.push_back("ridge pilot at lambda " +
                       std::to_string(opts.ridge_pilot_lambda));
  }
  const CvFit uf = cv_fit(data, opts.cv_folds, opts.cv_rule, opts.solver, seed,
                          opts.gamma, pilot);
  pr.alasso = uf.fit;

  pr.partition = partition_supports(pr.lasso, pr.alasso, int(data.p()));
  for (const auto& w : pr.partition.warnings) pr.notes.push_back(w);

  const int p1 = pr.partition.p1();
  Eigen::VectorXd beta1_uf(p1), beta1_of(p1);
  for (int k = 0; k < p1; ++k) {
    beta1_uf[k] = pr.alasso.coefficients[pr.partition.s1[size_t(k)]];
    beta1_of[k] = pr.lasso.coefficients[pr.partition.s1[size_t(k)]];
  }

  pr.sigma2 = residual_variance(data, pr.partition, beta1_uf, pr.alasso.intercept);
  const WeightStatistic ws =
      compute_wn(data, pr.partition, pr.sigma2, opts.solver.intercept);
  pr.wn = ws.wn;
  pr.beta2_lse = ws.beta2_lse;

  ShrinkageInputs in;
  in.beta1_uf = beta1_uf;
  in.beta1_of = beta1_of;
  in.wn = pr.wn;
  in.sigma2_hat = pr.sigma2;
  in.beta2_lse = pr.beta2_lse;
  for (const ShrinkVariant v : kAllVariants) {
    const std::string name = variant_name(v);
    try {
      pr.shrinks[name] = shrink(in, v, pr.partition.p2(), pr.partition,
                                int(data.p()));
    } catch (const RunError& e) {
      ShrinkageFit fb;
      fb.variant = v;
      fb.factor = std::numeric_limits<double>::quiet_NaN();
      fb.beta1 = beta1_uf;
      fb.full_beta = Eigen::VectorXd::Zero(data.p());
      for (int k = 0; k < p1; ++k)
        fb.full_beta[pr.partition.s1[size_t(k)]] = beta1_uf[k];
      fb.wn = pr.wn;
      fb.fallback = true;
      fb.warnings.push_back(std::string("fallback to the UF estimate: ") +
                            e.what());
      pr.shrinks[name] = fb;
      ++pr.fallback_count;
      pr.notes.push_back(name + ": fallback to the UF estimate (" + e.what() +
                         ")");
    }
  }
  return pr;
}

}  // namespace dshrink
