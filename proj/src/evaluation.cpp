#include "dshrink/evaluation.hpp"

#include "dshrink/parallel.hpp"
#include "dshrink/rng.hpp"

#include <algorithm>
#include <cmath>

namespace dshrink {

namespace {

constexpr std::uint64_t kStreamFolds = 0x466f6c6473ull;
constexpr std::uint64_t kStreamResample = 0x426f6f74ull;
constexpr std::uint64_t kStreamDrawCv = 0x44726177ull;

double fold_mse(const Dataset& data, const std::vector<int>& rows,
                const Eigen::VectorXd& coef, double intercept) {
  double err = 0.0;
  for (const int i : rows) {
    const double pred = data.X.row(i).dot(coef) + intercept;
    const double d = data.y[i] - pred;
    err += d * d;
  }
  return err / double(rows.size());
}

// K-fold CV prediction error of every pipeline estimator at once, sharing the
// fold assignment and the per-fold pipeline runs.
std::map<std::string, double> pipeline_cv_pe(const Dataset& data,
                                             const PipelineOptions& popts,
                                             int folds, std::uint64_t seed) {
  const auto assignment =
      make_folds(data.n(), folds, derive_stream(seed, kStreamFolds));
  std::map<std::string, double> pe;
  for (const char* name : kEstimatorNames) pe[name] = 0.0;

  std::vector<char> in_fold(size_t(data.n()), 0);
  for (int k = 0; k < folds; ++k) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (const int row : assignment[size_t(k)]) in_fold[size_t(row)] = 1;
    std::vector<int> train_rows;
    train_rows.reserve(size_t(data.n()));
    for (int i = 0; i < int(data.n()); ++i)
      if (!in_fold[size_t(i)]) train_rows.push_back(i);

    const Dataset train = subset_rows(data, train_rows);
    const PipelineResult pr =
        run_pipeline(train, popts, derive_stream(seed, std::uint64_t(k) + 1));
    for (const char* name : kEstimatorNames) {
      const EstimateView ev = pr.estimate(name);
      pe[name] += fold_mse(data, assignment[size_t(k)], ev.coefficients,
                           ev.intercept);
    }
  }
  for (auto& [name, value] : pe) value /= double(folds);
  return pe;
}

}  // namespace

double cv_prediction_error(const Dataset& data, const FitProcedure& fit,
                           int folds, std::uint64_t seed) {
  data.validate();
  const auto assignment =
      make_folds(data.n(), folds, derive_stream(seed, kStreamFolds));
  std::vector<char> in_fold(size_t(data.n()), 0);
  double pe = 0.0;
  for (int k = 0; k < folds; ++k) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (const int row : assignment[size_t(k)]) in_fold[size_t(row)] = 1;
    std::vector<int> train_rows;
    for (int i = 0; i < int(data.n()); ++i)
      if (!in_fold[size_t(i)]) train_rows.push_back(i);
    const PredModel model = fit(subset_rows(data, train_rows));
    if (model.coefficients.size() != data.p())
      throw std::invalid_argument("fit procedure returned wrong length");
    pe += fold_mse(data, assignment[size_t(k)], model.coefficients,
                   model.intercept);
  }
  return pe / double(folds);
}

void BootstrapConfig::validate() const {
  if (draws < 1) throw ConfigError("draws must be >= 1");
  if (folds < 2) throw ConfigError("folds must be >= 2");
}

BootstrapReport bootstrap_rpe(const Dataset& data, const BootstrapConfig& cfg) {
  data.validate();
  cfg.validate();
  const Eigen::Index n = data.n();
  if (Eigen::Index(cfg.folds) > n) throw ConfigError("more folds than rows");

  BootstrapReport report;
  report.estimators.assign(kEstimatorNames.begin(), kEstimatorNames.end());
  report.attempted = cfg.draws;

  struct DrawOutcome {
    bool ok = false;
    std::string error;
    std::map<std::string, double> pe;
  };
  std::vector<DrawOutcome> outcomes(static_cast<std::size_t>(cfg.draws));

  parallel_for(cfg.draws, cfg.workers, [&](int d) {
    DrawOutcome& oc = outcomes[size_t(d)];
    CounterRng rng(cfg.seed, derive_stream(kStreamResample, std::uint64_t(d)));
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (auto& r : rows) r = int(rng.below(std::uint64_t(n)));
    const Dataset draw = subset_rows(data, rows);
    const std::uint64_t draw_seed =
        derive_stream(cfg.seed, kStreamDrawCv, std::uint64_t(d));
    try {
      if (cfg.fast) {
        const PipelineResult pr = run_pipeline(draw, cfg.pipeline, draw_seed);
        for (const char* name : kEstimatorNames) {
          const EstimateView ev = pr.estimate(name);
          const Eigen::VectorXd pred =
              (data.X * ev.coefficients).array() + ev.intercept;
          oc.pe[name] = (data.y - pred).squaredNorm() / double(n);
        }
      } else {
        oc.pe = pipeline_cv_pe(draw, cfg.pipeline, cfg.folds, draw_seed);
      }
      oc.ok = true;
    } catch (const RunError& e) {
      oc.error = e.what();
    }
  });

  std::map<std::string, double> sums;
  for (const char* name : kEstimatorNames) sums[name] = 0.0;
  for (const DrawOutcome& oc : outcomes) {
    if (!oc.ok) {
      ++report.failed;
      if (report.notes.size() < 5)
        report.notes.push_back("draw failed: " + oc.error);
      continue;
    }
    for (const char* name : kEstimatorNames) {
      sums[name] += oc.pe.at(name);
      if (cfg.retain_draws) report.draw_pe[name].push_back(oc.pe.at(name));
    }
  }
  if (report.failed * 10 > report.attempted)
    throw RunError(std::to_string(report.failed) + " of " +
                   std::to_string(report.attempted) + " bootstrap draws failed");
  const int ok = report.attempted - report.failed;
  if (ok == 0) throw RunError("all bootstrap draws failed");
  for (const char* name : kEstimatorNames)
    report.mean_pe[name] = sums[name] / double(ok);

  // Ratios are meaningless when the fits explain y to numerical exhaustion,
  // so the floor scales with the response rather than sitting at an absolute
  // epsilon a shrunken noise-free fit can still clear.
  const double pe_floor = 1e-7 * (data.y.squaredNorm() / double(data.n()));
  const double base = report.mean_pe.at("LASSO");
  if (!(base > pe_floor)) throw RunError("degenerate PE");
  for (const char* name : kEstimatorNames) {
    const double pe = report.mean_pe.at(name);
    if (!(pe > pe_floor)) throw RunError("degenerate PE");
    report.rpe[name] = base / pe;
  }
  report.rpe["LASSO"] = 1.0;

  // Active-set sizes of a single full-data pipeline run, for the report header.
  try {
    const PipelineResult full =
        run_pipeline(data, cfg.pipeline, derive_stream(cfg.seed, kStreamDrawCv));
    for (const char* name : kEstimatorNames)
      report.selected_counts[name] = int(full.estimate(name).active.size());
  } catch (const RunError& e) {
    report.notes.push_back(std::string("full-data fit failed: ") + e.what());
  }
  return report;
}

}  // namespace dshrink
