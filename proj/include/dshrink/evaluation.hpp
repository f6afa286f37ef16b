#pragma once

#include "dshrink/pipeline.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace dshrink {

struct PredModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
};

using FitProcedure = std::function<PredModel(const Dataset&)>;

// Mean held-out squared prediction error over K folds, refitting the given
// procedure on each training part. Folds come from the seed alone.
double cv_prediction_error(const Dataset& data, const FitProcedure& fit,
                           int folds, std::uint64_t seed);

struct BootstrapConfig {
  int draws = 1000;
  int folds = 5;
  std::uint64_t seed = 1;
  bool fast = false;          // fit once per draw instead of per training fold
  bool retain_draws = true;   // keep per-draw PEs for box-plot output
  int workers = 0;
  PipelineOptions pipeline;   // intercept on, standardize off by default

  void validate() const;
};

struct BootstrapReport {
  std::vector<std::string> estimators;
  std::map<std::string, double> mean_pe;
  std::map<std::string, double> rpe;  // mean_pe(LASSO) / mean_pe(estimator)
  std::map<std::string, std::vector<double>> draw_pe;  // when retained
  int attempted = 0;
  int failed = 0;
  std::map<std::string, int> selected_counts;  // active sizes on the full data
  std::vector<std::string> notes;
};

// Case-resampling bootstrap: each draw resamples n rows with replacement, runs
// the double-shrinkage pipeline, and scores K-fold CV prediction error for
// every estimator. Honest mode (default) refits the pipeline inside each
// training fold; fast mode fits once per draw and scores on the original data.
// Draw failures are recorded and excluded; >10% raises RunError, as does a
// degenerate (near-zero) baseline PE.
BootstrapReport bootstrap_rpe(const Dataset& data, const BootstrapConfig& config);

}  // namespace dshrink
