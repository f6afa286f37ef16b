#pragma once

#include "dshrink/pipeline.hpp"

#include <map>
#include <string>
#include <vector>

namespace dshrink {

struct SimulationConfig {
  int n = 150;
  int p1 = 4;   // strong block size in the generating model
  int p2 = 4;   // weak block size
  int p3 = 200; // zero block size
  double strong = 1.0;                 // strong-signal magnitude
  std::vector<double> delta_grid = {0.0};  // weak-signal magnitudes, ascending
  int replications = 250;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  PipelineOptions pipeline;

  SimulationConfig() { pipeline.solver.intercept = false; }
  int p() const { return p1 + p2 + p3; }
  void validate() const;
};

// Data from the benchmark model: x_ij = xi1^2 + xi2 with xi1, xi2 iid standard
// normal (mean 1, variance 3), y = X beta + eps, beta = (strong repeated p1,
// delta repeated p2, zeros). Fully determined by (seed, replication, delta).
std::pair<Dataset, Eigen::VectorXd> gen_dataset(const SimulationConfig& config,
                                                int replication, double delta);

// Squared error of the estimate on the true strong block (the first p1_true
// coordinates of the generating layout).
double estimator_mse_against_truth(const Eigen::VectorXd& estimate, int p1_true,
                                   const Eigen::VectorXd& beta_true);

struct DeltaCell {
  double delta = 0.0;
  int attempted = 0;
  int failed = 0;
  std::map<std::string, double> mse;      // per estimator, over ok reps
  std::map<std::string, double> rmse;     // mse(LASSO) / mse(estimator)
  std::map<std::string, double> tp_mean, fp_mean, tp_pct, fp_pct;
  std::map<std::string, int> fallbacks;   // per shrink variant
  std::map<std::string, std::vector<double>> sqerr;  // per-rep squared errors
  std::map<std::string, std::vector<double>> selection_freq;  // per estimator, length p
  std::vector<std::string> failure_messages;  // first few, for diagnostics
  double max_kkt_converged = 0.0;  // worst certificate among converged fits seen
};

struct SimulationReport {
  SimulationConfig config;
  std::vector<std::string> estimators;  // fixed output order
  std::vector<DeltaCell> cells;         // one per delta, grid order
};

// Runs the full replication grid. Replication failures (no strong signals,
// oversized restricted design, singular blocks) are recorded and excluded;
// more than 10% failures in a cell raises RunError.
SimulationReport run_grid(const SimulationConfig& config);

}  // namespace dshrink
