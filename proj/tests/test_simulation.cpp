#include "dshrink/simulation.hpp"

#include "dshrink/report_io.hpp"

#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

using namespace dshrink;

namespace {

SimulationConfig smoke_config() {
  SimulationConfig cfg;
  cfg.n = 60;
  cfg.p1 = 2;
  cfg.p2 = 3;
  cfg.p3 = 8;
  cfg.strong = 1.0;
  cfg.delta_grid = {0.0, 0.4};
  cfg.replications = 3;
  cfg.seed = 7;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST_CASE("generated designs have the documented moments") {
  SimulationConfig cfg;
  cfg.n = 200;
  cfg.p1 = 4;
  cfg.p2 = 4;
  cfg.p3 = 60;
  const auto [data, beta] = gen_dataset(cfg, 0, 0.0);
  const double cells = double(data.X.size());
  const double mean = data.X.sum() / cells;
  const double var =
      (data.X.array() - mean).square().sum() / (cells - 1.0);
  // x = xi1^2 + xi2: mean 1, variance 3; generous sampling tolerance
  CHECK(std::abs(mean - 1.0) < 4.0 * std::sqrt(3.0 / cells));
  CHECK(std::abs(var - 3.0) < 0.25);

  const Eigen::VectorXd noise = data.y - data.X * beta;
  const double nm = noise.mean();
  const double nv =
      (noise.array() - nm).square().sum() / double(noise.size() - 1);
  CHECK(std::abs(nm) < 4.0 / std::sqrt(double(noise.size())));
  CHECK(std::abs(nv - 1.0) < 0.4);
}

TEST_CASE("generated coefficients follow the block layout") {
  SimulationConfig cfg;
  cfg.p1 = 3;
  cfg.p2 = 2;
  cfg.p3 = 5;
  cfg.strong = 2.0;
  const auto [data, beta] = gen_dataset(cfg, 1, 0.6);
  REQUIRE(beta.size() == 10);
  for (int j = 0; j < 3; ++j) CHECK(beta[j] == 2.0);
  for (int j = 3; j < 5; ++j) CHECK(beta[j] == 0.6);
  for (int j = 5; j < 10; ++j) CHECK(beta[j] == 0.0);
  CHECK(data.n() == cfg.n);
  CHECK(data.p() == 10);
}

TEST_CASE("dataset generation is pure in (seed, replication, delta)") {
  const SimulationConfig cfg = smoke_config();
  const auto [a, ba] = gen_dataset(cfg, 2, 0.4);
  const auto [b, bb] = gen_dataset(cfg, 2, 0.4);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  const auto [c, bc] = gen_dataset(cfg, 3, 0.4);
  CHECK(a.X != c.X);
  const auto [d, bd] = gen_dataset(cfg, 2, 0.0);
  CHECK(a.X != d.X);
}

TEST_CASE("strong-block squared error is computed on the leading block") {
  Eigen::VectorXd est(4), truth(4);
  est << 1.0, 2.0, 5.0, 5.0;
  truth << 0.0, 0.0, 9.0, 9.0;
  CHECK(estimator_mse_against_truth(est, 2, truth) == doctest::Approx(5.0));
  CHECK_THROWS_AS(estimator_mse_against_truth(est, 5, truth),
                  std::invalid_argument);
  Eigen::VectorXd short_est(2);
  short_est << 1.0, 1.0;
  CHECK_THROWS_AS(estimator_mse_against_truth(short_est, 1, truth),
                  std::invalid_argument);
}

TEST_CASE("simulation config validation rejects bad grids") {
  SimulationConfig cfg = smoke_config();
  cfg.p1 = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = smoke_config();
  cfg.p1 = 40;
  cfg.p2 = 30;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = smoke_config();
  cfg.replications = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = smoke_config();
  cfg.delta_grid = {0.4, 0.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = smoke_config();
  cfg.delta_grid = {-0.1};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = smoke_config();
  cfg.delta_grid.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = smoke_config();
  cfg.pipeline.cv_folds = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("small grid satisfies the reporting invariants") {
  const SimulationConfig cfg = smoke_config();
  const SimulationReport report = run_grid(cfg);
  REQUIRE(report.cells.size() == 2);
  CHECK(report.estimators ==
        std::vector<std::string>{"LASSO", "ALASSO", "S", "PS", "FS1", "FS2",
                                 "FS3"});
  for (size_t c = 0; c < report.cells.size(); ++c) {
    const DeltaCell& cell = report.cells[c];
    CHECK(cell.delta == cfg.delta_grid[c]);
    CHECK(cell.attempted == cfg.replications);
    CHECK(cell.failed == 0);
    CHECK(cell.rmse.at("LASSO") == 1.0);
    CHECK(cell.max_kkt_converged <= 1e-5);
    const int truth_zero =
        cfg.p() - cfg.p1 - (cell.delta > 0 ? cfg.p2 : 0);
    for (const std::string& name : report.estimators) {
      CHECK(cell.mse.at(name) >= 0.0);
      CHECK(cell.tp_mean.at(name) >= 0.0);
      CHECK(cell.tp_mean.at(name) <= double(cfg.p1));
      CHECK(cell.fp_mean.at(name) >= 0.0);
      CHECK(cell.fp_mean.at(name) <= double(truth_zero));
      CHECK(cell.tp_pct.at(name) ==
            doctest::Approx(100.0 * cell.tp_mean.at(name) / cfg.p1));
      CHECK(cell.fp_pct.at(name) ==
            doctest::Approx(100.0 * cell.fp_mean.at(name) / truth_zero));
      CHECK(cell.sqerr.at(name).size() == size_t(cell.attempted - cell.failed));
      const auto& freq = cell.selection_freq.at(name);
      REQUIRE(freq.size() == size_t(cfg.p()));
      for (const double f : freq) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
      }
    }
    for (const auto& [variant, count] : cell.fallbacks) {
      CHECK(count >= 0);
      CHECK(count <= cell.attempted);
    }
  }
}

TEST_CASE("grid results are independent of the worker count") {
  SimulationConfig cfg = smoke_config();
  cfg.workers = 1;
  const std::string serial =
      simulation_report_json(run_grid(cfg)).dump();
  cfg.workers = 3;
  const std::string threaded =
      simulation_report_json(run_grid(cfg)).dump();
  CHECK(serial == threaded);
}

TEST_CASE("rendered simulation artifacts are deterministic") {
  const SimulationConfig cfg = smoke_config();
  const SimulationReport a = run_grid(cfg);
  const SimulationReport b = run_grid(cfg);
  CHECK(simulation_rmse_csv(a) == simulation_rmse_csv(b));
  CHECK(simulation_tpfp_csv(a) == simulation_tpfp_csv(b));
  CHECK(simulation_selection_csv(a) == simulation_selection_csv(b));
  CHECK(simulation_report_json(a).dump() == simulation_report_json(b).dump());
  CHECK(simulation_summary(a) == simulation_summary(b));

  const std::string rmse = simulation_rmse_csv(a);
  CHECK(rmse.find("delta") != std::string::npos);
  CHECK(rmse.find("LASSO") != std::string::npos);
}
