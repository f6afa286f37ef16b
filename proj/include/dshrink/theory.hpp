#pragma once

#include "dshrink/shrinkage.hpp"
#include "dshrink/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dshrink {

// Design with X'X = n I (orthonormal columns scaled by sqrt(n)), where the
// penalized fits have closed forms: an LSE soft-thresholded at lambda/2 for
// the plain fit, and at lambda/(2|lse|^gamma) for the adaptive one.
struct OrthoInstance {
  Dataset data;
  Eigen::VectorXd beta_true;
  double lambda = 1.0;  // threshold scale on the LSE, not the solver's penalty
  int p_strong = 0;     // leading block: strong signals
  int p_weak = 0;       // next block: weak-moderate signals
};

struct OrthoSpec {
  int n = 60;
  int p = 12;
  int p_strong = 4;
  int p_weak = 6;
  double lambda = 1.0;
  double strong_lo = 2.0;  // strong magnitudes uniform in [lo, hi], random sign
  double strong_hi = 4.0;
  double weak = 0.0;       // weak-block magnitude
  double noise_sd = 1.0;
};

OrthoInstance make_ortho_instance(const OrthoSpec& spec, std::uint64_t seed);

struct ClosedFormFits {
  Eigen::VectorXd beta_lse;  // X'y / n
  Eigen::VectorXd of;
  Eigen::VectorXd uf;
};

ClosedFormFits closed_form_fits(const OrthoInstance& inst, double gamma = 1.0);

// Derived quantities of one instance under the designed partition: sigma2 from
// the UF strong-block residual, the weight statistic, the OF-UF difference D
// on the strong block, and alpha = (OF - beta1)'D / D'D.
struct OrthoAnalysis {
  ClosedFormFits fits;
  double sigma2 = 0.0;
  double wn = 0.0;
  Eigen::VectorXd d;
  double alpha = 0.0;
  int sign_sum = 0;  // sum of sgn(lse) over the strong block
};

OrthoAnalysis analyze_instance(const OrthoInstance& inst, double gamma = 1.0);

struct BoundReport {
  int checked = 0;
  int skipped = 0;  // coordinates without an interior OF/UF solution
  int identity_violations = 0;
  int bound_violations = 0;
  double max_identity_gap = 0.0;
};

// Verifies, per strong coordinate with interior solutions, that
// D_j = (lambda/2) sgn(lse_j) (1/|lse_j| - 1) and sgn(lse_j) D_j < 1 - lambda/2.
// Requires lambda < 2.
BoundReport check_difference_bound(const OrthoInstance& inst);

struct DominanceReport {
  bool skipped = false;  // wn = 0 or alpha undefined
  double wn = 0.0;
  double alpha = 0.0;
  double ratio = 0.0;     // r(wn)/wn
  double threshold = 0.0; // 2/(p2-2) * alpha
  bool holds = false;
};

DominanceReport check_dominance_condition(const OrthoInstance& inst,
                                          ShrinkVariant v);

struct TheoryConfig {
  int oracle_instances = 100;
  int bound_instances = 1000;
  std::vector<double> bound_lambdas = {0.5, 1.0, 1.5};
  int dominance_instances = 400;
  int risk_instances = 400;
  std::vector<int> trend_ns = {50, 200, 800};
  int trend_instances = 300;
  OrthoSpec base;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrendPoint {
  int n = 0;
  double mean_abs_dev = 0.0;  // mean |alpha - 1|
};

struct RiskSummary {
  double mean_diff = 0.0;  // mean of ||FS - beta1||^2 - ||OF - beta1||^2
  double se = 0.0;
  bool negative = false;   // mean + 2 se < 0
};

struct DominanceSummary {
  int checked = 0;
  int skipped = 0;
  int holds = 0;
  double frequency = 0.0;
};

struct TheoryReport {
  int oracle_instances = 0;
  double oracle_max_gap = 0.0;
  bool oracle_pass = false;  // gap <= 1e-6

  int bound_instances = 0;
  std::vector<double> bound_lambdas;
  long bound_checked = 0;
  long bound_skipped = 0;
  long identity_violations = 0;
  long bound_violations = 0;
  double max_identity_gap = 0.0;

  std::map<std::string, DominanceSummary> dominance;
  double sign_sum_negative_fraction = 0.0;

  int ratio_grid_points = 0;
  int fs1_ratio_violations = 0;
  int fs3_ratio_violations = 0;

  std::vector<TrendPoint> alpha_trend;
  bool alpha_trend_decreasing = false;

  std::map<std::string, RiskSummary> risk;  // FS1, FS2, FS3, PS asserted; S reported

  bool pass = false;
};

TheoryReport run_theory_checks(const TheoryConfig& config);

}  // namespace dshrink
