#pragma once

#include "dshrink/shrinkage.hpp"
#include "dshrink/solvers.hpp"

#include <array>
#include <cstdint>
#include <map>

namespace dshrink {

enum class PilotKind { kCvLasso, kRidge };

struct PipelineOptions {
  SolverOptions solver;
  int cv_folds = 5;
  CvRule lasso_rule = CvRule::kMin;  // rule for the permissive fit
  CvRule cv_rule = CvRule::kOneSe;   // rule for the aggressive fit and pilot
  double gamma = 1.0;
  PilotKind pilot = PilotKind::kCvLasso;
  double ridge_pilot_lambda = 1.0;  // used when pilot == kRidge
};

// Estimators reported by every downstream consumer, in output order.
constexpr std::array<const char*, 7> kEstimatorNames = {
    "LASSO", "ALASSO", "S", "PS", "FS1", "FS2", "FS3"};
constexpr std::array<ShrinkVariant, 5> kAllVariants = {
    ShrinkVariant::kStein, ShrinkVariant::kPositiveStein,
    ShrinkVariant::kBounded1, ShrinkVariant::kBounded2,
    ShrinkVariant::kBounded3};

// One estimator's coefficients on the original predictor scale, ready for
// prediction or scoring.
struct EstimateView {
  Eigen::VectorXd coefficients;  // length p
  double intercept = 0.0;
  std::vector<int> active;       // selection set attributed to the estimator
};

struct PipelineResult {
  FitResult lasso;   // permissive (overfitted) fit, cv-selected
  FitResult alasso;  // aggressive (underfitted) fit, cv-selected
  SupportPartition partition;
  double sigma2 = 0.0;
  double wn = 0.0;
  Eigen::VectorXd beta2_lse;
  std::map<std::string, ShrinkageFit> shrinks;  // keyed by variant name
  int fallback_count = 0;  // variants that fell back to the UF estimate
  std::vector<std::string> notes;

  EstimateView estimate(const std::string& name) const;
};

// Full double-shrinkage flow on one dataset: cv lasso (lasso_rule), cv
// adaptive lasso piloted by the cv_rule lasso from the same path, support
// partition, residual variance, weight statistic, then every shrink variant.
// Variants whose factor is undefined (p2 < 3 or wn = 0 for the unbounded
// forms) fall back to the UF estimate and are counted.
// Throws RunError when the pipeline cannot produce estimates at all (empty s1,
// p1 + p2 > n, singular blocks).
PipelineResult run_pipeline(const Dataset& data, const PipelineOptions& opts,
                            std::uint64_t seed);

}  // namespace dshrink
