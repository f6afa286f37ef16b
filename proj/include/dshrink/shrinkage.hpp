#pragma once

#include "dshrink/types.hpp"

namespace dshrink {

// Three-way split of predictor indices: s1 = kept by the aggressive fit,
// s2 = kept only by the permissive fit, s3 = dropped by both. Disjoint,
// each sorted ascending, together covering 0..p-1.
struct SupportPartition {
  std::vector<int> s1;
  std::vector<int> s2;
  std::vector<int> s3;
  std::vector<std::string> warnings;

  int p1() const { return int(s1.size()); }
  int p2() const { return int(s2.size()); }
  int p3() const { return int(s3.size()); }
};

// Builds the partition from the permissive (lasso) and aggressive (adaptive
// lasso) fits. Indices active in the aggressive fit but not the permissive one
// stay in s1 with a warning. Throws RunError("no strong signals selected")
// when s1 would be empty.
SupportPartition partition_supports(const FitResult& lasso_fit,
                                    const FitResult& alasso_fit, int p);

// (1/(n-1)) * ||y - intercept - X[,s1] beta1||^2. The intercept defaults to 0,
// matching a no-intercept submodel fit. Throws RunError("degenerate variance")
// when the residual is exactly zero.
double residual_variance(const Dataset& data, const SupportPartition& part,
                         const Eigen::VectorXd& beta1, double intercept = 0.0);

struct WeightStatistic {
  double wn = 0.0;            // quadratic form of the weak-block LSE
  Eigen::VectorXd beta2_lse;  // weak-block least squares after projecting out s1
};

// Weak-block Wald statistic: beta2'(X2' M1 X2) beta2 / sigma2, where M1
// projects out the s1 columns (plus the constant column when include_intercept
// is set, for fits that carried an intercept). Throws RunError when
// p1 + p2 > n or either block is numerically singular.
WeightStatistic compute_wn(const Dataset& data, const SupportPartition& part,
                           double sigma2, bool include_intercept = false);

enum class ShrinkVariant { kStein, kPositiveStein, kBounded1, kBounded2, kBounded3 };

const char* variant_name(ShrinkVariant v);  // S, PS, FS1, FS2, FS3

// The shrink functions r(w): 1 for S/PS, w/(1+w), exp(-w^2), arctan(w).
double shrink_r(ShrinkVariant v, double wn);

// Combination factor 1 - (p2 - 2) * r(wn) / wn, clamped at zero for the
// positive-part variant. Throws RunError("insufficient weak set") when p2 < 3
// and RunError("unbounded shrink factor") when wn = 0 leaves the factor
// undefined (the FS1 variant stays finite there; PS clamps to 0).
double shrink_factor(ShrinkVariant v, double wn, int p2);

struct ShrinkageInputs {
  Eigen::VectorXd beta1_uf;   // aggressive submodel estimate on s1
  Eigen::VectorXd beta1_of;   // permissive fit restricted to s1
  double wn = 0.0;
  double sigma2_hat = 1.0;
  Eigen::VectorXd beta2_lse;  // carried through for reporting
};

struct ShrinkageFit {
  ShrinkVariant variant = ShrinkVariant::kStein;
  double factor = 0.0;        // combination weight actually applied
  Eigen::VectorXd beta1;      // shrunken estimate on s1
  Eigen::VectorXd full_beta;  // beta1 embedded at s1, zeros elsewhere
  double wn = 0.0;
  bool fallback = false;      // true when the UF estimate was returned as-is
  std::vector<std::string> warnings;
};

// beta1 = beta1_uf + factor * (beta1_of - beta1_uf), embedded into full_beta
// over the partition's s1. Propagates shrink_factor's errors; callers wanting
// the UF fallback catch RunError and mark the fit accordingly.
ShrinkageFit shrink(const ShrinkageInputs& in, ShrinkVariant v, int p2,
                    const SupportPartition& part, int p);

}  // namespace dshrink
