#pragma once

#include "dshrink/types.hpp"

#include <cstdint>
#include <vector>

namespace dshrink {

// sign(z) * max(|z| - threshold, 0)
double soft_threshold(double z, double threshold);

// Smallest lambda at which every penalized coefficient is zero, for the
// objective sum(y - b0 - X b)^2 + lambda * sum(w_j |b_j|). With an intercept
// this is 2 * max_j |x_j'(y - mean(y))| / w_j over coordinates with w_j > 0.
double lasso_lambda_max(const Dataset& data, const SolverOptions& opts,
                        const Eigen::VectorXd& weights = Eigen::VectorXd());

// Log-spaced descending path from lambda_max down to lambda_max * ratio.
std::vector<double> make_lambda_path(double lambda_max, int length, double ratio);

FitResult fit_lasso(const Dataset& data, double lambda,
                    const SolverOptions& opts = {});

// Weighted L1 fit with weights 1/|pilot_j|^gamma. Coordinates with a zero
// pilot coefficient are excluded from the model. An all-zero pilot yields the
// null fit plus a warning.
FitResult fit_alasso(const Dataset& data, double lambda, double gamma,
                     const FitResult& pilot, const SolverOptions& opts = {});

FitResult fit_ridge(const Dataset& data, double lambda,
                    const SolverOptions& opts = {});

// Max stationarity residual of a (possibly weighted) L1 fit: for inactive j,
// max(|x_j'r| - lambda w_j / 2, 0); for active j, |x_j'r - lambda w_j / 2 *
// sign(b_j)|. Empty weights mean all ones.
double kkt_violation(const Dataset& data, const FitResult& fit, double lambda,
                     const SolverOptions& opts,
                     const Eigen::VectorXd& weights = Eigen::VectorXd());

// Deterministic shuffled round-robin fold assignment; every fold size differs
// by at most one.
std::vector<std::vector<int>> make_folds(Eigen::Index n, int folds,
                                         std::uint64_t seed);

CvSelection cv_select(const Dataset& data, Method method, int folds,
                      CvRule rule, const SolverOptions& opts,
                      std::uint64_t seed);

struct CvFit {
  CvSelection selection;
  FitResult fit;    // refit on the full data at the selected lambda
  FitResult pilot;  // pilot behind an adaptive fit; default-constructed otherwise
};

// cv_select plus the final full-data refit. For the adaptive method the pilot
// is a cross-validated plain lasso fit on the full data; its weights are held
// fixed across folds.
CvFit cv_fit(const Dataset& data, Method method, int folds, CvRule rule,
             const SolverOptions& opts, std::uint64_t seed, double gamma = 1.0);

// Adaptive cross-validation with a caller-supplied pilot, for callers that
// already computed the plain-lasso fit.
CvFit cv_fit(const Dataset& data, int folds, CvRule rule,
             const SolverOptions& opts, std::uint64_t seed, double gamma,
             const FitResult& pilot);

}  // namespace dshrink
