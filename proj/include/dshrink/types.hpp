#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dshrink {

// Failure while running an otherwise well-formed job (singular design,
// degenerate statistic, too many failed replications, ...).
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected input: bad config file, malformed CSV, invalid argument values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> names;  // optional column labels; empty or size p

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  // Throws ConfigError on shape mismatch, non-finite entries, duplicate or
  // wrongly sized names, or fewer than two rows.
  void validate() const;
};

// Rows gathered by index (duplicates allowed); names carry over.
Dataset subset_rows(const Dataset& data, const std::vector<int>& rows);

struct SolverOptions {
  double tolerance = 1e-7;  // max coefficient change per sweep at convergence
  int max_sweeps = 10000;
  double kkt_tol = 1e-6;  // stationarity residual a converged fit must satisfy
  bool intercept = true;
  bool standardize = false;
  int path_length = 100;
  double path_ratio = 1e-4;  // smallest path lambda relative to lambda_max
};

struct FitResult {
  Eigen::VectorXd coefficients;  // raw scale, length p
  double intercept = 0.0;
  std::vector<int> active_set;  // indices with nonzero coefficient, ascending
  double lambda = 0.0;
  std::optional<double> gamma;  // set on adaptive fits
  int iterations = 0;           // coordinate sweeps spent
  bool converged = false;
  double kkt_violation = 0.0;  // stationarity residual at the returned point
  std::vector<std::string> warnings;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    return (X * coefficients).array() + intercept;
  }
};

enum class Method { kLasso, kAlasso };
enum class CvRule { kMin, kOneSe };

struct CvSelection {
  std::vector<double> lambda_path;  // strictly decreasing
  std::vector<double> cv_mean;      // mean validation MSE per path point
  std::vector<double> cv_se;        // standard error across folds
  double lambda_min = 0.0;
  double lambda_1se = 0.0;

  double selected(CvRule rule) const {
    return rule == CvRule::kMin ? lambda_min : lambda_1se;
  }
};

}  // namespace dshrink
