#include "dshrink/solvers.hpp"

#include "dshrink/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace dshrink {

double soft_threshold(double z, double threshold) {
  if (!std::isfinite(z) || !std::isfinite(threshold) || threshold < 0)
    throw std::invalid_argument("soft_threshold needs finite z and t >= 0");
  if (z > threshold) return z - threshold;
  if (z < -threshold) return z + threshold;
  return 0.0;
}

namespace {

constexpr std::uint64_t kStreamFolds = 0x466f6c6473ull;
constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_options(const SolverOptions& opts) {
  if (!(opts.tolerance > 0)) throw std::invalid_argument("tolerance must be > 0");
  if (opts.max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
  if (!(opts.kkt_tol > 0)) throw std::invalid_argument("kkt_tol must be > 0");
  if (opts.path_length < 1) throw std::invalid_argument("path_length must be >= 1");
  if (!(opts.path_ratio > 0) || opts.path_ratio >= 1)
    throw std::invalid_argument("path_ratio must be in (0,1)");
}

int sign_of(double v) { return (v > 0) - (v < 0); }

// The problem the coordinate sweeps actually solve: columns centered when an
// intercept is requested, divided by their sd when standardizing. Coefficients
// map back to the raw scale by dividing by `scale`.
struct WorkingProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd col_norm2;
  Eigen::VectorXd scale;
  Eigen::VectorXd x_mean;
  double y_mean = 0.0;
  bool intercept = false;
};

WorkingProblem build_working(const Dataset& data, const SolverOptions& opts) {
  WorkingProblem wp;
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  wp.X = data.X;
  wp.y = data.y;
  wp.x_mean = Eigen::VectorXd::Zero(p);
  wp.scale = Eigen::VectorXd::Ones(p);
  wp.intercept = opts.intercept;
  if (opts.intercept) {
    wp.x_mean = wp.X.colwise().mean();
    wp.X.rowwise() -= wp.x_mean.transpose();
    wp.y_mean = wp.y.mean();
    wp.y.array() -= wp.y_mean;
  }
  if (opts.standardize) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double mean = data.X.col(j).mean();
      const double var =
          (data.X.col(j).array() - mean).square().sum() / double(n);
      const double sd = std::sqrt(var);
      if (sd > 0) {
        wp.X.col(j) /= sd;
        wp.scale[j] = sd;
      }
    }
  }
  wp.col_norm2 = wp.X.colwise().squaredNorm();
  return wp;
}

double lambda_max_working(const WorkingProblem& wp, const Eigen::VectorXd& weights,
                          const std::vector<char>& excluded) {
  const Eigen::VectorXd g = wp.X.transpose() * wp.y;
  double lmax = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    if (excluded[size_t(j)]) continue;
    const double cand = 2.0 * std::abs(g[j]) / weights[j];
    if (cand > lmax) lmax = cand;
  }
  return lmax;
}

// Cyclic coordinate descent over a working set, with the sequential screening
// rule along a warm-started path. Every solve ends with a stationarity check
// over all coordinates against a fresh residual, so screening never changes
// the answer: missed coordinates re-enter and the sweeps resume.
class CoordinateSolver {
 public:
  CoordinateSolver(WorkingProblem wp, Eigen::VectorXd weights,
                   std::vector<char> excluded, const SolverOptions& opts)
      : prob_(std::move(wp)),
        weights_(std::move(weights)),
        excluded_(std::move(excluded)),
        opts_(opts),
        beta_(Eigen::VectorXd::Zero(prob_.X.cols())),
        resid_(prob_.y) {}

  // lambda_prev feeds the screening bound; pass screen=false on a cold solve.
  FitResult solve(double lambda, double lambda_prev, bool screen) {
    const Eigen::Index p = prob_.X.cols();
    Eigen::VectorXd thr(p);
    for (Eigen::Index j = 0; j < p; ++j)
      thr[j] = excluded_[size_t(j)] ? kInf : lambda * weights_[j] / 2.0;

    std::vector<int> working;
    std::vector<char> in_working(size_t(p), 0);
    auto admit = [&](Eigen::Index j) {
      if (!in_working[size_t(j)]) {
        in_working[size_t(j)] = 1;
        working.push_back(int(j));
      }
    };
    if (screen) {
      if (!grad_valid_) {
        grad_ = prob_.X.transpose() * resid_;
        grad_valid_ = true;
      }
      const double bound = (2.0 * lambda - lambda_prev) / 2.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (excluded_[size_t(j)]) continue;
        if (beta_[j] != 0.0 || std::abs(grad_[j]) >= bound * weights_[j])
          admit(j);
      }
    } else {
      for (Eigen::Index j = 0; j < p; ++j)
        if (!excluded_[size_t(j)]) admit(j);
    }

    int sweeps = 0;
    double sweep_tol = opts_.tolerance;
    double kkt = kInf;
    bool certified = false;
    for (;;) {
      for (;;) {
        double max_change = 0.0;
        for (const int j : working) {
          const double norm2 = prob_.col_norm2[j];
          if (norm2 <= 0.0) continue;
          const double rho = prob_.X.col(j).dot(resid_) + norm2 * beta_[j];
          const double next = soft_threshold(rho, thr[j]) / norm2;
          const double diff = next - beta_[j];
          if (diff != 0.0) {
            resid_ -= prob_.X.col(j) * diff;
            beta_[j] = next;
            const double mag = std::abs(diff);
            if (mag > max_change) max_change = mag;
          }
        }
        ++sweeps;
        if (max_change < sweep_tol || sweeps >= opts_.max_sweeps) break;
      }

      refresh_residual();
      grad_ = prob_.X.transpose() * resid_;
      grad_valid_ = true;
      kkt = 0.0;
      bool admitted = false;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (excluded_[size_t(j)]) continue;
        double viol;
        if (beta_[j] != 0.0) {
          viol = std::abs(grad_[j] - thr[j] * sign_of(beta_[j]));
        } else {
          viol = std::max(0.0, std::abs(grad_[j]) - thr[j]);
        }
        if (viol > kkt) kkt = viol;
        if (beta_[j] == 0.0 && !in_working[size_t(j)] && viol > opts_.kkt_tol) {
          admit(j);
          admitted = true;
        }
      }
      if (!admitted && kkt <= opts_.kkt_tol) {
        certified = true;
        break;
      }
      if (sweeps >= opts_.max_sweeps) break;
      if (!admitted) sweep_tol = std::max(sweep_tol * 0.1, 1e-16);
    }

    FitResult fr;
    fr.lambda = lambda;
    fr.iterations = sweeps;
    fr.converged = certified;
    fr.kkt_violation = kkt;
    fr.coefficients = (beta_.array() / prob_.scale.array()).matrix();
    fr.intercept =
        prob_.intercept ? prob_.y_mean - prob_.x_mean.dot(fr.coefficients) : 0.0;
    for (Eigen::Index j = 0; j < p; ++j)
      if (fr.coefficients[j] != 0.0) fr.active_set.push_back(int(j));
    if (!certified)
      fr.warnings.push_back(
          "sweep limit reached before the stationarity certificate was met");
    return fr;
  }

 private:
  void refresh_residual() {
    resid_ = prob_.y;
    for (Eigen::Index j = 0; j < beta_.size(); ++j)
      if (beta_[j] != 0.0) resid_ -= prob_.X.col(j) * beta_[j];
  }

  WorkingProblem prob_;
  Eigen::VectorXd weights_;
  std::vector<char> excluded_;
  SolverOptions opts_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd resid_;
  Eigen::VectorXd grad_;
  bool grad_valid_ = false;
};

struct PenaltyWeights {
  Eigen::VectorXd weights;
  std::vector<char> excluded;
  bool all_excluded = false;
};

PenaltyWeights uniform_weights(Eigen::Index p) {
  return {Eigen::VectorXd::Ones(p), std::vector<char>(size_t(p), 0), false};
}

PenaltyWeights adaptive_weights(const FitResult& pilot, double gamma,
                                Eigen::Index p) {
  if (pilot.coefficients.size() != p)
    throw std::invalid_argument("pilot coefficient length does not match p");
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be > 0");
  PenaltyWeights pw;
  pw.weights = Eigen::VectorXd::Ones(p);
  pw.excluded.assign(size_t(p), 0);
  bool any = false;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double base = std::abs(pilot.coefficients[j]);
    const double w = base > 0 ? std::pow(base, -gamma) : kInf;
    if (std::isfinite(w) && w > 0) {
      pw.weights[j] = w;
      any = true;
    } else {
      pw.excluded[size_t(j)] = 1;
    }
  }
  pw.all_excluded = !any;
  return pw;
}

FitResult null_fit(const Dataset& data, double lambda, const SolverOptions& opts) {
  FitResult fr;
  fr.coefficients = Eigen::VectorXd::Zero(data.p());
  fr.intercept = opts.intercept ? data.y.mean() : 0.0;
  fr.lambda = lambda;
  fr.converged = true;
  fr.kkt_violation = 0.0;
  return fr;
}

CvSelection assemble_selection(const std::vector<double>& path,
                               const Eigen::MatrixXd& fold_errors) {
  CvSelection sel;
  sel.lambda_path = path;
  const Eigen::Index folds = fold_errors.rows();
  const Eigen::Index points = fold_errors.cols();
  sel.cv_mean.resize(size_t(points));
  sel.cv_se.resize(size_t(points));
  for (Eigen::Index i = 0; i < points; ++i) {
    const double mean = fold_errors.col(i).mean();
    const double ss = (fold_errors.col(i).array() - mean).square().sum();
    sel.cv_mean[size_t(i)] = mean;
    sel.cv_se[size_t(i)] =
        folds > 1 ? std::sqrt(ss / double(folds - 1) / double(folds)) : 0.0;
  }
  size_t best = 0;
  for (size_t i = 1; i < sel.cv_mean.size(); ++i)
    if (sel.cv_mean[i] < sel.cv_mean[best]) best = i;
  sel.lambda_min = path[best];
  const double band = sel.cv_mean[best] + sel.cv_se[best];
  size_t pick = best;
  for (size_t i = 0; i <= best; ++i) {
    if (sel.cv_mean[i] <= band) {
      pick = i;
      break;
    }
  }
  sel.lambda_1se = path[pick];
  return sel;
}

// Each fold walks the path top-down and stops once the active set nears its
// training-row count: past that the fits are interpolation-bound and cannot
// win selection. Only path points every fold evaluated enter the selection.
constexpr double kCvActiveCapFraction = 0.9;

CvSelection run_cv_core(const Dataset& data, const PenaltyWeights& pw, int folds,
                        const SolverOptions& opts, std::uint64_t seed) {
  const WorkingProblem full = build_working(data, opts);
  const double lmax = lambda_max_working(full, pw.weights, pw.excluded);
  const std::vector<double> path =
      make_lambda_path(lmax, opts.path_length, opts.path_ratio);
  const auto assignment = make_folds(data.n(), folds, derive_stream(seed, kStreamFolds));

  Eigen::MatrixXd fold_errors(folds, Eigen::Index(path.size()));
  std::vector<char> in_fold(size_t(data.n()), 0);
  size_t common_points = path.size();
  for (int k = 0; k < folds; ++k) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (const int row : assignment[size_t(k)]) in_fold[size_t(row)] = 1;
    std::vector<int> train_rows;
    train_rows.reserve(size_t(data.n()) - assignment[size_t(k)].size());
    for (int i = 0; i < int(data.n()); ++i)
      if (!in_fold[size_t(i)]) train_rows.push_back(i);

    const Dataset train = subset_rows(data, train_rows);
    const auto active_cap =
        size_t(kCvActiveCapFraction * double(train_rows.size()));
    CoordinateSolver solver(build_working(train, opts), pw.weights, pw.excluded,
                            opts);
    double prev = path.front();
    size_t evaluated = 0;
    for (size_t i = 0; i < path.size(); ++i) {
      const FitResult fr = solver.solve(path[i], prev, i > 0);
      prev = path[i];
      double err = 0.0;
      for (const int row : assignment[size_t(k)]) {
        const double pred = data.X.row(row).dot(fr.coefficients) + fr.intercept;
        const double d = data.y[row] - pred;
        err += d * d;
      }
      fold_errors(k, Eigen::Index(i)) = err / double(assignment[size_t(k)].size());
      ++evaluated;
      if (fr.active_set.size() > active_cap) break;
    }
    common_points = std::min(common_points, evaluated);
  }
  const std::vector<double> shared(path.begin(),
                                   path.begin() + Eigen::Index(common_points));
  return assemble_selection(shared,
                            fold_errors.leftCols(Eigen::Index(common_points)));
}

}  // namespace

double lasso_lambda_max(const Dataset& data, const SolverOptions& opts,
                        const Eigen::VectorXd& weights) {
  data.validate();
  validate_options(opts);
  PenaltyWeights pw = uniform_weights(data.p());
  if (weights.size() != 0) {
    if (weights.size() != data.p())
      throw std::invalid_argument("weight length does not match p");
    pw.weights = weights;
    for (Eigen::Index j = 0; j < weights.size(); ++j)
      if (!(std::isfinite(weights[j]) && weights[j] > 0))
        pw.excluded[size_t(j)] = 1;
  }
  return lambda_max_working(build_working(data, opts), pw.weights, pw.excluded);
}

std::vector<double> make_lambda_path(double lambda_max, int length, double ratio) {
  if (length < 1) throw std::invalid_argument("path length must be >= 1");
  if (!(ratio > 0) || ratio >= 1)
    throw std::invalid_argument("path ratio must be in (0,1)");
  if (!(lambda_max > 0)) return {0.0};
  if (length == 1) return {lambda_max};
  std::vector<double> path(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i)
    path[size_t(i)] = lambda_max * std::pow(ratio, double(i) / double(length - 1));
  path.front() = lambda_max;
  path.back() = lambda_max * ratio;
  return path;
}

FitResult fit_lasso(const Dataset& data, double lambda, const SolverOptions& opts) {
  data.validate();
  validate_options(opts);
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  PenaltyWeights pw = uniform_weights(data.p());
  CoordinateSolver solver(build_working(data, opts), std::move(pw.weights),
                          std::move(pw.excluded), opts);
  return solver.solve(lambda, lambda, false);
}

FitResult fit_alasso(const Dataset& data, double lambda, double gamma,
                     const FitResult& pilot, const SolverOptions& opts) {
  data.validate();
  validate_options(opts);
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  PenaltyWeights pw = adaptive_weights(pilot, gamma, data.p());
  if (pw.all_excluded) {
    FitResult fr = null_fit(data, lambda, opts);
    fr.gamma = gamma;
    fr.warnings.push_back("all pilot coefficients are zero; returning the null fit");
    return fr;
  }
  CoordinateSolver solver(build_working(data, opts), std::move(pw.weights),
                          std::move(pw.excluded), opts);
  FitResult fr = solver.solve(lambda, lambda, false);
  fr.gamma = gamma;
  return fr;
}

FitResult fit_ridge(const Dataset& data, double lambda, const SolverOptions& opts) {
  data.validate();
  validate_options(opts);
  if (!(lambda > 0)) throw std::invalid_argument("ridge lambda must be > 0");
  const WorkingProblem wp = build_working(data, opts);
  const Eigen::Index n = wp.X.rows();
  const Eigen::Index p = wp.X.cols();
  Eigen::VectorXd beta(p);
  if (p <= n) {
    Eigen::MatrixXd gram = wp.X.transpose() * wp.X;
    gram.diagonal().array() += lambda;
    beta = gram.ldlt().solve(wp.X.transpose() * wp.y);
  } else {
    Eigen::MatrixXd outer = wp.X * wp.X.transpose();
    outer.diagonal().array() += lambda;
    beta = wp.X.transpose() * outer.ldlt().solve(wp.y);
  }
  FitResult fr;
  fr.lambda = lambda;
  fr.iterations = 1;
  fr.converged = true;
  fr.kkt_violation =
      (wp.X.transpose() * (wp.y - wp.X * beta) - lambda * beta).lpNorm<Eigen::Infinity>();
  fr.coefficients = (beta.array() / wp.scale.array()).matrix();
  fr.intercept = wp.intercept ? wp.y_mean - wp.x_mean.dot(fr.coefficients) : 0.0;
  for (Eigen::Index j = 0; j < p; ++j)
    if (fr.coefficients[j] != 0.0) fr.active_set.push_back(int(j));
  return fr;
}

double kkt_violation(const Dataset& data, const FitResult& fit, double lambda,
                     const SolverOptions& opts, const Eigen::VectorXd& weights) {
  if (fit.coefficients.size() != data.p())
    throw std::invalid_argument("coefficient length does not match p");
  const Eigen::VectorXd resid =
      data.y - data.X * fit.coefficients -
      Eigen::VectorXd::Constant(data.n(), fit.intercept);
  const Eigen::VectorXd g = data.X.transpose() * resid;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    const double w = weights.size() ? weights[j] : 1.0;
    const double thr = lambda * w / 2.0;
    double viol;
    if (fit.coefficients[j] != 0.0) {
      viol = std::abs(g[j] - thr * sign_of(fit.coefficients[j]));
    } else {
      viol = std::max(0.0, std::abs(g[j]) - thr);
    }
    if (std::isnan(viol)) viol = 0.0;  // inactive coordinate with infinite weight
    if (viol > worst) worst = viol;
  }
  (void)opts;
  return worst;
}

std::vector<std::vector<int>> make_folds(Eigen::Index n, int folds,
                                         std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("need at least two folds");
  if (Eigen::Index(folds) > n)
    throw std::invalid_argument("more folds than rows");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(seed, 0);
  for (size_t i = order.size() - 1; i > 0; --i) {
    const size_t k = size_t(rng.below(i + 1));
    std::swap(order[i], order[k]);
  }
  std::vector<std::vector<int>> assignment(static_cast<std::size_t>(folds));
  for (size_t i = 0; i < order.size(); ++i)
    assignment[i % size_t(folds)].push_back(order[i]);
  for (auto& fold : assignment) std::sort(fold.begin(), fold.end());
  return assignment;
}

CvSelection cv_select(const Dataset& data, Method method, int folds, CvRule rule,
                      const SolverOptions& opts, std::uint64_t seed) {
  return cv_fit(data, method, folds, rule, opts, seed).selection;
}

CvFit cv_fit(const Dataset& data, int folds, CvRule rule,
             const SolverOptions& opts, std::uint64_t seed, double gamma,
             const FitResult& pilot) {
  data.validate();
  validate_options(opts);
  const PenaltyWeights pw = adaptive_weights(pilot, gamma, data.p());
  CvFit out;
  out.pilot = pilot;
  if (pw.all_excluded) {
    out.fit = fit_alasso(data, 0.0, gamma, pilot, opts);
    return out;
  }
  out.selection = run_cv_core(data, pw, folds, opts, seed);
  out.fit = fit_alasso(data, out.selection.selected(rule), gamma, pilot, opts);
  return out;
}

CvFit cv_fit(const Dataset& data, Method method, int folds, CvRule rule,
             const SolverOptions& opts, std::uint64_t seed, double gamma) {
  data.validate();
  validate_options(opts);
  if (method == Method::kLasso) {
    CvFit out;
    out.selection = run_cv_core(data, uniform_weights(data.p()), folds, opts, seed);
    out.fit = fit_lasso(data, out.selection.selected(rule), opts);
    return out;
  }
  // The adaptive pilot is the 1-se cross-validated plain lasso on the same
  // data and seed, so it coincides with the plain-lasso fit used elsewhere.
  const CvFit pilot = cv_fit(data, Method::kLasso, folds, CvRule::kOneSe, opts, seed);
  return cv_fit(data, folds, rule, opts, seed, gamma, pilot.fit);
}

}  // namespace dshrink
