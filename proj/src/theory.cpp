#include "dshrink/theory.hpp"

#include "dshrink/pipeline.hpp"
#include "dshrink/rng.hpp"
#include "dshrink/solvers.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dshrink {

namespace {

constexpr std::uint64_t kStreamOracleShape = 11;
constexpr std::uint64_t kStreamOracleInstance = 12;
constexpr std::uint64_t kStreamBound = 13;
constexpr std::uint64_t kStreamDominance = 14;
constexpr std::uint64_t kStreamTrend = 15;
constexpr std::uint64_t kStreamRisk = 16;

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void validate_spec(const OrthoSpec& spec) {
  if (spec.n < 2 || spec.p < 1 || spec.p > spec.n) {
    throw std::invalid_argument("ortho spec: need 1 <= p <= n and n >= 2");
  }
  if (spec.p_strong < 0 || spec.p_weak < 0 ||
      spec.p_strong + spec.p_weak > spec.p) {
    throw std::invalid_argument("ortho spec: invalid strong/weak split");
  }
  if (!(spec.lambda > 0.0)) {
    throw std::invalid_argument("ortho spec: lambda must be positive");
  }
  if (!(spec.strong_lo > 0.0) || spec.strong_lo > spec.strong_hi) {
    throw std::invalid_argument("ortho spec: bad strong magnitude range");
  }
  if (spec.weak < 0.0 || spec.noise_sd < 0.0) {
    throw std::invalid_argument("ortho spec: negative weak level or noise sd");
  }
}

struct RunningStat {
  long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }
  double variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }
  double se() const {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

}  // namespace

OrthoInstance make_ortho_instance(const OrthoSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  CounterRng rng(seed, 0);

  Eigen::MatrixXd g(spec.n, spec.p);
  for (int j = 0; j < spec.p; ++j) {
    for (int i = 0; i < spec.n; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(spec.n, spec.p);

  OrthoInstance inst;
  inst.lambda = spec.lambda;
  inst.p_strong = spec.p_strong;
  inst.p_weak = spec.p_weak;
  inst.data.X = std::sqrt(static_cast<double>(spec.n)) * q;

  const Eigen::MatrixXd gram =
      inst.data.X.transpose() * inst.data.X / static_cast<double>(spec.n);
  const double dev =
      (gram - Eigen::MatrixXd::Identity(spec.p, spec.p)).cwiseAbs().maxCoeff();
  if (dev > 1e-10) throw RunError("orthonormal construction failed");

  inst.beta_true = Eigen::VectorXd::Zero(spec.p);
  for (int j = 0; j < spec.p_strong; ++j) {
    const double mag =
        spec.strong_lo + (spec.strong_hi - spec.strong_lo) * rng.uniform();
    inst.beta_true[j] = rng.uniform() < 0.5 ? mag : -mag;
  }
  for (int j = spec.p_strong; j < spec.p_strong + spec.p_weak; ++j) {
    inst.beta_true[j] = spec.weak;
  }

  inst.data.y.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    inst.data.y[i] = spec.noise_sd * rng.normal();
  }
  inst.data.y += inst.data.X * inst.beta_true;

  inst.data.names.reserve(spec.p);
  for (int j = 0; j < spec.p; ++j) {
    inst.data.names.push_back("x" + std::to_string(j + 1));
  }
  inst.data.validate();
  return inst;
}

ClosedFormFits closed_form_fits(const OrthoInstance& inst, double gamma) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("closed_form_fits: gamma must be positive");
  }
  const auto n = static_cast<double>(inst.data.n());
  ClosedFormFits out;
  out.beta_lse = inst.data.X.transpose() * inst.data.y / n;
  const auto p = inst.data.p();
  out.of.resize(p);
  out.uf.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double b = out.beta_lse[j];
    out.of[j] = soft_threshold(b, inst.lambda / 2.0);
    if (b == 0.0) {
      out.uf[j] = 0.0;
    } else {
      const double mag =
          std::abs(b) - inst.lambda / (2.0 * std::pow(std::abs(b), gamma));
      out.uf[j] = mag > 0.0 ? sgn(b) * mag : 0.0;
    }
  }
  return out;
}

OrthoAnalysis analyze_instance(const OrthoInstance& inst, double gamma) {
  if (inst.p_strong < 1) {
    throw std::invalid_argument("analyze_instance: empty strong block");
  }
  OrthoAnalysis out;
  out.fits = closed_form_fits(inst, gamma);

  const auto n = inst.data.n();
  const Eigen::VectorXd uf1 = out.fits.uf.head(inst.p_strong);
  const Eigen::VectorXd resid =
      inst.data.y - inst.data.X.leftCols(inst.p_strong) * uf1;
  out.sigma2 = resid.squaredNorm() / static_cast<double>(n - 1);
  if (!(out.sigma2 > 0.0)) throw RunError("degenerate variance");

  const Eigen::VectorXd lse2 =
      out.fits.beta_lse.segment(inst.p_strong, inst.p_weak);
  out.wn = static_cast<double>(n) * lse2.squaredNorm() / out.sigma2;

  out.d = out.fits.of.head(inst.p_strong) - uf1;
  const double dd = out.d.squaredNorm();
  const Eigen::VectorXd of_err =
      out.fits.of.head(inst.p_strong) - inst.beta_true.head(inst.p_strong);
  out.alpha = dd > 0.0 ? of_err.dot(out.d) / dd
                       : std::numeric_limits<double>::quiet_NaN();

  for (int j = 0; j < inst.p_strong; ++j) {
    const double s = sgn(out.fits.beta_lse[j]);
    out.sign_sum += static_cast<int>(s);
  }
  return out;
}

BoundReport check_difference_bound(const OrthoInstance& inst) {
  if (!(inst.lambda < 2.0)) {
    throw std::invalid_argument("difference bound: requires lambda < 2");
  }
  const auto fits = closed_form_fits(inst, 1.0);
  const double half = inst.lambda / 2.0;

  BoundReport rep;
  for (int j = 0; j < inst.p_strong; ++j) {
    const double b = fits.beta_lse[j];
    // Interior OF and UF solutions need |lse|^2 > lambda/2; below that the
    // closed-form identity for D does not apply.
    if (b == 0.0 || b * b <= half) {
      ++rep.skipped;
      continue;
    }
    ++rep.checked;
    const double d = fits.of[j] - fits.uf[j];
    const double formula = half * sgn(b) * (1.0 / std::abs(b) - 1.0);
    const double gap = std::abs(d - formula);
    rep.max_identity_gap = std::max(rep.max_identity_gap, gap);
    if (gap > 1e-9) ++rep.identity_violations;
    if (!(sgn(b) * d < 1.0 - half)) ++rep.bound_violations;
  }
  return rep;
}

DominanceReport check_dominance_condition(const OrthoInstance& inst,
                                          ShrinkVariant v) {
  if (inst.p_weak < 3) {
    throw std::invalid_argument("dominance check: needs at least 3 weak coordinates");
  }
  const auto an = analyze_instance(inst, 1.0);
  DominanceReport rep;
  rep.wn = an.wn;
  rep.alpha = an.alpha;
  if (!(an.wn > 0.0) || !std::isfinite(an.alpha)) {
    rep.skipped = true;
    return rep;
  }
  rep.ratio = shrink_r(v, an.wn) / an.wn;
  rep.threshold = 2.0 / static_cast<double>(inst.p_weak - 2) * an.alpha;
  rep.holds = rep.ratio < rep.threshold;
  return rep;
}

void TheoryConfig::validate() const {
  if (oracle_instances < 1 || bound_instances < 1 ||
      dominance_instances < 1 || risk_instances < 1 || trend_instances < 2) {
    throw std::invalid_argument("theory config: instance counts too small");
  }
  if (bound_lambdas.empty() || trend_ns.size() < 2) {
    throw std::invalid_argument("theory config: need bound lambdas and at least two trend sizes");
  }
  for (double l : bound_lambdas) {
    if (!(l > 0.0 && l < 2.0)) {
      throw std::invalid_argument("theory config: bound lambdas must lie in (0, 2)");
    }
  }
  for (std::size_t i = 1; i < trend_ns.size(); ++i) {
    if (trend_ns[i] <= trend_ns[i - 1]) {
      throw std::invalid_argument("theory config: trend sizes must increase");
    }
  }
  validate_spec(base);
  if (base.p_strong < 1 || base.p_weak < 3) {
    throw std::invalid_argument("theory config: base spec needs a strong block and 3+ weak coordinates");
  }
}

TheoryReport run_theory_checks(const TheoryConfig& config) {
  config.validate();
  TheoryReport rep;

  rep.oracle_instances = config.oracle_instances;
  SolverOptions opts;
  opts.intercept = false;
  for (int i = 0; i < config.oracle_instances; ++i) {
    CounterRng shape(derive_stream(config.seed, kStreamOracleShape, i), 0);
    OrthoSpec spec;
    spec.n = 30 + static_cast<int>(shape.below(51));
    spec.p = 4 + static_cast<int>(shape.below(9));
    spec.p_strong = 1 + static_cast<int>(shape.below(spec.p - 1));
    spec.p_weak = static_cast<int>(shape.below(spec.p - spec.p_strong + 1));
    spec.lambda = 0.2 + 1.6 * shape.uniform();
    spec.strong_lo = 0.5;
    spec.strong_hi = 3.0;
    spec.weak = 0.8 * shape.uniform();
    const auto inst = make_ortho_instance(
        spec, derive_stream(config.seed, kStreamOracleInstance, i));
    const auto fits = closed_form_fits(inst, 1.0);
    const double solver_lambda = inst.lambda * static_cast<double>(spec.n);

    const auto lasso = fit_lasso(inst.data, solver_lambda, opts);
    FitResult pilot;
    pilot.coefficients = fits.beta_lse;
    const auto alasso = fit_alasso(inst.data, solver_lambda, 1.0, pilot, opts);

    const double gap = std::max(
        (lasso.coefficients - fits.of).cwiseAbs().maxCoeff(),
        (alasso.coefficients - fits.uf).cwiseAbs().maxCoeff());
    rep.oracle_max_gap = std::max(rep.oracle_max_gap, gap);
  }
  rep.oracle_pass = rep.oracle_max_gap <= 1e-6;

  rep.bound_instances = config.bound_instances;
  rep.bound_lambdas = config.bound_lambdas;
  for (int i = 0; i < config.bound_instances; ++i) {
    OrthoSpec spec = config.base;
    spec.weak = 0.0;
    auto inst =
        make_ortho_instance(spec, derive_stream(config.seed, kStreamBound, i));
    for (double lambda : config.bound_lambdas) {
      inst.lambda = lambda;
      const auto b = check_difference_bound(inst);
      rep.bound_checked += b.checked;
      rep.bound_skipped += b.skipped;
      rep.identity_violations += b.identity_violations;
      rep.bound_violations += b.bound_violations;
      rep.max_identity_gap = std::max(rep.max_identity_gap, b.max_identity_gap);
    }
  }

  long negative_sign_sums = 0;
  for (int i = 0; i < config.dominance_instances; ++i) {
    const auto inst = make_ortho_instance(
        config.base, derive_stream(config.seed, kStreamDominance, i));
    const auto an = analyze_instance(inst, 1.0);
    if (an.sign_sum < 0) ++negative_sign_sums;
    for (ShrinkVariant v : kAllVariants) {
      auto& sum = rep.dominance[variant_name(v)];
      const auto d = check_dominance_condition(inst, v);
      if (d.skipped) {
        ++sum.skipped;
      } else {
        ++sum.checked;
        if (d.holds) ++sum.holds;
      }
    }
  }
  for (auto& [name, sum] : rep.dominance) {
    sum.frequency =
        sum.checked > 0
            ? static_cast<double>(sum.holds) / static_cast<double>(sum.checked)
            : 0.0;
  }
  rep.sign_sum_negative_fraction =
      static_cast<double>(negative_sign_sums) /
      static_cast<double>(config.dominance_instances);

  const int decades = 16;
  const int per_decade = 100;
  rep.ratio_grid_points = decades * per_decade + 1;
  double prev_fs1 = 0.0;
  double prev_fs3 = 0.0;
  for (int k = 0; k < rep.ratio_grid_points; ++k) {
    const double w = std::pow(
        10.0, -8.0 + static_cast<double>(k) / static_cast<double>(per_decade));
    const double fs1 = shrink_r(ShrinkVariant::kBounded1, w) / w;
    const double fs3 = shrink_r(ShrinkVariant::kBounded3, w) / w;
    if (k > 0) {
      if (fs1 > prev_fs1 * (1.0 + 1e-12)) ++rep.fs1_ratio_violations;
      if (fs3 > prev_fs3 * (1.0 + 1e-12)) ++rep.fs3_ratio_violations;
    }
    prev_fs1 = fs1;
    prev_fs3 = fs3;
  }

  for (std::size_t t = 0; t < config.trend_ns.size(); ++t) {
    const int n = config.trend_ns[t];
    OrthoSpec spec = config.base;
    spec.n = n;
    spec.p = config.base.p_strong + config.base.p_weak;
    spec.weak = 0.0;
    spec.lambda = std::pow(static_cast<double>(n), 0.25);
    spec.strong_lo = 1.2 * spec.lambda;
    spec.strong_hi = 3.0 * spec.lambda;
    RunningStat dev;
    for (int i = 0; i < config.trend_instances; ++i) {
      const auto inst = make_ortho_instance(
          spec, derive_stream(config.seed, kStreamTrend,
                              static_cast<std::uint64_t>(t) * 1000003u + i));
      const auto an = analyze_instance(inst, 2.0);
      if (std::isfinite(an.alpha)) dev.add(std::abs(an.alpha - 1.0));
    }
    rep.alpha_trend.push_back({n, dev.mean});
  }
  rep.alpha_trend_decreasing = true;
  for (std::size_t t = 1; t < rep.alpha_trend.size(); ++t) {
    if (rep.alpha_trend[t].mean_abs_dev >=
        rep.alpha_trend[t - 1].mean_abs_dev) {
      rep.alpha_trend_decreasing = false;
    }
  }

  std::map<std::string, RunningStat> risk_stats;
  for (int i = 0; i < config.risk_instances; ++i) {
    OrthoSpec spec = config.base;
    spec.weak = 0.0;
    const auto inst =
        make_ortho_instance(spec, derive_stream(config.seed, kStreamRisk, i));
    const auto an = analyze_instance(inst, 1.0);
    if (!(an.wn > 0.0)) continue;
    const Eigen::VectorXd beta1 = inst.beta_true.head(inst.p_strong);
    const Eigen::VectorXd of1 = an.fits.of.head(inst.p_strong);
    const Eigen::VectorXd uf1 = an.fits.uf.head(inst.p_strong);
    const double of_risk = (of1 - beta1).squaredNorm();
    for (ShrinkVariant v : kAllVariants) {
      const double factor = shrink_factor(v, an.wn, inst.p_weak);
      const Eigen::VectorXd est = uf1 + factor * (of1 - uf1);
      risk_stats[variant_name(v)].add((est - beta1).squaredNorm() - of_risk);
    }
  }
  for (const auto& [name, stat] : risk_stats) {
    RiskSummary sum;
    sum.mean_diff = stat.mean;
    sum.se = stat.se();
    sum.negative = stat.mean + 2.0 * sum.se < 0.0;
    rep.risk[name] = sum;
  }

  rep.pass = rep.oracle_pass && rep.identity_violations == 0 &&
             rep.bound_violations == 0 && rep.fs1_ratio_violations == 0 &&
             rep.fs3_ratio_violations == 0 && rep.alpha_trend_decreasing;
  for (const char* name : {"PS", "FS1", "FS2", "FS3"}) {
    const auto it = rep.risk.find(name);
    rep.pass = rep.pass && it != rep.risk.end() && it->second.negative;
  }
  return rep;
}

}  // namespace dshrink
