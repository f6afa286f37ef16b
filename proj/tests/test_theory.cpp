#include "dshrink/theory.hpp"

#include "doctest.h"

#include <cmath>
#include <string>

using namespace dshrink;

namespace {

// X'X = n I makes the LSE equal X'y/n, so y = X t realizes lse = t exactly.
OrthoInstance instance_with_lse(const Eigen::VectorXd& lse, double lambda) {
  OrthoSpec spec;
  spec.n = 20;
  spec.p = int(lse.size());
  spec.p_strong = int(lse.size());
  spec.p_weak = 0;
  spec.lambda = lambda;
  OrthoInstance inst = make_ortho_instance(spec, 5);
  inst.data.y = inst.data.X * lse;
  return inst;
}

}  // namespace

TEST_CASE("orthonormal instances satisfy the gram invariant") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    OrthoSpec spec;
    spec.n = 30 + int(seed);
    spec.p = 10;
    spec.p_strong = 4;
    spec.p_weak = 3;
    spec.weak = 0.4;
    const OrthoInstance inst = make_ortho_instance(spec, seed);
    const Eigen::MatrixXd gram =
        inst.data.X.transpose() * inst.data.X / double(spec.n);
    CHECK((gram - Eigen::MatrixXd::Identity(spec.p, spec.p))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
    for (int j = 0; j < spec.p_strong; ++j) {
      CHECK(std::abs(inst.beta_true[j]) >= spec.strong_lo);
      CHECK(std::abs(inst.beta_true[j]) <= spec.strong_hi);
    }
    for (int j = spec.p_strong; j < spec.p_strong + spec.p_weak; ++j)
      CHECK(inst.beta_true[j] == spec.weak);
    for (int j = spec.p_strong + spec.p_weak; j < spec.p; ++j)
      CHECK(inst.beta_true[j] == 0.0);
  }
  OrthoSpec bad;
  bad.p = bad.n + 1;
  CHECK_THROWS_AS(make_ortho_instance(bad, 1), std::invalid_argument);
}

TEST_CASE("closed forms evaluate the soft-threshold displays") {
  Eigen::VectorXd lse(2);
  lse << 1.0, 2.0;
  const OrthoInstance inst = instance_with_lse(lse, 1.0);
  const ClosedFormFits fits = closed_form_fits(inst);
  CHECK(fits.beta_lse[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fits.beta_lse[1] == doctest::Approx(2.0).epsilon(1e-12));
  // lse 1, lambda 1: both thresholds are 1/2
  CHECK(fits.of[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fits.uf[0] == doctest::Approx(0.5).epsilon(1e-12));
  // lse 2: OF = 1.5, UF = 2 - 1/(2*2) = 1.75
  CHECK(fits.of[1] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fits.uf[1] == doctest::Approx(1.75).epsilon(1e-12));

  Eigen::VectorXd negative(1);
  negative << -2.0;
  const ClosedFormFits neg =
      closed_form_fits(instance_with_lse(negative, 1.0));
  CHECK(neg.of[0] == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(neg.uf[0] == doctest::Approx(-1.75).epsilon(1e-12));
}

TEST_CASE("difference bound holds with the displayed identity") {
  Eigen::VectorXd lse(3);
  lse << 2.0, -3.0, 1.2;
  const OrthoInstance inst = instance_with_lse(lse, 1.0);
  const BoundReport report = check_difference_bound(inst);
  CHECK(report.checked == 3);
  CHECK(report.skipped == 0);
  CHECK(report.identity_violations == 0);
  CHECK(report.bound_violations == 0);
  CHECK(report.max_identity_gap <= 1e-12);

  const ClosedFormFits fits = closed_form_fits(inst);
  // D_j = OF_j - UF_j = (lambda/2) sgn(lse)(1/|lse| - 1)
  CHECK(fits.of[0] - fits.uf[0] ==
        doctest::Approx(0.5 * (1.0 / 2.0 - 1.0)).epsilon(1e-12));

  // a coordinate with |lse| below lambda/2 is skipped, not violated
  Eigen::VectorXd small(2);
  small << 0.3, 2.0;
  const BoundReport skipped =
      check_difference_bound(instance_with_lse(small, 1.0));
  CHECK(skipped.checked == 1);
  CHECK(skipped.skipped == 1);
  CHECK(skipped.bound_violations == 0);
}

TEST_CASE("dominance check reports the ratio against its threshold") {
  OrthoSpec spec;
  spec.n = 60;
  spec.p = 14;
  spec.p_strong = 4;
  spec.p_weak = 6;
  spec.weak = 0.2;
  const OrthoInstance inst = make_ortho_instance(spec, 21);
  const DominanceReport rep =
      check_dominance_condition(inst, ShrinkVariant::kBounded1);
  if (!rep.skipped) {
    CHECK(rep.wn > 0.0);
    CHECK(rep.ratio == doctest::Approx(shrink_r(ShrinkVariant::kBounded1,
                                                rep.wn) /
                                       rep.wn));
    CHECK(rep.holds == (rep.ratio <= rep.threshold));
  }
}

TEST_CASE("theory config validation") {
  TheoryConfig cfg;
  cfg.oracle_instances = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TheoryConfig{};
  cfg.bound_lambdas = {2.5};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TheoryConfig{};
  cfg.trend_ns = {100, 50};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("reduced conformance sweep passes every check") {
  TheoryConfig cfg;
  cfg.oracle_instances = 15;
  cfg.bound_instances = 60;
  cfg.bound_lambdas = {0.5, 1.5};
  cfg.dominance_instances = 50;
  cfg.risk_instances = 120;
  cfg.trend_ns = {50, 200};
  cfg.trend_instances = 60;
  cfg.seed = 3;
  const TheoryReport report = run_theory_checks(cfg);
  CHECK(report.oracle_pass);
  CHECK(report.oracle_max_gap <= 1e-6);
  CHECK(report.identity_violations == 0);
  CHECK(report.bound_violations == 0);
  CHECK(report.fs1_ratio_violations == 0);
  CHECK(report.fs3_ratio_violations == 0);
  CHECK(report.alpha_trend_decreasing);
  REQUIRE(report.alpha_trend.size() == 2);
  CHECK(report.alpha_trend[1].mean_abs_dev < report.alpha_trend[0].mean_abs_dev);
  for (const char* name : {"FS1", "FS2", "FS3", "PS"}) {
    INFO(name);
    CHECK(report.risk.at(name).negative);
  }
  CHECK(report.pass);
}
