#include "dshrink/shrinkage.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <set>

namespace dshrink {

SupportPartition partition_supports(const FitResult& lasso_fit,
                                    const FitResult& alasso_fit, int p) {
  const std::set<int> of(lasso_fit.active_set.begin(), lasso_fit.active_set.end());
  const std::set<int> uf(alasso_fit.active_set.begin(), alasso_fit.active_set.end());
  for (const int j : of)
    if (j < 0 || j >= p) throw std::invalid_argument("active index out of range");
  for (const int j : uf)
    if (j < 0 || j >= p) throw std::invalid_argument("active index out of range");

  SupportPartition part;
  for (const int j : uf) {
    part.s1.push_back(j);
    if (!of.count(j))
      part.warnings.push_back("index " + std::to_string(j) +
                              " kept by the aggressive fit only; leaving it in s1");
  }
  for (const int j : of)
    if (!uf.count(j)) part.s2.push_back(j);
  for (int j = 0; j < p; ++j)
    if (!of.count(j) && !uf.count(j)) part.s3.push_back(j);

  if (part.s1.empty()) throw RunError("no strong signals selected");
  return part;
}

double residual_variance(const Dataset& data, const SupportPartition& part,
                         const Eigen::VectorXd& beta1, double intercept) {
  if (beta1.size() != Eigen::Index(part.s1.size()))
    throw std::invalid_argument("beta1 length does not match s1");
  Eigen::VectorXd resid =
      data.y - Eigen::VectorXd::Constant(data.n(), intercept);
  for (size_t k = 0; k < part.s1.size(); ++k)
    resid -= data.X.col(part.s1[k]) * beta1[Eigen::Index(k)];
  const double out = resid.squaredNorm() / double(data.n() - 1);
  if (!(out > 0)) throw RunError("degenerate variance");
  return out;
}

WeightStatistic compute_wn(const Dataset& data, const SupportPartition& part,
                           double sigma2, bool include_intercept) {
  const Eigen::Index n = data.n();
  const int p1 = part.p1();
  const int p2 = part.p2();
  if (p1 + p2 > int(n)) throw RunError("p1 + p2 exceeds the sample size");
  if (!(sigma2 > 0)) throw RunError("residual variance is not positive");

  WeightStatistic out;
  if (p2 == 0) {
    out.beta2_lse = Eigen::VectorXd();
    out.wn = 0.0;
    return out;
  }

  const int q = p1 + (include_intercept ? 1 : 0);
  Eigen::MatrixXd strong(n, q);
  for (int k = 0; k < p1; ++k) strong.col(k) = data.X.col(part.s1[size_t(k)]);
  if (include_intercept) strong.col(p1) = Eigen::VectorXd::Ones(n);

  Eigen::MatrixXd weak(n, p2);
  for (int k = 0; k < p2; ++k) weak.col(k) = data.X.col(part.s2[size_t(k)]);

  // Residualize the weak block and response against the strong block; the
  // quadratic form below is then the Wald form beta2'(X2' M1 X2) beta2.
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(strong);
  if (qr.rank() < q) throw RunError("singular restricted design: strong block");
  const Eigen::MatrixXd weak_proj = weak - strong * qr.solve(weak);
  const Eigen::VectorXd y_proj = data.y - strong * qr.solve(data.y);

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(weak_proj);
  if (qr2.rank() < p2) throw RunError("singular restricted design: weak block");

  out.beta2_lse = qr2.solve(y_proj);
  out.wn = (weak_proj * out.beta2_lse).squaredNorm() / sigma2;
  return out;
}

const char* variant_name(ShrinkVariant v) {
  switch (v) {
    case ShrinkVariant::kStein: return "S";
    case ShrinkVariant::kPositiveStein: return "PS";
    case ShrinkVariant::kBounded1: return "FS1";
    case ShrinkVariant::kBounded2: return "FS2";
    case ShrinkVariant::kBounded3: return "FS3";
  }
  return "?";
}

double shrink_r(ShrinkVariant v, double wn) {
  if (!(wn >= 0)) throw std::invalid_argument("wn must be >= 0");
  switch (v) {
    case ShrinkVariant::kStein:
    case ShrinkVariant::kPositiveStein:
      return 1.0;
    case ShrinkVariant::kBounded1:
      return wn / (1.0 + wn);
    case ShrinkVariant::kBounded2:
      return std::exp(-wn * wn);
    case ShrinkVariant::kBounded3:
      return std::atan(wn);
  }
  throw std::invalid_argument("unknown variant");
}

double shrink_factor(ShrinkVariant v, double wn, int p2) {
  if (!(wn >= 0)) throw std::invalid_argument("wn must be >= 0");
  if (p2 < 3) throw RunError("insufficient weak set");
  const double c = double(p2 - 2);
  switch (v) {
    case ShrinkVariant::kStein:
      if (wn == 0) throw RunError("unbounded shrink factor");
      return 1.0 - c / wn;
    case ShrinkVariant::kPositiveStein:
      if (wn == 0) return 0.0;
      return std::max(0.0, 1.0 - c / wn);
    case ShrinkVariant::kBounded1:
      // r(w)/w = 1/(1+w) stays finite at w = 0
      return 1.0 - c / (1.0 + wn);
    case ShrinkVariant::kBounded2:
      if (wn == 0) throw RunError("unbounded shrink factor");
      return 1.0 - c * std::exp(-wn * wn) / wn;
    case ShrinkVariant::kBounded3:
      if (wn == 0) throw RunError("unbounded shrink factor");
      return 1.0 - c * std::atan(wn) / wn;
  }
  throw std::invalid_argument("unknown variant");
}

ShrinkageFit shrink(const ShrinkageInputs& in, ShrinkVariant v, int p2,
                    const SupportPartition& part, int p) {
  if (in.beta1_uf.size() != in.beta1_of.size())
    throw std::invalid_argument("UF and OF block lengths differ");
  if (in.beta1_uf.size() != Eigen::Index(part.s1.size()))
    throw std::invalid_argument("block length does not match s1");
  if (!(in.sigma2_hat > 0))
    throw std::invalid_argument("sigma2_hat must be > 0");
  ShrinkageFit out;
  out.variant = v;
  out.wn = in.wn;
  out.factor = shrink_factor(v, in.wn, p2);
  out.beta1 = in.beta1_uf + out.factor * (in.beta1_of - in.beta1_uf);
  out.full_beta = Eigen::VectorXd::Zero(p);
  for (size_t k = 0; k < part.s1.size(); ++k)
    out.full_beta[part.s1[k]] = out.beta1[Eigen::Index(k)];
  return out;
}

}  // namespace dshrink
