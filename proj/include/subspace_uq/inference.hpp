#pragma once

#include "subspace_uq/bias.hpp"
#include "subspace_uq/dims.hpp"
#include "subspace_uq/model.hpp"

namespace subspace_uq {

// Standard normal CDF, |error| < 1e-12.
double std_normal_cdf(double x);

// Standard normal quantile; satisfies |Phi(q) - p| < 1e-12 for p in (0,1).
double std_normal_quantile(double p);

// Squared projection distance between (U1, V1) and (U2, V2):
//   ||U1 U1^T - U2 U2^T||_F^2 + ||V1 V1^T - V2 V2^T||_F^2
// computed as 4r - 2||U1^T U2||_F^2 - 2||V1^T V2||_F^2, never forming the
// d x d projectors.
double projection_distance2(const Matrix& u1, const Matrix& v1,
                            const Matrix& u2, const Matrix& v2);

// Bias order selector: a finite ladder order k, or the closed-form limit.
struct BiasOrder {
  int k = 1;
  bool infinite = false;

  static BiasOrder order(int k) { return {k, false}; }
  static BiasOrder infinity() { return {0, true}; }
};

// Default correction depth, ceil(log d_max).
int default_bias_order(const Dims& dims);

double bias_value(const Dims& dims, const Vector& lambda, BiasOrder order);

// The normalized statistic (dist^2 - B) / sigma with B and sigma assembled
// from the given lambda source. degraded marks statistics built from a
// shrunk estimate with at least one invalid entry.
struct CltStatistic {
  double dist2 = 0.0;
  double bias = 0.0;
  double sigma = 0.0;
  double value = 0.0;
  BiasOrder order;
  LambdaKind lambda_kind = LambdaKind::kTrue;
  bool degraded = false;
};

CltStatistic clt_statistic(double dist2, const Dims& dims,
                           const SingularValueEstimate& lambda,
                           BiasOrder order);

// Confidence-region parameters: level alpha and the bias order used for the
// centering term.
struct ConfidenceRegionSpec {
  double alpha = 0.05;
  BiasOrder order;

  ConfidenceRegionSpec(double alpha_, BiasOrder order_)
      : alpha(alpha_), order(order_) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("ConfidenceRegionSpec: alpha must be in (0,1)");
  }
};

// Membership test for the annular region
//   | dist^2[(L,R), (Uhat,Vhat)] - B | <= sqrt(8 d_star) z_{alpha/2}
//                                         ||Lambda^-2||_F.
// margin = radius - |deviation|; contained iff margin >= 0.
struct RegionResult {
  bool contained = false;
  double margin = 0.0;
  double radius = 0.0;
  double deviation = 0.0;  // dist^2 - B, signed
};

RegionResult confidence_region_contains(const Matrix& candidate_l,
                                        const Matrix& candidate_r,
                                        const Matrix& center_u,
                                        const Matrix& center_v,
                                        const Dims& dims,
                                        const SingularValueEstimate& lambda,
                                        const ConfidenceRegionSpec& spec);

}  // namespace subspace_uq
