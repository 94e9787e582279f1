#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "subspace_uq/dims.hpp"
#include "subspace_uq/model.hpp"

namespace subspace_uq {

// Which singular values a statistic was assembled from.
enum class LambdaKind { kTrue, kEmpirical, kShrunk };

// Singular values of a given provenance. For the shrunk kind, valid[j] is
// false when the empirical value sat below the detectability edge
// hat_lambda^2 < (d1+d2) + 2 sqrt(d1 d2); the entry then falls back to the
// empirical value and downstream statistics are marked degraded.
struct SingularValueEstimate {
  LambdaKind kind = LambdaKind::kTrue;
  Vector values;
  std::vector<bool> valid;

  bool all_valid() const;
  std::size_t invalid_count() const;
};

SingularValueEstimate true_lambda(const Vector& lambda);
SingularValueEstimate empirical_lambda(const Vector& lambdahat);

// Order-k closed-form approximation of E dist^2:
//   B_k = 2 d_star ||Lambda^-1||_F^2
//         - 2 sum_{k0=2}^{k} (-1)^k0 (d1m^(k0-1) - d2m^(k0-1)) (d1m - d2m)
//                            ||Lambda^-k0||_F^2
// evaluated with compensated summation; every correction carries the factor
// (d1m - d2m), so B_k == B_1 exactly when d1 == d2.
double bias_k(const Dims& dims, const Vector& lambda, int k);

// Closed-form limit of the ladder:
//   B_inf = 2 sum_j lambda_j^-2 ( d1m (lambda_j^2 + d2m) / (lambda_j^2 + d1m)
//                               + d2m (lambda_j^2 + d1m) / (lambda_j^2 + d2m) ).
double bias_infinity(const Dims& dims, const Vector& lambda);

// CLT normalizer sigma = sqrt(8 d_star) * ||Lambda^-2||_F.
double sigma_normalizer(const Dims& dims, const Vector& lambda);

// Inverts the empirical singular-value inflation
//   hat_lambda^2 ~ lambda^2 + (d1+d2) + d1 d2 / lambda^2
// via tilde_lambda^2 = (hat^2 - (d1+d2))/2 + sqrt((hat^2-(d1+d2))^2 - 4 d1 d2)/2.
// Entries below the detectability edge are flagged invalid, never NaN.
SingularValueEstimate shrink_singular_values(const Dims& dims,
                                             const Vector& lambdahat);

// E || Lambda^-j1 Z Z^T Lambda^-j2 ||_F^2 for Z an r x d matrix of i.i.d.
// standard normals:
//   d^2 ||Lambda^-(j1+j2)||_F^2
//   + d (||Lambda^-(j1+j2)||_F^2 + ||Lambda^-j1||_F^2 ||Lambda^-j2||_F^2).
double wishart_frobenius_moment(const Vector& lambda, int d, int j1, int j2);

// Leading-order trace moment of a d1m x (d2m+1) Gaussian Wishart product,
// scaled by (1 + lambda^2 / (1 + d2m)):
//   beta_t = scale / (t-1) * sum_{j=0}^{t-2} d1m^(j+1) (d2m+1)^(t-1-j)
//                                            C(t-1, j+1) C(t-1, j),
// the Narayana-weighted moment of the limiting spectral law. Exact integer
// arithmetic inside, scaled at the end. t >= 2.
double mp_moment_beta(int t, int d1m, int d2m, double lambda_sq);

// The full ladder for one lambda source: B_1..B_K, B_inf and sigma.
struct BiasLadder {
  Dims dims;
  SingularValueEstimate lambda;
  std::map<int, double> orders;  // k -> B_k
  double b_infinity = 0.0;
  double sigma = 0.0;
};

BiasLadder make_bias_ladder(const Dims& dims,
                            const SingularValueEstimate& lambda, int max_order);

// Compensated (Neumaier) summation of a fixed-order term sequence.
double neumaier_sum(const std::vector<double>& terms);

}  // namespace subspace_uq
