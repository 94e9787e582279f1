#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "subspace_uq/dims.hpp"

namespace subspace_uq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Identifies one reproducible noise draw: a keyed substream of the
// counter-based generator. Distinct streams are independent; a fixed
// (seed, stream, dims) triple always yields the same matrix, bit for bit.
//
// sigma scales the entries to N(0, sigma^2). All bias/CLT formulas in this
// library assume unit variance; callers that change sigma must pre-scale
// their data accordingly.
struct NoiseSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double sigma = 1.0;
};

// Stream index reserved for drawing model orientations, far outside the
// replicate range used by the Monte-Carlo harness.
inline constexpr std::uint64_t kOrientationStream = 0x8000000000000000ull;

// Ground truth M = U diag(lambda) V^T.
struct LowRankModel {
  Dims dims;
  Matrix U;       // d1 x r, orthonormal columns
  Matrix V;       // d2 x r, orthonormal columns
  Vector lambda;  // r positive singular values, non-increasing

  Matrix matrix() const { return U * lambda.asDiagonal() * V.transpose(); }
};

// Top-r singular triplets of an observed matrix.
struct EmpiricalSVD {
  Matrix U;       // d1 x r
  Matrix V;       // d2 x r
  Vector lambda;  // r non-negative values, non-increasing
};

// d1 x d2 matrix of i.i.d. N(0, sigma^2) entries, filled in column-major
// variate order.
Matrix sample_noise(const Dims& dims, const NoiseSpec& spec);

// The lambda profile used by all canned experiments: lambda_i = 2^(r-i) * base
// for i = 1..r.
Vector geometric_lambda(int r, double base);

// Draws U, V as the top-r left/right singular subspaces of a seeded d1 x d2
// Gaussian matrix. Deterministic per (dims, lambda, orientation_seed).
LowRankModel make_model(const Dims& dims, const Vector& lambda,
                        std::uint64_t orientation_seed);

// M + Z. Shapes must agree and entries must be finite.
Matrix observe(const LowRankModel& model, const Matrix& noise);

// Top-r SVD of the observed matrix. Column signs are whatever the backend
// produces; every downstream comparison is projector-based, so no alignment
// convention is needed or provided.
EmpiricalSVD top_r_svd(const Matrix& mhat, int r);

// Largest singular value.
double spectral_norm(const Matrix& m);

}  // namespace subspace_uq
