#pragma once

#include <Eigen/Dense>

#include "subspace_uq/model.hpp"

namespace subspace_uq {

// Symmetric dilation A = [[0, M], [M^T, 0]] of a rank-r factorization
// (U, lambda, V). Its nonzero eigenvalues are +/- lambda_i with eigenvectors
// theta_{+i} = (u_i; v_i)/sqrt(2) and theta_{-i} = (u_i; -v_i)/sqrt(2).
//
// The class stores only the thin factors; the weighted projectors P^{-k} and
// the complement projector P_perp are applied blockwise in O(d * r) per
// column. The orthonormal completion Theta_perp is never materialized:
// P_perp acts as (I - U U^T) on the top block and (I - V V^T) on the bottom.
class SymmetricDilation {
 public:
  SymmetricDilation(Dims dims, Matrix u, Matrix v, Vector lambda);

  const Dims& dims() const { return dims_; }
  const Matrix& u() const { return u_; }
  const Matrix& v() const { return v_; }
  const Vector& lambda() const { return lambda_; }
  double lambda_min() const { return lambda_(lambda_.size() - 1); }

  // (d1+d2) x 2r matrix with columns theta_1..theta_r, theta_{-r}..theta_{-1}.
  Matrix theta() const;

  // Dense A, for small-dimension oracles.
  Matrix matrix() const;

  // P^{-k} m for k >= 1; P_perp m for k == 0.
  Matrix apply_projector_power(int k, const Matrix& m) const;

  // (I - Theta Theta^T) m, applied blockwise.
  Matrix apply_p_perp(const Matrix& m) const;

  // Theta Theta^T m = (U U^T a; V V^T b).
  Matrix apply_signal_projector(const Matrix& m) const;

  // X m where X = [[0, Z], [Z^T, 0]] is the dilation of the noise block.
  Matrix apply_noise(const Matrix& z, const Matrix& m) const;

  // Dense P^{-k} (k >= 1) or I - Theta Theta^T (k == 0).
  Matrix projector_power_dense(int k) const;

 private:
  Dims dims_;
  Matrix u_, v_;
  Vector lambda_;
};

SymmetricDilation dilate(const LowRankModel& model);
SymmetricDilation dilate(const EmpiricalSVD& svd, const Dims& dims);

// Dense dilation [[0, B], [B^T, 0]] of an arbitrary d1 x d2 block.
Matrix dilate_block(const Matrix& b);

// The spectral-projector power as a value: P^{-k} for k >= 1, P_perp for
// k == 0. Thin wrapper so call sites can pass the operator around.
class ProjectorPower {
 public:
  ProjectorPower(const SymmetricDilation& dilation, int k);

  int order() const { return k_; }
  Matrix apply(const Matrix& m) const;
  Matrix dense() const;

 private:
  const SymmetricDilation* dilation_;
  int k_;
};

ProjectorPower proj_power(const SymmetricDilation& dilation, int k);

}  // namespace subspace_uq
