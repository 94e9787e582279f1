#include "subspace_uq/dilation.hpp"

#include <cmath>
#include <stdexcept>

namespace subspace_uq {

SymmetricDilation::SymmetricDilation(Dims dims, Matrix u, Matrix v,
                                     Vector lambda)
    : dims_(dims), u_(std::move(u)), v_(std::move(v)),
      lambda_(std::move(lambda)) {
  if (u_.rows() != dims_.d1 || u_.cols() != dims_.r ||
      v_.rows() != dims_.d2 || v_.cols() != dims_.r ||
      lambda_.size() != dims_.r)
    throw std::invalid_argument("SymmetricDilation: shape mismatch");
}

Matrix SymmetricDilation::theta() const {
  const int d1 = dims_.d1, d2 = dims_.d2, r = dims_.r;
  Matrix th = Matrix::Zero(d1 + d2, 2 * r);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  // Columns theta_1..theta_r then theta_{-r}..theta_{-1}.
  for (int i = 0; i < r; ++i) {
    th.col(i).head(d1) = inv_sqrt2 * u_.col(i);
    th.col(i).tail(d2) = inv_sqrt2 * v_.col(i);
    const int j = 2 * r - 1 - i;
    th.col(j).head(d1) = inv_sqrt2 * u_.col(i);
    th.col(j).tail(d2) = -inv_sqrt2 * v_.col(i);
  }
  return th;
}

Matrix SymmetricDilation::matrix() const {
  return dilate_block(u_ * lambda_.asDiagonal() * v_.transpose());
}

Matrix SymmetricDilation::apply_p_perp(const Matrix& m) const {
  const int d1 = dims_.d1, d2 = dims_.d2;
  if (m.rows() != d1 + d2)
    throw std::invalid_argument("apply_p_perp: row mismatch");
  Matrix out(m.rows(), m.cols());
  out.topRows(d1).noalias() = m.topRows(d1) - u_ * (u_.transpose() * m.topRows(d1));
  out.bottomRows(d2).noalias() =
      m.bottomRows(d2) - v_ * (v_.transpose() * m.bottomRows(d2));
  return out;
}

Matrix SymmetricDilation::apply_signal_projector(const Matrix& m) const {
  const int d1 = dims_.d1, d2 = dims_.d2;
  Matrix out(m.rows(), m.cols());
  out.topRows(d1).noalias() = u_ * (u_.transpose() * m.topRows(d1));
  out.bottomRows(d2).noalias() = v_ * (v_.transpose() * m.bottomRows(d2));
  return out;
}

Matrix SymmetricDilation::apply_projector_power(int k, const Matrix& m) const {
  if (k < 0) throw std::invalid_argument("apply_projector_power: k >= 0");
  if (k == 0) return apply_p_perp(m);
  const int d1 = dims_.d1, d2 = dims_.d2;
  if (m.rows() != d1 + d2)
    throw std::invalid_argument("apply_projector_power: row mismatch");
  Vector w(dims_.r);
  for (int i = 0; i < dims_.r; ++i) w(i) = std::pow(lambda_(i), -double(k));
  Matrix out(m.rows(), m.cols());
  if (k % 2 == 1) {
    // [[0, U L^-k V^T], [V L^-k U^T, 0]]
    out.topRows(d1).noalias() =
        u_ * (w.asDiagonal() * (v_.transpose() * m.bottomRows(d2)));
    out.bottomRows(d2).noalias() =
        v_ * (w.asDiagonal() * (u_.transpose() * m.topRows(d1)));
  } else {
    // [[U L^-k U^T, 0], [0, V L^-k V^T]]
    out.topRows(d1).noalias() =
        u_ * (w.asDiagonal() * (u_.transpose() * m.topRows(d1)));
    out.bottomRows(d2).noalias() =
        v_ * (w.asDiagonal() * (v_.transpose() * m.bottomRows(d2)));
  }
  return out;
}

Matrix SymmetricDilation::apply_noise(const Matrix& z, const Matrix& m) const {
  const int d1 = dims_.d1, d2 = dims_.d2;
  if (z.rows() != d1 || z.cols() != d2 || m.rows() != d1 + d2)
    throw std::invalid_argument("apply_noise: shape mismatch");
  Matrix out(m.rows(), m.cols());
  out.topRows(d1).noalias() = z * m.bottomRows(d2);
  out.bottomRows(d2).noalias() = z.transpose() * m.topRows(d1);
  return out;
}

Matrix SymmetricDilation::projector_power_dense(int k) const {
  const int d = dims_.d1 + dims_.d2;
  if (k == 0) {
    Matrix th = theta();
    return Matrix::Identity(d, d) - th * th.transpose();
  }
  return apply_projector_power(k, Matrix::Identity(d, d));
}

SymmetricDilation dilate(const LowRankModel& model) {
  return SymmetricDilation(model.dims, model.U, model.V, model.lambda);
}

SymmetricDilation dilate(const EmpiricalSVD& svd, const Dims& dims) {
  return SymmetricDilation(dims, svd.U, svd.V, svd.lambda);
}

Matrix dilate_block(const Matrix& b) {
  const Eigen::Index d1 = b.rows(), d2 = b.cols();
  Matrix a = Matrix::Zero(d1 + d2, d1 + d2);
  a.topRightCorner(d1, d2) = b;
  a.bottomLeftCorner(d2, d1) = b.transpose();
  return a;
}

ProjectorPower::ProjectorPower(const SymmetricDilation& dilation, int k)
    : dilation_(&dilation), k_(k) {
  if (k < 0) throw std::invalid_argument("ProjectorPower: k must be >= 0");
}

Matrix ProjectorPower::apply(const Matrix& m) const {
  return dilation_->apply_projector_power(k_, m);
}

Matrix ProjectorPower::dense() const {
  return dilation_->projector_power_dense(k_);
}

ProjectorPower proj_power(const SymmetricDilation& dilation, int k) {
  return ProjectorPower(dilation, k);
}

}  // namespace subspace_uq
