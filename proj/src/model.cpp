#include "subspace_uq/model.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "subspace_uq/errors.hpp"
#include "subspace_uq/philox.hpp"

namespace subspace_uq {

Matrix sample_noise(const Dims& dims, const NoiseSpec& spec) {
  if (!(spec.sigma > 0.0))
    throw std::invalid_argument("sample_noise: sigma must be positive");
  Matrix z(dims.d1, dims.d2);
  const std::int64_t n = static_cast<std::int64_t>(dims.d1) * dims.d2;
  double* data = z.data();  // column-major
  for (std::int64_t i = 0; i < n; ++i)
    data[i] = spec.sigma * normal_variate(spec.seed, spec.stream,
                                          static_cast<std::uint64_t>(i));
  return z;
}

Vector geometric_lambda(int r, double base) {
  if (r < 1) throw std::invalid_argument("geometric_lambda: r must be >= 1");
  if (!(base > 0.0))
    throw std::invalid_argument("geometric_lambda: base must be positive");
  Vector lambda(r);
  for (int i = 0; i < r; ++i) lambda(i) = std::ldexp(base, r - 1 - i);
  return lambda;
}

namespace {

void check_lambda(const Vector& lambda) {
  if (lambda.size() < 1)
    throw std::invalid_argument("lambda must be non-empty");
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (!(lambda(i) > 0.0))
      throw std::invalid_argument("lambda must be strictly positive");
    if (i > 0 && lambda(i) > lambda(i - 1))
      throw std::invalid_argument("lambda must be non-increasing");
  }
}

}  // namespace

LowRankModel make_model(const Dims& dims, const Vector& lambda,
                        std::uint64_t orientation_seed) {
  check_lambda(lambda);
  if (lambda.size() != dims.r)
    throw std::invalid_argument("make_model: lambda length must equal r");
  const Matrix g =
      sample_noise(dims, NoiseSpec{orientation_seed, kOrientationStream, 1.0});
  Eigen::BDCSVD<Matrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("make_model: SVD of orientation draw failed");
  LowRankModel model;
  model.dims = dims;
  model.U = svd.matrixU().leftCols(dims.r);
  model.V = svd.matrixV().leftCols(dims.r);
  model.lambda = lambda;
  return model;
}

Matrix observe(const LowRankModel& model, const Matrix& noise) {
  if (noise.rows() != model.dims.d1 || noise.cols() != model.dims.d2)
    throw std::invalid_argument("observe: noise shape mismatch");
  if (!noise.allFinite())
    throw std::invalid_argument("observe: noise has non-finite entries");
  return model.matrix() + noise;
}

EmpiricalSVD top_r_svd(const Matrix& mhat, int r) {
  if (r < 1 || r > std::min(mhat.rows(), mhat.cols()))
    throw std::invalid_argument("top_r_svd: need 1 <= r <= min(d1, d2)");
  if (!mhat.allFinite())
    throw std::invalid_argument("top_r_svd: matrix has non-finite entries");
  Eigen::BDCSVD<Matrix> svd(mhat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("top_r_svd: SVD did not converge");
  EmpiricalSVD out;
  out.U = svd.matrixU().leftCols(r);
  out.V = svd.matrixV().leftCols(r);
  out.lambda = svd.singularValues().head(r);
  return out;
}

double spectral_norm(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  if (svd.info() != Eigen::Success)
    throw NumericalError("spectral_norm: SVD did not converge");
  return svd.singularValues()(0);
}

}  // namespace subspace_uq
