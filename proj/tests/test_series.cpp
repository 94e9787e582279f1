#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "subspace_uq/errors.hpp"
#include "subspace_uq/inference.hpp"
#include "subspace_uq/series.hpp"

using namespace subspace_uq;

namespace {

// Dense reference for one series order, built from dense projector powers.
// Deliberately independent of the thin-block evaluation path.
Matrix dense_series_term(const SymmetricDilation& dil, const Matrix& z,
                         int k) {
  const int d = dil.dims().total();
  const Matrix x = dilate_block(z);
  std::vector<Matrix> powers;
  for (int s = 0; s <= k; ++s) powers.push_back(dil.projector_power_dense(s));
  Matrix sum = Matrix::Zero(d, d);
  for_each_composition(k, [&](const std::vector<int>& s, int tau) {
    Matrix term = powers[static_cast<std::size_t>(s[0])];
    for (int i = 1; i <= k; ++i)
      term = term * x * powers[static_cast<std::size_t>(s[i])];
    sum += ((tau % 2 == 1) ? 1.0 : -1.0) * term;
  });
  return sum;
}

SymmetricDilation small_dilation(std::uint64_t seed, const Dims& dims,
                                 double base, LowRankModel* model_out) {
  *model_out = make_model(dims, geometric_lambda(dims.r, base), seed);
  return dilate(*model_out);
}

}  // namespace

TEST_SUITE_BEGIN("series");

TEST_CASE("composition enumeration for small orders") {
  SUBCASE("k = 1") {
    const auto comps = enumerate_compositions(1);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].s == std::vector<int>{0, 1});
    CHECK(comps[1].s == std::vector<int>{1, 0});
    CHECK(comps[0].sign == 1);
    CHECK(comps[1].sign == 1);
  }
  SUBCASE("k = 2 has three + and three - terms") {
    const auto comps = enumerate_compositions(2);
    REQUIRE(comps.size() == 6);
    int plus = 0, minus = 0;
    for (const auto& c : comps) (c.sign > 0 ? plus : minus)++;
    CHECK(plus == 3);
    CHECK(minus == 3);
    // The positive terms are exactly the ones carrying a power of two.
    for (const auto& c : comps) {
      const bool has_two =
          std::find(c.s.begin(), c.s.end(), 2) != c.s.end();
      CHECK(has_two == (c.sign > 0));
    }
  }
  SUBCASE("counts match C(2k, k)") {
    CHECK(composition_count(5) == 252);
    CHECK(enumerate_compositions(5).size() == 252);
    CHECK(composition_count(10) == 184756);
  }
  SUBCASE("guard range") {
    CHECK_THROWS_AS(enumerate_compositions(0), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_compositions(31), std::invalid_argument);
  }
}

TEST_CASE("compositions are exhaustive, duplicate-free and correctly signed") {
  for (int k = 1; k <= 7; ++k) {
    const auto comps = enumerate_compositions(k);
    CHECK(comps.size() == composition_count(k));
    std::set<std::vector<int>> seen;
    std::vector<int> prev;
    for (const auto& c : comps) {
      REQUIRE(c.s.size() == static_cast<std::size_t>(k) + 1);
      int sum = 0, tau = 0;
      for (int v : c.s) {
        sum += v;
        tau += v > 0 ? 1 : 0;
      }
      CHECK(sum == k);
      CHECK(tau == c.tau);
      CHECK(c.sign == ((tau % 2 == 1) ? 1 : -1));
      CHECK(seen.insert(c.s).second);  // no duplicates
      if (!prev.empty()) CHECK(prev < c.s);  // lexicographic
      prev = c.s;
    }
  }
}

TEST_CASE("series term vanishes at zero noise") {
  LowRankModel model;
  const SymmetricDilation dil =
      small_dilation(1, Dims(8, 6, 2), 5.0, &model);
  const Matrix z = Matrix::Zero(8, 6);
  for (int k = 1; k <= 3; ++k)
    CHECK(series_term(dil, z, k).cwiseAbs().maxCoeff() == 0.0);
  const auto decomp = dist2_series_decomposition(dil, z, 5);
  CHECK(decomp.leading == 0.0);
  CHECK(decomp.tail == 0.0);
}

TEST_CASE("snr gate rejects large noise and reports both norms") {
  LowRankModel model;
  const SymmetricDilation dil =
      small_dilation(2, Dims(10, 10, 2), 1.0, &model);  // lambda_r = 1
  const Matrix z = 5.0 * sample_noise(Dims(10, 10, 1), {3, 0, 1.0});
  try {
    series_term(dil, z, 2);
    FAIL("expected SnrGateError");
  } catch (const SnrGateError& e) {
    CHECK(e.lambda_r() == 1.0);
    CHECK(e.noise_norm() >= 0.5);
  }
}

TEST_CASE("order-1 term matches the hand formula on the rank-one example") {
  LowRankModel unit;
  unit.dims = Dims(2, 3, 1);
  unit.U = Matrix::Zero(2, 1);
  unit.V = Matrix::Zero(3, 1);
  unit.U(0, 0) = 1.0;
  unit.V(0, 0) = 1.0;
  unit.lambda = Vector::Constant(1, 2.0);
  const SymmetricDilation dil = dilate(unit);

  Matrix z(2, 3);
  z << 0.1, -0.2, 0.05, 0.02, 0.15, -0.07;
  const Matrix x = dilate_block(z);
  const Matrix p1 = dil.projector_power_dense(1);
  const Matrix pp = dil.projector_power_dense(0);
  const Matrix expected = p1 * x * pp + pp * x * p1;
  CHECK((series_term(dil, z, 1) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("thin evaluation equals the dense composition sum") {
  LowRankModel model;
  const SymmetricDilation dil =
      small_dilation(4, Dims(9, 7, 2), 6.0, &model);
  Matrix z = sample_noise(Dims(9, 7, 1), {21, 0, 1.0});
  z *= 0.15 * dil.lambda_min() / spectral_norm(z);
  for (int k = 1; k <= 4; ++k) {
    const Matrix fast = series_term(dil, z, k);
    const Matrix dense = dense_series_term(dil, z, k);
    CHECK((fast - dense).norm() < 1e-12);
    // Symmetry of the term.
    CHECK((fast - fast.transpose()).norm() < 1e-10);
    // Signal inner product agrees with the dense trace.
    const Matrix theta = dil.theta();
    const double dense_inner = (theta.transpose() * dense * theta).trace();
    CHECK(series_term_signal_inner(dil, z, k) ==
          doctest::Approx(dense_inner).epsilon(1e-10));
  }
}

TEST_CASE("odd-order terms average to zero over noise draws") {
  // E series_term(k) = 0 for odd k; checked entrywise against 5 SE.
  LowRankModel model;
  const Dims dims(3, 4, 1);
  const SymmetricDilation dil = small_dilation(6, dims, 40.0, &model);
  const int reps = 2000;
  Matrix mean = Matrix::Zero(7, 7);
  Matrix m2 = Matrix::Zero(7, 7);
  for (int i = 0; i < reps; ++i) {
    const Matrix z =
        sample_noise(dims, {100, static_cast<std::uint64_t>(i), 1.0});
    const Matrix term = series_term(dil, z, 3);
    const Matrix delta = term - mean;
    mean += delta / double(i + 1);
    m2 += delta.cwiseProduct(term - mean);
  }
  const Matrix se =
      (m2 / double(reps - 1) / double(reps)).cwiseSqrt().cwiseMax(1e-300);
  CHECK((mean.cwiseAbs().array() <= 5.0 * se.array()).all());
}

TEST_CASE("operator norm of each order is within the combinatorial bound") {
  LowRankModel model;
  const SymmetricDilation dil =
      small_dilation(8, Dims(12, 10, 3), 8.0, &model);
  for (int i = 0; i < 50; ++i) {
    Matrix z = sample_noise(Dims(12, 10, 1), {55, static_cast<std::uint64_t>(i), 1.0});
    z *= 0.2 * dil.lambda_min() / spectral_norm(z);
    const double ratio = spectral_norm(z) / dil.lambda_min();
    for (int k = 1; k <= 3; ++k) {
      const double norm = spectral_norm(series_term(dil, z, k));
      const double bound =
          double(composition_count(k)) * std::pow(ratio, double(k));
      CHECK(norm <= bound * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("single-term operator norms respect the per-term bound") {
  LowRankModel model;
  const SymmetricDilation dil =
      small_dilation(7, Dims(10, 9, 2), 6.0, &model);
  Matrix z = sample_noise(Dims(10, 9, 1), {44, 0, 1.0});
  z *= 0.2 * dil.lambda_min() / spectral_norm(z);
  const double ratio = spectral_norm(z) / dil.lambda_min();

  for (int k = 1; k <= 3; ++k) {
    Matrix sum = Matrix::Zero(19, 19);
    for (const Composition& c : enumerate_compositions(k)) {
      const Matrix term = series_single_term(dil, z, c);
      CHECK(spectral_norm(term) <=
            std::pow(ratio, double(k)) * (1.0 + 1e-12));
      sum += term;
    }
    CHECK((sum - series_term(dil, z, k)).norm() < 1e-12);
  }

  Composition bad;
  bad.s = {1, 1};  // parts sum to 2, length says order 1
  CHECK_THROWS_AS(series_single_term(dil, z, bad), std::invalid_argument);
}

TEST_CASE("signal inner product of the order-1 term is numerically zero") {
  LowRankModel model;
  const SymmetricDilation dil =
      small_dilation(9, Dims(11, 13, 2), 7.0, &model);
  Matrix z = sample_noise(Dims(11, 13, 1), {77, 0, 1.0});
  z *= 0.2 * dil.lambda_min() / spectral_norm(z);
  CHECK(std::abs(series_term_signal_inner(dil, z, 1)) < 1e-10);
}

TEST_CASE("truncated series converges to the eigendecomposition delta") {
  const Dims dims(20, 20, 3);
  LowRankModel model;
  const SymmetricDilation dil = small_dilation(10, dims, 8.0, &model);

  Matrix z = sample_noise(dims, {200, 0, 1.0});
  z *= 0.1 * dil.lambda_min() / spectral_norm(z);

  const EmpiricalSVD svd = top_r_svd(observe(model, z), dims.r);
  Matrix delta = Matrix::Zero(40, 40);
  delta.topLeftCorner(20, 20) =
      svd.U * svd.U.transpose() - model.U * model.U.transpose();
  delta.bottomRightCorner(20, 20) =
      svd.V * svd.V.transpose() - model.V * model.V.transpose();

  double prev_err = -1.0;
  for (int kmax = 1; kmax <= 4; ++kmax) {
    const double err = (truncated_projector_delta(dil, z, kmax) - delta).norm();
    if (prev_err > 0.0) CHECK(err < 0.45 * prev_err);  // ratio 4||X||/lambda_r
    prev_err = err;
  }
}

TEST_CASE("oracle equivalence within the analytic tail bound on 20 instances") {
  for (int inst = 0; inst < 20; ++inst) {
    const Dims dims(12, 14, 2);
    LowRankModel model;
    const SymmetricDilation dil =
        small_dilation(300 + inst, dims, 6.0, &model);
    Matrix z = sample_noise(dims, {400, static_cast<std::uint64_t>(inst), 1.0});
    // ||X|| < lambda_r / 4
    z *= 0.2 * dil.lambda_min() / spectral_norm(z);
    const double q = 4.0 * spectral_norm(z) / dil.lambda_min();

    const EmpiricalSVD svd = top_r_svd(observe(model, z), dims.r);
    Matrix delta = Matrix::Zero(26, 26);
    delta.topLeftCorner(12, 12) =
        svd.U * svd.U.transpose() - model.U * model.U.transpose();
    delta.bottomRightCorner(14, 14) =
        svd.V * svd.V.transpose() - model.V * model.V.transpose();

    const int kmax = 8;
    const double err = (truncated_projector_delta(dil, z, kmax) - delta).norm();
    const double bound =
        2.0 * dims.r * std::pow(q, kmax + 1) / (1.0 - q);
    CHECK(err <= bound);
  }
}

TEST_CASE("dist2 decomposition matches the SVD-based distance") {
  const Dims dims(16, 12, 2);
  LowRankModel model;
  const SymmetricDilation dil = small_dilation(11, dims, 10.0, &model);
  Matrix z = sample_noise(dims, {500, 0, 1.0});
  z *= 0.05 * dil.lambda_min() / spectral_norm(z);
  const double q = 4.0 * spectral_norm(z) / dil.lambda_min();

  const EmpiricalSVD svd = top_r_svd(observe(model, z), dims.r);
  const double dist2 = projection_distance2(model.U, model.V, svd.U, svd.V);

  const int kmax = 6;
  const auto decomp = dist2_series_decomposition(dil, z, kmax);
  double tail_bound = 4.0 * dims.r * std::pow(q, kmax + 1) / (1.0 - q);
  CHECK(std::abs(dist2 - decomp.total()) <= tail_bound);
}

TEST_CASE("leading term equals the explicit complement-block formula") {
  const Dims dims(15, 10, 3);
  LowRankModel model;
  const SymmetricDilation dil = small_dilation(12, dims, 9.0, &model);
  Matrix z = sample_noise(dims, {600, 0, 1.0});
  z *= 0.1 * dil.lambda_min() / spectral_norm(z);

  // Build explicit orthonormal complements with a full QR factorization.
  const auto complement = [](const Matrix& basis) {
    Eigen::HouseholderQR<Matrix> qr(basis);
    const Matrix q = qr.householderQ();
    return Matrix(q.rightCols(q.cols() - basis.cols()));
  };
  const Matrix uperp = complement(model.U);
  const Matrix vperp = complement(model.V);
  const Matrix inv_l = model.lambda.cwiseInverse().asDiagonal();
  const double block1 =
      (inv_l * model.V.transpose() * z.transpose() * uperp).squaredNorm();
  const double block2 =
      (inv_l * model.U.transpose() * z * vperp).squaredNorm();

  const auto decomp = dist2_series_decomposition(dil, z, 3);
  CHECK(decomp.leading ==
        doctest::Approx(2.0 * (block1 + block2)).epsilon(1e-10));
}

TEST_CASE("error at order 3 is strictly smaller than at order 1") {
  const Dims dims(20, 20, 3);
  LowRankModel model;
  const SymmetricDilation dil = small_dilation(13, dims, 8.0, &model);
  Matrix z = sample_noise(dims, {700, 0, 1.0});
  z *= 0.1 * dil.lambda_min() / spectral_norm(z);

  const EmpiricalSVD svd = top_r_svd(observe(model, z), dims.r);
  Matrix delta = Matrix::Zero(40, 40);
  delta.topLeftCorner(20, 20) =
      svd.U * svd.U.transpose() - model.U * model.U.transpose();
  delta.bottomRightCorner(20, 20) =
      svd.V * svd.V.transpose() - model.V * model.V.transpose();

  const double err1 = (truncated_projector_delta(dil, z, 1) - delta).norm();
  const double err3 = (truncated_projector_delta(dil, z, 3) - delta).norm();
  CHECK(err3 < err1);
}

TEST_CASE("series evaluation order guard") {
  LowRankModel model;
  const SymmetricDilation dil =
      small_dilation(14, Dims(6, 6, 1), 5.0, &model);
  const Matrix z = Matrix::Zero(6, 6);
  CHECK_THROWS_AS(series_term(dil, z, 0), std::invalid_argument);
  CHECK_THROWS_AS(series_term(dil, z, kMaxSeriesOrder + 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(truncated_projector_delta(dil, z, 13), std::invalid_argument);
}

TEST_SUITE_END();
