#include "subspace_uq/bias.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace subspace_uq {

namespace {

void check_lambda_positive(const Vector& lambda) {
  if (lambda.size() < 1)
    throw std::invalid_argument("lambda must be non-empty");
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (!(lambda(i) > 0.0))
      throw std::invalid_argument("lambda must be strictly positive");
}

// ||Lambda^-k||_F^2 = sum_j lambda_j^(-2k), summed smallest lambda first
// (descending term magnitude) with compensated addition. Terms that
// underflow to zero are dropped, which is the documented behavior for very
// large k.
double inv_power_frob2(const Vector& lambda, double k) {
  std::vector<double> terms;
  terms.reserve(lambda.size());
  for (Eigen::Index j = lambda.size() - 1; j >= 0; --j)
    terms.push_back(std::pow(lambda(j), -2.0 * k));
  return neumaier_sum(terms);
}

}  // namespace

double neumaier_sum(const std::vector<double>& terms) {
  double sum = 0.0, comp = 0.0;
  for (double x : terms) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

bool SingularValueEstimate::all_valid() const {
  return invalid_count() == 0;
}

std::size_t SingularValueEstimate::invalid_count() const {
  std::size_t n = 0;
  for (bool v : valid)
    if (!v) ++n;
  return n;
}

SingularValueEstimate true_lambda(const Vector& lambda) {
  check_lambda_positive(lambda);
  return {LambdaKind::kTrue, lambda,
          std::vector<bool>(static_cast<std::size_t>(lambda.size()), true)};
}

SingularValueEstimate empirical_lambda(const Vector& lambdahat) {
  check_lambda_positive(lambdahat);
  return {LambdaKind::kEmpirical, lambdahat,
          std::vector<bool>(static_cast<std::size_t>(lambdahat.size()), true)};
}

double bias_k(const Dims& dims, const Vector& lambda, int k) {
  check_lambda_positive(lambda);
  if (k < 1) throw std::invalid_argument("bias_k: k must be >= 1");

  const double d1m = dims.d1m(), d2m = dims.d2m();
  const double delta = d1m - d2m;
  double result = 2.0 * dims.d_star() * inv_power_frob2(lambda, 1.0);
  if (delta == 0.0 || k == 1) return result;

  // Correction terms, evaluated per singular value as powers of d / lambda^2
  // to avoid overflow of the bare dimension powers at large k.
  std::vector<double> corrections;
  corrections.reserve(static_cast<std::size_t>(k - 1) * lambda.size());
  for (int k0 = 2; k0 <= k; ++k0) {
    const double parity = (k0 % 2 == 0) ? 1.0 : -1.0;  // (-1)^k0
    for (Eigen::Index j = lambda.size() - 1; j >= 0; --j) {
      const double inv_l2 = 1.0 / (lambda(j) * lambda(j));
      const double p1 = std::pow(d1m * inv_l2, double(k0 - 1));
      const double p2 = std::pow(d2m * inv_l2, double(k0 - 1));
      corrections.push_back(-2.0 * parity * (p1 - p2) * delta * inv_l2);
    }
  }
  return result + neumaier_sum(corrections);
}

double bias_infinity(const Dims& dims, const Vector& lambda) {
  check_lambda_positive(lambda);
  const double d1m = dims.d1m(), d2m = dims.d2m();
  std::vector<double> terms;
  terms.reserve(lambda.size());
  for (Eigen::Index j = lambda.size() - 1; j >= 0; --j) {
    const double l2 = lambda(j) * lambda(j);
    terms.push_back(2.0 / l2 *
                    (d1m * (l2 + d2m) / (l2 + d1m) +
                     d2m * (l2 + d1m) / (l2 + d2m)));
  }
  return neumaier_sum(terms);
}

double sigma_normalizer(const Dims& dims, const Vector& lambda) {
  check_lambda_positive(lambda);
  return std::sqrt(8.0 * dims.d_star()) *
         std::sqrt(inv_power_frob2(lambda, 2.0));
}

SingularValueEstimate shrink_singular_values(const Dims& dims,
                                             const Vector& lambdahat) {
  if (lambdahat.size() < 1)
    throw std::invalid_argument("shrink_singular_values: empty input");
  for (Eigen::Index j = 0; j < lambdahat.size(); ++j)
    if (!(lambdahat(j) >= 0.0) || !std::isfinite(lambdahat(j)))
      throw std::invalid_argument(
          "shrink_singular_values: values must be finite and non-negative");

  const double dsum = double(dims.d1) + double(dims.d2);
  const double dprod = double(dims.d1) * double(dims.d2);
  const double edge = dsum + 2.0 * std::sqrt(dprod);

  SingularValueEstimate out;
  out.kind = LambdaKind::kShrunk;
  out.values = lambdahat;
  out.valid.assign(static_cast<std::size_t>(lambdahat.size()), false);
  for (Eigen::Index j = 0; j < lambdahat.size(); ++j) {
    const double h2 = lambdahat(j) * lambdahat(j);
    if (h2 >= edge) {
      const double centered = h2 - dsum;
      const double disc = centered * centered - 4.0 * dprod;
      const double shrunk2 = 0.5 * centered + 0.5 * std::sqrt(std::max(disc, 0.0));
      out.values(j) = std::sqrt(shrunk2);
      out.valid[static_cast<std::size_t>(j)] = true;
    }
    // Below the detectability edge: keep the empirical value, flag invalid.
  }
  return out;
}

double wishart_frobenius_moment(const Vector& lambda, int d, int j1, int j2) {
  check_lambda_positive(lambda);
  if (d < 1) throw std::invalid_argument("wishart_frobenius_moment: d >= 1");
  if (j1 < 1 || j2 < 1)
    throw std::invalid_argument("wishart_frobenius_moment: j1, j2 >= 1");
  const double dd = d;
  const double f12 = inv_power_frob2(lambda, double(j1 + j2));
  const double f1 = inv_power_frob2(lambda, double(j1));
  const double f2 = inv_power_frob2(lambda, double(j2));
  return dd * dd * f12 + dd * (f12 + f1 * f2);
}

double mp_moment_beta(int t, int d1m, int d2m, double lambda_sq) {
  if (t < 2) throw std::invalid_argument("mp_moment_beta: t must be >= 2");
  if (d1m < 0 || d2m < 0)
    throw std::invalid_argument("mp_moment_beta: dimensions must be >= 0");
  if (t > 16)
    throw std::invalid_argument("mp_moment_beta: t > 16 not supported");

  // Narayana weights (1/(t-1)) C(t-1, j+1) C(t-1, j) are integers; the whole
  // inner sum is evaluated in unsigned 128-bit integer arithmetic with an
  // explicit overflow guard.
  using u128 = unsigned __int128;
  constexpr u128 kMax = ~static_cast<u128>(0);
  auto binom = [](int n, int k) -> u128 {
    if (k < 0 || k > n) return 0;
    std::vector<u128> row(static_cast<std::size_t>(n) + 1, 0);
    row[0] = 1;
    for (int i = 1; i <= n; ++i)
      for (int j = i; j >= 1; --j) row[j] += row[j - 1];
    return row[k];
  };
  auto mul_checked = [&](u128 a, u128 b) -> u128 {
    if (b != 0 && a > kMax / b)
      throw std::invalid_argument("mp_moment_beta: value out of range");
    return a * b;
  };

  u128 sum = 0;
  for (int j = 0; j <= t - 2; ++j) {
    const u128 narayana =
        binom(t - 1, j + 1) * binom(t - 1, j) / static_cast<u128>(t - 1);
    u128 term = narayana;
    for (int e = 0; e < j + 1; ++e)
      term = mul_checked(term, static_cast<u128>(d1m));
    for (int e = 0; e < t - 1 - j; ++e)
      term = mul_checked(term, static_cast<u128>(d2m) + 1);
    if (sum > kMax - term)
      throw std::invalid_argument("mp_moment_beta: value out of range");
    sum += term;
  }
  const double scale = 1.0 + lambda_sq / (1.0 + double(d2m));
  return scale * static_cast<double>(sum);
}

BiasLadder make_bias_ladder(const Dims& dims,
                            const SingularValueEstimate& lambda,
                            int max_order) {
  if (max_order < 1)
    throw std::invalid_argument("make_bias_ladder: max_order >= 1");
  BiasLadder ladder;
  ladder.dims = dims;
  ladder.lambda = lambda;
  for (int k = 1; k <= max_order; ++k)
    ladder.orders[k] = bias_k(dims, lambda.values, k);
  ladder.b_infinity = bias_infinity(dims, lambda.values);
  ladder.sigma = sigma_normalizer(dims, lambda.values);
  return ladder;
}

}  // namespace subspace_uq
