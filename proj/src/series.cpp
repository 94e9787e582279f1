#include "subspace_uq/series.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "subspace_uq/errors.hpp"

namespace subspace_uq {

namespace {

// Exact binomial via Pascal's triangle; n <= 60 keeps everything in range.
std::uint64_t binomial_exact(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::vector<std::uint64_t> row(static_cast<std::size_t>(n) + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j >= 1; --j) row[j] += row[j - 1];
  return row[k];
}

// Weak compositions of n into m parts.
std::uint64_t weak_composition_count(int n, int m) {
  if (m <= 0) return n == 0 ? 1 : 0;
  return binomial_exact(n + m - 1, m - 1);
}

// Advances s to the next composition in lexicographic order; false after the
// last one (k, 0, ..., 0).
bool next_composition(std::vector<int>& s) {
  const int m = static_cast<int>(s.size());
  int suffix = s[m - 1];
  for (int j = m - 2; j >= 0; --j) {
    if (suffix > 0) {
      s[j] += 1;
      const int rem = suffix - 1;
      for (int i = j + 1; i < m - 1; ++i) s[i] = 0;
      s[m - 1] = rem;
      return true;
    }
    suffix += s[j];
  }
  return false;
}

// rank-th composition (0-based) in lexicographic order.
std::vector<int> unrank_composition(int k, std::uint64_t rank) {
  std::vector<int> s(static_cast<std::size_t>(k) + 1, 0);
  int rem = k;
  for (int pos = 0; pos < k; ++pos) {
    for (int a = 0; a <= rem; ++a) {
      const std::uint64_t cnt = weak_composition_count(rem - a, k - pos);
      if (rank < cnt) {
        s[pos] = a;
        rem -= a;
        break;
      }
      rank -= cnt;
    }
  }
  s[k] = rem;
  return s;
}

int tau_of(const std::vector<int>& s) {
  int tau = 0;
  for (int v : s) tau += (v > 0) ? 1 : 0;
  return tau;
}

// Fixed chunk grid: a function of the term count only, so the reduction
// order (and therefore every bit of the result) is independent of the
// worker count.
int chunk_count(std::uint64_t n_terms) {
  return n_terms >= 64 ? 64 : 1;
}

void check_order_guard(int k) {
  if (k < 1 || k > kMaxSeriesOrder)
    throw std::invalid_argument("series order must satisfy 1 <= k <= " +
                                std::to_string(kMaxSeriesOrder));
}

// Columns of theta scaled by the order-s eigenvalue powers: the diagonal of
// P^{-s} in the theta basis. Eigenvalue -lambda_i contributes (-1)^s.
Matrix theta_times_power(const SymmetricDilation& dil, const Matrix& theta,
                         int s) {
  const int r = dil.dims().r;
  Matrix out = theta;
  for (int i = 0; i < r; ++i) {
    const double w = std::pow(dil.lambda()(i), -double(s));
    out.col(i) *= w;
    out.col(2 * r - 1 - i) *= (s % 2 == 0) ? w : -w;
  }
  return out;
}

struct TermFactors {
  Matrix left;   // d x 2r
  Matrix right;  // d x 2r, the term is sign * left * right^T
};

// Evaluates one composition's term as a rank-2r product. The split point is
// the first positive part (every composition has one).
TermFactors term_factors(const SymmetricDilation& dil, const Matrix& z,
                         const Matrix& theta, const std::vector<int>& s) {
  const int k = static_cast<int>(s.size()) - 1;
  int split = 0;
  while (s[split] == 0) ++split;

  Matrix left = theta_times_power(dil, theta, s[split]);
  for (int i = split - 1; i >= 0; --i) {
    left = dil.apply_noise(z, left);
    left = dil.apply_projector_power(s[i], left);
  }
  Matrix right = theta;
  for (int i = split + 1; i <= k; ++i) {
    right = dil.apply_noise(z, right);
    right = dil.apply_projector_power(s[i], right);
  }
  return {std::move(left), std::move(right)};
}

}  // namespace

std::uint64_t composition_count(int k) {
  if (k < 1 || k > 30)
    throw std::invalid_argument("composition_count: need 1 <= k <= 30");
  return binomial_exact(2 * k, k);
}

std::vector<Composition> enumerate_compositions(int k) {
  if (k < 1 || k > 30)
    throw std::invalid_argument("enumerate_compositions: need 1 <= k <= 30");
  std::vector<Composition> out;
  out.reserve(k <= 12 ? composition_count(k) : 0);
  std::vector<int> s(static_cast<std::size_t>(k) + 1, 0);
  s[k] = k;
  do {
    Composition c;
    c.s = s;
    c.tau = tau_of(s);
    c.sign = (c.tau % 2 == 1) ? 1 : -1;  // (-1)^(1+tau)
    out.push_back(std::move(c));
  } while (next_composition(s));
  return out;
}

void for_each_composition(int k,
                          const std::function<void(const std::vector<int>&,
                                                   int)>& f) {
  if (k < 1 || k > 30)
    throw std::invalid_argument("for_each_composition: need 1 <= k <= 30");
  std::vector<int> s(static_cast<std::size_t>(k) + 1, 0);
  s[k] = k;
  do {
    f(s, tau_of(s));
  } while (next_composition(s));
}

double check_snr_gate(const SymmetricDilation& dilation, const Matrix& z) {
  const double noise_norm = spectral_norm(z);
  const double lambda_r = dilation.lambda_min();
  if (!(noise_norm < lambda_r / 2.0))
    throw SnrGateError(noise_norm, lambda_r);
  return noise_norm;
}

namespace {

Matrix series_term_gated(const SymmetricDilation& dil, const Matrix& z,
                         int k) {
  const int d = dil.dims().total();
  const std::uint64_t n_terms = composition_count(k);
  const int n_chunks = chunk_count(n_terms);
  const Matrix theta = dil.theta();

  std::vector<Matrix> partials(n_chunks);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int c = 0; c < n_chunks; ++c) {
    const std::uint64_t begin = n_terms * c / n_chunks;
    const std::uint64_t end = n_terms * (c + 1) / n_chunks;
    std::vector<int> s = unrank_composition(k, begin);
    Matrix acc = Matrix::Zero(d, d);
    for (std::uint64_t t = begin; t < end; ++t) {
      const int tau = tau_of(s);
      const double sign = (tau % 2 == 1) ? 1.0 : -1.0;
      TermFactors f = term_factors(dil, z, theta, s);
      acc.noalias() += sign * (f.left * f.right.transpose());
      next_composition(s);
    }
    partials[c] = std::move(acc);
  }

  Matrix out = std::move(partials[0]);
  for (int c = 1; c < n_chunks; ++c) out += partials[c];
  return out;
}

double series_term_signal_inner_gated(const SymmetricDilation& dil,
                                      const Matrix& z, int k) {
  const std::uint64_t n_terms = composition_count(k);
  const int n_chunks = chunk_count(n_terms);
  const Matrix theta = dil.theta();

  std::vector<double> partials(n_chunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int c = 0; c < n_chunks; ++c) {
    const std::uint64_t begin = n_terms * c / n_chunks;
    const std::uint64_t end = n_terms * (c + 1) / n_chunks;
    std::vector<int> s = unrank_composition(k, begin);
    double acc = 0.0;
    for (std::uint64_t t = begin; t < end; ++t) {
      // <Theta Theta^T, term> vanishes identically when the term starts or
      // ends with the complement projector.
      if (s.front() != 0 && s.back() != 0) {
        const int tau = tau_of(s);
        const double sign = (tau % 2 == 1) ? 1.0 : -1.0;
        TermFactors f = term_factors(dil, z, theta, s);
        const Matrix a = theta.transpose() * f.left;
        const Matrix b = theta.transpose() * f.right;
        acc += sign * a.cwiseProduct(b).sum();
      }
      next_composition(s);
    }
    partials[c] = acc;
  }

  double out = 0.0;
  for (int c = 0; c < n_chunks; ++c) out += partials[c];
  return out;
}

}  // namespace

Matrix series_term(const SymmetricDilation& dilation, const Matrix& z, int k) {
  check_order_guard(k);
  check_snr_gate(dilation, z);
  return series_term_gated(dilation, z, k);
}

Matrix series_single_term(const SymmetricDilation& dilation, const Matrix& z,
                          const Composition& composition) {
  const int k = static_cast<int>(composition.s.size()) - 1;
  check_order_guard(k);
  int sum = 0;
  for (int v : composition.s) {
    if (v < 0) throw std::invalid_argument("series_single_term: negative part");
    sum += v;
  }
  if (sum != k)
    throw std::invalid_argument("series_single_term: parts must sum to k");
  const double sign = (tau_of(composition.s) % 2 == 1) ? 1.0 : -1.0;
  TermFactors f = term_factors(dilation, z, dilation.theta(), composition.s);
  return sign * (f.left * f.right.transpose());
}

double series_term_signal_inner(const SymmetricDilation& dilation,
                                const Matrix& z, int k) {
  check_order_guard(k);
  check_snr_gate(dilation, z);
  return series_term_signal_inner_gated(dilation, z, k);
}

Matrix truncated_projector_delta(const SymmetricDilation& dilation,
                                 const Matrix& z, int max_order) {
  check_order_guard(max_order);
  check_snr_gate(dilation, z);
  const int d = dilation.dims().total();
  Matrix out = Matrix::Zero(d, d);
  for (int k = 1; k <= max_order; ++k)
    out += series_term_gated(dilation, z, k);
  return out;
}

Dist2Decomposition dist2_series_decomposition(const SymmetricDilation& dilation,
                                              const Matrix& z, int max_order) {
  check_order_guard(max_order);
  check_snr_gate(dilation, z);

  // leading = 2 ||P_perp X P^{-1}||_F^2, via the block identity
  // ||M (I - Q Q^T)||_F^2 = ||M||_F^2 - ||M Q||_F^2.
  const Matrix& u = dilation.u();
  const Matrix& v = dilation.v();
  const Vector inv_lambda = dilation.lambda().cwiseInverse();
  const Matrix a1 = inv_lambda.asDiagonal() * (v.transpose() * z.transpose());
  const Matrix a2 = inv_lambda.asDiagonal() * (u.transpose() * z);
  const double leading =
      2.0 * (a1.squaredNorm() - (a1 * u).squaredNorm() + a2.squaredNorm() -
             (a2 * v).squaredNorm());

  Dist2Decomposition out;
  out.leading = leading;
  double tail = 0.0;
  for (int k = 3; k <= max_order; ++k) {
    const double inner = series_term_signal_inner_gated(dilation, z, k);
    out.signal_inner_products.push_back(inner);
    tail -= 2.0 * inner;
  }
  out.tail = tail;
  return out;
}

int default_series_order(const Dims& dims) {
  return static_cast<int>(std::ceil(std::log(double(dims.d_max()))));
}

}  // namespace subspace_uq
